"""Numerical tolerances and run configuration.

Every threshold used by the library lives in :class:`Config`.  Functions
accept an optional ``config`` argument and fall back to :data:`DEFAULT`.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any

SEED_ENV = "CONVEXCORE_SEED"


@dataclass(frozen=True)
class Config:
    """Tolerances and resolution parameters shared by all modules."""

    # projective kernel
    eps_sign: float = 1e-12
    eps_point: float = 1e-9
    eps_mat: float = 1e-9
    kappa_max: float = 1e14
    collinear_tol: float = 1e-8
    proximal_tau: float = 1e-8
    fixed_point_tol: float = 1e-8

    # domains
    boundary_band: float = 1e-10
    interior_margin: float = 1e-9
    bisection_tol: float = 1e-13
    invariance_tol: float = 1e-8
    com_samples: int = 100_000
    delta_samples: int = 1000

    # groups
    hash_cell: float = 1e-7
    ball_cap: int = 2_000_000
    slope_min: float = 0.01
    r2_min: float = 0.9
    gap_max: float = 0.5

    # limit sets
    dedup_tol: float = 1e-6
    segment_eps: float = 1e-2
    segment_k: int = 16
    nondegenerate_tol: float = 1e-6
    tail_width: int = 2
    orbit_seeds: int = 64
    cloud_budget: int = 20_000
    core_samples: int = 1000
    core_growth_tol: float = 0.5

    # pq geometry
    pq_band: float = 1e-10
    on_boundary_tol: float = 1e-6
    transverse_tol: float = 1e-7
    max_triples: int = 10_000

    def replace(self, **changes: Any) -> "Config":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


DEFAULT = Config()


def resolve_seed(seed: int | None = None, default: int = 0) -> int:
    """Seed precedence: environment variable, then explicit value, then default."""
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip() != "":
        return int(env)
    return default if seed is None else int(seed)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a CLI run; embedded in every output."""

    seed: int = 0
    radius: int = 8
    out: str = "."
    jobs: int = 1
    formats: tuple[str, ...] = ()
    tolerances: Config = field(default_factory=Config)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "radius": self.radius,
            "out": self.out,
            "jobs": self.jobs,
            "formats": list(self.formats),
            "tolerances": self.tolerances.to_dict(),
        }
