"""Tagged point clouds in projective space."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .config import DEFAULT
from .errors import DimensionMismatch
from .projlin import ProjPoint, canonical_rows, chordal_matrix


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Canonical unit rows with a source tag and word length per point.

    Sources read ``ProximalFixedPoint(<word>)`` or ``OrbitTail(seed=<k>)``.
    """

    points: np.ndarray
    sources: tuple[str, ...] = ()
    word_lengths: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim != 2:
            raise DimensionMismatch("cloud points must be a 2-D array")
        if len(P):
            P = canonical_rows(P)
        P.setflags(write=False)
        object.__setattr__(self, "points", P)
        srcs = tuple(self.sources) if self.sources else ("",) * len(P)
        wl = np.asarray(self.word_lengths, dtype=int).reshape(-1)
        if wl.size == 0 and len(P):
            wl = np.zeros(len(P), dtype=int)
        if len(srcs) != len(P) or wl.size != len(P):
            raise DimensionMismatch("tags do not match the number of points")
        object.__setattr__(self, "sources", srcs)
        object.__setattr__(self, "word_lengths", wl)

    @classmethod
    def empty(cls, n: int) -> "PointCloud":
        return cls(np.zeros((0, n)))

    @property
    def n(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def projpoints(self) -> list[ProjPoint]:
        return [ProjPoint(p) for p in self.points]

    def subset(self, idx: Iterable[int]) -> "PointCloud":
        idx = np.asarray(list(idx), dtype=int)
        return PointCloud(self.points[idx], tuple(self.sources[i] for i in idx), self.word_lengths[idx])

    def dedup(self, tol: float = DEFAULT.dedup_tol) -> "PointCloud":
        """Greedy chordal deduplication, keeping the first of each cluster."""
        if len(self) <= 1:
            return self
        keep = dedup_indices(self.points, tol)
        return self.subset(keep)

    def merge(self, other: "PointCloud", tol: float = DEFAULT.dedup_tol) -> "PointCloud":
        if len(self) == 0:
            return other.dedup(tol)
        if len(other) == 0:
            return self.dedup(tol)
        if self.n != other.n:
            raise DimensionMismatch("clouds differ in dimension")
        joined = PointCloud(
            np.vstack([self.points, other.points]),
            self.sources + other.sources,
            np.concatenate([self.word_lengths, other.word_lengths]),
        )
        return joined.dedup(tol)

    def to_csv(self, run_config: dict | None = None) -> str:
        buf = io.StringIO()
        if run_config is not None:
            buf.write("# run_config: " + json.dumps(run_config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.n)] + ["source", "word_length"])
        for p, s, k in zip(self.points, self.sources, self.word_lengths):
            w.writerow([repr(float(v)) for v in p] + [s, int(k)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PointCloud":
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        rows = list(csv.reader(lines))
        header, body = rows[0], rows[1:]
        n = sum(1 for h in header if h.startswith("x"))
        if not body:
            return cls.empty(n)
        P = np.array([[float(v) for v in r[:n]] for r in body])
        has_tags = len(header) > n
        srcs = tuple(r[n] for r in body) if has_tags else ()
        wl = np.array([int(r[n + 1]) for r in body]) if len(header) > n + 1 else np.zeros(len(P), dtype=int)
        return cls(P, srcs, wl)


def dedup_indices(P: np.ndarray, tol: float) -> np.ndarray:
    """Indices of a greedy chordal ``tol``-net of the rows of ``P``, in order.

    For unit rows the Euclidean distance to ``+q`` or ``-q`` bounds the chordal
    distance from above and from below by a factor close to one at small
    scales, so the KD-tree query uses a slightly widened radius and the exact
    chordal distance decides.
    """
    m = len(P)
    tree = cKDTree(np.vstack([P, -P]))
    removed = np.zeros(m, dtype=bool)
    keep = []
    for i in range(m):
        if removed[i]:
            continue
        keep.append(i)
        near = tree.query_ball_point(P[i], r=2.0 * tol + 1e-15)
        near = np.unique(np.asarray(near, dtype=int) % m)
        near = near[near > i]
        if near.size:
            d = chordal_matrix(P[i : i + 1], P[near])[0]
            removed[near[d <= tol]] = True
    return np.asarray(keep, dtype=int)


def hausdorff_chordal(A: np.ndarray, B: np.ndarray) -> float:
    """Chordal Hausdorff distance between two finite sets of unit rows."""
    if len(A) == 0 or len(B) == 0:
        return float("inf") if len(A) != len(B) else 0.0
    return max(directed_chordal(A, B), directed_chordal(B, A))


def directed_chordal(A: np.ndarray, B: np.ndarray) -> float:
    """``max_a min_b`` chordal distance, using a KD-tree over ``+-B``."""
    if len(A) == 0:
        return 0.0
    tree = cKDTree(np.vstack([B, -B]))
    d, _ = tree.query(A)
    # Euclidean chord 2 sin(t/2) to |sin t|
    half = np.clip(d / 2.0, 0.0, 1.0)
    return float(np.max(2.0 * half * np.sqrt(np.maximum(0.0, 1.0 - half * half))))


def points_of(items: Sequence) -> np.ndarray:
    if isinstance(items, PointCloud):
        return items.points
    return np.vstack([getattr(p, "rep", p) for p in items])
