"""Limit sets, segments and PETs in the ideal boundary, convex cores, verdicts.

Limit sets are approximated by finite clouds: attracting fixed points of
proximal elements in a word ball, and orbit points whose word length lies
in a tail window.  Segment and properly embedded triangle (PET) detection
works at a resolution ``eps``; every verdict is a statement of consistency
at that resolution, never a proof.

Example
-------
>>> from convexcore.gallery import diagonal_torus
>>> from convexcore.limitsets import proximal_limit_set
>>> len(proximal_limit_set(diagonal_torus(3, 2.0).group, 2))
3
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud, dedup_indices, hausdorff_chordal
from .config import DEFAULT, Config
from .domains import (
    ConvexDomain,
    HullDomain,
    _complement_basis,
    _unit_rows,
    dual_domain,
    hilbert_distance_many,
    is_invariant,
    omega_max,
)
from .errors import (
    ConvexCoreError,
    Degenerate,
    NoConsistentLift,
    NotProperlyConvex,
)
from .groups import BallIndex, GroupSpec, gap_profile, orbit, word_ball
from .projlin import ProjPoint, batch_lam, canonical_rows, chordal_matrix

RADIUS_SCALE = 1.0

STRONG = "StronglyCCConsistent"
NONHYP = "NonHyperbolicCCConsistent"
NONE_FOUND = "NoInvariantConvexSetFound"
INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# limit set clouds
# ---------------------------------------------------------------------------


def _proximal_points(G: GroupSpec, ball: BallIndex, R: int, tau: float, dual: bool, config: Config):
    idx = np.flatnonzero((ball.lengths <= R) & (ball.lengths >= 1))
    if idx.size == 0:
        return np.zeros((0, G.n)), idx
    M, N = ball.mats[idx], ball.invs[idx]
    ld, ild = ball.logdets[idx], ball.inv_logdets[idx]
    if dual:
        M, N, ld, ild = np.transpose(N, (0, 2, 1)), np.transpose(M, (0, 2, 1)), ild, ld
    lam = batch_lam(M, ld, N, ild)
    prox = (lam[:, 0] - lam[:, 1]) > tau
    idx, M = idx[prox], M[prox]
    if idx.size == 0:
        return np.zeros((0, G.n)), idx
    w, V = np.linalg.eig(M)
    top = np.argmax(np.abs(w), axis=1)
    P = np.real(V[np.arange(len(M)), :, top])
    P = canonical_rows(P)
    img = canonical_rows(np.einsum("mij,mj->mi", M, P))
    ok = np.sqrt(np.maximum(0.0, 1.0 - np.einsum("ij,ij->i", img, P) ** 2)) < config.fixed_point_tol
    return P[ok], idx[ok]


def proximal_limit_set(
    G: GroupSpec,
    R: int,
    tau: float | None = None,
    ball: BallIndex | None = None,
    config: Config = DEFAULT,
    dual: bool = False,
) -> PointCloud:
    """Attracting fixed points of the proximal elements of ``ball(R)``.

    With ``dual=True`` the points are attracting fixed hyperplanes
    (covectors), i.e. the proximal limit set of the contragredient group.
    """
    tau = config.proximal_tau if tau is None else tau
    ball = ball if ball is not None and ball.radius >= R else word_ball(G, R, config)
    P, idx = _proximal_points(G, ball, R, tau, dual, config)
    if len(P) == 0:
        return PointCloud.empty(G.n)
    srcs = tuple(f"ProximalFixedPoint({G.word_label(ball.words[i])})" for i in idx)
    return PointCloud(P, srcs, ball.lengths[idx]).dedup(config.dedup_tol)


def _distance_along_ray(sa: np.ndarray, sb: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Hilbert distance from ``y`` to ``y + s e`` given the exits ``sa < 0 < sb``."""
    return 0.5 * (np.log(sb / (sb - s)) + np.log((s - sa) / -sa))


def _points_on_rays(omega: ConvexDomain, y: np.ndarray, E: np.ndarray, limit: np.ndarray, target: np.ndarray) -> np.ndarray:
    """``y + s e`` at Hilbert distance ``min(target, d(limit))`` from ``y``, by bisection on ``s``."""
    m = len(E)
    Y = np.repeat(y[None, :], m, axis=0)
    sa, sb = omega.exit_params(Y, E)
    hi = np.minimum(limit, sb * (1.0 - 1e-9))
    target = np.minimum(target, _distance_along_ray(sa, sb, hi))
    lo = np.zeros(m)
    for _ in range(80):
        s = 0.5 * (lo + hi)
        big = _distance_along_ray(sa, sb, s) > target
        hi = np.where(big, s, hi)
        lo = np.where(big, lo, s)
    return _unit_rows(Y + lo[:, None] * E)


def random_interior_points(
    omega: ConvexDomain, m: int, rng: np.random.Generator, radius: float = 3.0
) -> np.ndarray:
    """Points within Hilbert distance ``radius`` of the domain's interior point."""
    if m <= 0:
        return np.zeros((0, omega.n))
    o = omega.chart_lift(omega.interior_point.rep)[0]
    E = rng.standard_normal((m, omega.n - 1)) @ _complement_basis(omega.chart).T
    return _points_on_rays(omega, o, E, np.full(m, np.inf), radius * rng.uniform(0.0, 1.0, m))


def default_seed_count(ball: BallIndex, tail: Sequence[int], config: Config) -> int:
    size = int(np.isin(ball.lengths, list(tail)).sum())
    if size == 0:
        return 1
    return max(1, min(config.orbit_seeds, config.cloud_budget // size))


def orbital_limit_set(
    G: GroupSpec,
    omega: ConvexDomain,
    seeds: Sequence | None,
    R: int,
    tail: Sequence[int] | None = None,
    ball: BallIndex | None = None,
    config: Config = DEFAULT,
    seed: int = 0,
) -> PointCloud:
    """Orbit points with word length in the tail window (default ``[R - 2, R]``, lengths >= 1).

    Without explicit seeds the domain's interior point is used together with
    seeded random interior points; the count is capped so that the cloud
    stays within ``config.cloud_budget`` points (at most ``config.orbit_seeds``).
    """
    ball = ball if ball is not None and ball.radius >= R else word_ball(G, R, config)
    if tail is None:
        tail = range(max(1, R - config.tail_width), R + 1)
    tail = [t for t in tail if 1 <= t <= R]
    if not tail:
        return PointCloud.empty(G.n)
    if seeds is None:
        k = default_seed_count(ball, tail, config)
        rng = np.random.default_rng(seed)
        S = np.vstack([omega.interior_point.rep[None, :], random_interior_points(omega, k - 1, rng)])
    else:
        S = np.vstack([np.asarray(getattr(s, "rep", s), dtype=float) for s in seeds])
    return orbit(G, omega, S, R, ball=ball, lengths=tail, config=config).dedup(config.dedup_tol)


# ---------------------------------------------------------------------------
# segments and PETs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SegmentScan:
    """Shared state for segment and PET detection on one cloud."""

    points: np.ndarray  # retracted, chart-positive unit rows
    candidates: np.ndarray  # indices into points
    tree: cKDTree
    omega: ConvexDomain
    eps: float
    k: int
    passing: np.ndarray  # boolean matrix over candidates


def _chord_radius(eps: float) -> float:
    # Euclidean distance between unit vectors at chordal distance eps is 2 sin(asin(eps) / 2)
    return 2.0 * np.sin(np.arcsin(min(eps, 1.0)) / 2.0)


def segment_points(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """``k`` uniformly spaced interior points of the segment between chart-positive lifts."""
    s = np.arange(1, k + 1) / (k + 1)
    return _unit_rows((1.0 - s)[:, None] * a[None, :] + s[:, None] * b[None, :])


def _pairs_pass(P: np.ndarray, I: np.ndarray, J: np.ndarray, tree, omega, eps, k) -> np.ndarray:
    if I.size == 0:
        return np.zeros(0, dtype=bool)
    s = np.arange(1, k + 1) / (k + 1)
    X = (1.0 - s)[None, :, None] * P[I][:, None, :] + s[None, :, None] * P[J][:, None, :]
    X = _unit_rows(X.reshape(-1, P.shape[1]))
    codes = omega.classify(X).reshape(len(I), k)
    d, _ = tree.query(X, distance_upper_bound=_chord_radius(eps) * 1.0000001)
    near = np.isfinite(d).reshape(len(I), k)
    return np.all(codes <= 0, axis=1) & np.all(near, axis=1)


def segment_passes(a, b, cloud: PointCloud, omega: ConvexDomain, eps: float = DEFAULT.segment_eps, k: int = DEFAULT.segment_k) -> bool:
    """Per-segment test: ``k`` interior points within ``eps`` of the cloud and not Interior."""
    P = omega.sign_lift(omega.retract(cloud.points))
    tree = cKDTree(np.vstack([P, -P]))
    ab = omega.sign_lift(np.vstack([getattr(a, "rep", a), getattr(b, "rep", b)]))
    return bool(_pairs_pass(ab, np.array([0]), np.array([1]), tree, omega, eps, k)[0])


def scan_cloud(cloud: PointCloud, omega: ConvexDomain, eps: float | None = None, k: int | None = None, config: Config = DEFAULT) -> SegmentScan:
    """Retract the cloud to the frontier, thin candidates and test all pairs."""
    eps = config.segment_eps if eps is None else eps
    k = config.segment_k if k is None else k
    P = omega.sign_lift(omega.retract(cloud.points))
    tree = cKDTree(np.vstack([P, -P]))
    # proximal fixed points first so that exact extremal points survive thinning
    prox = np.array([s.startswith("ProximalFixedPoint") for s in cloud.sources], dtype=bool)
    order = np.concatenate([np.flatnonzero(prox), np.flatnonzero(~prox)])
    cand = order[dedup_indices(P[order], 2.0 * eps)]
    m = len(cand)
    passing = np.zeros((m, m), dtype=bool)
    if m >= 2:
        C = P[cand]
        D = chordal_matrix(C, C)
        I, J = np.nonzero(np.triu(D > 3.0 * eps, 1))
        ok = np.zeros(I.size, dtype=bool)
        step = 4096
        for start in range(0, I.size, step):
            sl = slice(start, start + step)
            ok[sl] = _pairs_pass(C, I[sl], J[sl], tree, omega, eps, k)
        passing[I[ok], J[ok]] = True
        passing |= passing.T
    return SegmentScan(P, cand, tree, omega, eps, k, passing)


def _near_segment(x: np.ndarray, a: np.ndarray, b: np.ndarray, tol: float, samples: int = 64) -> bool:
    S = segment_points(a, b, samples)
    S = np.vstack([a / np.linalg.norm(a), S, b / np.linalg.norm(b)])
    return bool(chordal_matrix(x[None, :], S).min() <= tol)


def detect_segments(
    cloud: PointCloud,
    omega: ConvexDomain,
    eps: float | None = None,
    k: int | None = None,
    config: Config = DEFAULT,
    scan: SegmentScan | None = None,
) -> list[tuple[ProjPoint, ProjPoint]]:
    """Maximal segments ``(a, b)`` in the frontier filled by the cloud at resolution ``eps``.

    Passing pairs are sorted by length and a pair is dropped when both its
    endpoints lie within ``2 eps`` of an already kept, longer segment.
    """
    if len(cloud) < 2:
        return []
    scan = scan or scan_cloud(cloud, omega, eps, k, config)
    C = scan.points[scan.candidates]
    I, J = np.nonzero(np.triu(scan.passing, 1))
    if I.size == 0:
        return []
    L = chordal_matrix(C, C)[I, J]
    kept: list[tuple[np.ndarray, np.ndarray]] = []
    for t in np.argsort(-L, kind="stable"):
        a, b = C[I[t]], C[J[t]]
        if any(_near_segment(a, p, q, 2 * scan.eps) and _near_segment(b, p, q, 2 * scan.eps) for p, q in kept):
            continue
        kept.append((a, b))
    return [(ProjPoint(canonical_rows(a[None])[0]), ProjPoint(canonical_rows(b[None])[0])) for a, b in kept]


def detect_pets(
    cloud: PointCloud,
    omega: ConvexDomain,
    eps: float | None = None,
    k: int | None = None,
    config: Config = DEFAULT,
    scan: SegmentScan | None = None,
) -> list[tuple[ProjPoint, ProjPoint, ProjPoint]]:
    """Triples whose three edges pass the segment test, spanning a plane, with Interior barycenter."""
    if len(cloud) < 3:
        return []
    scan = scan or scan_cloud(cloud, omega, eps, k, config)
    C = scan.points[scan.candidates]
    A = scan.passing
    found = []
    m = len(C)
    for i in range(m):
        nbr = np.flatnonzero(A[i, i + 1 :]) + i + 1
        if nbr.size < 2:
            continue
        sub = A[np.ix_(nbr, nbr)]
        J, K = np.nonzero(np.triu(sub, 1))
        if J.size == 0:
            continue
        j, kk = nbr[J], nbr[K]
        T = np.stack([np.repeat(C[i][None, :], len(j), axis=0), C[j], C[kk]], axis=1)
        s = np.linalg.svd(T, compute_uv=False)
        nondeg = s[:, 2] > config.nondegenerate_tol * s[:, 0]
        bary = _unit_rows(T.sum(axis=1))
        inside = omega.classify(bary) == 1
        for t in np.flatnonzero(nondeg & inside):
            found.append((i, int(j[t]), int(kk[t])))
    pets = []
    seen: list[np.ndarray] = []
    for tri in found:
        V = C[list(tri)]
        if any(_same_triangle(V, W, 2 * scan.eps) for W in seen):
            continue
        seen.append(V)
        pets.append(tuple(ProjPoint(canonical_rows(v[None])[0]) for v in V))
    return pets


def _same_triangle(V: np.ndarray, W: np.ndarray, tol: float) -> bool:
    D = chordal_matrix(V, W)
    return bool(np.all(D.min(axis=1) <= tol))


# ---------------------------------------------------------------------------
# convex core
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoreResult:
    hull: HullDomain
    rho: float
    rho_half: float
    cocompact: bool
    samples: int

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "rho_half_radius": self.rho_half,
            "cocompact": self.cocompact,
            "samples": self.samples,
            "hull_vertices": int(len(self.hull.vertex_reps)),
        }


def core_hull(cloud: PointCloud, omega: ConvexDomain) -> HullDomain:
    """Hull of the cloud in the domain's chart; Degenerate when it has no interior in the domain."""
    if len(cloud) == 0:
        raise Degenerate("empty cloud")
    try:
        H = HullDomain(cloud.points, omega.chart)
    except (NotProperlyConvex, ConvexCoreError) as exc:
        raise Degenerate(f"hull of the cloud is degenerate: {exc}") from exc
    if omega.classify(H.interior_point.rep)[0] != 1:
        raise Degenerate("hull of the cloud lies in the frontier of the domain")
    return H


def _hull_samples(H: HullDomain, omega: ConvexDomain, z0: np.ndarray, radius: float, m: int, rng) -> np.ndarray:
    """Hull points on random rays from ``z0``, uniform in Hilbert distance up to ``radius``.

    Rays start at the hull's own interior point when ``z0`` is outside the
    hull.  The hull is built in the domain's chart, so both share chart lifts.
    """
    origin = z0 if H.classify(z0)[0] == 1 else H.interior_point.rep
    y = omega.chart_lift(origin)[0]
    E = rng.standard_normal((m, omega.n - 1)) @ _complement_basis(omega.chart).T
    _, sh = H.exit_params(np.repeat(y[None, :], m, axis=0), E)
    return _points_on_rays(omega, y, E, sh * (1.0 - 1e-9), radius * rng.uniform(0.0, 1.0, m))


def _pair_distances(omega: ConvexDomain, Xs: np.ndarray, O: np.ndarray, I: np.ndarray, J: np.ndarray, budget: int) -> np.ndarray:
    # memory per pair grows with the number of defining covectors
    width = omega.n + (len(omega.L) if hasattr(omega, "L") else 1)
    step = max(1, budget // width)
    out = np.empty(len(I))
    for s in range(0, len(I), step):
        out[s : s + step] = hilbert_distance_many(omega, Xs[I[s : s + step]], O[J[s : s + step]])
    return out


def _rho(
    omega: ConvexDomain,
    X: np.ndarray,
    orbit_pts: np.ndarray,
    z0: np.ndarray,
    neighbours: int = 16,
    budget: int = 20_000_000,
) -> float:
    """Largest Hilbert distance from a sample to its nearest orbit point.

    Chordal neighbours give an upper bound ``u`` per sample; the exact minimum
    is then taken over orbit points ``o`` with ``|d(z0, o) - d(z0, x)| <= u``,
    which by the triangle inequality contains every closer candidate.
    """
    O = omega.sign_lift(orbit_pts)
    Xs = omega.sign_lift(X)
    m = len(Xs)
    Dz_o = hilbert_distance_many(omega, np.repeat(z0[None, :], len(O), axis=0), O)
    Dz_x = hilbert_distance_many(omega, np.repeat(z0[None, :], m, axis=0), Xs)
    k = min(neighbours, len(O))
    _, nn = cKDTree(O).query(Xs, k=k)
    nn = np.asarray(nn).reshape(m, k)
    I = np.repeat(np.arange(m), k)
    upper = _pair_distances(omega, Xs, O, I, nn.reshape(-1), budget).reshape(m, k).min(axis=1)
    best = upper.copy()
    rows = max(1, budget // max(1, len(O)))
    for s in range(0, m, rows):
        block = np.abs(Dz_o[None, :] - Dz_x[s : s + rows, None]) < upper[s : s + rows, None]
        I, J = np.nonzero(block)
        if len(I):
            d = _pair_distances(omega, Xs, O, I + s, J, budget)
            np.minimum.at(best, I + s, d)
    return float(best.max())


def convex_core(
    cloud: PointCloud,
    omega: ConvexDomain,
    G: GroupSpec,
    R: int,
    ball: BallIndex | None = None,
    config: Config = DEFAULT,
    seed: int = 0,
) -> CoreResult:
    """Hull of the cloud and the orbit-covering radius heuristic ``rho``.

    ``rho(R)`` is the largest Hilbert distance from a hull sample to the
    orbit of the interior point under ``ball(R)``.  Samples are taken within
    Hilbert distance ``D_R`` of the interior point, where ``D_R`` is the
    smallest displacement of the interior point over the sphere of radius R.  The action
    is flagged cocompact when ``rho(R) - rho(ceil(R / 2)) < core_growth_tol``.
    """
    H = core_hull(cloud, omega)
    ball = ball if ball is not None and ball.radius >= R else word_ball(G, R, config)
    z0 = omega.interior_point.rep
    rng = np.random.default_rng(seed)

    def rho_at(r: int) -> float:
        idx = np.flatnonzero(ball.lengths <= r)
        O = canonical_rows(ball.mats[idx] @ z0)
        O = O[omega.classify(O) == 1]
        D = hilbert_distance_many(omega, np.repeat(z0[None, :], len(O), axis=0), O)
        lens = ball.lengths[idx][omega.classify(canonical_rows(ball.mats[idx] @ z0)) == 1]
        radius = float(D[lens == r].min()) if np.any(lens == r) else float(D.max())
        X = _hull_samples(H, omega, z0, RADIUS_SCALE * radius, config.core_samples, np.random.default_rng(rng.integers(2**32)))
        X = X[omega.classify(X) == 1]
        return _rho(omega, X, O, z0) if len(X) else 0.0

    rho = rho_at(R)
    half = (R + 1) // 2
    rho_half = rho_at(half)
    return CoreResult(H, rho, rho_half, bool(rho - rho_half < config.core_growth_tol), config.core_samples)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    verdict: str
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "evidence": self.evidence}


def _fmt_points(pts) -> list[list[float]]:
    return [[round(float(v), 12) + 0.0 for v in p.rep] for p in pts]


def limit_cloud(
    G: GroupSpec, omega: ConvexDomain, R: int, ball: BallIndex, config: Config = DEFAULT, seed: int = 0
) -> PointCloud:
    """Orbital tail cloud merged with the proximal limit set."""
    prox = proximal_limit_set(G, R, ball=ball, config=config)
    orb = orbital_limit_set(G, omega, None, R, ball=ball, config=config, seed=seed)
    return prox.merge(orb, config.dedup_tol)


def _aligned_mean(P: np.ndarray) -> np.ndarray:
    """Sum of the rows after flipping each to pair positively with the first one."""
    signs = np.where(P @ P[0] < 0, -1.0, 1.0)
    return (P * signs[:, None]).sum(axis=0)


def find_omega_max(G: GroupSpec, R: int, ball: BallIndex, config: Config = DEFAULT, seed: int = 0):
    """``Omega_max`` from the dual proximal limit set, or None.

    Orientation hints are tried in turn (the sign-aligned mean of the proximal
    limit set, then random vectors); a candidate is accepted when it is
    properly convex and invariant under the generators at the segment
    resolution, since a finite dual cloud only approximates ``Omega_max``.
    """
    dual = proximal_limit_set(G, R, ball=ball, config=config, dual=True)
    if len(dual) < G.n:
        return None
    rng = np.random.default_rng(seed)
    prox = proximal_limit_set(G, R, ball=ball, config=config)
    hints = [_aligned_mean(prox.points)] if len(prox) else []
    hints += list(rng.standard_normal((8, G.n)))
    gens = [g.mat for g in G.generators]
    for h in hints:
        if np.linalg.norm(h) < 1e-12:
            continue
        try:
            om = omega_max(dual.points, h, config)
        except (NoConsistentLift, NotProperlyConvex):
            continue
        if om.properly_convex and is_invariant(om.domain, gens, tol=config.segment_eps):
            return om.domain
    return None


def verdict(
    G: GroupSpec,
    omega: ConvexDomain | None,
    R: int,
    config: Config = DEFAULT,
    seed: int = 0,
    ball: BallIndex | None = None,
    jobs: int = 1,
) -> Verdict:
    """Combine the gap profile, segment/PET detectors and the core heuristic."""
    ball = ball if ball is not None and ball.radius >= R else word_ball(G, R, config, jobs=jobs)
    gp = gap_profile(G, R, (1, 2), ball=ball, config=config)
    ev: dict = {
        "radius": R,
        "segment_eps": config.segment_eps,
        "dedup_tol": config.dedup_tol,
        "gap_profile": gp.verdict,
        "gap_slope": gp.slope,
        "gap_r2": gp.r2,
        "domain_source": "given" if omega is not None else "omega_max",
    }
    if omega is None:
        omega = find_omega_max(G, R, ball, config, seed)
        if omega is None:
            ev["reason"] = "no properly convex Omega_max from the dual proximal limit set"
            return Verdict(NONE_FOUND, ev)
    # Omega_max from a finite dual cloud is invariant only up to the sampling resolution
    inv_tol = config.invariance_tol if ev["domain_source"] == "given" else config.segment_eps
    ev["invariance_tol"] = inv_tol
    if not is_invariant(omega, [g.mat for g in G.generators], tol=inv_tol):
        ev["reason"] = "domain is not invariant under the generators"
        return Verdict(NONE_FOUND, ev)
    cloud = limit_cloud(G, omega, R, ball, config, seed)
    ev["cloud_size"] = len(cloud)
    scan = scan_cloud(cloud, omega, config=config)
    segs = detect_segments(cloud, omega, config=config, scan=scan)
    pets = detect_pets(cloud, omega, config=config, scan=scan)
    ev["segments"] = [_fmt_points(s) for s in segs]
    ev["pets"] = [_fmt_points(p) for p in pets]
    try:
        core = convex_core(cloud, omega, G, R, ball=ball, config=config, seed=seed)
    except Degenerate as exc:
        ev["core"] = {"degenerate": str(exc)}
        ev["reason"] = "convex core is degenerate"
        return Verdict(NONE_FOUND, ev)
    ev["core"] = core.to_dict()
    if pets and core.cocompact:
        return Verdict(NONHYP, ev)
    if not segs and not pets and gp.verdict == "AnosovConsistent":
        return Verdict(STRONG, ev)
    return Verdict(INCONCLUSIVE, ev)


# ---------------------------------------------------------------------------
# duality and equivariance diagnostics
# ---------------------------------------------------------------------------


def dual_pet_consistency(G: GroupSpec, omega: ConvexDomain, R: int, config: Config = DEFAULT, seed: int = 0) -> dict:
    """Compare segments and PETs of the dual action with PETs of the primal one at ``R + 2``.

    A segment in the dual limit cloud is expected to come with a PET in the
    primal cloud, and a dual PET with a primal PET.
    """
    Gd = G.dual()
    od = dual_domain(omega)
    bd = word_ball(Gd, R, config)
    cd = limit_cloud(Gd, od, R, bd, config, seed)
    sd = scan_cloud(cd, od, config=config)
    dual_segs = detect_segments(cd, od, config=config, scan=sd)
    dual_pets = detect_pets(cd, od, config=config, scan=sd)
    bp = word_ball(G, R + 2, config)
    cp = limit_cloud(G, omega, R + 2, bp, config, seed)
    sp = scan_cloud(cp, omega, config=config)
    primal_pets = detect_pets(cp, omega, config=config, scan=sp)
    primal_segs = detect_segments(cp, omega, config=config, scan=sp)
    consistent = (not dual_segs or bool(primal_pets)) and (bool(dual_pets) == bool(primal_pets))
    return {
        "dual_segments": len(dual_segs),
        "dual_pets": len(dual_pets),
        "primal_segments": len(primal_segs),
        "primal_pets": len(primal_pets),
        "consistent": consistent,
    }


def equivariance_defect(G: GroupSpec, cloud: PointCloud, config: Config = DEFAULT) -> list[float]:
    """Per generator, chordal Hausdorff distance between ``g(cloud)`` and ``cloud``."""
    out = []
    for g in G.generators:
        img = canonical_rows(cloud.points @ g.mat.T)
        out.append(hausdorff_chordal(PointCloud(img).dedup(config.dedup_tol).points, cloud.points))
    return out
