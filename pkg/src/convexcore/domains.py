"""Properly convex domains and their Hilbert geometry.

Three representations are supported:

* :class:`HalfspaceDomain`: the projectivized cone ``{x : l_i(x) > 0}`` for
  finitely many oriented covectors ``l_i``;
* :class:`KleinBall`: the ball ``x_1^2 + ... + x_p^2 < x_{p+1}^2``;
* :class:`HullDomain`: the convex hull of finitely many points, lifted to the
  cone by a chart covector that is positive on all of them.

Every domain carries a *chart*, a unit covector ``c`` positive on the closure
of the cone, so that the domain is bounded in the affine chart ``c = 1``.
Lines are parametrized as ``y + s e`` inside that chart, which turns frontier
intersections into one-dimensional root finding; the Hilbert distance is then
assembled from ``log1p`` terms so that it stays accurate both for nearby
points and for points close to the frontier.

Example
-------
>>> import numpy as np
>>> from convexcore.domains import KleinBall, hilbert_distance
>>> disk = KleinBall(1)
>>> round(hilbert_distance(disk, [0.0, 1.0], [np.tanh(1.0), 1.0]), 12)
1.0
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, Delaunay, HalfspaceIntersection

from .config import DEFAULT, Config
from .errors import (
    ChartDoesNotBound,
    CoincidentPoints,
    DimensionMismatch,
    HyperplaneMeetsClosure,
    InputError,
    NoConsistentLift,
    NotInterior,
    NotProperlyConvex,
)
from .projlin import (
    INFINITY,
    ProjHyperplane,
    ProjPoint,
    as_point,
    cross_ratio_affine,
    normalize_hyperplane,
    normalize_point,
)

_EPS = np.finfo(float).eps


class Containment(str, enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    EXTERIOR = "Exterior"


def _unit_rows(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _complement_basis(c: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the orthogonal complement of ``c``."""
    _, _, vt = np.linalg.svd(c.reshape(1, -1))
    return vt[1:].T


def _rep(x) -> np.ndarray:
    if isinstance(x, (ProjPoint, ProjHyperplane)):
        return x.rep
    return np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# base class
# ---------------------------------------------------------------------------


class ConvexDomain:
    """Common interface; subclasses define margins and frontier exits."""

    kind: str = ""
    n: int
    chart: np.ndarray
    interior_point: ProjPoint
    proper: bool = True

    # -- subclass hooks ----------------------------------------------------
    def margin(self, X) -> np.ndarray:
        """Signed margins of unit rows; positive inside, zero on the frontier."""
        raise NotImplementedError

    def exit_params(self, Yh: np.ndarray, E: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Parameters ``s_a < 0 < s_b`` where ``Yh + s E`` leaves the domain.

        ``Yh`` are chart points (``c(Yh) = 1``) inside the domain and ``E``
        directions with ``c(E) = 0``.
        """
        raise NotImplementedError

    def log_cross_ratio(self, Yh: np.ndarray, Zh: np.ndarray) -> np.ndarray:
        """``log [a, y, z, b]`` for interior chart points, computed stably."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    # -- shared machinery --------------------------------------------------
    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise DimensionMismatch(f"expected dimension {self.n}, got {X.shape[1]}")
        return X

    def chart_lift(self, X) -> np.ndarray:
        """Rows rescaled so that the chart covector evaluates to one."""
        X = self._check(X)
        cx = X @ self.chart
        if np.any(np.abs(cx) <= 1e-300):
            raise ChartDoesNotBound("point lies on the chart hyperplane at infinity")
        return X / cx[:, None]

    def classify(self, X, band: float | None = None) -> np.ndarray:
        """Containment codes for rows: 1 interior, 0 boundary, -1 exterior."""
        band = DEFAULT.boundary_band if band is None else band
        m = self.margin(_unit_rows(self._check(X)))
        return np.where(m > band, 1, np.where(m >= -band, 0, -1))

    def contains(self, x, band: float | None = None) -> Containment:
        code = int(self.classify(_rep(x), band)[0])
        return {1: Containment.INTERIOR, 0: Containment.BOUNDARY, -1: Containment.EXTERIOR}[code]

    def frontier_samples(self, m: int, rng: np.random.Generator | None = None) -> np.ndarray:
        """Frontier points hit by ``m`` random rays from the interior point."""
        rng = np.random.default_rng(0) if rng is None else rng
        y = self.chart_lift(self.interior_point.rep)[0]
        B = _complement_basis(self.chart)
        U = rng.standard_normal((m, self.n - 1))
        E = U @ B.T
        Y = np.repeat(y[None, :], m, axis=0)
        _, sb = self.exit_params(Y, E)
        if not np.all(np.isfinite(sb)):
            raise NotProperlyConvex("a ray from the interior point never leaves the domain")
        return _unit_rows(Y + sb[:, None] * E)

    def validate_proper(self, rng: np.random.Generator | None = None) -> bool:
        """Ray-shooting check of boundedness in the chart (2n random rays)."""
        try:
            self.frontier_samples(2 * self.n, rng)
        except NotProperlyConvex:
            return False
        return True

    def retract(self, X) -> np.ndarray:
        """Push interior rows radially (from the interior point) onto the frontier."""
        X = self._check(X)
        codes = self.classify(X)
        out = _unit_rows(X).copy()
        inside = np.flatnonzero(codes == 1)
        if inside.size:
            o = self.chart_lift(self.interior_point.rep)[0]
            Xh = self.chart_lift(X[inside])
            E = Xh - o
            keep = np.linalg.norm(E, axis=1) > 1e-14
            idx = inside[keep]
            Y = np.repeat(o[None, :], idx.size, axis=0)
            _, sb = self.exit_params(Y, E[keep])
            out[idx] = _unit_rows(Y + sb[:, None] * E[keep])
        return out

    def sign_lift(self, X) -> np.ndarray:
        """Unit rows with the sign making the chart covector nonnegative."""
        U = _unit_rows(self._check(X))
        s = np.sign(U @ self.chart)
        s[s == 0] = 1.0
        return U * s[:, None]


# ---------------------------------------------------------------------------
# half-space domains
# ---------------------------------------------------------------------------


class HalfspaceDomain(ConvexDomain):
    """Projectivization of ``{x : l_i(x) > 0 for all i}``."""

    kind = "halfspace"

    def __init__(self, covectors, require_proper: bool = True, interior_hint=None):
        L = _unit_rows(covectors)
        self.L = L
        self.L.setflags(write=False)
        self.n = L.shape[1]
        if self.n < 2:
            raise InputError("domains live in P(R^n) with n >= 2")
        c = L.sum(axis=0)
        rank = np.linalg.matrix_rank(L, tol=1e-10)
        x0 = self._interior_by_lp() if interior_hint is None else _unit_rows(_rep(interior_hint))[0]
        if x0 is None:
            raise NotProperlyConvex("the half-space intersection has empty interior")
        if np.min(L @ x0) < 0:
            x0 = -x0
        if np.min(L @ x0) <= DEFAULT.interior_margin:
            raise NotProperlyConvex("interior hint is not strictly inside")
        self.proper = bool(rank == self.n and np.linalg.norm(c) > 1e-12)
        if self.proper:
            self.chart = c / np.linalg.norm(c)
        else:
            self.chart = x0.copy()
        self.interior_point = normalize_point(x0)
        if self.proper:
            self.proper = self.validate_proper()
        if require_proper and not self.proper:
            raise NotProperlyConvex("covectors do not cut out a properly convex cone")

    @property
    def covectors(self) -> list[ProjHyperplane]:
        return [normalize_hyperplane(l) for l in self.L]

    def _interior_by_lp(self) -> np.ndarray | None:
        k, n = self.L.shape
        cost = np.zeros(n + 1)
        cost[-1] = -1.0
        A = np.hstack([-self.L, np.ones((k, 1))])
        res = linprog(
            cost,
            A_ub=A,
            b_ub=np.zeros(k),
            bounds=[(-1, 1)] * n + [(None, 1)],
            method="highs",
        )
        if not res.success or res.x[-1] <= DEFAULT.interior_margin:
            return None
        x = res.x[:n]
        return x / np.linalg.norm(x)

    def margin(self, X) -> np.ndarray:
        U = self.sign_lift(X)
        return np.min(U @ self.L.T, axis=1)

    def exit_params(self, Yh, E):
        A = Yh @ self.L.T
        D = E @ self.L.T
        with np.errstate(divide="ignore", invalid="ignore"):
            S = -A / D
        sb = np.where(D < 0, S, np.inf).min(axis=1)
        sa = np.where(D > 0, S, -np.inf).max(axis=1)
        return sa, sb

    def log_cross_ratio(self, Yh, Zh):
        A = Yh @ self.L.T
        Bz = Zh @ self.L.T
        T = ((Zh - Yh) @ self.L.T) / A
        with np.errstate(divide="ignore", invalid="ignore"):
            logr = np.where(np.abs(T) < 0.5, np.log1p(T), np.log(Bz / A))
        return logr.max(axis=1) - logr.min(axis=1)

    def to_json(self) -> dict:
        return {"type": "halfspace", "data": self.L.tolist()}


# ---------------------------------------------------------------------------
# Klein balls
# ---------------------------------------------------------------------------


class KleinBall(ConvexDomain):
    """The ball ``x_1^2 + ... + x_p^2 < x_{p+1}^2`` in P(R^{p+1})."""

    kind = "klein"

    def __init__(self, p: int):
        if int(p) < 1:
            raise InputError("KleinBall needs p >= 1")
        self.p = int(p)
        self.n = self.p + 1
        self.chart = np.eye(self.n)[-1]
        self.interior_point = normalize_point(self.chart)
        self.J = np.diag([1.0] * self.p + [-1.0])

    def q(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.sum(X[:, :-1] ** 2, axis=1) - X[:, -1] ** 2

    def margin(self, X) -> np.ndarray:
        return -self.q(_unit_rows(X))

    def _roots(self, Yh, E):
        A = np.sum(E[:, :-1] ** 2, axis=1) - E[:, -1] ** 2
        B = np.sum(Yh[:, :-1] * E[:, :-1], axis=1) - Yh[:, -1] * E[:, -1]
        C = self.q(Yh)
        D = np.sqrt(np.maximum(B * B - A * C, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            big = np.where(B >= 0, -B - D, -B + D)
            r1 = big / A
            r2 = C / big
        sa = np.where(B >= 0, r1, r2)
        sb = np.where(B >= 0, r2, r1)
        return sa, sb, A

    def exit_params(self, Yh, E):
        sa, sb, _ = self._roots(Yh, E)
        return sa, sb

    def log_cross_ratio(self, Yh, Zh):
        E = Zh - Yh
        sa, sb, A = self._roots(Yh, E)
        u = 1.0 / sb
        v = -1.0 / sa
        one_minus_u = -self.q(Zh) / (A * (1.0 - sa) * sb)
        log1mu = np.where(u < 0.5, np.log1p(-u), np.log(one_minus_u))
        return np.log1p(v) - log1mu

    def to_json(self) -> dict:
        return {"type": "klein", "data": [[self.p]]}


# ---------------------------------------------------------------------------
# hull domains
# ---------------------------------------------------------------------------


class HullDomain(HalfspaceDomain):
    """Convex hull of finitely many points in the chart ``c > 0``.

    Facets are computed exactly in chart dimension at most three and
    approximated from outside by ``10 n^2`` sampled support directions above.
    """

    kind = "hull"

    def __init__(self, vertices, chart, rng: np.random.Generator | None = None):
        V = _unit_rows(_rep_rows(vertices))
        c = np.asarray(_rep(chart), dtype=float)
        c = c / np.linalg.norm(c)
        n = V.shape[1]
        if c.shape[0] != n:
            raise DimensionMismatch("chart and vertices differ in dimension")
        cv = V @ c
        if np.any(np.abs(cv) <= 1e-12):
            raise ChartDoesNotBound("a vertex lies on the chart hyperplane")
        V = V * np.sign(cv)[:, None]
        B = _complement_basis(c)
        Y = (V / (V @ c)[:, None]) @ B
        d = n - 1
        if np.linalg.matrix_rank(Y - Y.mean(axis=0), tol=1e-10) < d:
            raise NotProperlyConvex("hull has empty interior in its chart")
        if d == 1:
            lo, hi = int(np.argmin(Y[:, 0])), int(np.argmax(Y[:, 0]))
            eqs = np.array([[-1.0, Y[lo, 0]], [1.0, -Y[hi, 0]]])
            ext = np.array(sorted({lo, hi}))
            self.exact = True
        elif d <= 3:
            hull = ConvexHull(Y)
            eqs = hull.equations
            ext = np.sort(hull.vertices)
            self.simplices = hull.simplices
            self.exact = True
        else:
            rng = np.random.default_rng(0) if rng is None else rng
            U = rng.standard_normal((10 * n * n, d))
            U /= np.linalg.norm(U, axis=1, keepdims=True)
            h = (Y @ U.T).max(axis=0)
            eqs = np.hstack([U, -h[:, None]])
            ext = np.unique(np.argmax(Y @ U.T, axis=0))
            self.exact = False
        # a y + b <= 0 inside; as a covector on V: l(x) = -(a B^T x + b c(x))
        L = -(eqs[:, :d] @ B.T + eqs[:, d:] * c[None, :])
        self._all_vertices = V
        self.vertex_reps = V[ext]
        self.vertex_index = ext
        centroid = V[ext].mean(axis=0)
        super().__init__(L, require_proper=True, interior_hint=centroid)
        self.chart = c

    @property
    def vertices(self) -> list[ProjPoint]:
        return [normalize_point(v) for v in self.vertex_reps]

    def to_json(self) -> dict:
        return {"type": "hull", "data": self.vertex_reps.tolist(), "chart": self.chart.tolist()}


def _rep_rows(items) -> np.ndarray:
    if isinstance(items, np.ndarray):
        return items
    return np.vstack([_rep(v) for v in items])


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def domain_from_json(spec: dict) -> ConvexDomain:
    """Build a domain from ``{"type": ..., "data": [[...]]}``."""
    try:
        kind = spec["type"]
        data = spec["data"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed domain spec: {exc}") from exc
    if kind == "halfspace":
        return HalfspaceDomain(np.asarray(data, dtype=float))
    if kind == "klein":
        return KleinBall(int(np.asarray(data).reshape(-1)[0]))
    if kind == "hull":
        V = np.asarray(data, dtype=float)
        chart = spec.get("chart")
        if chart is None:
            chart = default_chart(V)
        return HullDomain(V, chart)
    raise InputError(f"unknown domain type {kind!r}")


def default_chart(V: np.ndarray) -> np.ndarray:
    """A covector positive on all given lifts, found by linear programming."""
    V = np.asarray(V, dtype=float)
    m, n = V.shape
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    A = np.hstack([-V, np.ones((m, 1))])
    res = linprog(cost, A_ub=A, b_ub=np.zeros(m), bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    if not res.success or res.x[-1] <= 1e-12:
        raise ChartDoesNotBound("no covector is positive on all vertex lifts")
    return res.x[:n] / np.linalg.norm(res.x[:n])


# ---------------------------------------------------------------------------
# lines and the Hilbert metric
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineSection:
    """Points ``a, y, z, b`` on one line with ``a, b`` on the frontier."""

    a: ProjPoint
    y: ProjPoint
    z: ProjPoint
    b: ProjPoint
    s_a: float
    s_b: float


def contains(omega: ConvexDomain, x) -> Containment:
    return omega.contains(x)


def _interior_pair(omega: ConvexDomain, y, z):
    Y = omega._check(_rep(y))
    Z = omega._check(_rep(z))
    codes = omega.classify(np.vstack([Y, Z]))
    if np.any(codes != 1):
        raise NotInterior("both points must lie in the interior")
    return omega.chart_lift(Y), omega.chart_lift(Z)


def _bisect_exit(omega: ConvexDomain, y: np.ndarray, e: np.ndarray, tol: float) -> float:
    lo, hi = 0.0, 1.0
    while omega.margin(y + hi * e)[0] > 0:
        lo, hi = hi, 2 * hi
        if hi > 1e16:
            raise NotProperlyConvex("ray does not leave the domain")
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if omega.margin(y + mid * e)[0] > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def boundary_intersect(
    omega: ConvexDomain, y, z, method: str = "exact", config: Config = DEFAULT
) -> LineSection:
    """Frontier points ``a, b`` of the line through ``y, z`` in the order a, y, z, b.

    ``method="bisection"`` locates both endpoints by bisection on the margin
    (relative tolerance ``config.bisection_tol``) instead of solving for them.
    """
    Yh, Zh = _interior_pair(omega, y, z)
    E = Zh - Yh
    if np.linalg.norm(E) <= config.eps_point:
        raise CoincidentPoints("y and z coincide")
    if method == "bisection":
        sb = _bisect_exit(omega, Yh[0], E[0], config.bisection_tol)
        sa = -_bisect_exit(omega, Yh[0], -E[0], config.bisection_tol)
    else:
        sa_arr, sb_arr = omega.exit_params(Yh, E)
        sa, sb = float(sa_arr[0]), float(sb_arr[0])
    a = normalize_point(Yh[0] + sa * E[0])
    b = normalize_point(Yh[0] + sb * E[0])
    return LineSection(a, as_point(_rep(y)), as_point(_rep(z)), b, float(sa), float(sb))


def hilbert_distance_many(omega: ConvexDomain, Y, Z) -> np.ndarray:
    """Row-wise Hilbert distances; all rows must be interior points."""
    Yh, Zh = _interior_pair_many(omega, Y, Z)
    Yh, Zh = _ordered_pairs(Yh, Zh)
    out = np.zeros(len(Yh))
    moving = np.linalg.norm(Zh - Yh, axis=1) > 0
    if np.any(moving):
        out[moving] = 0.5 * omega.log_cross_ratio(Yh[moving], Zh[moving])
    return np.maximum(out, 0.0)


def _ordered_pairs(Yh: np.ndarray, Zh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Swap each pair into lexicographic order so the distance is exactly symmetric."""
    diff = Yh != Zh
    first = np.argmax(diff, axis=1)
    rows = np.arange(len(Yh))
    swap = diff.any(axis=1) & (Yh[rows, first] > Zh[rows, first])
    A, B = Yh.copy(), Zh.copy()
    A[swap], B[swap] = Zh[swap], Yh[swap]
    return A, B


def _interior_pair_many(omega, Y, Z):
    Y = omega._check(Y)
    Z = omega._check(Z)
    if np.any(omega.classify(Y) != 1) or np.any(omega.classify(Z) != 1):
        raise NotInterior("all points must lie in the interior")
    return omega.chart_lift(Y), omega.chart_lift(Z)


def hilbert_distance(omega: ConvexDomain, y, z) -> float:
    """``d(y, z) = 1/2 log [a, y, z, b]``."""
    return float(hilbert_distance_many(omega, _rep(y), _rep(z))[0])


# ---------------------------------------------------------------------------
# duality
# ---------------------------------------------------------------------------


def dual_domain(omega: ConvexDomain, m: int | None = None) -> ConvexDomain:
    """The dual convex set in the dual projective space.

    Half-space domains dualize to the hull of their covectors, hull domains to
    the hull of their facet covectors (supporting hyperplanes), and Klein balls
    to themselves.
    """
    if isinstance(omega, KleinBall):
        return KleinBall(omega.p)
    chart = omega.interior_point.rep
    if isinstance(omega, HullDomain):
        if not omega.exact and m is not None:
            pts = omega.frontier_samples(m)
            return HullDomain(_supporting_covectors(omega, pts), chart)
        return HullDomain(omega.L, chart)
    if isinstance(omega, HalfspaceDomain):
        if not omega.proper:
            raise NotProperlyConvex("dual of a non properly convex set is not open")
        return HullDomain(omega.L, chart)
    raise InputError(f"no duality rule for {type(omega).__name__}")


def _supporting_covectors(omega: HalfspaceDomain, pts: np.ndarray) -> np.ndarray:
    U = omega.sign_lift(pts)
    vals = U @ omega.L.T
    return omega.L[np.argmin(vals, axis=1)]


# ---------------------------------------------------------------------------
# the delta pseudo-distance
# ---------------------------------------------------------------------------


def _delta_rows(omega: ConvexDomain, y: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """``delta(y, z)`` for interior ``y`` and many targets ``z``."""
    yh = omega.chart_lift(y)[0]
    Z = _unit_rows(Z)
    cz = Z @ omega.chart
    at_inf = np.abs(cz) <= 1e-14
    out = np.empty(len(Z))
    if np.any(~at_inf):
        Zh = Z[~at_inf] / cz[~at_inf, None]
        E = Zh - yh
        Yh = np.repeat(yh[None, :], len(Zh), axis=0)
        sa, sb = omega.exit_params(Yh, E)
        v1 = sb * (1 - sa) / ((sb - 1) * (-sa))
        v2 = sa * (1 - sb) / ((sa - 1) * (-sb))
        same = np.linalg.norm(E, axis=1) <= 1e-15
        res = np.maximum(v1, v2)
        res[same] = 1.0
        out[~at_inf] = res
    if np.any(at_inf):
        E = Z[at_inf] - (Z[at_inf] @ omega.chart)[:, None] * yh[None, :]
        Yh = np.repeat(yh[None, :], len(E), axis=0)
        sa, sb = omega.exit_params(Yh, E)
        out[at_inf] = np.maximum(sb / sa, sa / sb)
    return out


def delta_pseudo(
    omega: ConvexDomain,
    y,
    target,
    samples: int | None = None,
    seed: int = 0,
    config: Config = DEFAULT,
) -> float:
    """``delta_Omega(y, z)`` for a point, or its maximum over a hyperplane.

    For a point target the value is the larger of ``[a, y, z, b]`` and
    ``[b, y, z, a]``; for interior ``z`` this equals ``exp(2 d(y, z))``.
    For a hyperplane the maximum over its points is found by a random grid
    followed by local ascent.
    """
    yv = omega._check(_rep(y))
    if omega.classify(yv)[0] != 1:
        raise NotInterior("y must lie in the interior")
    if isinstance(target, ProjHyperplane):
        return _delta_hyperplane(omega, yv[0], target.covector, samples, seed, config)
    return float(_delta_rows(omega, yv[0], omega._check(_rep(target)))[0])


def delta_pseudo_affine(omega: ConvexDomain, y, z) -> float:
    """Reference evaluation of ``delta(y, z)`` through extended-real cross-ratios."""
    yh = omega.chart_lift(_rep(y))[0]
    z = np.asarray(_rep(z), dtype=float)
    cz = float(z @ omega.chart)
    if abs(cz) <= 1e-14:
        e = z - cz * yh
        sz = INFINITY
    else:
        e = z / cz - yh
        sz = 1.0
    sa, sb = omega.exit_params(yh[None, :], e[None, :])
    sa, sb = float(sa[0]), float(sb[0])
    return max(cross_ratio_affine(sa, 0.0, sz, sb), cross_ratio_affine(sb, 0.0, sz, sa))


def hyperplane_meets_closure(omega: ConvexDomain, h: np.ndarray, m: int = 0) -> bool:
    """Sampled test: does the hyperplane ``h`` meet the closure of the domain?"""
    m = m or 10 * omega.n * omega.n
    pts = omega.frontier_samples(m)
    if isinstance(omega, HullDomain):
        pts = np.vstack([pts, omega.vertex_reps])
    vals = omega.sign_lift(pts) @ (h / np.linalg.norm(h))
    return not (np.all(vals > 1e-12) or np.all(vals < -1e-12))


def _delta_hyperplane(omega, y, h, samples, seed, config) -> float:
    h = np.asarray(h, dtype=float)
    if hyperplane_meets_closure(omega, h):
        raise HyperplaneMeetsClosure("target hyperplane meets the closure of the domain")
    K = _complement_basis(h)  # columns span the hyperplane
    d = K.shape[1]
    samples = samples or config.delta_samples
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((samples, d))
    C = np.vstack([C, np.eye(d), -np.eye(d)])
    vals = _delta_rows(omega, y, C @ K.T)
    if d == 1:
        return float(vals.max())

    def neg(c):
        nc = np.linalg.norm(c)
        if nc < 1e-12:
            return 1.0
        return -float(_delta_rows(omega, y, ((c / nc) @ K.T)[None, :])[0])

    best = float(vals.max())
    for i in np.argsort(-vals)[:5]:
        res = minimize(neg, C[i], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------------------
# centers of mass
# ---------------------------------------------------------------------------


def _chart_frame(omega: ConvexDomain, chart) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = omega.chart if chart is None else np.asarray(_rep(chart), dtype=float)
    c = c / np.linalg.norm(c)
    if hyperplane_meets_closure(omega, c):
        raise ChartDoesNotBound("chart hyperplane meets the closure of the domain")
    sgn = np.sign(omega.sign_lift(omega.interior_point.rep)[0] @ c)
    c = c * sgn
    B = _complement_basis(c)
    x0 = c.copy()
    return c, B, x0


def _polytope_vertices(omega: HalfspaceDomain, c, B, x0) -> np.ndarray:
    """Vertices of a polytope domain in the chart coordinates ``x0 + B y``."""
    if isinstance(omega, HullDomain) and omega.exact:
        V = omega.vertex_reps
        V = V / (V @ c)[:, None]
        return (V - x0) @ B
    d = B.shape[1]
    # l(x0 + B y) >= 0  <=>  -(l B) y - l(x0) <= 0
    A = -(omega.L @ B)
    b = -(omega.L @ x0)
    interior = omega.interior_point.rep
    interior = interior / (interior @ c)
    yin = (interior - x0) @ B
    if d == 1:
        vals = -b / A[:, 0]
        lo = vals[A[:, 0] < 0].max()
        hi = vals[A[:, 0] > 0].min()
        return np.array([[lo], [hi]])
    hs = HalfspaceIntersection(np.hstack([A, b[:, None]]), yin)
    return hs.intersections


def center_of_mass(
    omega: ConvexDomain,
    chart=None,
    method: str = "auto",
    samples: int | None = None,
    seed: int = 0,
    config: Config = DEFAULT,
) -> ProjPoint:
    """Center of mass of the domain in the affine chart ``chart = 1``.

    ``method="auto"`` uses closed forms (polytope triangulation, ellipsoid
    center) and falls back to Monte Carlo; ``method="montecarlo"`` always
    averages ``config.com_samples`` accepted uniform samples from a seeded
    generator, which is bit-reproducible for a fixed seed.
    """
    c, B, x0 = _chart_frame(omega, chart)
    if method == "auto":
        if isinstance(omega, KleinBall):
            J = omega.J
            Q = B.T @ J @ B
            lin = B.T @ J @ x0
            ystar = -np.linalg.solve(Q, lin)
            return normalize_point(x0 + B @ ystar)
        if isinstance(omega, HalfspaceDomain) and (not isinstance(omega, HullDomain) or omega.exact):
            Yv = _polytope_vertices(omega, c, B, x0)
            return normalize_point(x0 + B @ _polytope_centroid(Yv))
        method = "montecarlo"
    if method != "montecarlo":
        raise InputError(f"unknown center-of-mass method {method!r}")
    samples = samples or config.com_samples
    rng = np.random.default_rng(seed)
    F = omega.frontier_samples(64 * omega.n, np.random.default_rng(seed))
    F = F / (F @ c)[:, None]
    Yf = (F - x0) @ B
    lo, hi = Yf.min(axis=0), Yf.max(axis=0)
    pad = 0.05 * (hi - lo) + 1e-12
    lo, hi = lo - pad, hi + pad
    acc_sum = np.zeros(B.shape[1])
    count = 0
    while count < samples:
        Ysamp = rng.uniform(lo, hi, size=(max(4096, 2 * samples), B.shape[1]))
        inside = omega.classify(x0 + Ysamp @ B.T) == 1
        take = Ysamp[inside][: samples - count]
        acc_sum += take.sum(axis=0)
        count += len(take)
    return normalize_point(x0 + B @ (acc_sum / count))


def _polytope_centroid(Y: np.ndarray) -> np.ndarray:
    d = Y.shape[1]
    if d == 1:
        return np.array([0.5 * (Y.min() + Y.max())])
    tri = Delaunay(Y)
    S = Y[tri.simplices]  # (m, d+1, d)
    M = S[:, 1:, :] - S[:, :1, :]
    vol = np.abs(np.linalg.det(M))
    cents = S.mean(axis=1)
    return (vol[:, None] * cents).sum(axis=0) / vol.sum()


# ---------------------------------------------------------------------------
# Omega_max and invariance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaMax:
    domain: HalfspaceDomain
    properly_convex: bool


def omega_max(dual_cloud: Sequence, orientation_hint, config: Config = DEFAULT) -> OmegaMax:
    """``P({x : l(x) > 0 for every re-signed covector l of the cloud})``."""
    L = _unit_rows(_rep_rows(dual_cloud))
    hint = _unit_rows(_rep(orientation_hint))[0]
    vals = L @ hint
    if np.any(np.abs(vals) <= config.boundary_band):
        raise NoConsistentLift("a covector vanishes on the orientation hint")
    L = L * np.sign(vals)[:, None]
    dom = HalfspaceDomain(L, require_proper=False, interior_hint=hint)
    return OmegaMax(dom, dom.proper)


def is_invariant(
    omega: ConvexDomain, mats: Sequence[np.ndarray], samples: int = 64, tol: float | None = None
) -> bool:
    """Sampled check that every matrix maps the frontier to the frontier."""
    tol = DEFAULT.invariance_tol if tol is None else tol
    F = omega.frontier_samples(samples)
    x0 = omega.interior_point.rep
    for M in mats:
        for A in (M, np.linalg.inv(M)):
            img = _unit_rows(F @ A.T)
            if np.max(np.abs(omega.margin(img))) > tol:
                return False
            if omega.classify(A @ x0)[0] != 1:
                return False
    return True


def bisaturation_heuristic(core: HullDomain, omega: ConvexDomain, per_face: int = 16, seed: int = 0) -> dict:
    """Sampled check that each supporting facet of ``core`` is purely ideal or purely nonideal.

    A facet is *ideal* where its samples lie on the frontier of ``omega`` and
    *nonideal* where they lie inside it.  This is a finite-sample heuristic,
    not a certificate.
    """
    if not getattr(core, "exact", False) or not hasattr(core, "simplices"):
        return {"facets": 0, "mixed": 0, "bisaturated": None, "heuristic": True}
    rng = np.random.default_rng(seed)
    V = core._all_vertices
    mixed = 0
    for simplex in core.simplices:
        W = rng.dirichlet(np.ones(len(simplex)), size=per_face)
        P = W @ V[simplex]
        codes = omega.classify(P)
        ideal = np.any(codes <= 0)
        nonideal = np.any(codes == 1)
        mixed += int(ideal and nonideal)
    return {
        "facets": int(len(core.simplices)),
        "mixed": int(mixed),
        "bisaturated": mixed == 0,
        "heuristic": True,
    }


def simplex_hilbert_oracle(y, z) -> float:
    """Closed form on the positive orthant: ``1/2 log(max(z/y) / min(z/y))``."""
    y = np.abs(np.asarray(y, dtype=float))
    z = np.abs(np.asarray(z, dtype=float))
    r = z / y
    return 0.5 * float(np.log(r.max() / r.min()))
