"""Indefinite forms of signature (p, q) and the spaces they cut out.

Points of P(R^{p,q}) are sorted into the negative region ``H^{p,q-1}``, its
null boundary and the positive region.  Boundary clouds are tested for
transversality and negativity, and the flattening homotopy ``f_t`` moves
null points onto the standard sphere.

Example
-------
>>> import numpy as np
>>> from convexcore.pqgeom import PQForm, classify
>>> classify(PQForm.standard(2, 1), [0, 0, 1])
'Hpq'
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import null_space

from .cloud import PointCloud, points_of
from .config import DEFAULT, Config
from .errors import (
    BadDimension,
    DimensionMismatch,
    InputError,
    NotOnBoundary,
    NotTransverse,
    OutsideChart,
)
from .projlin import ProjHyperplane, ProjMat, ProjPoint, normalize_hyperplane, normalize_point

HPQ, BOUNDARY, SPQ = "Hpq", "Boundary", "Spq"


def _signature(G: np.ndarray, band: float) -> tuple[int, int, int]:
    w = np.linalg.eigvalsh(G)
    scale = max(1.0, float(np.abs(w).max()))
    return int(np.sum(w > band * scale)), int(np.sum(w < -band * scale)), int(np.sum(np.abs(w) <= band * scale))


@dataclass(frozen=True, eq=False)
class PQForm:
    """A nondegenerate symmetric bilinear form with its signature ``(p, q)``."""

    gram: np.ndarray
    p: int
    q: int
    standard_coords: bool = False

    @classmethod
    def standard(cls, p: int, q: int) -> "PQForm":
        if p < 1 or q < 1:
            raise InputError("p and q must be positive")
        G = np.diag([1.0] * p + [-1.0] * q)
        G.setflags(write=False)
        return cls(G, p, q, True)

    @classmethod
    def from_gram(cls, gram, config: Config = DEFAULT) -> "PQForm":
        G = np.asarray(gram, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatch("Gram matrix must be square")
        if np.max(np.abs(G - G.T)) > 1e-10:
            raise InputError("Gram matrix is not symmetric")
        p, q, z = _signature(G, config.pq_band)
        if z:
            raise InputError("Gram matrix is degenerate")
        G = 0.5 * (G + G.T)
        G.setflags(write=False)
        std = bool(np.array_equal(G, np.diag([1.0] * p + [-1.0] * q)))
        return cls(G, p, q, std)

    @classmethod
    def from_json(cls, spec: dict) -> "PQForm":
        if "gram" in spec:
            return cls.from_gram(spec["gram"])
        try:
            return cls.standard(int(spec["p"]), int(spec["q"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed form spec: {exc}") from exc

    def to_json(self) -> dict:
        if self.standard_coords:
            return {"p": self.p, "q": self.q}
        return {"gram": self.gram.tolist()}

    @property
    def n(self) -> int:
        return int(self.gram.shape[0])

    def __neg__(self) -> "PQForm":
        return PQForm.from_gram(-self.gram)

    def pair(self, X, Y) -> np.ndarray:
        """Row-wise ``<x, y>``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return np.einsum("ij,jk,ik->i", X, self.gram, Y)

    def preserved_by(self, g, tol: float = 1e-8) -> bool:
        """``g^T G g = G`` up to a positive scalar and sign of the lift."""
        M = g.mat if isinstance(g, ProjMat) else np.asarray(g, dtype=float)
        A = M.T @ self.gram @ M
        k = np.sum(A * self.gram) / np.sum(self.gram * self.gram)
        if k <= 0:
            return False
        return bool(np.max(np.abs(A / k - self.gram)) <= tol)


def _unit(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(getattr(X, "rep", X), dtype=float))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _check(F: PQForm, X: np.ndarray) -> None:
    if X.shape[1] != F.n:
        raise DimensionMismatch(f"form has dimension {F.n}, point has {X.shape[1]}")


def classify_many(F: PQForm, X, band: float = DEFAULT.pq_band) -> list[str]:
    X = _unit(X)
    _check(F, X)
    v = F.pair(X, X)
    return [HPQ if t < -band else SPQ if t > band else BOUNDARY for t in v]


def classify(F: PQForm, x, band: float = DEFAULT.pq_band) -> str:
    """``Hpq`` where ``<x, x> < 0``, ``Spq`` where positive, else ``Boundary``."""
    return classify_many(F, x, band)[0]


def _boundary_rows(F: PQForm, cloud, config: Config) -> np.ndarray:
    X = _unit(points_of(cloud))
    _check(F, X)
    bad = np.abs(F.pair(X, X)) > config.on_boundary_tol
    if np.any(bad):
        raise NotOnBoundary(f"{int(bad.sum())} points are off the null quadric")
    return X


@dataclass(frozen=True)
class Transversality:
    transverse: bool
    failing_pairs: list[tuple[int, int]] = field(default_factory=list)
    min_abs_pairing: float = float("inf")


def is_transverse(F: PQForm, cloud, config: Config = DEFAULT) -> Transversality:
    """All distinct pairs have ``|<y, z>| > transverse_tol``."""
    X = _boundary_rows(F, cloud, config)
    P = X @ F.gram @ X.T
    iu = np.triu_indices(len(X), 1)
    vals = np.abs(P[iu])
    bad = vals <= config.transverse_tol
    pairs = [(int(i), int(j)) for i, j in zip(iu[0][bad], iu[1][bad])]
    return Transversality(not pairs, pairs, float(vals.min()) if vals.size else float("inf"))


@dataclass(frozen=True)
class Negativity:
    verdict: str
    sign_lift: str
    triple_test: str | None
    triples_checked: int
    signatures: dict
    lift: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "sign_lift": self.sign_lift,
            "triple_test": self.triple_test,
            "triples_checked": self.triples_checked,
            "signatures": self.signatures,
        }


def _sign_lift(P: np.ndarray, want: float) -> np.ndarray | None:
    """Signs making every off-diagonal pairing have sign ``want``, or None."""
    s = np.ones(len(P))
    s[1:] = want * np.sign(P[0, 1:])
    Q = P * np.outer(s, s)
    off = ~np.eye(len(P), dtype=bool)
    return s if np.all(want * Q[off] > 0) else None


def _triples(m: int, limit: int, rng: np.random.Generator) -> np.ndarray:
    if comb(m, 3) <= limit:
        return np.array(list(itertools.combinations(range(m), 3)), dtype=int).reshape(-1, 3)
    T = np.empty((limit, 3), dtype=int)
    for k in range(limit):
        T[k] = np.sort(rng.choice(m, 3, replace=False))
    return T


def negativity(F: PQForm, cloud, seed: int = 0, config: Config = DEFAULT) -> Negativity:
    """Negative, Positive or Neither; Inconclusive when the two tests disagree.

    The sign-lift test looks for lifts with all pairwise products negative
    (tried first) or all positive.  The triple test asks for every sampled
    triple's Gram matrix to have signature (2, 1) or (1, 2).  A two-point
    cloud admits both lifts and resolves to Negative.
    """
    X = _boundary_rows(F, cloud, config)
    tr = is_transverse(F, X, config)
    if not tr.transverse:
        raise NotTransverse(f"non-transverse pairs: {tr.failing_pairs[:5]}")
    P = X @ F.gram @ X.T
    lift = None
    if len(X) < 2:
        lift_verdict = "Negative"
        lift = np.ones(len(X))
    elif (s := _sign_lift(P, -1.0)) is not None:
        lift_verdict, lift = "Negative", s
    elif (s := _sign_lift(P, 1.0)) is not None:
        lift_verdict, lift = "Positive", s
    else:
        lift_verdict = "Neither"
    rng = np.random.default_rng(seed)
    T = _triples(len(X), config.max_triples, rng) if len(X) >= 3 else np.zeros((0, 3), dtype=int)
    counts: dict[str, int] = {}
    if len(T):
        Gs = P[T[:, :, None], T[:, None, :]]
        w = np.linalg.eigvalsh(Gs)
        pos = np.sum(w > 0, axis=1)
        for k in pos:
            key = f"({int(k)},{3 - int(k)})"
            counts[key] = counts.get(key, 0) + 1
        if set(counts) == {"(2,1)"}:
            triple = "Negative"
        elif set(counts) == {"(1,2)"}:
            triple = "Positive"
        else:
            triple = "Neither"
    else:
        triple = None
    verdict = lift_verdict if triple is None or triple == lift_verdict else "Inconclusive"
    return Negativity(verdict, lift_verdict, triple, int(len(T)), dict(sorted(counts.items())), lift)


# ---------------------------------------------------------------------------
# flattening and duality
# ---------------------------------------------------------------------------


def sphere_flatten(F: PQForm, x, t: float, config: Config = DEFAULT) -> ProjPoint:
    """Homotopy ``f_t`` pushing null points onto the standard sphere.

    In standard coordinates ``f_t`` keeps the first ``p`` coordinates,
    scales the middle ``q - 1`` by ``sqrt(1 - t)`` and the last by
    ``sqrt(1 + t alpha)`` with ``alpha = sum(middle^2) / x_last^2``.
    """
    if not F.standard_coords:
        raise InputError("flattening needs a form in standard coordinates")
    if not 0.0 <= t <= 1.0:
        raise InputError("t must lie in [0, 1]")
    xr = np.asarray(getattr(x, "rep", x), dtype=float).reshape(-1)
    _check(F, xr[None, :])
    u = xr / np.linalg.norm(xr)
    if abs(float(F.pair(u, u)[0])) > config.on_boundary_tol:
        raise NotOnBoundary("point is not null for the form")
    if abs(u[-1]) <= 1e-12:
        raise OutsideChart("last coordinate vanishes")
    if t == 0.0:
        return ProjPoint(u.copy()) if not isinstance(x, ProjPoint) else x
    p = F.p
    mid = xr[p:-1]
    alpha = float(mid @ mid) / xr[-1] ** 2
    y = np.concatenate([xr[:p], np.sqrt(1.0 - t) * mid, [np.sqrt(1.0 + t * alpha) * xr[-1]]])
    return normalize_point(y, config)


def flatten_many(F: PQForm, X: np.ndarray, t: float, config: Config = DEFAULT) -> np.ndarray:
    """Vectorized ``f_t``; rows are returned as unit vectors.

    Raises the same errors as :func:`sphere_flatten` when any row fails.
    """
    if not F.standard_coords:
        raise InputError("flattening needs a form in standard coordinates")
    if not 0.0 <= t <= 1.0:
        raise InputError("t must lie in [0, 1]")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check(F, X)
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    if np.any(np.abs(F.pair(X, X)) > config.on_boundary_tol):
        raise NotOnBoundary("point is not null for the form")
    if np.any(np.abs(X[:, -1]) <= 1e-12):
        raise OutsideChart("last coordinate vanishes")
    p = F.p
    mid = X[:, p:-1]
    alpha = np.sum(mid * mid, axis=1) / X[:, -1] ** 2
    Y = np.hstack([X[:, :p], np.sqrt(1.0 - t) * mid, (np.sqrt(1.0 + t * alpha) * X[:, -1])[:, None]])
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def sphere_equation_residual(F: PQForm, X) -> np.ndarray:
    """``x_1^2 + ... + x_p^2 - x_last^2`` for unit rows (zero on the sphere)."""
    X = _unit(X)
    return np.sum(X[:, : F.p] ** 2, axis=1) - X[:, -1] ** 2


def pq_dual(F: PQForm, x) -> ProjHyperplane:
    """The covector ``<x, .>``, canonicalized."""
    xr = np.asarray(getattr(x, "rep", x), dtype=float).reshape(-1)
    _check(F, xr[None, :])
    return normalize_hyperplane(F.gram @ xr)


def pq_dual_inverse(F: PQForm, h) -> ProjPoint:
    hr = np.asarray(getattr(h, "covector", h), dtype=float).reshape(-1)
    _check(F, hr[None, :])
    return normalize_point(np.linalg.solve(F.gram, hr))


def random_null_points(F: PQForm, m: int, rng: np.random.Generator) -> np.ndarray:
    """Random unit null vectors in standard coordinates with positive last entry."""
    if not F.standard_coords:
        raise InputError("sampling needs standard coordinates")
    a = rng.standard_normal((m, F.p))
    b = rng.standard_normal((m, F.q))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    b[:, -1] = np.abs(b[:, -1]) + 1e-3
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    X = np.hstack([a, b]) / np.sqrt(2.0)
    return X


# ---------------------------------------------------------------------------
# the irreducible representations of SL(2, R)
# ---------------------------------------------------------------------------


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def tau_n(g, n: int) -> np.ndarray:
    """Action of ``g`` on degree ``n - 1`` binary forms in the basis ``x^{n-1-k} y^k``.

    Column ``k`` holds the coefficients of ``(a + c X)^{n-1-k} (b + d X)^k``.
    """
    if n < 2:
        raise BadDimension("n must be at least 2")
    M = np.asarray(getattr(g, "mat", g), dtype=float)
    if M.shape != (2, 2):
        raise DimensionMismatch("expected a 2x2 matrix")
    if abs(np.linalg.det(M)) <= 1e-300:
        raise InputError("matrix is not invertible")
    (a, b), (c, d) = M
    m = n - 1
    out = np.zeros((n, n))
    for k in range(n):
        p = np.array([1.0])
        for _ in range(m - k):
            p = _poly_mul(p, np.array([a, c]))
        for _ in range(k):
            p = _poly_mul(p, np.array([b, d]))
        out[:, k] = p
    return out


def veronese(v, n: int) -> np.ndarray:
    """``(c x + s y)^{n-1}`` in the monomial basis: ``C(m, k) c^{m-k} s^k``."""
    c, s = np.asarray(v, dtype=float).reshape(2)
    m = n - 1
    return np.array([comb(m, k) * c ** (m - k) * s**k for k in range(n)])


def bn_gram(n: int) -> np.ndarray:
    """Invariant bilinear form of ``tau_n``, scaled so that ``B[0, n-1] = -1``.

    Solved from ``tau_n(g)^T B tau_n(g) = B`` for generators of SL(2, R).
    """
    if n < 2:
        raise BadDimension("n must be at least 2")
    gens = [np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[1.0, 0.0], [1.0, 1.0]]), np.diag([2.0, 0.5])]
    rows = []
    for g in gens:
        T = tau_n(g, n)
        rows.append(np.kron(T.T, T.T) - np.eye(n * n))
    N = null_space(np.vstack(rows))
    if N.shape[1] != 1:
        raise BadDimension(f"invariant form is not unique ({N.shape[1]} solutions)")
    B = N[:, 0].reshape(n, n)
    B = -B / B[0, n - 1]
    B[np.abs(B) < 1e-13] = 0.0
    return B


def bn_form(n: int, config: Config = DEFAULT) -> PQForm:
    """``B_n`` as a symmetric form; defined for odd ``n`` only (skew for even ``n``)."""
    if n < 3 or n % 2 == 0:
        raise BadDimension("B_n is symmetric only for odd n >= 3")
    B = bn_gram(n)
    return PQForm.from_gram(0.5 * (B + B.T), config)


def expected_signature(n: int) -> tuple[int, int]:
    """``(m, m + 1)`` for even ``m = (n - 1) / 2`` and ``(m + 1, m)`` for odd ``m``."""
    m = (n - 1) // 2
    return (m, m + 1) if m % 2 == 0 else (m + 1, m)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def veronese_cloud(n: int, count: int = 64, seed: int = 0, s: float = 2.0) -> PointCloud:
    """Attracting fixed points of ``tau_n(R_theta diag(s, 1/s) R_theta^-1)``.

    The angles ``theta`` are evenly spaced in ``[0, pi)`` with a seeded jitter
    of at most a quarter spacing, which keeps neighbours transverse.  Each
    fixed point equals the Veronese image ``iota_n(cos theta, sin theta)``.
    """
    from .projlin import attracting_fixed_point

    rng = np.random.default_rng(seed)
    thetas = np.pi * (np.arange(count) + rng.uniform(0.0, 0.25, count)) / count
    A = np.diag([s, 1.0 / s])
    X = []
    for t in thetas:
        R = rotation(t)
        X.append(attracting_fixed_point(tau_n(R @ A @ R.T, n)).rep)
    return PointCloud(np.vstack(X), tuple(f"ProximalFixedPoint(theta={t:.12f})" for t in thetas), np.ones(count, dtype=int))
