"""Projective-linear kernel.

Canonical representatives of points, hyperplanes and matrices, the chordal
distance, cross-ratios, and the Cartan (singular value) and Jordan
(eigenvalue modulus) projections with the proximality predicates built on
them.

Points and hyperplanes are stored as unit vectors whose first coordinate of
absolute value above ``eps_sign`` is positive.  Matrices are stored with
Frobenius norm ``sqrt(n)`` and the first non-negligible entry (row-major)
positive.  Each :class:`ProjMat` also carries its canonical inverse and the
log-determinants of both, so that small singular values of long products can
be read off the inverse instead of being lost to cancellation.

Example
-------
>>> import numpy as np
>>> from convexcore.projlin import normalize_point, ProjMat, spectral
>>> normalize_point([0, 0, 2]).rep
array([0., 0., 1.])
>>> sd = spectral(ProjMat.from_matrix(np.diag([4.0, 2.0, 1.0])))
>>> round(sd.mu_gap(1, 3) - np.log(4), 12)
0.0
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .config import DEFAULT, Config
from .errors import (
    DegenerateQuadruple,
    DimensionMismatch,
    NotCollinear,
    NotInvertible,
    NotProximal,
    NumericalFailure,
    ZeroVector,
)

_EPS = np.finfo(float).eps
_TINY = 1e-300


# ---------------------------------------------------------------------------
# extended reals
# ---------------------------------------------------------------------------


class _Infinity:
    """The point at infinity of the one-point compactified real line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()
ExtendedReal = Union[float, _Infinity]


def is_infinite(x: object) -> bool:
    return x is INFINITY


def _homogeneous(x: ExtendedReal) -> tuple[float, float]:
    if x is INFINITY:
        return (1.0, 0.0)
    return (float(x), 1.0)


def _det2(p, q) -> float:
    return p[0] * q[1] - p[1] * q[0]


def _ratio_from_homogeneous(a, y, z, b, tol: float = 0.0) -> ExtendedReal:
    d_ya = _det2(y, a)
    d_bz = _det2(b, z)
    if abs(d_ya) <= tol or abs(d_bz) <= tol:
        raise DegenerateQuadruple("a coincides with y or z coincides with b")
    return (_det2(b, y) * _det2(z, a)) / (d_bz * d_ya)


def cross_ratio_affine(
    a: ExtendedReal, y: ExtendedReal, z: ExtendedReal, b: ExtendedReal
) -> ExtendedReal:
    """Cross-ratio of four points of the extended real line.

    Normalized so that ``[0, 1, z, INFINITY] = z``; the finite formula is
    ``((b - y)(z - a)) / ((b - z)(y - a))``.
    """
    return _ratio_from_homogeneous(*(_homogeneous(t) for t in (a, y, z, b)))


# ---------------------------------------------------------------------------
# points and hyperplanes
# ---------------------------------------------------------------------------


def _sign_of_first(v: np.ndarray, eps: float) -> float:
    idx = np.flatnonzero(np.abs(v) > eps)
    if idx.size == 0:
        return 1.0
    return 1.0 if v[idx[0]] > 0 else -1.0


def _canonical_vector(v, config: Config = DEFAULT) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(v))
    if not np.isfinite(norm) or norm < _TINY:
        raise ZeroVector("cannot normalize a zero vector")
    sign = _sign_of_first(v, config.eps_sign * norm)
    if sign > 0 and abs(norm - 1.0) <= 4 * _EPS:
        out = v.copy()
    else:
        out = v * (sign / norm) + 0.0
    out.setflags(write=False)
    return out


def canonical_rows(V: np.ndarray, config: Config = DEFAULT) -> np.ndarray:
    """Row-wise canonicalization of an ``(m, n)`` array of nonzero vectors."""
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise DimensionMismatch("expected a 2-D array of row vectors")
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms < _TINY):
        raise ZeroVector("zero row in point array")
    W = V / norms[:, None]
    big = np.abs(W) > config.eps_sign
    first = np.argmax(big, axis=1)
    signs = np.sign(W[np.arange(len(W)), first])
    signs[signs == 0] = 1.0
    return W * signs[:, None] + 0.0


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """A point of P(V), stored as a canonical unit vector."""

    rep: np.ndarray

    @property
    def n(self) -> int:
        return int(self.rep.shape[0])

    def equals(self, other: "ProjPoint", tol: float = DEFAULT.eps_point) -> bool:
        return chordal_distance(self, other) <= tol

    def __repr__(self) -> str:
        return f"ProjPoint({np.array2string(self.rep, precision=6)})"


@dataclass(frozen=True, eq=False)
class ProjHyperplane:
    """A point of the dual projective space, i.e. a hyperplane of P(V)."""

    covector: np.ndarray

    @property
    def n(self) -> int:
        return int(self.covector.shape[0])

    @property
    def rep(self) -> np.ndarray:
        return self.covector

    def incident(self, p: ProjPoint, tol: float = DEFAULT.eps_point) -> bool:
        _check_dim(self.n, p.n)
        return abs(float(self.covector @ p.rep)) <= tol

    def __repr__(self) -> str:
        return f"ProjHyperplane({np.array2string(self.covector, precision=6)})"


def normalize_point(v, config: Config = DEFAULT) -> ProjPoint:
    """Canonical representative of the line spanned by ``v``."""
    return ProjPoint(_canonical_vector(v, config))


def normalize_hyperplane(v, config: Config = DEFAULT) -> ProjHyperplane:
    """Canonical representative of the hyperplane with covector ``v``."""
    return ProjHyperplane(_canonical_vector(v, config))


def as_point(x, config: Config = DEFAULT) -> ProjPoint:
    return x if isinstance(x, ProjPoint) else normalize_point(x, config)


def _check_dim(n: int, m: int) -> None:
    if n != m:
        raise DimensionMismatch(f"dimension {n} does not match {m}")


def chordal_distance(p: ProjPoint, q: ProjPoint) -> float:
    """``|sin|`` of the angle between the lines ``p`` and ``q``."""
    _check_dim(p.n, q.n)
    c = float(p.rep @ q.rep)
    r = p.rep - c * q.rep
    return float(min(1.0, np.linalg.norm(r)))


def chordal_matrix(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Pairwise chordal distances between rows of unit-vector arrays."""
    C = np.clip(np.abs(P @ Q.T), 0.0, 1.0)
    return np.sqrt(np.maximum(0.0, 1.0 - C * C))


def cross_ratio(
    a: ProjPoint, y: ProjPoint, z: ProjPoint, b: ProjPoint, config: Config = DEFAULT
) -> ExtendedReal:
    """Cross-ratio ``[a, y, z, b]`` of four collinear projective points."""
    for p in (y, z, b):
        _check_dim(a.n, p.n)
    X = np.vstack([a.rep, y.rep, z.rep, b.rep])
    _, s, vt = np.linalg.svd(X)
    if s.size > 2 and s[2] > config.collinear_tol * max(s[0], 1.0):
        raise NotCollinear(f"coplanarity residual {s[2]:.3e}")
    coords = X @ vt[:2].T
    pa, py, pz, pb = coords
    tol = 1e-12
    return _ratio_from_homogeneous(pa, py, pz, pb, tol)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


def canonical_matrix(M, config: Config = DEFAULT) -> tuple[np.ndarray, float]:
    """Canonical form of ``M`` and the (signed) scale applied to reach it.

    Idempotent: an already canonical matrix is returned unchanged.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    fro = float(np.linalg.norm(M))
    if not np.isfinite(fro) or fro < _TINY:
        raise NotInvertible("zero or non-finite matrix")
    target = np.sqrt(n)
    flat = M.reshape(-1)
    sign = _sign_of_first(flat, config.eps_sign * fro / target)
    if sign > 0 and abs(fro - target) <= 4 * _EPS * target:
        return M.copy(), 1.0
    scale = sign * target / fro
    return M * scale + 0.0, scale


def batch_canonical(Ms: np.ndarray, config: Config = DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    """Canonicalize a stack ``(m, n, n)``; returns forms and ``log|scale|``."""
    m, n, _ = Ms.shape
    flat = Ms.reshape(m, -1)
    fro = np.linalg.norm(flat, axis=1)
    scale = np.sqrt(n) / fro
    W = flat * scale[:, None]
    big = np.abs(W) > config.eps_sign
    first = np.argmax(big, axis=1)
    signs = np.sign(W[np.arange(m), first])
    signs[signs == 0] = 1.0
    W = W * signs[:, None] + 0.0
    return W.reshape(m, n, n), np.log(scale)


@dataclass(frozen=True, eq=False)
class ProjMat:
    """An element of PGL(n, R) with its canonical inverse.

    ``logdet`` is ``log|det mat|`` and ``inv_logdet`` is ``log|det inv|``;
    both are tracked through products so that they stay accurate when the
    matrices themselves are badly conditioned.
    """

    mat: np.ndarray
    inv: np.ndarray
    logdet: float
    inv_logdet: float

    @property
    def n(self) -> int:
        return int(self.mat.shape[0])

    @classmethod
    def from_matrix(cls, M, config: Config = DEFAULT, check: bool = True) -> "ProjMat":
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch("expected a square matrix")
        if check:
            cond = np.linalg.cond(M)
            if not np.isfinite(cond) or cond > config.kappa_max:
                raise NotInvertible(f"condition number {cond:.3e} exceeds {config.kappa_max:.1e}")
        C, _ = canonical_matrix(M, config)
        try:
            Ci = np.linalg.inv(C)
        except np.linalg.LinAlgError as exc:
            raise NotInvertible(str(exc)) from exc
        Ci, _ = canonical_matrix(Ci, config)
        return cls._frozen(C, Ci, np.linalg.slogdet(C)[1], np.linalg.slogdet(Ci)[1])

    @classmethod
    def _frozen(cls, C, Ci, ld, ild) -> "ProjMat":
        C = np.array(C, dtype=float)
        Ci = np.array(Ci, dtype=float)
        C.setflags(write=False)
        Ci.setflags(write=False)
        return cls(C, Ci, float(ld), float(ild))

    @classmethod
    def identity(cls, n: int) -> "ProjMat":
        return cls.from_matrix(np.eye(n))

    def inverse(self) -> "ProjMat":
        return ProjMat(self.inv, self.mat, self.inv_logdet, self.logdet)

    def __matmul__(self, other: "ProjMat") -> "ProjMat":
        _check_dim(self.n, other.n)
        P, s = canonical_matrix(self.mat @ other.mat)
        Q, t = canonical_matrix(other.inv @ self.inv)
        n = self.n
        return ProjMat._frozen(
            P,
            Q,
            self.logdet + other.logdet + n * np.log(abs(s)),
            self.inv_logdet + other.inv_logdet + n * np.log(abs(t)),
        )

    def apply(self, p: ProjPoint) -> ProjPoint:
        _check_dim(self.n, p.n)
        return normalize_point(self.mat @ p.rep)

    def apply_dual(self, h: ProjHyperplane) -> ProjHyperplane:
        """Action on hyperplanes: the covector ``l`` goes to ``l o g^-1``."""
        _check_dim(self.n, h.n)
        return normalize_hyperplane(self.inv.T @ h.covector)

    def transpose_inverse(self) -> "ProjMat":
        """The contragredient element acting on the dual space."""
        return ProjMat._frozen(
            canonical_matrix(self.inv.T)[0],
            canonical_matrix(self.mat.T)[0],
            self.inv_logdet,
            self.logdet,
        )

    def equals(self, other: "ProjMat", tol: float = DEFAULT.eps_mat) -> bool:
        if self.n != other.n:
            return False
        d = min(np.max(np.abs(self.mat - other.mat)), np.max(np.abs(self.mat + other.mat)))
        return bool(d <= tol)

    def __repr__(self) -> str:
        return f"ProjMat(n={self.n})"


def as_projmat(g, config: Config = DEFAULT) -> ProjMat:
    return g if isinstance(g, ProjMat) else ProjMat.from_matrix(g, config)


# ---------------------------------------------------------------------------
# spectral projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Cartan projection ``mu`` and Jordan projection ``lam``, both descending."""

    mu: np.ndarray
    lam: np.ndarray

    def mu_gap(self, i: int, j: int) -> float:
        """``mu_i - mu_j`` with 1-based indices."""
        return float(self.mu[i - 1] - self.mu[j - 1])

    def lam_gap(self, i: int, j: int) -> float:
        return float(self.lam[i - 1] - self.lam[j - 1])


def _two_sided(top: np.ndarray, bottom_from_inverse: np.ndarray) -> np.ndarray:
    """Merge two estimates of a descending log-spectrum.

    ``top`` is accurate for entries near the largest value and
    ``bottom_from_inverse`` for entries near the smallest one.
    """
    mid = 0.5 * (top[..., :1] + bottom_from_inverse[..., -1:])
    out = np.where(top > mid, top, bottom_from_inverse)
    return -np.sort(-out, axis=-1)


def batch_mu(M, logdet, N, inv_logdet) -> np.ndarray:
    """Cartan projections for stacks of canonical matrices and inverses."""
    n = M.shape[-1]
    with np.errstate(divide="ignore"):
        sM = np.log(np.linalg.svd(M, compute_uv=False))
        sN = np.log(np.linalg.svd(N, compute_uv=False))
    logc = (np.asarray(logdet) + np.asarray(inv_logdet)) / n
    alt = logc[..., None] - sN[..., ::-1]
    return _two_sided(sM, alt)


def batch_lam(M, logdet, N, inv_logdet) -> np.ndarray:
    n = M.shape[-1]
    with np.errstate(divide="ignore"):
        lM = -np.sort(-np.log(np.abs(np.linalg.eigvals(M))), axis=-1)
        lN = -np.sort(-np.log(np.abs(np.linalg.eigvals(N))), axis=-1)
    logc = (np.asarray(logdet) + np.asarray(inv_logdet)) / n
    alt = logc[..., None] - lN[..., ::-1]
    return _two_sided(lM, alt)


def spectral(g) -> SpectralData:
    """Cartan and Jordan projections of ``g`` (canonical lift)."""
    g = as_projmat(g)
    try:
        mu = batch_mu(g.mat, g.logdet, g.inv, g.inv_logdet)
        lam = batch_lam(g.mat, g.logdet, g.inv, g.inv_logdet)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(lam))):
        raise NumericalFailure("non-finite spectral data")
    mu.setflags(write=False)
    lam.setflags(write=False)
    return SpectralData(mu, lam)


def norm_identity_gap(g) -> float:
    """``log(||g|| ||g^-1||)`` with operator norms."""
    g = as_projmat(g)
    M = g.mat
    return float(np.log(np.linalg.norm(M, 2) * np.linalg.norm(np.linalg.inv(M), 2)))


def jordan_from_cartan(g, k: int = 12) -> float:
    """Estimate ``lambda_1`` as ``mu_1(g^(2^k)) / 2^k`` by repeated squaring."""
    g = as_projmat(g)
    M = g.mat
    top = np.linalg.norm(M, 2)
    acc = np.log(top)
    M = M / top
    for _ in range(k):
        M = M @ M
        s = np.linalg.norm(M, 2)
        acc = 2 * acc + np.log(s)
        M = M / s
    return float(acc / 2**k)


def is_proximal(g, tau: float = DEFAULT.proximal_tau) -> bool:
    """True iff ``lambda_1 - lambda_2 > tau``."""
    sd = spectral(g)
    return sd.lam.size > 1 and sd.lam_gap(1, 2) > tau


def is_proximal_dual(g, tau: float = DEFAULT.proximal_tau) -> bool:
    """True iff ``lambda_{n-1} - lambda_n > tau``."""
    sd = spectral(g)
    n = sd.lam.size
    return n > 1 and sd.lam_gap(n - 1, n) > tau


def _top_eigenvector(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eig(M)
    idx = int(np.argmax(np.abs(w)))
    return np.real(V[:, idx])


def attracting_fixed_point(g, config: Config = DEFAULT) -> ProjPoint:
    """Attracting fixed point of a proximal element in P(V)."""
    g = as_projmat(g, config)
    if not is_proximal(g, config.proximal_tau):
        raise NotProximal("lambda_1 - lambda_2 is not positive")
    p = normalize_point(_top_eigenvector(g.mat), config)
    if chordal_distance(g.apply(p), p) >= config.fixed_point_tol:
        raise NumericalFailure("eigenvector is not a fixed point to tolerance")
    return p


def attracting_fixed_hyperplane(g, config: Config = DEFAULT) -> ProjHyperplane:
    """Attracting fixed point of ``g`` acting on the dual projective space."""
    g = as_projmat(g, config)
    if not is_proximal_dual(g, config.proximal_tau):
        raise NotProximal("lambda_{n-1} - lambda_n is not positive")
    h = normalize_hyperplane(_top_eigenvector(g.inv.T), config)
    img = g.apply_dual(h)
    if chordal_distance(ProjPoint(img.covector), ProjPoint(h.covector)) >= config.fixed_point_tol:
        raise NumericalFailure("eigenvector is not a fixed hyperplane to tolerance")
    return h


def points_array(points: Sequence[ProjPoint]) -> np.ndarray:
    return np.vstack([p.rep for p in points]) if len(points) else np.zeros((0, 0))
