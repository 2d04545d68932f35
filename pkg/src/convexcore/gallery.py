"""Named example groups with their domains, forms and expected verdicts.

Every constructor runs its self-checks at construction and raises
:class:`SelfCheckFailed` naming the failing check.

Example
-------
>>> from convexcore.gallery import diagonal_torus
>>> ex = diagonal_torus(3, 2.0)
>>> ex.expected, len(ex.group.generators)
('NonHyperbolicCCConsistent', 2)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import DEFAULT
from .domains import ConvexDomain, HalfspaceDomain, HullDomain, KleinBall, is_invariant
from .errors import BadParameters, InputError, LiftMissing, SelfCheckFailed
from .groups import GroupSpec
from .pqgeom import PQForm, bn_gram, rotation, tau_n
from .projlin import ProjMat, spectral

STRONG = "StronglyCCConsistent"
NONHYP = "NonHyperbolicCCConsistent"
NONE_FOUND = "NoInvariantConvexSetFound"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class ExampleDescriptor:
    """A named example: group, optional domain and form, expected verdict."""

    name: str
    params: dict
    group: GroupSpec
    domain: ConvexDomain | None = None
    form: PQForm | None = None
    expected: str = INCONCLUSIVE
    checks: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    lifts: tuple[np.ndarray, ...] | None = None

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "params": self.params,
            "group": self.group.to_json(),
            "expected": self.expected,
            "checks": self.checks,
            "flags": list(self.flags),
        }
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        if self.form is not None:
            out["form"] = self.form.to_json()
        return out


def _require(checks: dict, name: str, ok: bool) -> None:
    checks[name] = bool(ok)
    if not ok:
        raise SelfCheckFailed(f"self-check failed: {name}")


def unit_det_lift(M: np.ndarray) -> np.ndarray:
    """Scalar multiple of ``M`` with ``|det| = 1`` and positive scale."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    return M / abs(np.linalg.det(M)) ** (1.0 / n)


# ---------------------------------------------------------------------------
# diagonal groups and the affine Coxeter group
# ---------------------------------------------------------------------------


def diagonal_torus(n: int = 3, t: float = 2.0) -> ExampleDescriptor:
    """``Z^{n-1}`` of diagonal matrices with entries powers of ``t``, on the simplex."""
    if n < 2 or not t > 1.0:
        raise BadParameters("need n >= 2 and t > 1")
    gens = {}
    for i in range(n - 1):
        d = np.ones(n)
        d[i] = t
        gens[chr(ord("a") + i)] = np.diag(d)
    G = GroupSpec.from_matrices(gens)
    omega = HalfspaceDomain(np.eye(n))
    checks: dict = {}
    _require(checks, "simplex preserved", is_invariant(omega, [np.diag(np.diag(m)) for m in gens.values()], tol=1e-10))
    return ExampleDescriptor(
        "diagonal_torus", {"n": n, "t": t}, G, omega, None, NONHYP if n >= 3 else STRONG, checks
    )


def coxeter_An(n: int = 3, t: float = 2.0) -> ExampleDescriptor:
    """Affine Coxeter group of type ``A_n`` acting on ``R^n``.

    ``s_i`` swaps ``e_i`` and ``e_{i+1}`` for ``i < n``; ``s_n`` sends ``e_1``
    to ``t e_n`` and ``e_n`` to ``t^-1 e_1``, an involution whose product with
    the transposition of ``e_1, e_n`` is ``diag(t^-1, 1, ..., 1, t)``.
    """
    if n < 2 or not t > 1.0:
        raise BadParameters("need n >= 2 and t > 1")
    gens = {}
    for i in range(n - 1):
        P = np.eye(n)
        P[[i, i + 1]] = P[[i + 1, i]]
        gens[f"s{i + 1}"] = P
    S = np.eye(n)
    S[0, 0] = S[n - 1, n - 1] = 0.0
    S[n - 1, 0] = t
    S[0, n - 1] = 1.0 / t
    gens[f"s{n}"] = S
    checks: dict = {}
    _require(
        checks,
        "involutions",
        all(ProjMat.from_matrix(M @ M).equals(ProjMat.identity(n), 1e-10) for M in gens.values()),
    )
    omega = HalfspaceDomain(np.eye(n))
    _require(checks, "simplex preserved", is_invariant(omega, list(gens.values()), tol=1e-10))
    G = GroupSpec.from_matrices(gens, include_inverses=False)
    return ExampleDescriptor("coxeter_An", {"n": n, "t": t}, G, omega, None, NONHYP if n >= 3 else STRONG, checks)


# ---------------------------------------------------------------------------
# cyclic groups in PGL(3, R)
# ---------------------------------------------------------------------------


def _orbit_polygon(gamma: np.ndarray, seeds: Sequence[np.ndarray], extra: Sequence[np.ndarray], tol: float = 1e-13):
    """Hull of ``gamma^k s`` over ``|k| <= K`` plus ``extra``, with ``K`` past truncation ``tol``."""
    w = np.abs(np.linalg.eigvals(gamma))
    ratio = min(w.min() / np.median(w), np.median(w) / w.max())
    K = int(np.ceil(np.log(tol) / np.log(ratio))) + 2
    pts = []
    for s in seeds:
        v = np.asarray(s, dtype=float)
        u = v.copy()
        pts.append(v)
        Gi = np.linalg.inv(gamma)
        for _ in range(K):
            v = gamma @ v
            v = v / np.linalg.norm(v)
            u = Gi @ u
            u = u / np.linalg.norm(u)
            pts += [v, u]
    return np.vstack(pts + [np.asarray(e, dtype=float) for e in extra]), K


def cyclic_example(kind: str, **params) -> ExampleDescriptor:
    """Cyclic groups: ``a`` diagonal with distinct eigenvalues, ``b`` a double
    eigenvalue, ``c`` a unipotent block, ``d`` a rotation block."""
    checks: dict = {}
    if kind == "a":
        a, b, c = (float(params.get(k, v)) for k, v in (("a", 4.0), ("b", 2.0), ("c", 1.0)))
        if not a > b > c > 0:
            raise BadParameters("need a > b > c > 0")
        g = np.diag([a, b, c])
        V, K = _orbit_polygon(g, [np.array([1.0, 1.0, 1.0]), np.array([1.0, -1.0, 1.0])], [np.eye(3)[0], np.eye(3)[2]])
        omega = HullDomain(V, np.array([1.0, 0.0, 1.0]))
        _require(checks, "polygon preserved", is_invariant(omega, [g], tol=DEFAULT.invariance_tol))
        G = GroupSpec.from_matrices({"g": g})
        return ExampleDescriptor("cyclic_a", {"a": a, "b": b, "c": c}, G, omega, None, STRONG, checks)
    if kind == "b":
        a, b = float(params.get("a", 2.0)), float(params.get("b", 1.0))
        if not a > b > 0:
            raise BadParameters("need a > b > 0")
        g = np.diag([a, b, b])
        omega = HalfspaceDomain(np.eye(3))
        _require(checks, "simplex preserved", is_invariant(omega, [g], tol=1e-10))
        G = GroupSpec.from_matrices({"g": g})
        return ExampleDescriptor("cyclic_b", {"a": a, "b": b}, G, omega, None, INCONCLUSIVE, checks)
    if kind == "c":
        t = float(params.get("t", 1.0))
        if not t > 0:
            raise BadParameters("need t > 0")
        g = np.array([[2.0, 0.0, 0.0], [0.0, 1.0, t], [0.0, 0.0, 1.0]])
        G = GroupSpec.from_matrices({"g": g})
        lam = spectral(G.generators[0]).lam
        _require(checks, "jordan gaps", abs(lam[0] - lam[1] - np.log(2)) < 1e-9 and abs(lam[1] - lam[2]) < 1e-9)
        return ExampleDescriptor("cyclic_c", {"t": t}, G, None, None, NONE_FOUND, checks)
    if kind == "d":
        a, b = float(params.get("a", 2.0)), float(params.get("b", 1.0))
        theta = float(params.get("theta", np.pi / 2))
        if not (a > b > 0 and 0 < theta <= np.pi):
            raise BadParameters("need a > b > 0 and 0 < theta <= pi")
        g = np.zeros((3, 3))
        g[0, 0] = a
        g[1:, 1:] = b * rotation(theta)
        G = GroupSpec.from_matrices({"g": g})
        return ExampleDescriptor("cyclic_d", {"a": a, "b": b, "theta": theta}, G, None, None, NONE_FOUND, checks)
    raise BadParameters(f"unknown cyclic kind {kind!r}")


# ---------------------------------------------------------------------------
# Schottky groups in SO(2, 1)
# ---------------------------------------------------------------------------

# (a, b, c) -> (a - c, b, a + c) carries B_3 to half the standard form of signature (2, 1)
KLEIN_FRAME = np.array([[1.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]])


def _ping_pong(mats: Sequence[np.ndarray], samples: int = 4000, seed: int = 0) -> bool:
    """Sampled ping-pong on the Klein disk with half-disks cut by chords.

    For a boost ``g`` of translation length ``l`` whose axis passes through
    the origin with attracting direction ``u``, ``D_g = {x : x.u > tanh(l/2)}``.
    Checks that the closed half-disks of all letters are pairwise disjoint
    and that ``g`` maps the complement of ``D_{g^-1}`` into ``D_g``.
    """
    rng = np.random.default_rng(seed)
    letters = []
    for M in mats:
        for A in (M, np.linalg.inv(M)):
            w, V = np.linalg.eig(A)
            order = np.argsort(-np.abs(w))
            ell = float(np.log(abs(w[order[0]]) / abs(w[order[1]])))
            p = np.real(V[:, order[0]])
            u = p[:2] / p[2]
            if abs(np.linalg.norm(u) - 1.0) > 1e-8:
                return False
            letters.append((A, u, np.tanh(ell / 2.0)))
    r = np.sqrt(rng.uniform(0, 1, samples))
    phi = rng.uniform(0, 2 * np.pi, samples)
    disk = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    edge = np.column_stack([np.cos(phi), np.sin(phi)])
    pts = np.vstack([disk, edge])
    inside = [pts @ u >= h for _, u, h in letters]
    for i in range(len(letters)):
        for j in range(i + 1, len(letters)):
            if np.any(inside[i] & inside[j]):
                return False
    for k, (A, u, h) in enumerate(letters):
        inv = k + 1 if k % 2 == 0 else k - 1
        src = pts[~inside[inv]]
        H = np.column_stack([src, np.ones(len(src))]) @ A.T
        img = H[:, :2] / H[:, 2:]
        if np.any(img @ u < h - 1e-12):
            return False
    return True


def schottky_so21(s: float = 3.0, theta: float = np.pi / 4) -> ExampleDescriptor:
    """Free group on ``tau_3(A)`` and ``tau_3(R_theta A R_theta^-1)``, ``A = diag(s, 1/s)``.

    Generators are conjugated into the frame where the invariant form is
    ``diag(1, 1, -1)`` so that they act on the Klein disk.
    """
    if not s > 1.0 or not 0.0 < theta < np.pi / 2:
        raise BadParameters("need s > 1 and 0 < theta < pi/2")
    A = np.diag([s, 1.0 / s])
    R = rotation(theta)
    raw = [tau_n(A, 3), tau_n(R @ A @ R.T, 3)]
    B3 = bn_gram(3)
    checks: dict = {}
    _require(checks, "preserves B3", all(np.max(np.abs(g.T @ B3 @ g - B3)) < 1e-9 for g in raw))
    P = KLEIN_FRAME
    Pi = np.linalg.inv(P)
    gens = [P @ g @ Pi for g in raw]
    J = np.diag([1.0, 1.0, -1.0])
    _require(checks, "preserves Klein form", all(np.max(np.abs(g.T @ J @ g - J)) < 1e-9 for g in gens))
    omega = KleinBall(2)
    _require(checks, "disk preserved", is_invariant(omega, gens))
    ok = _ping_pong(gens)
    checks["ping-pong"] = ok
    G = GroupSpec.from_matrices({"a": gens[0], "b": gens[1]})
    return ExampleDescriptor(
        "schottky_so21",
        {"s": s, "theta": theta},
        G,
        omega,
        PQForm.standard(2, 1),
        STRONG,
        checks,
        () if ok else ("PingPongFailed",),
        tuple(gens),
    )


# ---------------------------------------------------------------------------
# inclusions and bending
# ---------------------------------------------------------------------------


def block_include(G: GroupSpec, n_extra: int, lifts: Sequence[np.ndarray] | None = None) -> GroupSpec:
    """Generators ``diag(g, I)`` acting trivially on an added ``R^{n_extra}``."""
    if n_extra < 1:
        raise InputError("n_extra must be positive")
    n = G.n
    mats = {}
    for k, (label, g) in enumerate(zip(G.labels, G.generators)):
        L = unit_det_lift(g.mat) if lifts is None else np.asarray(lifts[k], dtype=float)
        M = np.eye(n + n_extra)
        M[:n, :n] = L
        mats[label] = M
    H = GroupSpec.from_matrices(mats, G.include_inverses)
    for M in mats.values():
        mu_g = np.log(np.linalg.svd(M[:n, :n], compute_uv=False))
        merged = np.sort(np.concatenate([mu_g, np.zeros(n_extra)]))[::-1]
        if np.max(np.abs(np.log(np.linalg.svd(M, compute_uv=False)) - merged)) > 1e-8:
            raise SelfCheckFailed("self-check failed: merged Cartan projection")
    return H


def hpq_embed(m: int, p: int, q: int) -> np.ndarray:
    """Coordinate embedding ``R^{m,1} -> R^{p,q}`` (positive block, then first negative slot)."""
    if p < m or q < 1 or m < 1:
        raise InputError("need p >= m >= 1 and q >= 1")
    E = np.zeros((p + q, m + 1))
    E[:m, :m] = np.eye(m)
    E[p, m] = 1.0
    return E


@dataclass(frozen=True, eq=False)
class BentGroup:
    group: GroupSpec
    lifts: tuple[np.ndarray, ...]
    cocycle: tuple[np.ndarray, ...]
    checks: dict


def bend(
    G: GroupSpec,
    u: Mapping[str, np.ndarray],
    lifts: Sequence[np.ndarray] | None = None,
    domain: ConvexDomain | None = None,
    seed: int = 0,
    pairs: int = 100,
    max_len: int = 4,
) -> BentGroup:
    """Block upper triangular deformation ``[[g, u(g)], [0, I]]`` of ``G``.

    ``u`` assigns to each generator label a matrix ``Hom(V', V)``.  With a
    domain attached the caller must supply the lifts (the cone-preserving
    ones); otherwise the lifts with ``|det| = 1`` are used.
    """
    if lifts is None:
        if domain is not None:
            raise LiftMissing("a domain is attached, so the cone-preserving lifts must be supplied")
        lifts = [unit_det_lift(g.mat) for g in G.generators]
    lifts = tuple(np.asarray(L, dtype=float) for L in lifts)
    n = G.n
    U = tuple(np.asarray(u[label], dtype=float).reshape(n, -1) for label in G.labels)
    m = U[0].shape[1]
    gens = {}
    for label, L, Ug in zip(G.labels, lifts, U):
        M = np.eye(n + m)
        M[:n, :n] = L
        M[:n, n:] = Ug
        gens[label] = M
    H = GroupSpec.from_matrices(gens, G.include_inverses)

    # self-check of the cocycle identity on random word pairs
    k = len(lifts)
    letters = [(lifts[i], U[i]) for i in range(k)]
    full = [gens[label] for label in G.labels]
    if G.include_inverses:
        for i in range(k):
            Li = np.linalg.inv(lifts[i])
            letters.append((Li, -Li @ U[i]))
            full.append(np.linalg.inv(full[i]))
    rng = np.random.default_rng(seed)

    def word_data(word):
        g, c, F = np.eye(n), np.zeros((n, m)), np.eye(n + m)
        for a in word:
            La, Ua = letters[a]
            c = c + g @ Ua
            g = g @ La
            F = F @ full[a]
        return g, c, F

    worst = 0.0
    for _ in range(pairs):
        w1 = rng.integers(0, len(letters), rng.integers(1, max_len + 1))
        w2 = rng.integers(0, len(letters), rng.integers(1, max_len + 1))
        g1, c1, _ = word_data(w1)
        _, c2, _ = word_data(w2)
        _, _, F = word_data(np.concatenate([w1, w2]))
        block = F[:n, n:]
        expect = c1 + g1 @ c2
        worst = max(worst, float(np.max(np.abs(block - expect)) / max(1.0, np.max(np.abs(expect)))))
    checks = {"cocycle identity": worst <= 1e-9, "cocycle residual": worst}
    if worst > 1e-9:
        raise SelfCheckFailed("self-check failed: cocycle identity")
    return BentGroup(H, lifts, U, checks)


def coboundary(G: GroupSpec, phi: np.ndarray, lifts: Sequence[np.ndarray] | None = None) -> dict:
    """The cocycle ``u(g) = phi - g phi``."""
    lifts = lifts or [unit_det_lift(g.mat) for g in G.generators]
    return {label: phi - L @ phi for label, L in zip(G.labels, lifts)}


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

GALLERY: dict[str, tuple[Callable[..., ExampleDescriptor], dict]] = {
    "diagonal_torus": (diagonal_torus, {"n": 3, "t": 2.0}),
    "coxeter_An": (coxeter_An, {"n": 3, "t": 2.0}),
    "cyclic_a": (lambda **p: cyclic_example("a", **p), {"a": 4.0, "b": 2.0, "c": 1.0}),
    "cyclic_b": (lambda **p: cyclic_example("b", **p), {"a": 2.0, "b": 1.0}),
    "cyclic_c": (lambda **p: cyclic_example("c", **p), {"t": 1.0}),
    "cyclic_d": (lambda **p: cyclic_example("d", **p), {"a": 2.0, "b": 1.0, "theta": float(np.pi / 2)}),
    "schottky_so21": (schottky_so21, {"s": 3.0, "theta": float(np.pi / 4)}),
}


def gallery_names() -> list[str]:
    return sorted(GALLERY)


def build(name: str, **params) -> ExampleDescriptor:
    """Construct a gallery example by name, overriding default parameters."""
    if name not in GALLERY:
        raise InputError(f"unknown gallery example {name!r}")
    ctor, defaults = GALLERY[name]
    merged = dict(defaults)
    for key, val in params.items():
        if key not in defaults:
            raise InputError(f"unknown parameter {key!r} for {name}")
        merged[key] = type(defaults[key])(val)
    return ctor(**merged)
