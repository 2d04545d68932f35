"""Finitely generated subgroups of PGL(n, R).

Word balls are enumerated breadth-first with deduplication by quantized
hashing of canonical matrices.  On top of a ball we compute orbits, the
quasi-isometry defect ``max(2 d(z, g z) - (mu_1 - mu_n)(g))`` and the
per-sphere singular-value gap profile used as an Anosov diagnostic.

Example
-------
>>> import numpy as np
>>> from convexcore.groups import GroupSpec, word_ball
>>> G = GroupSpec.from_matrices({"a": np.diag([2.0, 1, 1]), "b": np.diag([1.0, 2, 1])})
>>> len(word_ball(G, 3))
25
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cloud import PointCloud
from .config import DEFAULT, Config
from .domains import ConvexDomain, hilbert_distance_many, is_invariant
from .errors import (
    BallTooLarge,
    DimensionMismatch,
    DomainNotInvariant,
    InputError,
    NotInterior,
)
from .projlin import ProjMat, as_projmat, batch_canonical, batch_mu, canonical_rows


# ---------------------------------------------------------------------------
# specs and elements
# ---------------------------------------------------------------------------


def _inverse_label(label: str) -> str:
    if len(label) == 1 and label.isalpha():
        return label.swapcase()
    return label + "^-1"


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """Generators with unique labels; inverses are added as letters on demand."""

    labels: tuple[str, ...]
    generators: tuple[ProjMat, ...]
    include_inverses: bool = True

    def __post_init__(self):
        if len(self.labels) != len(self.generators) or not self.generators:
            raise InputError("need one label per generator and at least one generator")
        if len(set(self.labels)) != len(self.labels):
            raise InputError("generator labels must be unique")
        n = self.generators[0].n
        if any(g.n != n for g in self.generators):
            raise DimensionMismatch("generators differ in dimension")

    @classmethod
    def from_matrices(
        cls, gens: Mapping[str, np.ndarray], include_inverses: bool = True, config: Config = DEFAULT
    ) -> "GroupSpec":
        labels = tuple(gens)
        return cls(labels, tuple(as_projmat(gens[k], config) for k in labels), include_inverses)

    @property
    def n(self) -> int:
        return self.generators[0].n

    def letters(self) -> tuple[list[str], list[ProjMat], list[int]]:
        """Alphabet: labels, matrices and the index of each letter's inverse.

        An inverse letter absent from the alphabet has inverse index ``-1``.
        """
        labels = list(self.labels)
        mats = list(self.generators)
        k = len(labels)
        inv = [-1] * k
        if self.include_inverses:
            for i in range(k):
                labels.append(_inverse_label(self.labels[i]))
                mats.append(self.generators[i].inverse())
                inv[i] = k + i
            inv += list(range(k))
        return labels, mats, inv

    def word_label(self, word: Sequence[int]) -> str:
        labels = self.letters()[0]
        if all(len(lbl) == 1 for lbl in labels):
            return "".join(labels[i] for i in word) or "e"
        return ".".join(labels[i] for i in word) or "e"

    def evaluate(self, word: Sequence[int]) -> ProjMat:
        mats = self.letters()[1]
        g = ProjMat.identity(self.n)
        for i in word:
            g = g @ mats[i]
        return g

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "generators": [{"label": l, "matrix": g.mat.tolist()} for l, g in zip(self.labels, self.generators)],
            "include_inverses": bool(self.include_inverses),
        }

    @classmethod
    def from_json(cls, spec: dict, config: Config = DEFAULT) -> "GroupSpec":
        try:
            n = int(spec["n"])
            gens = {g["label"]: np.asarray(g["matrix"], dtype=float) for g in spec["generators"]}
            if len(gens) != len(spec["generators"]):
                raise InputError("generator labels must be unique")
            inc = bool(spec.get("include_inverses", True))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed group spec: {exc}") from exc
        if any(m.shape != (n, n) for m in gens.values()):
            raise DimensionMismatch(f"generators must be {n}x{n}")
        return cls.from_matrices(gens, inc, config)

    def dual(self) -> "GroupSpec":
        """The contragredient group ``g -> g^{-T}`` acting on the dual space."""
        return GroupSpec(self.labels, tuple(g.transpose_inverse() for g in self.generators), self.include_inverses)


def dual_group(G: GroupSpec) -> GroupSpec:
    return G.dual()


def load_group(path: str, config: Config = DEFAULT) -> GroupSpec:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read group spec {path}: {exc}") from exc
    return GroupSpec.from_json(spec, config)


@dataclass(frozen=True, eq=False)
class GroupElement:
    word: tuple[int, ...]
    matrix: ProjMat

    @property
    def length(self) -> int:
        return len(self.word)


# ---------------------------------------------------------------------------
# word balls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NumericalCollision:
    """Two words whose canonical matrices agree to ``10 eps_mat`` but not ``eps_mat``."""

    kept: tuple[int, ...]
    other: tuple[int, ...]
    distance: float


def _hash_normal(W: np.ndarray) -> np.ndarray:
    """Flip each flattened matrix so its first large entry is positive.

    The canonical sign uses the first entry above ``eps_sign``, which can
    flip under roundoff for tiny entries; anchoring on an entry at least half
    the maximum makes the hash sign-stable.
    """
    A = np.abs(W)
    big = A >= 0.5 * A.max(axis=1, keepdims=True)
    first = np.argmax(big, axis=1)
    s = np.sign(W[np.arange(len(W)), first])
    s[s == 0] = 1.0
    return W * s[:, None]


class BallIndex:
    """All distinct elements of word length at most ``R``, sphere by sphere."""

    def __init__(self, G: GroupSpec, config: Config = DEFAULT, hash_cell: float | None = None):
        self.group = G
        self.config = config
        self.hash_cell = config.hash_cell if hash_cell is None else hash_cell
        n = G.n
        self._mats = [np.eye(n)[None]]
        self._invs = [np.eye(n)[None]]
        self._ld = [np.zeros(1)]
        self._ild = [np.zeros(1)]
        self.words: list[tuple[int, ...]] = [()]
        self.sphere_starts = [0, 1]
        self.collisions: list[NumericalCollision] = []
        self._flat_normal = [_hash_normal(np.eye(n).reshape(1, -1))]
        self._tables = ({}, {})
        self._insert_keys(0, self._flat_normal[0][0])
        self._cache = None

    # -- storage -----------------------------------------------------------
    def _keys(self, w: np.ndarray) -> tuple[bytes, bytes]:
        q = w / self.hash_cell
        return np.floor(q).astype(np.int64).tobytes(), np.floor(q + 0.5).astype(np.int64).tobytes()

    def _insert_keys(self, idx: int, w: np.ndarray) -> None:
        for table, key in zip(self._tables, self._keys(w)):
            table.setdefault(key, []).append(idx)

    def _arrays(self):
        if self._cache is None:
            self._cache = (
                np.concatenate(self._mats),
                np.concatenate(self._invs),
                np.concatenate(self._ld),
                np.concatenate(self._ild),
                np.concatenate(self._flat_normal),
            )
        return self._cache

    @property
    def mats(self) -> np.ndarray:
        return self._arrays()[0]

    @property
    def invs(self) -> np.ndarray:
        return self._arrays()[1]

    @property
    def logdets(self) -> np.ndarray:
        return self._arrays()[2]

    @property
    def inv_logdets(self) -> np.ndarray:
        return self._arrays()[3]

    @property
    def radius(self) -> int:
        return len(self.sphere_starts) - 2

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(w) for w in self.words], dtype=int)

    def __len__(self) -> int:
        return len(self.words)

    def sphere(self, r: int) -> np.ndarray:
        """Indices of the elements of word length exactly ``r``."""
        if r < 0 or r > self.radius:
            return np.zeros(0, dtype=int)
        return np.arange(self.sphere_starts[r], self.sphere_starts[r + 1])

    def sphere_sizes(self) -> list[int]:
        return [int(b - a) for a, b in zip(self.sphere_starts[:-1], self.sphere_starts[1:])]

    def element(self, i: int) -> GroupElement:
        M, N, ld, ild, _ = self._arrays()
        return GroupElement(self.words[i], ProjMat._frozen(M[i], N[i], ld[i], ild[i]))

    def elements(self) -> list[GroupElement]:
        return [self.element(i) for i in range(len(self))]

    def mu(self, idx: np.ndarray | None = None) -> np.ndarray:
        M, N, ld, ild, _ = self._arrays()
        if idx is not None:
            M, N, ld, ild = M[idx], N[idx], ld[idx], ild[idx]
        if len(M) == 0:
            return np.zeros((0, self.group.n))
        return batch_mu(M, ld, N, ild)

    # -- growth ------------------------------------------------------------
    def _expand_chunk(self, front: np.ndarray, letters) -> tuple:
        Lm, Li, Ld, Lid = letters
        M, N, ld, ild, _ = self._arrays()
        F, Fi = M[front], N[front]
        n = self.group.n
        P = np.einsum("fij,ljk->flik", F, Lm).reshape(-1, n, n)
        Q = np.einsum("lij,fjk->flik", Li, Fi).reshape(-1, n, n)
        P, sp = batch_canonical(P, self.config)
        Q, sq = batch_canonical(Q, self.config)
        lp = (ld[front][:, None] + Ld[None, :]).reshape(-1) + n * sp
        lq = (ild[front][:, None] + Lid[None, :]).reshape(-1) + n * sq
        return P, Q, lp, lq, _hash_normal(P.reshape(len(P), -1))

    def grow(self, jobs: int = 1) -> None:
        """Add the next sphere."""
        G, cfg = self.group, self.config
        _, mats, _ = G.letters()
        Lm = np.stack([g.mat for g in mats])
        Li = np.stack([g.inv for g in mats])
        Ld = np.array([g.logdet for g in mats])
        Lid = np.array([g.inv_logdet for g in mats])
        front = self.sphere(self.radius)
        projected = len(self) + len(front) * len(mats)
        if projected > cfg.ball_cap:
            raise BallTooLarge(f"projected ball size {projected} exceeds cap {cfg.ball_cap}")
        letters = (Lm, Li, Ld, Lid)
        chunks = np.array_split(front, max(1, min(jobs, len(front)))) if len(front) else []
        if jobs > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                parts = list(pool.map(lambda c: self._expand_chunk(c, letters), chunks))
        else:
            parts = [self._expand_chunk(c, letters) for c in chunks]
        if parts:
            P = np.concatenate([p[0] for p in parts])
            Q = np.concatenate([p[1] for p in parts])
            lp = np.concatenate([p[2] for p in parts])
            lq = np.concatenate([p[3] for p in parts])
            H = np.concatenate([p[4] for p in parts])
            parents = np.repeat(front, len(mats))
            letter = np.tile(np.arange(len(mats)), len(front))
            self._dedup_candidates(P, Q, lp, lq, H, parents, letter)
        self.sphere_starts.append(len(self))
        self._cache = None

    def _dedup_candidates(self, P, Q, lp, lq, H, parents, letter):
        cfg = self.config
        _, _, _, _, Hall = self._arrays()
        stored_new: list[np.ndarray] = []
        base = len(self)
        keep = []

        def lookup(j: int) -> np.ndarray:
            return Hall[j] if j < base else stored_new[j - base]

        for c in range(len(P)):
            w = H[c]
            k1, k2 = self._keys(w)
            cands = set(self._tables[0].get(k1, ())) | set(self._tables[1].get(k2, ()))
            dup = False
            for j in sorted(cands):
                d = float(np.max(np.abs(lookup(j) - w)))
                if d <= cfg.eps_mat:
                    dup = True
                    break
                if d <= 10 * cfg.eps_mat:
                    word = self.words[parents[c]] + (int(letter[c]),)
                    self.collisions.append(NumericalCollision(self.words[j], word, d))
            if dup:
                continue
            idx = base + len(stored_new)
            stored_new.append(w)
            self._insert_keys(idx, w)
            self.words.append(self.words[parents[c]] + (int(letter[c]),))
            keep.append(c)
        keep = np.asarray(keep, dtype=int)
        self._mats.append(P[keep])
        self._invs.append(Q[keep])
        self._ld.append(lp[keep])
        self._ild.append(lq[keep])
        self._flat_normal.append(H[keep].reshape(len(keep), H.shape[-1]))


def word_ball(
    G: GroupSpec,
    R: int,
    config: Config = DEFAULT,
    jobs: int = 1,
    hash_cell: float | None = None,
) -> BallIndex:
    """Distinct elements of word length at most ``R`` with shortest witness words.

    Words grow by right multiplication in breadth-first order, so each stored
    word is a geodesic one and the output is deterministic for any ``jobs``.
    """
    if R < 0:
        raise InputError("radius must be nonnegative")
    ball = BallIndex(G, config, hash_cell)
    for _ in range(R):
        ball.grow(jobs)
    return ball


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------


def _seed_array(seeds, n: int) -> np.ndarray:
    S = np.atleast_2d(np.vstack([getattr(s, "rep", s) for s in seeds]).astype(float))
    if S.shape[1] != n:
        raise DimensionMismatch("seed dimension does not match the group")
    return S


def orbit(
    G: GroupSpec,
    omega: ConvexDomain | None,
    seeds: Sequence,
    R: int,
    ball: BallIndex | None = None,
    lengths: Sequence[int] | None = None,
    config: Config = DEFAULT,
) -> PointCloud:
    """``{g s : g in ball(R), s in seeds}`` tagged by seed and word length.

    ``lengths`` restricts to elements of the given word lengths.  Points are
    ordered seed by seed, then in ball order.
    """
    S = _seed_array(seeds, G.n)
    if omega is not None:
        codes = omega.classify(S)
        if np.any(codes != 1):
            raise NotInterior("orbit seeds must be interior points of the domain")
    ball = ball if ball is not None and ball.radius >= R else word_ball(G, R, config)
    idx = np.flatnonzero(ball.lengths <= R)
    if lengths is not None:
        idx = idx[np.isin(ball.lengths[idx], list(lengths))]
    M = ball.mats[idx]
    wl = ball.lengths[idx]
    pts, srcs, wls = [], [], []
    for k, s in enumerate(S):
        pts.append(M @ s)
        srcs += [f"OrbitTail(seed={k})"] * len(idx)
        wls.append(wl)
    if not len(idx):
        return PointCloud.empty(G.n)
    return PointCloud(canonical_rows(np.vstack(pts)), tuple(srcs), np.concatenate(wls))


# ---------------------------------------------------------------------------
# quasi-isometry defect
# ---------------------------------------------------------------------------


def _apply_words(mats: np.ndarray, words: list[tuple[int, ...]], z: np.ndarray) -> np.ndarray:
    """Rows ``w z`` for each word, applying letters right to left with renormalization."""
    m = len(words)
    out = np.repeat(z[None, :] / np.linalg.norm(z), m, axis=0)
    if m == 0:
        return out
    L = max((len(w) for w in words), default=0)
    for pos in range(L - 1, -1, -1):
        sel = np.array([i for i, w in enumerate(words) if len(w) > pos], dtype=int)
        if sel.size == 0:
            continue
        letters = np.array([words[i][pos] for i in sel], dtype=int)
        v = np.einsum("mij,mj->mi", mats[letters], out[sel])
        out[sel] = v / np.linalg.norm(v, axis=1, keepdims=True)
    return out


@dataclass(frozen=True)
class QIDefect:
    """Running maximum of ``2 d(z, g z) - (mu_1 - mu_n)(g)`` over the ball."""

    kappa: float
    violations: int
    argmax_word: str
    per_radius: list[float] = field(default_factory=list)
    min_slack: float = 0.0

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "violations": self.violations,
            "argmax_word": self.argmax_word,
            "per_radius": list(self.per_radius),
            "min_slack": self.min_slack,
        }


def qi_defect(
    G: GroupSpec,
    omega: ConvexDomain,
    z,
    R: int,
    ball: BallIndex | None = None,
    config: Config = DEFAULT,
    check_invariance: bool = True,
) -> QIDefect:
    """Smallest ``kappa`` with ``(mu_1 - mu_n)(g) >= 2 d(z, g z) - kappa`` on ``ball(R)``.

    ``d(z, g z)`` is evaluated as ``d(h^-1 z, k z)`` for the split ``g = h k``
    of the witness word at its midpoint, which keeps both points well inside
    double precision for long words.
    """
    zr = np.asarray(getattr(z, "rep", z), dtype=float)
    if omega.classify(zr)[0] != 1:
        raise NotInterior("base point must be interior")
    if check_invariance and not is_invariant(omega, [g.mat for g in G.generators], tol=config.invariance_tol):
        raise DomainNotInvariant("the generators do not preserve the domain")
    ball = ball if ball is not None and ball.radius >= R else word_ball(G, R, config)
    idx = np.flatnonzero(ball.lengths <= R)
    _, mats, inv = G.letters()
    Lm = np.stack([g.mat for g in mats])
    words = [ball.words[i] for i in idx]
    heads, tails = [], []
    for w in words:
        h = len(w) // 2
        head_inv = tuple(inv[a] for a in reversed(w[:h]))
        if any(a < 0 for a in head_inv):
            head_inv = ()
            tails.append(w)
        else:
            tails.append(w[h:])
        heads.append(head_inv)
    A = _apply_words(Lm, heads, zr)
    B = _apply_words(Lm, tails, zr)
    d = hilbert_distance_many(omega, A, B)
    mu = ball.mu(idx)
    gap = mu[:, 0] - mu[:, -1]
    vals = 2.0 * d - gap
    lengths = ball.lengths[idx]
    per_radius = []
    running = -np.inf
    for r in range(R + 1):
        sel = lengths == r
        if np.any(sel):
            running = max(running, float(vals[sel].max()))
        per_radius.append(float(running))
    j = int(np.argmax(vals))
    kappa = float(vals[j])
    slack = gap + kappa - 2.0 * d
    return QIDefect(
        kappa=kappa,
        violations=int(np.sum(slack < -1e-9)),
        argmax_word=G.word_label(words[j]),
        per_radius=per_radius,
        min_slack=float(slack.min()),
    )


# ---------------------------------------------------------------------------
# gap profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapProfile:
    which: tuple[int, int]
    radii: list[int]
    sizes: list[int]
    min: list[float]
    mean: list[float]
    max: list[float]
    slope: float
    intercept: float
    r2: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "which": list(self.which),
            "radii": self.radii,
            "sizes": self.sizes,
            "min": self.min,
            "mean": self.mean,
            "max": self.max,
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "verdict": self.verdict,
        }


def _fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    if len(x) < 2:
        return 0.0, float(y[0]) if len(y) else 0.0, 0.0
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), float(r2)


def gap_profile(
    G: GroupSpec,
    R: int,
    which: tuple[int, int] = (1, 2),
    ball: BallIndex | None = None,
    config: Config = DEFAULT,
) -> GapProfile:
    """Per-sphere min/mean/max of ``mu_i - mu_j`` and a verdict from the min.

    Empty spheres (finite groups) contribute a gap of zero: the gaps of a
    finite group are bounded.
    """
    i, j = which
    ball = ball if ball is not None and ball.radius >= R else word_ball(G, R, config)
    mu = ball.mu()
    gaps = mu[:, i - 1] - mu[:, j - 1]
    radii = list(range(R + 1))
    sizes, lo, mid, hi = [], [], [], []
    for r in radii:
        s = ball.sphere(r)
        sizes.append(int(s.size))
        g = gaps[s] if s.size else np.zeros(1)
        lo.append(float(g.min()))
        mid.append(float(g.mean()))
        hi.append(float(g.max()))
    slope, intercept, r2 = _fit_line(np.array(radii, dtype=float), np.array(lo))
    bounded = [r for r in radii if r >= 4 and lo[r] <= config.gap_max]
    run = any(all(r + t in bounded for t in range(3)) for r in bounded)
    if run:
        verdict = "NotAnosov"
    elif slope > config.slope_min and r2 > config.r2_min:
        verdict = "AnosovConsistent"
    else:
        verdict = "Inconclusive"
    return GapProfile((i, j), radii, sizes, lo, mid, hi, slope, intercept, r2, verdict)


# ---------------------------------------------------------------------------
# conical diagnostic
# ---------------------------------------------------------------------------


def conical_profile(cloud: PointCloud, omega: ConvexDomain, z0, x) -> list[float]:
    """Per word length, the smallest Hilbert distance from orbit points to the ray ``[z0, x)``.

    Bounded values along increasing word length indicate that ``x`` is a
    conical limit point of the sampled orbit.  Diagnostic only.
    """
    z0 = np.asarray(getattr(z0, "rep", z0), dtype=float)
    x = np.asarray(getattr(x, "rep", x), dtype=float)
    zh = omega.chart_lift(z0)[0]
    xh = x / (x @ omega.chart)
    ts = 1.0 - np.geomspace(1.0, 1e-8, 200)
    ray = zh[None, :] + ts[:, None] * (xh - zh)[None, :]
    ray = ray[omega.classify(ray) == 1]
    out = []
    for r in np.unique(cloud.word_lengths):
        P = cloud.points[cloud.word_lengths == r]
        P = P[omega.classify(P) == 1]
        if len(P) == 0 or len(ray) == 0:
            out.append(float("inf"))
            continue
        Y = np.repeat(P, len(ray), axis=0)
        Z = np.tile(ray, (len(P), 1))
        out.append(float(hilbert_distance_many(omega, Y, Z).min()))
    return out
