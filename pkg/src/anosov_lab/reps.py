"""Representations of free groups into SL(d, R).

Constructors cover explicit generator images, the irreducible
representation ``tau_d`` (in the monomial basis and in an orthonormal
rescaling of it), exterior powers, direct sums, conjugates and the
inverse transpose. :func:`build_cusp_rep` produces the representation of
SL(2, R) through the unipotent part of a weakly unipotent matrix.

Word evaluation is memoized. Because long products lose their small
singular values to rounding, :class:`Representation` also evaluates words
in every exterior power; singular values, eigenvalue moduli and attracting
planes are read off from those compound products.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, IllConditionedSpectrumError, PreconditionError, UndefinedSubspaceError
from .freegroup import cyclic_core, evaluate_word, inverse_word, multiply_words, reduce_word, rotations
from .hyperbolic import BoundaryPoint, MoebiusMap
from .matnum import (
    compound,
    is_weakly_unipotent,
    jordan_chevalley,
    kernel_flag,
    nilpotent_log,
    orth_complement,
    orthonormalize,
    plane_from_pluecker,
    top_direction_of_power,
)
from .posflags import Flag

BASES = ("monomial", "orthonormal")


# ---------------------------------------------------------------- tau_d

def _lift(m) -> np.ndarray:
    if isinstance(m, MoebiusMap):
        return m.lift
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
    return m


def tau_d(m, d: int) -> np.ndarray:
    """Image of an element of SL(2, R) under the d-dimensional irreducible representation.

    The basis vector ``e_{k+1}`` is the monomial ``e_1^(d-1-k) e_2^k``; with
    this identification the image of ``[[1, a], [0, 1]]`` is the upper
    triangular Pascal-type matrix with entries ``binom(j-1, k-1) a^(j-k)``.
    """
    if d < 1:
        raise DomainError("d must be at least 1")
    g = _lift(m)
    a, b, c, dd = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    P = np.polynomial.polynomial
    T = np.zeros((d, d))
    for k in range(d):
        # image of e_1^(d-1-k) e_2^k is (a e_1 + c e_2)^(d-1-k) (b e_1 + dd e_2)^k;
        # coefficient of y^i (y standing for e_2) goes to row i
        p = P.polymul(P.polypow([a, c], d - 1 - k), P.polypow([b, dd], k))
        T[:len(p), k] = p[:d]
    return T


def _orth_scaling(d: int) -> np.ndarray:
    return np.array([math.sqrt(math.comb(d - 1, k)) for k in range(d)])


def tau_d_orthogonal(m, d: int) -> np.ndarray:
    """``tau_d`` in the basis rescaled by ``sqrt(binom(d-1, k))``, so that SO(2) maps into SO(d)."""
    r = _orth_scaling(d)
    return tau_d(m, d) * r[None, :] / r[:, None]


def tau_in_basis(m, d: int, basis: str = "monomial") -> np.ndarray:
    if basis == "monomial":
        return tau_d(m, d)
    if basis == "orthonormal":
        return tau_d_orthogonal(m, d)
    raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")


def _section(x: BoundaryPoint) -> np.ndarray:
    """An element of SL(2, R) sending infinity to x, chosen well conditioned."""
    if x.is_infinite:
        return np.eye(2)
    if abs(x.x) <= 1.0:
        return np.array([[x.x, -1.0], [1.0, 0.0]])
    return np.array([[1.0, 0.0], [1.0 / x.x, 1.0]])


def veronese(x: BoundaryPoint, d: int, basis: str = "monomial") -> Flag:
    """The osculating flag ``xi_d(x) = tau_d(g_x) F_std`` with ``g_x(infinity) = x``.

    Any ``g_x`` works since the stabilizer of infinity is upper triangular
    and its image preserves the standard flag.
    """
    if d < 2:
        raise DomainError("d must be at least 2")
    if not isinstance(x, BoundaryPoint):
        x = BoundaryPoint(x)
    return Flag(tau_in_basis(_section(x), d, basis))


# ---------------------------------------------------------------- operations on matrices

def exterior_power(g: np.ndarray, k: int) -> np.ndarray:
    """``wedge^k g`` on the lexicographic basis ``e_I``."""
    return compound(g, k)


def block_diag(*mats) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    i = 0
    for m in mats:
        s = m.shape[0]
        out[i:i + s, i:i + s] = m
        i += s
    return out


# ---------------------------------------------------------------- representations

class Representation:
    """A homomorphism from a free group, given by generator images in SL(d, R).

    Parameters
    ----------
    generators : sequence of (d, d) arrays
        Images of the free generators.
    inverses : sequence of (d, d) arrays, optional
        Exact images of the inverse generators, when known in closed form.
    tag : dict, optional
        Description of the constructor, used in reports.
    cache_limit : int
        Maximal number of floats kept in the word caches.
    """

    def __init__(self, generators: Sequence, inverses: Optional[Sequence] = None, tag: Optional[dict] = None,
                 det_tol: float = 1e-8, cache_limit: int = 20_000_000):
        gens = [np.array(g, dtype=float) for g in generators]
        if not gens:
            raise DomainError("need at least one generator")
        d = gens[0].shape[0]
        for i, g in enumerate(gens):
            if g.shape != (d, d):
                raise DomainError(f"generator {i + 1} has shape {g.shape}, expected {(d, d)}")
            det = np.linalg.det(g)
            if abs(det - 1.0) > det_tol * max(1.0, np.linalg.norm(g, 2) ** d):
                raise DomainError(f"generator {i + 1} has determinant {det!r}, expected 1")
        if inverses is None:
            inverses = [np.linalg.inv(g) for g in gens]
        self.d = d
        self.rank = len(gens)
        self.tag = dict(tag or {"kind": "explicit"})
        self._letters = {}
        for i, (g, h) in enumerate(zip(gens, inverses), start=1):
            g = np.array(g, dtype=float)
            h = np.array(h, dtype=float)
            g.setflags(write=False)
            h.setflags(write=False)
            self._letters[i] = g
            self._letters[-i] = h
        self._cache = {}
        self._wedge_letters = {}
        self._wedge_cache = {}
        self._lock = threading.Lock()
        self._cache_limit = cache_limit
        self._cache_floats = 0

    # -- basic evaluation

    @property
    def generators(self) -> list:
        return [self._letters[i] for i in range(1, self.rank + 1)]

    def generator_image(self, letter: int) -> np.ndarray:
        if not 1 <= abs(letter) <= self.rank:
            raise DomainError(f"generator index {letter} out of range 1..{self.rank}")
        return self._letters[letter]

    def _store(self, cache, key, value):
        with self._lock:
            if key not in cache and self._cache_floats + value.size <= self._cache_limit:
                value.setflags(write=False)
                cache[key] = value
                self._cache_floats += value.size

    def evaluate(self, word: Sequence[int]) -> np.ndarray:
        """``rho(w)`` for a word, as the left-to-right product of generator images."""
        w = reduce_word(word)
        return self._eval(w, self._cache, self.generator_image, self.d)

    def _eval(self, w, cache, letter_image, dim):
        if not w:
            return np.eye(dim)
        hit = cache.get(w)
        if hit is not None:
            return hit
        # walk back to the longest cached prefix
        n = len(w) - 1
        while n > 0 and w[:n] not in cache:
            n -= 1
        m = cache[w[:n]] if n > 0 else np.eye(dim)
        for j in range(n, len(w)):
            m = m @ letter_image(w[j])
            self._store(cache, w[:j + 1], m)
        return m

    __call__ = evaluate

    def seed_cache(self, words: Sequence, images: Sequence) -> None:
        """Prefill the word cache with precomputed images (for example from a disk cache)."""
        for w, m in zip(words, images):
            self._store(self._cache, tuple(int(x) for x in w), np.array(m, dtype=float))

    # -- exterior powers

    def _wedge_letter(self, k):
        def image(letter):
            key = (k, letter)
            m = self._wedge_letters.get(key)
            if m is None:
                m = compound(self.generator_image(letter), k)
                m.setflags(write=False)
                self._wedge_letters[key] = m
            return m
        return image

    def wedge(self, word: Sequence[int], k: int) -> np.ndarray:
        """``wedge^k rho(w)``, evaluated as a product of compound generator images."""
        if not 0 <= k <= self.d:
            raise DomainError(f"k must lie in [0, {self.d}]")
        w = reduce_word(word)
        if k == 1:
            return self.evaluate(w)
        cache = self._wedge_cache.setdefault(k, {})
        dim = math.comb(self.d, k)
        return self._eval(w, cache, self._wedge_letter(k), dim)

    def log_wedge_norms(self, word: Sequence[int]) -> np.ndarray:
        """``log ||wedge^k rho(w)||_2`` for k = 0..d (so entries 0 and d vanish).

        For ``k > d/2`` the identity ``||wedge^k g|| = ||wedge^(d-k) g^{-1}||``
        (valid for det g = 1) replaces the tiny-singular-value products by
        large ones.
        """
        w = reduce_word(word)
        winv = inverse_word(w)
        d = self.d
        out = np.zeros(d + 1)
        for k in range(1, d):
            if 2 * k <= d:
                out[k] = math.log(np.linalg.norm(self.wedge(w, k), 2))
            else:
                out[k] = math.log(np.linalg.norm(self.wedge(winv, d - k), 2))
        return out

    def log_singular_values(self, word: Sequence[int]) -> np.ndarray:
        """``log sigma_1 >= ... >= log sigma_d`` of ``rho(w)``."""
        return np.diff(self.log_wedge_norms(word))

    def best_rotation(self, word: Sequence[int]) -> tuple:
        """``(h, r)`` with ``w = h r h^{-1}`` and ``r`` the cyclic rotation of the
        cyclic core of ``w`` with the smallest ``||rho(r)||_F`` (ties: first)."""
        u, core = cyclic_core(word)
        best = None
        for i, r in enumerate(rotations(core)):
            if not r:
                return u, ()
            nrm = np.linalg.norm(self.evaluate(r))
            if best is None or nrm < best[0] * (1 - 1e-12):
                best = (nrm, i, r)
        _, i, r = best
        h = multiply_words(u, core[:i])
        return h, r

    def log_eigen_moduli(self, word: Sequence[int]) -> np.ndarray:
        """``log lambda_1 >= ... >= log lambda_d`` of ``rho(w)``.

        Eigenvalue moduli are conjugation invariant, so the cyclically
        reduced rotation with the best conditioned image is used; the top
        eigenvalue modulus of ``wedge^k`` is ``lambda_1 ... lambda_k``.
        """
        _, r = self.best_rotation(word)
        if not r:
            return np.zeros(self.d)
        rinv = inverse_word(r)
        d = self.d
        logs = np.zeros(d + 1)
        for k in range(1, d):
            if 2 * k <= d:
                C = self.wedge(r, k)
            else:
                C = self.wedge(rinv, d - k)
            logs[k] = math.log(np.max(np.abs(np.linalg.eigvals(C))))
        return np.diff(logs)

    def log_singular_gaps(self, word) -> np.ndarray:
        return -np.diff(self.log_singular_values(word))

    def log_eigen_gaps(self, word) -> np.ndarray:
        return -np.diff(self.log_eigen_moduli(word))

    # -- attracting planes

    def attracting_plane(self, word: Sequence[int], k: int, target: float = 1e16) -> np.ndarray:
        """Orthonormal frame of the attracting k-plane of ``rho(w)``.

        The plane is the attracting line of ``wedge^k rho(r)`` for the best
        rotation ``r`` of the core of ``w`` (found as the top singular
        direction of a high power), converted from Pluecker coordinates and
        transported by ``rho(h)``. For ``k > d/2`` the annihilator of the
        attracting ``(d-k)``-plane of ``rho(w)^{-T}`` is used instead.

        Raises
        ------
        UndefinedSubspaceError
            If ``rho(w)`` is not P_k-proximal.
        """
        d = self.d
        if not 1 <= k <= d - 1:
            raise DomainError(f"k must lie in [1, {d - 1}]")
        h, r = self.best_rotation(word)
        if not r:
            raise UndefinedSubspaceError("identity has no attracting plane", gap=1.0)
        lam = self.log_eigen_moduli(r)
        gap = math.exp(lam[k - 1] - lam[k])
        if not gap > 1.0 + 1e-9:
            raise UndefinedSubspaceError(f"not P_{k}-proximal (eigenvalue gap {gap!r})", gap=gap)
        if 2 * k <= d:
            v, _ = top_direction_of_power(self.wedge(r, k), gap, target)
            P = plane_from_pluecker(v, d, k)
            return orthonormalize(self.evaluate(h) @ P)
        # attracting (d-k)-plane of rho(r)^{-T} is the attracting line of (wedge^(d-k) rho(r^-1))^T
        C = self.wedge(inverse_word(r), d - k).T
        v, _ = top_direction_of_power(C, gap, target)
        Pd = plane_from_pluecker(v, d, d - k)
        Pd = orthonormalize(self.evaluate(inverse_word(h)).T @ Pd)
        return orth_complement(Pd)

    def uk_plane(self, word: Sequence[int], k: int, gap_tol: float = 1e-10) -> np.ndarray:
        """``U_k(rho(w))`` (span of the k major axes) from compound products.

        Raises
        ------
        UndefinedSubspaceError
            If ``sigma_k / sigma_{k+1} <= 1 + gap_tol``.
        """
        d = self.d
        if not 1 <= k <= d - 1:
            raise DomainError(f"k must lie in [1, {d - 1}]")
        w = reduce_word(word)
        lsv = self.log_singular_values(w)
        gap = math.exp(lsv[k - 1] - lsv[k])
        if not gap > 1.0 + gap_tol:
            raise UndefinedSubspaceError(f"singular value gap {gap!r} at k={k} is too small", gap=gap)
        if 2 * k <= d:
            u, _, _ = np.linalg.svd(self.wedge(w, k))
            return plane_from_pluecker(u[:, 0], d, k)
        # U_k(g) is the annihilator of U_{d-k}(g^{-T}); wedge(g^{-T}) = wedge(g^{-1})^T
        _, _, vt = np.linalg.svd(self.wedge(inverse_word(w), d - k))
        return orth_complement(plane_from_pluecker(vt[0], d, d - k))

    def parabolic_flag(self, word: Sequence[int], tol: Optional[float] = None) -> Flag:
        """The unique invariant flag of an image with a single Jordan block of size d.

        Raises
        ------
        UndefinedSubspaceError
            If the image does not consist of one Jordan block.
        """
        h, r = self.best_rotation(word)
        if not r:
            raise UndefinedSubspaceError("identity has no distinguished flag")
        jc = jordan_chevalley(self.evaluate(r), tol)
        if len(jc.block_spec) != 1 or jc.block_spec[0].size != self.d:
            sizes = [b.size for b in jc.block_spec]
            raise UndefinedSubspaceError(f"image has Jordan blocks {sizes}, not a single block of size {self.d}")
        K = kernel_flag(jc.g_u - np.eye(self.d))
        return Flag(self.evaluate(h) @ K)

    def attracting_flag(self, word: Sequence[int], target: float = 1e16) -> Flag:
        """Attracting complete flag of a loxodromic image."""
        d = self.d
        planes = [self.attracting_plane(word, k, target) for k in range(1, d)]
        cols = []
        for k, P in enumerate(planes, start=1):
            if cols:
                Q = np.column_stack(cols)
                rest = P - Q @ (Q.T @ P)
            else:
                rest = P
            u, _, _ = np.linalg.svd(rest, full_matrices=False)
            cols.append(u[:, 0])
        cols.append(orth_complement(np.column_stack(cols))[:, 0])
        return Flag(np.column_stack(cols))

    # -- derived representations

    def inverse_transpose(self) -> "Representation":
        gens = [self._letters[-i].T.copy() for i in range(1, self.rank + 1)]
        invs = [self._letters[i].T.copy() for i in range(1, self.rank + 1)]
        return Representation(gens, invs, {"kind": "inverse_transpose", "base": self.tag})

    def describe(self) -> dict:
        return {"d": self.d, "rank": self.rank, "tag": self.tag}


def explicit_rep(matrices: Sequence) -> Representation:
    return Representation(matrices, tag={"kind": "explicit"})


def tau_rep(sl2_generators: Sequence, d: int, basis: str = "monomial") -> Representation:
    """``tau_d`` composed with the given SL(2, R) generator lifts."""
    lifts = [_lift(m) for m in sl2_generators]
    invs = [np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) for m in lifts]
    gens = [tau_in_basis(m, d, basis) for m in lifts]
    ginv = [tau_in_basis(m, d, basis) for m in invs]
    kind = "tau_d" if basis == "monomial" else "tau_d_orthogonal"
    rep = Representation(gens, ginv, {"kind": kind, "d": d, "basis": basis})
    rep.sl2_generators = lifts
    return rep


def lift_rep(sl2_generators: Sequence) -> Representation:
    return tau_rep(sl2_generators, 2)


def exterior_power_rep(base: Representation, k: int) -> Representation:
    gens = [compound(base.generator_image(i), k) for i in range(1, base.rank + 1)]
    invs = [compound(base.generator_image(-i), k) for i in range(1, base.rank + 1)]
    return Representation(gens, invs, {"kind": "exterior_power", "k": k, "base": base.tag})


def direct_sum(*parts: Representation) -> Representation:
    if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
        parts = tuple(parts[0])
    ranks = {p.rank for p in parts}
    if len(ranks) != 1:
        raise DomainError("direct summands must have the same number of generators")
    r = ranks.pop()
    gens = [block_diag(*(p.generator_image(i) for p in parts)) for i in range(1, r + 1)]
    invs = [block_diag(*(p.generator_image(-i) for p in parts)) for i in range(1, r + 1)]
    return Representation(gens, invs, {"kind": "direct_sum", "parts": [p.tag for p in parts]})


def conjugate(base: Representation, g: np.ndarray) -> Representation:
    """``w -> g rho(w) g^{-1}``."""
    g = np.asarray(g, dtype=float)
    gi = np.linalg.inv(g)
    gens = [g @ base.generator_image(i) @ gi for i in range(1, base.rank + 1)]
    invs = [g @ base.generator_image(-i) @ gi for i in range(1, base.rank + 1)]
    return Representation(gens, invs, {"kind": "conjugate", "base": base.tag})


def evaluate(rep: Representation, w: Sequence[int]) -> np.ndarray:
    return rep.evaluate(w)


# ---------------------------------------------------------------- cusp representations

@dataclass(frozen=True)
class CuspBlock:
    size: int
    kind: str          # "plain" or "rotation"
    theta: float       # 0 or pi for plain blocks, in (0, pi) for rotation blocks
    sign: int          # eigenvalue sign of a plain block; +1 for rotation blocks

    @property
    def real_dim(self) -> int:
        return 2 * self.size if self.kind == "rotation" else self.size

    def key(self, digits: int = 6) -> tuple:
        return (self.size, self.kind, round(self.theta, digits), self.sign)


@dataclass(frozen=True, eq=False)
class CuspRep:
    """``beta -> p^{-1} (direct sum of tau_{d_i}(beta) or tau_{d_i}(beta) ⊗ I_2) p``."""

    p: np.ndarray
    p_inv: np.ndarray
    blocks: tuple
    g_ss: np.ndarray
    g_u: np.ndarray

    @property
    def d(self) -> int:
        return self.p.shape[0]

    def model(self, beta) -> np.ndarray:
        """The block diagonal matrix before conjugation."""
        m = _lift(beta)
        parts = []
        for b in self.blocks:
            t = tau_d(m, b.size)
            parts.append(np.kron(t, np.eye(2)) if b.kind == "rotation" else t)
        return block_diag(*parts)

    def __call__(self, beta) -> np.ndarray:
        return self.p_inv @ self.model(beta) @ self.p

    def block_multiset(self, digits: int = 6) -> list:
        return sorted(b.key(digits) for b in self.blocks)


def _kernel(A, dim):
    _, _, vh = np.linalg.svd(A)
    return vh[A.shape[1] - dim:].conj().T


def _orth(A):
    if A.shape[1] == 0:
        return A
    q, _ = np.linalg.qr(A)
    return q


def _jordan_chains(X: np.ndarray, sizes: list) -> list:
    """Columns ``f_j = (j-1)! X^(s-j) v`` of Jordan chains of the nilpotent X.

    Block sizes are processed from the largest down; each generator is taken
    orthogonal to ``ker X^(s-1)`` plus the level-s vectors of longer chains.
    """
    m = X.shape[0]
    dt = X.dtype
    kers = {}

    def ker(j):
        if j not in kers:
            dim = sum(min(s, j) for s in sizes)
            kers[j] = np.zeros((m, 0), dtype=dt) if dim == 0 else _kernel(np.linalg.matrix_power(X, j), dim)
        return kers[j]

    chains = []   # (size, generator)
    out = []
    for s in sorted(set(sizes), reverse=True):
        count = sizes.count(s)
        known = [ker(s - 1)] + [np.linalg.matrix_power(X, t - s) @ v[:, None] for t, v in chains]
        A = _orth(np.column_stack(known)) if sum(k.shape[1] for k in known) else np.zeros((m, 0), dtype=dt)
        K = ker(s)
        rest = K - A @ (A.conj().T @ K) if A.shape[1] else K
        u, sv, _ = np.linalg.svd(rest, full_matrices=False)
        for c in range(count):
            v = u[:, c]
            chains.append((s, v))
    chains.sort(key=lambda t: -t[0])
    for s, v in chains:
        cols = [math.factorial(j - 1) * (np.linalg.matrix_power(X, s - j) @ v) for j in range(1, s + 1)]
        out.append((s, cols))
    return out


def build_cusp_rep(g: np.ndarray, tol: Optional[float] = None, unipotent_tol: float = 1e-6) -> CuspRep:
    """Representation ``Psi`` of SL(2, R) with ``Psi([[1, 1], [0, 1]]) = g_u``
    commuting with ``g_ss``.

    The real Jordan structure of ``g`` is read from its Jordan-Chevalley
    decomposition. On each generalized eigenspace, Jordan chains of
    ``X = log g_u`` are normalized so that ``X`` acts like the derivative of
    ``tau_s`` at ``[[0, 1], [0, 0]]``; for an eigenvalue pair
    ``e^{+-i theta}`` the chains are complex and contribute columns
    ``Re f_1, Im f_1, Re f_2, ...``, on which ``g_ss`` acts by ``M(theta)``.

    Raises
    ------
    PreconditionError
        If ``g`` is not weakly unipotent.
    IllConditionedSpectrumError
        If the Jordan structure cannot be resolved.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    wu = is_weakly_unipotent(g, unipotent_tol, tol)
    if not wu.value:
        raise PreconditionError(f"matrix is not weakly unipotent: {wu.reason}")
    jc = jordan_chevalley(g, tol)
    S, gu = jc.g_ss, jc.g_u
    X = nilpotent_log(gu)
    columns = []
    blocks = []
    for c in jc.clusters:
        sizes = [b.size for b in jc.block_spec if b.modulus == c.modulus and b.angle == c.angle]
        if c.is_real:
            mu = c.center.real
            Q = _kernel(S - mu * np.eye(d), c.multiplicity)
            Xr = Q.T @ X @ Q
            for s, cols in _jordan_chains(Xr, sizes):
                columns += [Q @ f for f in cols]
                blocks.append(CuspBlock(s, "plain", 0.0 if mu > 0 else math.pi, 1 if mu > 0 else -1))
        else:
            mu = c.center / abs(c.center)
            Q = _kernel(S.astype(complex) - mu * np.eye(d), c.multiplicity)
            Xc = Q.conj().T @ X @ Q
            theta = math.atan2(mu.imag, mu.real)
            for s, cols in _jordan_chains(Xc, sizes):
                for f in cols:
                    z = Q @ f
                    columns += [z.real, z.imag]
                blocks.append(CuspBlock(s, "rotation", theta, 1))
    p_inv = np.column_stack(columns)
    if p_inv.shape != (d, d):
        raise IllConditionedSpectrumError(f"Jordan basis has shape {p_inv.shape}, expected {(d, d)}")
    p = np.linalg.inv(p_inv)
    return CuspRep(p, p_inv, tuple(blocks), S, gu)
