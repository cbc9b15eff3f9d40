"""Dense numerical kernels for small real matrices.

Singular values, eigenvalue moduli, attracting and major-axis subspaces,
exterior powers (compound matrices), the Jordan-Chevalley decomposition and
conjugacy invariants. Everything here works on plain ``numpy`` arrays with
``d <= 16``.

Products of many matrices lose the small singular values to rounding. The
helpers :func:`compound` and :func:`log_sv_from_wedge_norms` support the
remedy used by :mod:`anosov_lab.reps`: evaluate words in every exterior
power and read ``log(sigma_1 ... sigma_k)`` off ``log ||wedge^k g||``.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    ConditioningError,
    IllConditionedSpectrumError,
    PreconditionError,
    UndefinedSubspaceError,
)

EPS = np.finfo(float).eps


# ---------------------------------------------------------------- exterior powers

@functools.lru_cache(maxsize=None)
def wedge_basis(d: int, k: int) -> tuple:
    """Lexicographic basis ``e_I`` of the k-th exterior power, as index tuples."""
    return tuple(itertools.combinations(range(d), k))


def wedge_derivation(X: np.ndarray, k: int) -> np.ndarray:
    """The derivation induced by ``X`` on the k-th exterior power.

    ``wedge^k exp(tX) = exp(t D)`` with ``D`` returned here, in the basis
    of :func:`wedge_basis`.
    """
    X = np.asarray(X, dtype=float)
    d = X.shape[0]
    basis = wedge_basis(d, k)
    index = {I: n for n, I in enumerate(basis)}
    D = np.zeros((len(basis), len(basis)))
    for col, I in enumerate(basis):
        for pos, j in enumerate(I):
            for i in range(d):
                if X[i, j] == 0.0:
                    continue
                if i != j and i in I:
                    continue
                J = I[:pos] + (i,) + I[pos + 1:]
                # moving e_i from slot pos to its sorted slot costs this many transpositions
                shift = sum(1 for a in J if a < i) - pos
                D[index[tuple(sorted(J))], col] += (-1) ** abs(shift) * X[i, j]
    return D


def nilpotent_log(u: np.ndarray) -> np.ndarray:
    """``log u`` for unipotent ``u`` by the terminating series."""
    d = u.shape[0]
    N = u - np.eye(d)
    X = np.zeros_like(N)
    P = np.eye(d)
    for k in range(1, d + 1):
        P = P @ N
        X += ((-1) ** (k + 1) / k) * P
    return X


def nilpotent_exp(X: np.ndarray, t: float = 1.0, order: Optional[int] = None) -> np.ndarray:
    """``exp(tX)`` for nilpotent ``X`` by the terminating series.

    ``order`` is the largest m with ``X^m != 0`` when known; cutting the
    series there keeps rounding noise in the higher powers of a computed
    ``X`` from being amplified by ``t^m``.
    """
    d = X.shape[0]
    out = np.eye(d)
    P = np.eye(d)
    for m in range(1, (d if order is None else min(order, d)) + 1):
        P = P @ X * (t / m)
        out = out + P
    return out


def compound(g: np.ndarray, k: int) -> np.ndarray:
    """The k-th compound matrix: all k x k minors of ``g`` in lexicographic order.

    This is the matrix of ``wedge^k g`` on the basis ``e_I``.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if not 0 <= k <= d:
        raise ValueError(f"k must lie in [0, {d}]")
    if k == 0:
        return np.ones((1, 1))
    if k == 1:
        return g.copy()
    idx = np.array(wedge_basis(d, k))
    sub = g[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def pluecker_vector(frame: np.ndarray) -> np.ndarray:
    """Pluecker coordinates (all maximal minors) of a d x k frame."""
    frame = np.asarray(frame, dtype=float)
    d, k = frame.shape
    if k == 0:
        return np.ones(1)
    idx = np.array(wedge_basis(d, k))
    return np.linalg.det(frame[idx, :])


@functools.lru_cache(maxsize=None)
def _wedge_vector_map(d, k):
    """Tensor T with (v wedge w)_J = sum_{i, I} T[J, i, I] v_i w_I for |I| = k."""
    src = {I: n for n, I in enumerate(wedge_basis(d, k))}
    dst = {J: n for n, J in enumerate(wedge_basis(d, k + 1))}
    T = np.zeros((len(dst), d, len(src)))
    for I, n in src.items():
        for i in range(d):
            if i in I:
                continue
            J = tuple(sorted(I + (i,)))
            sign = (-1) ** J.index(i)
            T[dst[J], i, n] = sign
    return T


def plane_from_pluecker(omega: np.ndarray, d: int, k: int) -> np.ndarray:
    """Orthonormal frame of the k-plane ``{v : v wedge omega = 0}``.

    ``omega`` should be (close to) decomposable; the plane is read off as
    the k smallest right singular vectors of ``v -> v wedge omega``.
    """
    if k == d:
        return np.eye(d)
    omega = np.asarray(omega, dtype=float)
    omega = omega / np.linalg.norm(omega)
    M = np.einsum("jin,n->ji", _wedge_vector_map(d, k), omega)
    _, _, vt = np.linalg.svd(M)
    return orthonormalize(vt[d - k:].T)


def log_sv_from_wedge_norms(log_norms: Sequence[float]) -> np.ndarray:
    """Log singular values from ``log ||wedge^k g||_2`` for k = 0..d."""
    return np.diff(np.asarray(log_norms, dtype=float))


# ---------------------------------------------------------------- spectra

@dataclass(frozen=True)
class SpectralData:
    sigma: np.ndarray
    lam: np.ndarray
    left_singular: np.ndarray
    eigenvalues: np.ndarray

    @property
    def d(self) -> int:
        return len(self.sigma)

    def log_singular_gaps(self) -> np.ndarray:
        return np.log(self.sigma[:-1]) - np.log(self.sigma[1:])

    def log_eigen_gaps(self) -> np.ndarray:
        return np.log(self.lam[:-1]) - np.log(self.lam[1:])


def sorted_eigenvalues(g: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(np.asarray(g, dtype=float))
    order = np.lexsort((-ev.imag, -np.abs(ev)))
    return ev[order]


def spectral(g: np.ndarray, cond_max: float = 1e15) -> SpectralData:
    """Singular values, eigenvalue moduli (both decreasing) and left singular frame."""
    g = np.asarray(g, dtype=float)
    u, s, _ = np.linalg.svd(g)
    if s[-1] <= 0 or s[0] / s[-1] > cond_max:
        raise ConditioningError(f"matrix is numerically singular (condition {s[0] / max(s[-1], 1e-300):.3g})")
    ev = sorted_eigenvalues(g)
    return SpectralData(sigma=s, lam=np.abs(ev), left_singular=u, eigenvalues=ev)


def eigen_moduli(g: np.ndarray) -> np.ndarray:
    return np.sort(np.abs(np.linalg.eigvals(np.asarray(g, dtype=float))))[::-1]


def singular_values(g: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(g, dtype=float), compute_uv=False)


# ---------------------------------------------------------------- subspaces

def orthonormalize(frame: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(np.asarray(frame, dtype=float))
    return q


def orth_complement(frame: np.ndarray) -> np.ndarray:
    """Orthonormal frame of the orthogonal complement of ``span(frame)``."""
    frame = np.asarray(frame, dtype=float)
    d, k = frame.shape
    q, _ = np.linalg.qr(frame, mode="complete")
    return q[:, k:]


def subspace_angle(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal angle between the column spans of A and B.

    Uses the sine formulation, which stays accurate for tiny angles.
    """
    A = orthonormalize(A)
    B = orthonormalize(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError("subspaces of different dimension")
    if A.shape[1] == 0:
        return 0.0
    resid = B - A @ (A.T @ B)
    s = np.linalg.norm(resid, 2)
    return float(math.asin(min(1.0, s)))


def uk_subspace(g: np.ndarray, k: int, gap_tol: float = 1e-10, g_inv: Optional[np.ndarray] = None) -> np.ndarray:
    """Span of the k major axes of ``g(S^{d-1})`` (top k left singular vectors).

    For ``k > d/2`` and a supplied inverse, the plane is computed as the
    orthogonal complement of ``U_{d-k}(g^{-T})``. That route only needs the
    *large* singular values of ``g^{-1}``, which are accurate even when the
    small singular values of ``g`` are not.

    Raises
    ------
    UndefinedSubspaceError
        If ``sigma_k / sigma_{k+1} <= 1 + gap_tol``.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in [1, {d - 1}]")
    if g_inv is not None and 2 * k > d:
        hinv = np.asarray(g_inv, dtype=float).T
        u, s, _ = np.linalg.svd(hinv)
        j = d - k
        gap = s[j - 1] / s[j]
        if not gap > 1.0 + gap_tol:
            raise UndefinedSubspaceError(f"singular value gap {gap!r} at k={k} is too small", gap=float(gap))
        return u[:, j:]
    u, s, _ = np.linalg.svd(g)
    gap = s[k - 1] / s[k] if s[k] > 0 else math.inf
    if not gap > 1.0 + gap_tol:
        raise UndefinedSubspaceError(f"singular value gap {gap!r} at k={k} is too small", gap=float(gap))
    return u[:, :k]


def normalized_power(g: np.ndarray, n: int) -> tuple:
    """``g^n`` by repeated squaring, rescaled at every step.

    Returns ``(M, log_scale)`` with ``g^n = exp(log_scale) * M`` and
    ``||M||_2 = 1``.
    """
    g = np.asarray(g, dtype=float)
    if n < 0:
        raise ValueError("n must be nonnegative")
    result = np.eye(g.shape[0])
    log_res = 0.0
    base = g.copy()
    log_base = 0.0
    while n:
        if n & 1:
            result = result @ base
            log_res += log_base
            s = np.linalg.norm(result, 2)
            result /= s
            log_res += math.log(s)
        n >>= 1
        if n:
            base = base @ base
            log_base *= 2
            s = np.linalg.norm(base, 2)
            base /= s
            log_base += math.log(s)
    return result, log_res


def top_direction_of_power(C: np.ndarray, gap: float, target: float = 1e16, max_doublings: int = 60) -> tuple:
    """Top left singular vector of ``C^n`` for ``n = 2^s`` with ``gap^n > target``.

    ``gap`` is the ratio of the two largest eigenvalue moduli of ``C``. The
    returned vector approximates the attracting eigenline of ``C``; the
    second value is the number of squarings used.
    """
    M = np.asarray(C, dtype=float)
    M = M / np.linalg.norm(M, 2)
    s = 0
    log_gap = math.log(gap) if gap > 1 else 0.0
    while s < max_doublings and (log_gap == 0.0 or (2 ** s) * log_gap < math.log(target)):
        M = M @ M
        M /= np.linalg.norm(M, 2)
        s += 1
    u, _, _ = np.linalg.svd(M)
    return u[:, 0], s


def attracting_subspace(g: np.ndarray, k: int, method: str = "schur", g_inv: Optional[np.ndarray] = None,
                        gap_tol: float = 1e-9) -> np.ndarray:
    """Orthonormal frame of the attracting k-plane of a P_k-proximal matrix.

    ``method="schur"`` reorders a real Schur form so that the ``k``
    eigenvalues of largest modulus lead; ``method="power"`` runs orthogonal
    iteration on repeated squares of ``g``. With ``g_inv`` supplied and
    ``k > d/2`` the plane is obtained as the annihilator of the attracting
    ``(d-k)``-plane of ``g^{-T}``.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in [1, {d - 1}]")
    if g_inv is not None and 2 * k > d:
        h = np.asarray(g_inv, dtype=float).T
        return orth_complement(attracting_subspace(h, d - k, method=method, gap_tol=gap_tol))
    lam = eigen_moduli(g)
    gap = lam[k - 1] / lam[k]
    if not gap > 1.0 + gap_tol:
        raise UndefinedSubspaceError(f"eigenvalue gap {gap!r} at k={k}: not P_k-proximal", gap=float(gap))
    if method == "schur":
        thresh = math.sqrt(lam[k - 1] * lam[k])
        _, Z, sdim = scipy.linalg.schur(g, output="real", sort=lambda x, y: math.hypot(x, y) > thresh)
        if sdim != k:
            raise UndefinedSubspaceError(f"Schur reordering selected {sdim} eigenvalues, expected {k}", gap=float(gap))
        return Z[:, :k]
    if method == "power":
        # the power must keep lambda_k / lambda_1 well above rounding, or the
        # k-th direction of G Q is lost; within that limit take it as large as possible
        spread = lam[0] / lam[k - 1]
        n = 1
        while n < 2 ** 20 and spread ** (2 * n) <= 1e2 and gap ** n < 1e4:
            n *= 2
        G, _ = normalized_power(g, n)
        iters = min(20000, int(math.ceil(math.log(1e17) / (n * math.log(gap)))) + 5)
        Q = orthonormalize(np.eye(d)[:, :k] + G[:, :k])
        for _ in range(iters):
            Qn = orthonormalize(G @ Q)
            if subspace_angle(Qn, Q) < 1e-15:
                Q = Qn
                break
            Q = Qn
        return Q
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------- proximality

@dataclass(frozen=True)
class ProximalityResult:
    value: bool
    gap: float
    loxodromic: bool
    moduli: tuple

    def __bool__(self):
        return self.value


def is_pk_proximal(g: np.ndarray, k: int, tol: float = 1e-9, moduli: Optional[Sequence[float]] = None) -> ProximalityResult:
    """``lambda_k / lambda_{k+1} > 1 + tol``; also reports whether every gap is open."""
    lam = np.asarray(moduli, dtype=float) if moduli is not None else eigen_moduli(g)
    d = len(lam)
    if not 1 <= k <= d - 1:
        raise ValueError(f"k must lie in [1, {d - 1}]")
    gaps = lam[:-1] / lam[1:]
    return ProximalityResult(bool(gaps[k - 1] > 1 + tol), float(gaps[k - 1]), bool(np.all(gaps > 1 + tol)),
                             tuple(float(x) for x in lam))


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with block layout ``[a_ij B]``."""
    return np.kron(np.asarray(A, dtype=float), np.asarray(B, dtype=float))


def rotation_block(theta: float) -> np.ndarray:
    """``M(theta) = [[cos, sin], [-sin, cos]]``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


# ---------------------------------------------------------------- Jordan-Chevalley

@dataclass(frozen=True)
class EigenCluster:
    """A cluster of eigenvalues; complex clusters carry ``Im(center) > 0`` and stand for a conjugate pair."""

    center: complex
    multiplicity: int
    members: tuple

    @property
    def is_real(self) -> bool:
        return self.center.imag == 0.0

    @property
    def modulus(self) -> float:
        return abs(self.center)

    @property
    def angle(self) -> float:
        return math.atan2(self.center.imag, self.center.real) % (2 * math.pi)


@dataclass(frozen=True)
class BlockSpec:
    """One real Jordan block: a ``size x size`` block (real eigenvalue) or a
    ``2 size x 2 size`` rotation-type block (eigenvalues ``modulus * e^{+-i angle}``)."""

    size: int
    modulus: float
    angle: float

    @property
    def is_rotation(self) -> bool:
        return 0.0 < self.angle < math.pi

    @property
    def real_dim(self) -> int:
        return 2 * self.size if self.is_rotation else self.size


def default_cluster_radius(g: np.ndarray) -> float:
    """Eigenvalue clustering radius in (log-modulus, angle) coordinates.

    A Jordan block of size m spreads its eigenvalues by about
    ``(eps * cond)^(1/m)``; the radius allows the worst case ``m = d``.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    s = singular_values(g)
    kappa = s[0] / s[-1]
    return float(np.clip(2.0 * (EPS * kappa * d) ** (1.0 / d), 1e-6, 0.2))


def _eig_coords(ev):
    return np.column_stack([np.log(np.abs(ev)), np.angle(ev)])


def _eig_dist(p, q):
    da = abs(p[1] - q[1]) % (2 * math.pi)
    da = min(da, 2 * math.pi - da)
    return math.hypot(p[0] - q[0], da)


def cluster_eigenvalues(g: np.ndarray, radius: Optional[float] = None, ambiguity: float = 4.0) -> list:
    """Single-linkage clusters of the eigenvalues of a real matrix.

    Distances are measured in ``(log|lambda|, arg lambda)``. Two clusters
    whose closest members lie between ``radius`` and ``ambiguity * radius``
    cannot be told apart reliably and raise
    :class:`IllConditionedSpectrumError`. Only clusters with
    ``Im(center) >= 0`` are returned; complex ones stand for conjugate pairs.
    """
    g = np.asarray(g, dtype=float)
    ev = np.linalg.eigvals(g)
    if np.any(ev == 0):
        raise ConditioningError("singular matrix has a zero eigenvalue")
    r = default_cluster_radius(g) if radius is None else radius
    pts = _eig_coords(ev)
    n = len(ev)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.array([[_eig_dist(pts[i], pts[j]) for j in range(n)] for i in range(n)])
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= r:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    groups = list(groups.values())
    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            dmin = min(dist[i, j] for i in groups[a] for j in groups[b])
            if dmin <= ambiguity * r:
                raise IllConditionedSpectrumError(
                    f"eigenvalue clusters at distance {dmin:.3g} cannot be separated at radius {r:.3g}")
    out = []
    for grp in groups:
        c = complex(np.mean(ev[grp]))
        # a conjugation-closed cluster has a real mean; the conjugate of a
        # complex cluster is a separate cluster at distance > radius
        if abs(c.imag) <= 0.25 * r * abs(c):
            out.append(EigenCluster(complex(c.real, 0.0), len(grp), tuple(grp)))
        elif c.imag > 0:
            out.append(EigenCluster(c, len(grp), tuple(grp)))
    out.sort(key=lambda c: (-abs(c.center), c.angle))
    return out


def _factor(S, c: EigenCluster):
    d = S.shape[0]
    if c.is_real:
        return S - c.center.real * np.eye(d)
    mu = c.center
    return S @ S - 2.0 * mu.real * S + abs(mu) ** 2 * np.eye(d)


def _factor_prime(S, c: EigenCluster):
    d = S.shape[0]
    if c.is_real:
        return np.eye(d)
    return 2.0 * S - 2.0 * c.center.real * np.eye(d)


def _semisimple_part(g, clusters, max_iter=60):
    S = g.copy()
    scale = max(np.linalg.norm(g, 2), 1.0)
    for _ in range(max_iter):
        facs = [_factor(S, c) for c in clusters]
        p = functools.reduce(np.matmul, facs, np.eye(g.shape[0]))
        if np.linalg.norm(p, 2) == 0.0:
            break
        dp = np.zeros_like(S)
        for i, c in enumerate(clusters):
            term = _factor_prime(S, c)
            for j, f in enumerate(facs):
                if j != i:
                    term = term @ f
            dp += term
        step = np.linalg.solve(dp, p)
        S = S - step
        if np.linalg.norm(step, 2) <= 4 * EPS * scale:
            break
    return S


def _kernel_basis(A, dim):
    """Orthonormal basis of the ``dim`` smallest right singular directions of A."""
    _, _, vt = np.linalg.svd(A)
    return vt[A.shape[1] - dim:].T


def _rank_profile(N, Q, cutoff):
    """Dimensions of ``N^j V`` for j = 0, 1, ... where ``V = span(Q)`` is N-invariant."""
    dims = [Q.shape[1]]
    R = Q
    while R.shape[1] > 0:
        img = N @ R
        if img.size == 0:
            break
        u, s, _ = np.linalg.svd(img, full_matrices=False)
        r = int(np.sum(s > cutoff))
        R = u[:, :r]
        dims.append(r)
        if r == 0 or len(dims) > Q.shape[1] + 1:
            break
    if dims[-1] != 0:
        dims.append(0)
    return dims


def _block_sizes(dims, pair: bool):
    """Jordan block sizes from the dimensions of ``N^j V``."""
    diffs = [dims[j] - dims[j + 1] for j in range(len(dims) - 1)]  # blocks of size >= j+1
    sizes = []
    for j in range(len(diffs)):
        nxt = diffs[j + 1] if j + 1 < len(diffs) else 0
        count = diffs[j] - nxt
        if pair:
            count //= 2
        sizes += [j + 1] * max(count, 0)
    return sorted(sizes, reverse=True)


@dataclass(frozen=True)
class JordanChevalley:
    g_ss: np.ndarray
    g_u: np.ndarray
    block_spec: tuple
    clusters: tuple
    rank_profiles: tuple
    residual: float


def jordan_chevalley(g: np.ndarray, tol: Optional[float] = None, rank_tol: Optional[float] = None) -> JordanChevalley:
    """Multiplicative Jordan-Chevalley decomposition ``g = g_ss g_u`` with real block structure.

    The semisimple part comes from the Newton iteration
    ``S <- S - p(S) p'(S)^{-1}``, where ``p`` is the real polynomial whose
    roots are the cluster centers; every iterate is a polynomial in ``g``,
    so ``S`` commutes with ``g``. Block sizes come from the dimensions of
    ``(g_u - I)^j V`` on each generalized eigenspace ``V``.

    Parameters
    ----------
    tol : float, optional
        Eigenvalue clustering radius; defaults to :func:`default_cluster_radius`.
    rank_tol : float, optional
        Relative cutoff for numerical rank; defaults to ``sqrt(eps)``.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    clusters = cluster_eigenvalues(g, tol)
    S = _semisimple_part(g, clusters)
    gu = np.linalg.solve(S, g)
    N = gu - np.eye(d)
    nN = np.linalg.norm(N, 2)
    rt = math.sqrt(EPS) if rank_tol is None else rank_tol
    cutoff = rt * max(nN, 1.0) if nN > rt else math.inf
    specs = []
    profiles = []
    for c in clusters:
        pair = not c.is_real
        dim = c.multiplicity * (2 if pair else 1)
        Q = _kernel_basis(_factor(S, c), dim)
        dims = _rank_profile(N, Q, cutoff) if np.isfinite(cutoff) else [dim, 0]
        sizes = _block_sizes(dims, pair)
        if sum(sizes) != c.multiplicity:
            raise IllConditionedSpectrumError(
                f"rank profile {dims} inconsistent with multiplicity {c.multiplicity}")
        profiles.append(tuple(dims))
        ang = c.angle
        for s in sizes:
            specs.append(BlockSpec(s, c.modulus, ang))
    res = np.linalg.norm(S @ gu - g, 2) / max(np.linalg.norm(g, 2), 1.0)
    return JordanChevalley(S, gu, tuple(specs), tuple(clusters), tuple(profiles), float(res))


# ---------------------------------------------------------------- weak unipotence and conjugacy

@dataclass(frozen=True)
class WeakUnipotenceResult:
    value: bool
    reason: str
    moduli: tuple
    block_spec: tuple

    def __bool__(self):
        return self.value


def is_weakly_unipotent(g: np.ndarray, tol: float = 1e-6, cluster_tol: Optional[float] = None) -> WeakUnipotenceResult:
    """Elliptic semisimple part and nontrivial unipotent part.

    The eigenvalue moduli are tested against ``[1 - m, 1 + m]`` with
    ``m = max(tol, radius)``, since the eigenvalues of a Jordan block of size
    ``s`` are only resolved to about ``eps^(1/s)``; the cluster centers,
    which are accurate, must lie within ``tol`` of the unit circle.
    """
    g = np.asarray(g, dtype=float)
    lam = eigen_moduli(g)
    try:
        jc = jordan_chevalley(g, cluster_tol)
    except IllConditionedSpectrumError as exc:
        return WeakUnipotenceResult(False, f"ill-conditioned spectrum: {exc}", tuple(lam), ())
    centers_ok = all(abs(c.modulus - 1.0) <= tol for c in jc.clusters)
    if not centers_ok:
        bad = max((c.modulus for c in jc.clusters), key=lambda m: abs(m - 1.0))
        return WeakUnipotenceResult(False, f"eigenvalue modulus {bad:.6g} is not 1", tuple(lam), jc.block_spec)
    if all(b.size == 1 for b in jc.block_spec):
        return WeakUnipotenceResult(False, "elliptic", tuple(lam), jc.block_spec)
    return WeakUnipotenceResult(True, "weakly unipotent", tuple(lam), jc.block_spec)


@dataclass(frozen=True)
class ConjugacyInvariants:
    """Eigenvalue clusters (conjugate pairs listed once) and, per cluster, ``rank((g - mu)^m)`` for m = 1..d over C."""

    d: int
    centers: tuple
    multiplicities: tuple
    rank_tables: tuple

    def to_json(self):
        return {
            "d": self.d,
            "clusters": [
                {"re": c.real, "im": c.imag, "multiplicity": m, "ranks": list(r)}
                for c, m, r in zip(self.centers, self.multiplicities, self.rank_tables)
            ],
        }


def conjugacy_invariants(g: np.ndarray, tol: Optional[float] = None) -> ConjugacyInvariants:
    jc = jordan_chevalley(g, tol)
    d = np.asarray(g).shape[0]
    centers, mults, tables = [], [], []
    for c in jc.clusters:
        sizes = [b.size for b in jc.block_spec if b.modulus == c.modulus and b.angle == c.angle]
        ranks = tuple(d - sum(min(s, m) for s in sizes) for m in range(1, d + 1))
        centers.append(c.center)
        mults.append(c.multiplicity)
        tables.append(ranks)
    return ConjugacyInvariants(d, tuple(centers), tuple(mults), tuple(tables))


def invariants_match(a: ConjugacyInvariants, b: ConjugacyInvariants, tol: float = 1e-6) -> tuple:
    """Compare two invariant tables; returns ``(match, reason)``."""
    if a.d != b.d:
        return False, f"dimension {a.d} vs {b.d}"
    if len(a.centers) != len(b.centers):
        return False, f"{len(a.centers)} vs {len(b.centers)} eigenvalue clusters"
    used = set()
    for c, m, r in zip(a.centers, a.multiplicities, a.rank_tables):
        hit = None
        for j, (c2, m2, r2) in enumerate(zip(b.centers, b.multiplicities, b.rank_tables)):
            if j not in used and abs(c - c2) <= tol * max(1.0, abs(c)):
                hit = j
                break
        if hit is None:
            return False, f"eigenvalue {c:.6g} has no partner"
        used.add(hit)
        if m != b.multiplicities[hit]:
            return False, f"multiplicity of {c:.6g}: {m} vs {b.multiplicities[hit]}"
        if r != b.rank_tables[hit]:
            return False, f"rank sequence at {c:.6g}: {list(r)} vs {list(b.rank_tables[hit])}"
    return True, "conjugate"


def are_conjugate(g: np.ndarray, h: np.ndarray, tol: float = 1e-6) -> bool:
    return invariants_match(conjugacy_invariants(g), conjugacy_invariants(h), tol)[0]


# ---------------------------------------------------------------- invariant flags of unipotents

def kernel_flag(N: np.ndarray, rank_tol: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis adapted to the filtration ``ker N ⊂ ker N^2 ⊂ ...``.

    For a nilpotent ``N`` with a single Jordan block the first j columns
    span ``ker N^j``, the unique ``N``-invariant j-plane.
    """
    N = np.asarray(N, dtype=float)
    d = N.shape[0]
    nN = np.linalg.norm(N, 2)
    if nN == 0.0:
        return np.eye(d)
    cutoff = (math.sqrt(EPS) if rank_tol is None else rank_tol) * nN
    K = np.zeros((d, 0))
    while K.shape[1] < d:
        # v with N v in span(K): null space of (I - K K^T) N restricted to K^perp
        P = np.eye(d) - K @ K.T
        C = orth_complement(K) if K.shape[1] else np.eye(d)
        A = P @ N @ C
        _, s, vt = np.linalg.svd(A)
        s_full = np.concatenate([s, np.zeros(C.shape[1] - len(s))])
        new = int(np.sum(s_full <= cutoff))
        if new == 0:
            raise PreconditionError("matrix is not nilpotent at the given tolerance")
        V = C @ vt[C.shape[1] - new:].T
        K = orthonormalize(np.column_stack([K, V]))
    return K
