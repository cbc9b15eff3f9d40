"""Flags, transversality and total positivity.

A complete flag is stored as an orthonormal basis whose first ``j`` columns
span ``F^(j)``. A tuple of flags ``(F_1, ..., F_m)`` is positive when, in a
basis ``b_i`` of lines ``F_1^(i) ∩ F_m^(d-i+1)`` (suitably signed), the
unipotent transporters fixing ``F_1`` that move ``F_m`` to each ``F_i``
factor through totally positive unipotent matrices.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateConfigurationError, PreconditionError
from .matnum import orthonormalize, subspace_angle

MAX_MINOR_DIM = 8


@dataclass(frozen=True, eq=False)
class Flag:
    """A complete flag in R^d; column j of ``basis`` spans the new direction of ``F^(j)``."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ValueError("flag basis must be a square matrix")
        s = np.linalg.svd(B, compute_uv=False)
        if s[-1] <= 1e-13 * s[0]:
            raise DegenerateConfigurationError("flag basis is not of full rank")
        q, r = np.linalg.qr(B)
        # keep orientation of each new direction
        q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
        q.setflags(write=False)
        object.__setattr__(self, "basis", q)

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    def subspace(self, j: int) -> np.ndarray:
        """Orthonormal frame of ``F^(j)``."""
        return self.basis[:, :j]

    def apply(self, g: np.ndarray) -> "Flag":
        return Flag(np.asarray(g, dtype=float) @ self.basis)

    @classmethod
    def standard(cls, d: int) -> "Flag":
        return cls(np.eye(d))

    def to_json(self):
        return [list(map(float, row)) for row in self.basis]


def flag_angle(F: Flag, G: Flag) -> float:
    """Largest principal angle between ``F^(j)`` and ``G^(j)`` over all j."""
    return max(subspace_angle(F.subspace(j), G.subspace(j)) for j in range(1, F.d))


@dataclass(frozen=True, eq=False)
class PartialFlagPair:
    """A k-plane P and a (d-k)-plane Q, stored as orthonormal frames."""

    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        P = orthonormalize(np.asarray(self.P, dtype=float))
        Q = orthonormalize(np.asarray(self.Q, dtype=float))
        if P.shape[0] != Q.shape[0] or P.shape[1] + Q.shape[1] != P.shape[0]:
            raise ValueError("need a k-plane and a (d-k)-plane")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)

    @property
    def k(self) -> int:
        return self.P.shape[1]

    @classmethod
    def from_flag(cls, F: Flag, k: int) -> "PartialFlagPair":
        return cls(F.subspace(k), F.subspace(F.d - k))


def transverse(P: np.ndarray, Q: np.ndarray) -> float:
    """Transversality margin ``|det[P | Q]|`` of orthonormalized frames, in [0, 1]."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape[0] != Q.shape[0] or P.shape[1] + Q.shape[1] != P.shape[0]:
        raise ValueError(f"dimension mismatch: {P.shape[1]} + {Q.shape[1]} != {P.shape[0]}")
    if P.shape[1] == 0 or Q.shape[1] == 0:
        return 1.0
    M = np.column_stack([orthonormalize(P), orthonormalize(Q)])
    return float(min(1.0, abs(np.linalg.det(M))))


def is_transverse(P, Q, tol: float = 1e-8) -> bool:
    return transverse(P, Q) > tol


def flag_margin(F: Flag, G: Flag) -> float:
    """Smallest transversality margin of ``F^(j)`` against ``G^(d-j)``."""
    return min(transverse(F.subspace(j), G.subspace(F.d - j)) for j in range(1, F.d))


# ---------------------------------------------------------------- totally positive unipotents

@functools.lru_cache(maxsize=None)
def _minor_index(d: int) -> tuple:
    """All (rows, cols) pairs of equal size with no forced zero (i_l <= j_l)."""
    out = []
    for m in range(1, d + 1):
        combos = list(itertools.combinations(range(d), m))
        for I in combos:
            for J in combos:
                if all(i <= j for i, j in zip(I, J)):
                    out.append((I, J))
    return tuple(out)


def nonforced_minors(u: np.ndarray) -> tuple:
    """Values of all minors of an upper triangular matrix not forced to vanish.

    Returns ``(values, index_pairs, hadamard_bounds)``; the Hadamard bound of
    a minor is the product of the norms of its rows and serves as its scale.
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    idx = _minor_index(d)
    vals = np.empty(len(idx))
    scale = np.empty(len(idx))
    for n, (I, J) in enumerate(idx):
        sub = u[np.ix_(I, J)]
        vals[n] = np.linalg.det(sub) if len(I) > 1 else sub[0, 0]
        scale[n] = np.prod(np.linalg.norm(sub, axis=1))
    return vals, idx, scale


@dataclass(frozen=True)
class PositivityResult:
    value: Optional[bool]
    margin: float
    min_minor: float
    worst_minor: tuple
    signs: Optional[tuple] = None

    def __bool__(self):
        return bool(self.value)


def _check_unipotent(u, tol=1e-9):
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    if d > MAX_MINOR_DIM:
        raise PreconditionError(f"minor enumeration is capped at d = {MAX_MINOR_DIM}")
    scale = max(1.0, np.abs(u).max())
    if np.abs(np.tril(u, -1)).max(initial=0.0) > tol * scale:
        raise PreconditionError("matrix is not upper triangular")
    if np.abs(np.diag(u) - 1.0).max() > tol * scale:
        raise PreconditionError("matrix is not unipotent")
    return u


def _forced_signs(u) -> Optional[np.ndarray]:
    """The only diagonal sign change that can make ``u`` totally positive.

    Conjugating by ``diag(eps)`` multiplies ``u_{j,j+1}`` by
    ``eps_j eps_{j+1}``, so positivity of the superdiagonal fixes every sign
    once ``eps_1 = +1``. Returns None if some superdiagonal entry vanishes.
    """
    d = u.shape[0]
    eps = np.ones(d)
    for j in range(d - 1):
        s = u[j, j + 1]
        if s == 0.0:
            return None
        eps[j + 1] = eps[j] * math.copysign(1.0, s)
    return eps


def is_totally_positive_unipotent(u: np.ndarray, basis_signs=None, pos_tol: float = 1e-10) -> PositivityResult:
    """Total positivity of an upper triangular unipotent matrix.

    Every minor not forced to vanish must exceed ``pos_tol`` times its
    Hadamard bound. When the superdiagonal is positive the matrix is first
    conjugated by the positive diagonal that makes it all ones; this leaves
    every minor sign unchanged and removes the arbitrary scale of the basis
    vectors from the margin. The verdict is ``None`` (inconclusive) when the smallest
    scaled minor lies within ``[-pos_tol, pos_tol]``.

    Parameters
    ----------
    basis_signs : None, sequence of +-1, or "search"
        Conjugate by ``diag(signs)`` first. ``"search"`` looks for a sign
        vector (first entry +1) that makes ``u`` totally positive; since the
        superdiagonal determines it, the search is a single candidate.
    """
    u = _check_unipotent(u)
    d = u.shape[0]
    signs = None
    if basis_signs is not None:
        if isinstance(basis_signs, str):
            if basis_signs != "search":
                raise ValueError("basis_signs must be a sign vector or 'search'")
            eps = _forced_signs(u)
            if eps is None:
                eps = np.ones(d)
        else:
            eps = np.asarray(basis_signs, dtype=float)
        u = eps[:, None] * u * eps[None, :]
        signs = tuple(int(x) for x in eps)
    if d == 1:
        return PositivityResult(True, math.inf, math.inf, ((), ()), signs)
    sup = np.diag(u, 1)
    if np.all(sup > 0):
        D = np.concatenate([[1.0], np.cumprod(1.0 / sup)])
        u = u * D[None, :] / D[:, None]
    vals, idx, scale = nonforced_minors(u)
    # the diagonal minors I = J of a unipotent matrix equal 1 identically
    rel = vals / np.where(scale > 0, scale, 1.0)
    n = int(np.argmin(rel))
    margin = float(rel[n])
    if margin > pos_tol:
        verdict = True
    elif margin < -pos_tol:
        verdict = False
    else:
        verdict = None if abs(vals[n]) > 0 else False
    return PositivityResult(verdict, margin, float(vals[n]), idx[n], signs)


# ---------------------------------------------------------------- transporters and tuples

def _intersection_line(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Unit vector spanning ``span(P) ∩ span(Q)`` when that intersection is a line."""
    M = np.column_stack([P, -Q])
    _, s, vt = np.linalg.svd(M)
    v = vt[-1]
    x = P @ v[:P.shape[1]]
    return x / np.linalg.norm(x), (s[-2] if len(s) > 1 else 1.0)


def adapted_basis(F_first: Flag, F_last: Flag, tol: float = 1e-8) -> np.ndarray:
    """Columns ``b_i`` spanning ``F_first^(i) ∩ F_last^(d-i+1)``."""
    d = F_first.d
    cols = []
    for i in range(1, d + 1):
        P = F_first.subspace(i)
        Q = F_last.subspace(d - i + 1)
        b, sep = _intersection_line(P, Q)
        if sep <= tol:
            raise DegenerateConfigurationError(
                f"F^({i}) and F'^({d - i + 1}) meet in more than a line", pair=(0, -1), dims=(i, d - i + 1))
        cols.append(b)
    return np.column_stack(cols)


def _check_pair(F, G, pair, tol):
    d = F.d
    for j in range(1, d):
        m = transverse(F.subspace(j), G.subspace(d - j))
        if m <= tol:
            raise DegenerateConfigurationError(
                f"flags {pair} are not transverse in dimensions ({j}, {d - j}); margin {m:.3g}",
                pair=pair, dims=(j, d - j))


def opposite_unipotent(B: np.ndarray, F: Flag) -> np.ndarray:
    """Unipotent upper triangular ``n`` (in basis ``B``) with ``n`` applied to the
    flag opposite to the standard one equal to ``F``.

    In ``B``-coordinates the opposite flag is spanned by ``e_d, e_{d-1}, ...``;
    ``n`` exists iff ``F`` is transverse to the standard flag, and is read
    off from a UL factorization of ``B^{-1} F`` with reversed columns.
    """
    K = np.linalg.solve(B, F.basis)
    d = K.shape[0]
    W = np.eye(d)[::-1]
    # n * (lower triangular L) * W = K  <=>  K W = n L : a UL factorization,
    # i.e. an LU factorization without pivoting of the doubly reversed matrix.
    M = W @ (K @ W) @ W
    n_rev = _lu_nopivot_lower(M)
    return W @ n_rev @ W


def _lu_nopivot_lower(M: np.ndarray) -> np.ndarray:
    """Unit lower triangular factor of the pivot-free LU factorization ``M = L U``."""
    A = np.array(M, dtype=float)
    d = A.shape[0]
    L = np.eye(d)
    for j in range(d - 1):
        piv = A[j, j]
        if piv == 0.0:
            raise DegenerateConfigurationError("zero pivot: flag not transverse to the opposite flag", dims=(j + 1,))
        f = A[j + 1:, j] / piv
        L[j + 1:, j] = f
        A[j + 1:, :] -= np.outer(f, A[j, :])
    return L


def unipotent_flag_transporter(F_fix: Flag, F_from: Flag, F_to: Flag, tol: float = 1e-8,
                               return_basis: bool = False):
    """The unipotent ``w`` fixing ``F_fix`` with ``w F_from = F_to``.

    ``F_from`` and ``F_to`` must both be transverse to ``F_fix``. The matrix
    is returned in standard coordinates; with ``return_basis`` the basis
    ``B`` adapted to ``(F_fix, F_from)`` is also returned, in which ``w`` is
    upper triangular unipotent.
    """
    _check_pair(F_fix, F_from, (0, 1), tol)
    _check_pair(F_fix, F_to, (0, 2), tol)
    B = adapted_basis(F_fix, F_from, tol)
    n_to = opposite_unipotent(B, F_to)
    w = B @ n_to @ np.linalg.inv(B)
    if return_basis:
        return w, B, n_to
    return w


@dataclass(frozen=True)
class TupleResult:
    value: Optional[bool]
    margin: float
    transporters: tuple
    signs: Optional[tuple]
    detail: tuple = ()

    def __bool__(self):
        return bool(self.value)


def _check_distinct(flags, tol):
    m = len(flags)
    for a in range(m):
        for b in range(a + 1, m):
            if flag_angle(flags[a], flags[b]) <= tol:
                raise DegenerateConfigurationError(f"flags {a} and {b} coincide", pair=(a, b))


def positivity_transporters(flags: Sequence[Flag], tol: float = 1e-8) -> tuple:
    """Adapted basis ``B`` and the transporters ``u_i`` of a flag tuple.

    With ``n_i`` the unipotent (upper triangular in ``B``) sending the flag
    ``F_m`` to ``F_i`` and fixing ``F_1``, ``u_i = n_{i+1}^{-1} n_i`` for
    ``i = 2..m-1`` (``n_m = I``), so that ``F_i = u_{m-1} ... u_i F_m``.
    """
    flags = list(flags)
    m = len(flags)
    if m < 3:
        raise ValueError("need at least three flags")
    _check_distinct(flags, tol)
    first, last = flags[0], flags[-1]
    _check_pair(first, last, (0, m - 1), tol)
    for i in range(1, m - 1):
        _check_pair(first, flags[i], (0, i), tol)
    B = adapted_basis(first, last, tol)
    ns = [opposite_unipotent(B, flags[i]) for i in range(1, m - 1)] + [np.eye(first.d)]
    us = []
    for i in range(len(ns) - 1):
        u = np.linalg.solve(ns[i + 1], ns[i])
        u = np.triu(u)
        np.fill_diagonal(u, 1.0)
        us.append(u)
    return B, us


def is_positive_tuple(flags: Sequence[Flag], tol: float = 1e-8, pos_tol: float = 1e-10) -> TupleResult:
    """Positivity of a tuple of complete flags.

    The transporters are tested for total positivity after the same sign
    change of the adapted basis. Positive rescaling of the ``b_i`` does not
    change any minor sign, and the superdiagonal of the first transporter
    forces the sign vector, so one candidate decides the question.
    """
    B, us = positivity_transporters(flags, tol)
    d = B.shape[0]
    eps = _forced_signs(us[0])
    if eps is None:
        return TupleResult(False, 0.0, tuple(us), None, ("vanishing superdiagonal",))
    results = [is_totally_positive_unipotent(u, basis_signs=eps, pos_tol=pos_tol) for u in us]
    margin = min(r.margin for r in results)
    vals = [r.value for r in results]
    if all(v is True for v in vals):
        verdict = True
    elif any(v is False for v in vals):
        verdict = False
    else:
        verdict = None
    return TupleResult(verdict, margin, tuple(us), tuple(int(x) for x in eps),
                       tuple((r.value, r.margin, r.worst_minor) for r in results))


def in_O_set(F: Flag, F1: Flag, F2: Flag, F3: Flag, **kw) -> TupleResult:
    """Membership of ``F`` in the open set of flags with ``(F1, F, F2, F3)`` positive."""
    return is_positive_tuple((F1, F, F2, F3), **kw)
