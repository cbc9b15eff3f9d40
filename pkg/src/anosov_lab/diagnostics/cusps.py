"""Parabolic growth exponents, type preservation and cusp norm distortion."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ResourceError
from ..freegroup import reduce_word, word_to_str
from ..matnum import (
    compound,
    conjugacy_invariants,
    invariants_match,
    jordan_chevalley,
    nilpotent_exp,
    nilpotent_log,
    normalized_power,
    wedge_derivation,
)
from ..reps import CuspRep
from .fits import Verdict

DEFAULT_N_RANGE = tuple(2 ** e for e in range(6, 13))


def _power_factors(g: np.ndarray):
    jc = jordan_chevalley(g)
    weights = []
    for b in jc.block_spec:
        # a real rotation block carries its weights twice
        weights += list(range(b.size - 1, -b.size, -2)) * (b.real_dim // b.size)
    return jc.g_ss, nilpotent_log(jc.g_u), sorted(weights, reverse=True)


def _wedge_order(weights, j: int) -> int:
    """Largest m with ``D_j^m != 0``: half the spread of weight sums of j-subsets."""
    return (sum(weights[:j]) - sum(weights[-j:])) // 2


def log_wedge_norms_of_power(rep, word, n: int, factors=None) -> np.ndarray:
    """``log ||wedge^k rho(w)^n||`` for k = 0..d.

    With ``rho(w) = g_ss exp(X)`` the Jordan-Chevalley factors,
    ``wedge^k rho(w)^n = (wedge^k g_ss)^n exp(n D_k)`` where ``D_k`` is the
    derivation induced by ``X``. The unipotent factor is a terminating
    polynomial in n, so no eigenvalue splitting of the Jordan blocks
    accumulates as it would under repeated squaring. For k > d/2 the dual
    identity ``||wedge^k g|| = ||wedge^(d-k) g^-1||`` is used.
    """
    d = rep.d
    g_ss, X, weights = factors if factors is not None else _power_factors(rep.evaluate(reduce_word(word)))
    g_ss_inv = np.linalg.inv(g_ss)
    out = np.zeros(d + 1)
    for k in range(1, d):
        if 2 * k <= d:
            j, sgn = k, 1.0
        else:
            j, sgn = d - k, -1.0
        S = compound(g_ss if sgn > 0 else g_ss_inv, j)
        M, log_scale = normalized_power(S, n)
        E = nilpotent_exp(wedge_derivation(X, j), sgn * n, order=_wedge_order(weights, j))
        out[k] = log_scale + math.log(np.linalg.norm(M @ E, 2))
    return out


@dataclass(frozen=True)
class GrowthResult:
    word: tuple
    n_values: tuple
    log_sigma: np.ndarray          # shape (len(n_values), d)
    exponents: tuple
    nearest: tuple
    distance: tuple
    verdicts: dict                 # k -> Verdict
    bracket: tuple                 # per j: max/min of sigma_j / n^round(c_j)

    def to_json(self) -> dict:
        return {
            "word": word_to_str(self.word),
            "n_values": list(self.n_values),
            "exponents": list(self.exponents),
            "nearest": list(self.nearest),
            "distance": list(self.distance),
            "bracket": list(self.bracket),
            "verdicts": {str(k): v.value for k, v in self.verdicts.items()},
        }


def parabolic_growth_exponents(rep, word, n_range: Sequence[int] = DEFAULT_N_RANGE, int_tol: float = 0.1,
                               max_log_entry: float = math.log(1e250)) -> GrowthResult:
    """Slopes of ``log sigma_j(rho(alpha^n))`` against ``log n``.

    Singular values of the powers come from the norms of their exterior
    powers, see :func:`log_wedge_norms_of_power`. The verdict at k is
    "cusp-gap-open" (PASS) when the rounded exponents drop by at least one
    between j = k and j = k + 1 and both slopes lie within ``int_tol`` of an
    integer; FAIL when both are near integers without such a drop; and
    INCONCLUSIVE otherwise.

    Raises
    ------
    ResourceError
        If ``||rho(alpha)^n||`` would exceed about 1e250 within the range.
    """
    ns = np.array(sorted(int(n) for n in n_range))
    if len(ns) < 2:
        raise ValueError("need at least two values of n")
    d = rep.d
    factors = _power_factors(rep.evaluate(reduce_word(word)))
    rows = []
    for n in ns:
        ln = log_wedge_norms_of_power(rep, word, int(n), factors)
        if ln.max() > max_log_entry:
            raise ResourceError(f"entries of rho(alpha)^{n} exceed 1e250; reduce the n range",
                                cap=float(np.exp(max_log_entry)), requested=int(n))
        rows.append(np.diff(ln))
    L = np.array(rows)
    x = np.log(ns)
    slopes = np.polyfit(x, L, 1)[0]
    nearest = np.rint(slopes).astype(int)
    dist = np.abs(slopes - nearest)
    bracket = []
    for j in range(d):
        r = L[:, j] - nearest[j] * x
        bracket.append(float(math.exp(r.max() - r.min())))
    verdicts = {}
    for k in range(1, d):
        near = dist[k - 1] <= int_tol and dist[k] <= int_tol
        if not near:
            verdicts[k] = Verdict.INCONCLUSIVE
        elif nearest[k - 1] - nearest[k] >= 1:
            verdicts[k] = Verdict.PASS
        else:
            verdicts[k] = Verdict.FAIL
    return GrowthResult(tuple(reduce_word(word)), tuple(int(n) for n in ns), L, tuple(float(s) for s in slopes),
                        tuple(int(v) for v in nearest), tuple(float(v) for v in dist), verdicts, tuple(bracket))


# ---------------------------------------------------------------- type preservation

@dataclass(frozen=True)
class TPEntry:
    word: tuple
    match: Optional[bool]
    reason: str
    invariants: Optional[dict]
    reference: Optional[dict]

    def to_json(self) -> dict:
        return {"word": word_to_str(self.word), "match": self.match, "reason": self.reason,
                "invariants": self.invariants, "reference": self.reference}


@dataclass(frozen=True)
class TPResult:
    verdict: Verdict
    entries: tuple

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "entries": [e.to_json() for e in self.entries]}


def tp_check(rep, reference, peripherals: Sequence, tol: float = 1e-6) -> TPResult:
    """Whether each peripheral image is conjugate to its image under the reference representation.

    Conjugacy is decided by matching eigenvalue clusters and the rank
    sequences ``rank((g - mu)^m)``. Each peripheral is evaluated on the
    best conditioned cyclic rotation of its word, which is conjugate to it.
    """
    entries = []
    for w in peripherals:
        w = reduce_word(w)
        _, r = rep.best_rotation(w)
        _, r_ref = reference.best_rotation(w)
        a = conjugacy_invariants(rep.evaluate(r))
        b = conjugacy_invariants(reference.evaluate(r_ref))
        ok, why = invariants_match(a, b, tol)
        entries.append(TPEntry(w, ok, why, a.to_json(), b.to_json()))
    verdict = Verdict.PASS if all(e.match for e in entries) else Verdict.FAIL
    return TPResult(verdict, tuple(entries))


# ---------------------------------------------------------------- cusp norms

@dataclass(frozen=True)
class DistortionResult:
    c0: float
    C0: float
    t_grid: tuple
    log_upper: tuple          # log of max_Z ||Z||_{phi_t v0} / ||Z||_{v0}
    log_lower: tuple          # log of min_Z of the same ratio
    averaging_residual: float
    bound_holds: bool
    min_slack: float
    n_vectors: int

    def to_json(self) -> dict:
        return {"c0": self.c0, "C0": self.C0, "t_grid": list(self.t_grid), "log_upper": list(self.log_upper),
                "log_lower": list(self.log_lower), "averaging_residual": self.averaging_residual,
                "bound_holds": self.bound_holds, "min_slack": self.min_slack, "n_vectors": self.n_vectors}


def invariant_gram(generators: Sequence[np.ndarray], n_avg: int = 256) -> tuple:
    """Gram matrix of a norm invariant under the closure of the group generated by ``generators``.

    Averages ``k^T k`` over the words ``g_1^a g_2^b ...`` with exponents below
    ``n_avg`` (for finite cyclic factors the average is exact) and returns
    ``(G, residual)`` with residual ``max_i ||g_i^T G g_i - G|| / ||G||``.
    """
    d = generators[0].shape[0]
    G = np.eye(d)
    for g in generators:
        acc = np.zeros((d, d))
        P = np.eye(d)
        order = n_avg
        for n in range(n_avg):
            acc += P.T @ G @ P
            P = P @ g
            if n > 0 and np.allclose(P, np.eye(d), atol=1e-12):
                order = n + 1
                break
        G = acc / order
    G = 0.5 * (G + G.T)
    res = max(np.linalg.norm(g.T @ G @ g - G, 2) for g in generators) / np.linalg.norm(G, 2)
    return G, float(res)


def _gram_op_norm(M, G):
    """Operator norm of M for the norm ``||Z|| = sqrt(Z^T G Z)``."""
    R = np.linalg.cholesky(G).T          # ||Z||_G = ||R Z||
    return np.linalg.norm(R @ M @ np.linalg.inv(R), 2)


def cusp_norm_distortion(psi: CuspRep, t_grid: Sequence[float], n_avg: int = 256, n_vectors: int = 200,
                         rng: Optional[np.random.Generator] = None) -> DistortionResult:
    """Exponential distortion constants of the canonical norm family along the flow.

    The reference norm is invariant under ``g_ss`` and ``Psi(-I)``; the norm
    at time t is ``||Z||_t = ||Psi(a_t)^{-1} Z||_0`` with
    ``a_t = diag(e^{t/2}, e^{-t/2})``. The envelope of
    ``||Z||_t / ||Z||_0`` is bracketed by operator norms; ``c0`` is the
    largest slope of ``|log|`` of the extreme ratios against ``|t|`` at the
    grid end, and ``C0 >= 1`` the smallest constant making
    ``e^{-c0 |t|} / C0 <= ratio <= C0 e^{c0 |t|}`` hold on the grid. The bound
    is then verified on random vectors.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    G, resid = invariant_gram([psi.g_ss, psi(-np.eye(2))], n_avg)
    ts = np.array(sorted(float(t) for t in t_grid))
    up, lo = [], []
    for t in ts:
        a = np.diag([math.exp(t / 2), math.exp(-t / 2)])
        M = np.linalg.inv(psi(a))
        up.append(math.log(_gram_op_norm(M, G)))
        lo.append(-math.log(_gram_op_norm(np.linalg.inv(M), G)))
    up = np.array(up)
    lo = np.array(lo)
    at = np.abs(ts)
    big = at >= 0.5 * at.max() if at.max() > 0 else np.ones_like(at, dtype=bool)
    env = np.maximum(up, -lo)
    if at.max() > 0 and big.sum() >= 2 and np.ptp(at[big]) > 0:
        c0 = float(max(np.polyfit(at[big], env[big], 1)[0], 0.0))
    elif at.max() > 0:
        c0 = float(max(env.max() / at.max(), 0.0))
    else:
        c0 = 0.0
    logC = float(max(0.0, np.max(up - c0 * at), np.max(-c0 * at - lo)))
    C0 = math.exp(logC)
    R = np.linalg.cholesky(G).T
    slack = math.inf
    ok = True
    for t in ts:
        a = np.diag([math.exp(t / 2), math.exp(-t / 2)])
        M = np.linalg.inv(psi(a))
        Z = rng.normal(size=(psi.d, n_vectors))
        r = np.log(np.linalg.norm(R @ M @ Z, axis=0) / np.linalg.norm(R @ Z, axis=0))
        hi = logC + c0 * abs(t)
        lo_b = -logC - c0 * abs(t)
        slack = min(slack, float(np.min(hi - r)), float(np.min(r - lo_b)))
        ok = ok and bool(np.all(r <= hi + 1e-9) and np.all(r >= lo_b - 1e-9))
    return DistortionResult(c0, C0, tuple(ts.tolist()), tuple(up.tolist()), tuple(lo.tolist()), resid, ok,
                            float(slack), n_vectors)
