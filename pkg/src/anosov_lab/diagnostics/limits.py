"""Sampled limit maps, the Cartan property and monotone extension of positive maps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import DirectionUnavailableError, EmptySampleError, ProximalityError, UndefinedSubspaceError
from ..freegroup import LimitSample, evaluate_word, inverse_word, multiply_words, power_word, word_to_str
from ..hyperbolic import TWO_PI, BoundaryPoint, MoebiusMap, angular_distance, fixed_points
from ..matnum import orthonormalize, subspace_angle
from ..posflags import Flag, PartialFlagPair, flag_angle, flag_margin, transverse
from .fits import Verdict
from .gaps import _pmap


def _value_angle(a, b) -> float:
    if isinstance(a, Flag):
        return flag_angle(a, b)
    return max(subspace_angle(a.P, b.P), subspace_angle(a.Q, b.Q))


def _apply(g, v):
    if isinstance(v, Flag):
        return v.apply(g)
    return PartialFlagPair(g @ v.P, g @ v.Q)


def _margin(a, b) -> float:
    if isinstance(a, Flag):
        return flag_margin(a, b)
    return min(transverse(a.P, b.Q), transverse(b.P, a.Q))


@dataclass
class LimitMapSample:
    """Limit map values at sampled boundary points.

    ``k = None`` means full flags; otherwise values are pairs
    ``(xi^k(x), xi^(d-k)(x))``.
    """

    k: Optional[int]
    points: list
    values: list
    witnesses: list
    parabolic: list
    equivariance_residual: float = math.nan
    equivariance_checks: int = 0
    min_margin: float = math.nan
    margin_pairs: int = 0
    failures: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    @property
    def angles(self) -> np.ndarray:
        return np.array([p.angle for p in self.points])

    def lookup(self, x: BoundaryPoint, tol: float = 1e-9):
        """Value at a sampled point (within angular distance ``tol``), else None."""
        if not self.points:
            return None
        ang = self.angles
        dist = np.abs(ang - x.angle) % TWO_PI
        dist = np.minimum(dist, TWO_PI - dist)
        i = int(np.argmin(dist))
        return self.values[i] if dist[i] <= tol else None

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n_points": len(self.points),
            "n_parabolic": int(sum(self.parabolic)),
            "equivariance_residual": self.equivariance_residual,
            "equivariance_checks": self.equivariance_checks,
            "min_margin": self.min_margin,
            "margin_pairs": self.margin_pairs,
            "failures": [word_to_str(w) for w in self.failures],
        }


def limit_value(rep, word, k: Optional[int], parabolic: bool):
    """Limit map value at the attracting (or parabolic) fixed point of a witness word."""
    d = rep.d
    if parabolic:
        F = rep.parabolic_flag(word)
        return F if k is None else PartialFlagPair.from_flag(F, k)
    if k is None:
        return rep.attracting_flag(word)
    return PartialFlagPair(rep.attracting_plane(word, k), rep.attracting_plane(word, d - k))


def limit_map_sample(rep, sample: LimitSample, k: Optional[int] = None, generators: Optional[Sequence] = None,
                     include_parabolic: bool = True, on_failure: str = "raise", equivariance_tol: float = 1e-9,
                     margin_pairs: int = 2000, rng: Optional[np.random.Generator] = None,
                     jobs: int = 1) -> LimitMapSample:
    """Limit map values from attracting subspaces of the witnesses.

    Parameters
    ----------
    rep : Representation
    sample : LimitSample
    k : int or None
        Partial flag index, or None for complete flags.
    generators : sequence of MoebiusMap, optional
        SL(2, R) generators; required for the equivariance residual.
    include_parabolic : bool
        Use parabolic points, whose value is the invariant flag of a single
        Jordan block image.
    on_failure : {"raise", "skip"}
        A witness whose image is not P_k-proximal (or, for a parabolic
        point, not a single Jordan block) raises :class:`ProximalityError`
        listing every such witness, or is skipped and recorded.
    margin_pairs : int
        Transversality margins are computed for angularly consecutive
        points and for this many further random pairs.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    pts = [p for p in sample.points if include_parabolic or not p.parabolic]

    def one(lp):
        try:
            return limit_value(rep, lp.witness.word, k, lp.parabolic)
        except UndefinedSubspaceError:
            return None

    vals = _pmap(one, pts, jobs)
    failures = [lp.witness.word for lp, v in zip(pts, vals) if v is None]
    if failures and on_failure == "raise":
        names = ", ".join(word_to_str(w) for w in failures[:20])
        raise ProximalityError(f"{len(failures)} witnesses are not proximal: {names}", witnesses=failures)
    keep = [(lp, v) for lp, v in zip(pts, vals) if v is not None]
    out = LimitMapSample(k, [lp.point for lp, _ in keep], [v for _, v in keep],
                         [lp.witness.word for lp, _ in keep], [lp.parabolic for lp, _ in keep],
                         failures=failures)
    if generators is not None and keep:
        _equivariance(rep, out, [MoebiusMap.from_matrix(g) if not isinstance(g, MoebiusMap) else g
                                 for g in generators], equivariance_tol, jobs)
    if len(keep) >= 2:
        _margins(out, margin_pairs, rng)
    return out


def _equivariance(rep, lm: LimitMapSample, gens, tol, jobs):
    """Max angle between ``rho(g) xi(x)`` and ``xi(g x)`` over generators and their inverses.

    ``xi(g x)`` is the sampled value when ``g x`` is in the sample, and is
    otherwise recomputed from the conjugated witness ``g w g^{-1}``.
    """
    tasks = []
    for i, g in enumerate(gens, start=1):
        for letter, m in ((i, g), (-i, g.inverse())):
            for x, v, w, par in zip(lm.points, lm.values, lm.witnesses, lm.parabolic):
                tasks.append((letter, m, x, v, w, par))

    def one(t):
        letter, m, x, v, w, par = t
        gx = m(x)
        ref = lm.lookup(gx, tol)
        if ref is None:
            try:
                ref = limit_value(rep, multiply_words((letter,), w, (-letter,)), lm.k, par)
            except UndefinedSubspaceError:
                return math.nan
        return _value_angle(_apply(rep.generator_image(letter), v), ref)

    res = [r for r in _pmap(one, tasks, jobs) if not math.isnan(r)]
    lm.equivariance_residual = float(max(res)) if res else math.nan
    lm.equivariance_checks = len(res)


def _margins(lm: LimitMapSample, n_random: int, rng):
    n = len(lm.points)
    order = np.argsort(lm.angles)
    pairs = {(int(order[i]), int(order[(i + 1) % n])) for i in range(n)}
    if n > 2:
        for _ in range(n_random):
            a, b = rng.choice(n, 2, replace=False)
            pairs.add((int(a), int(b)))
    pairs = {(a, b) for a, b in pairs if a != b}
    lm.min_margin = float(min(_margin(lm.values[a], lm.values[b]) for a, b in pairs))
    lm.margin_pairs = len(pairs)


# ---------------------------------------------------------------- Cartan property

@dataclass(frozen=True)
class Trajectory:
    """Words ``gamma_n`` converging to a boundary point; ``witness`` has that point as attractor."""

    words: tuple
    point: BoundaryPoint
    witness: tuple = ()
    label: str = ""


def power_trajectory(word, n_max: int, generators) -> Trajectory:
    m = evaluate_word(generators, word)
    x = fixed_points(m)[0]
    return Trajectory(tuple(power_word(word, n) for n in range(1, n_max + 1)), x, tuple(word),
                      f"({word_to_str(word)})^n")


def pumped_trajectory(word, tail, n_max: int, generators) -> Trajectory:
    """``gamma_n = word^n tail``, which converges to the attracting point of ``word``."""
    m = evaluate_word(generators, word)
    x = fixed_points(m)[0]
    return Trajectory(tuple(multiply_words(power_word(word, n), tail) for n in range(1, n_max + 1)), x,
                      tuple(word), f"({word_to_str(word)})^n {word_to_str(tail)}")


@dataclass(frozen=True)
class CartanResult:
    label: str
    angles: tuple
    terminal_angle: float
    eventually_decreasing: bool
    verdict: Verdict
    undefined_at: Optional[int]

    def to_json(self) -> dict:
        return {"trajectory": self.label, "angles": list(self.angles), "terminal_angle": self.terminal_angle,
                "eventually_decreasing": self.eventually_decreasing, "verdict": self.verdict.value,
                "undefined_at": self.undefined_at}


def cartan_property_check(rep, limit_map: Optional[LimitMapSample], trajectories: Sequence[Trajectory], k: int,
                          angle_tol: float = 1e-4, floor: float = 1e-12) -> list:
    """Angles between ``U_k(rho(gamma_n))`` and ``xi^k(x)`` along trajectories.

    A trajectory passes when its last angle is below ``angle_tol`` and the
    second half of the angle sequence is non-increasing (angles below
    ``floor`` count as converged). A collapsed singular value gap along the
    trajectory is reported as a failure.
    """
    out = []
    for tr in trajectories:
        ref = None
        if limit_map is not None:
            ref = limit_map.lookup(tr.point)
            if isinstance(ref, Flag):
                ref = ref.subspace(k)
            elif isinstance(ref, PartialFlagPair):
                ref = ref.P if ref.k == k else None
        if ref is None:
            ref = rep.attracting_plane(tr.witness, k)
        angles = []
        undefined = None
        for n, w in enumerate(tr.words):
            try:
                angles.append(subspace_angle(rep.uk_plane(w, k), ref))
            except UndefinedSubspaceError:
                undefined = n
                break
        if undefined is not None or not angles:
            out.append(CartanResult(tr.label, tuple(angles), math.nan, False, Verdict.FAIL, undefined))
            continue
        tail = angles[len(angles) // 2:]
        dec = all(b <= a * (1 + 1e-6) + floor for a, b in zip(tail, tail[1:]))
        term = angles[-1]
        verdict = Verdict.PASS if term < angle_tol and dec else Verdict.FAIL
        out.append(CartanResult(tr.label, tuple(angles), term, dec, verdict, None))
    return out


# ---------------------------------------------------------------- extension of positive maps

@dataclass(frozen=True)
class ExtensionResult:
    flag: Flag
    point_used: BoundaryPoint
    sequence: tuple
    successive_angles: tuple
    cauchy: bool
    fallback: bool = False
    note: str = ""


def _side_distance(y: BoundaryPoint, x: BoundaryPoint, direction: int) -> float:
    """Arc length from y to x travelling in the positive (+1) or negative (-1) direction."""
    if direction > 0:
        return (x.angle - y.angle) % TWO_PI
    return (y.angle - x.angle) % TWO_PI


def extend_positive_map(zeta: dict, x: BoundaryPoint, direction: int = 1, max_arc: float = math.pi / 2,
                        fallback: bool = False) -> ExtensionResult:
    """Value at ``x`` of the monotone extension of a map defined on parabolic points.

    Points ``y_n`` of the domain approaching ``x`` from the requested side
    are taken in order of decreasing arc distance, keeping only points at
    least halving the previous distance, and ``zeta(y_N)`` at the deepest
    one is returned. The log records angles between successive flags; the
    sequence counts as Cauchy when these angles decrease along its second
    half.

    Parameters
    ----------
    zeta : dict
        Maps :class:`BoundaryPoint` to :class:`Flag`.
    direction : {+1, -1}
        Approach along increasing (+1) or decreasing (-1) circle angle.
    fallback : bool
        When no approach exists on the requested side, use the other side
        and record it instead of raising.

    Raises
    ------
    DirectionUnavailableError
        If no point of the domain lies on the requested side.
    """
    for y, F in zeta.items():
        if y == x:
            return ExtensionResult(F, y, (y,), (), True, False, "x is in the domain")
    cands = []
    for y in zeta:
        dist = _side_distance(y, x, direction)
        if 0 < dist <= max_arc:
            cands.append((dist, y))
    if len(cands) < 2:
        if fallback:
            res = extend_positive_map(zeta, x, -direction, max_arc, fallback=False)
            return ExtensionResult(res.flag, res.point_used, res.sequence, res.successive_angles, res.cauchy,
                                   True, f"no approach from side {direction}; used side {-direction}")
        raise DirectionUnavailableError(f"no monotone approach to {x!r} from side {direction}")
    cands.sort(key=lambda t: -t[0])
    seq = [cands[0]]
    for dist, y in cands[1:]:
        if dist <= 0.5 * seq[-1][0]:
            seq.append((dist, y))
    if seq[-1][1] is not cands[-1][1]:
        seq.append(cands[-1])
    flags = [zeta[y] for _, y in seq]
    angs = tuple(flag_angle(a, b) for a, b in zip(flags, flags[1:]))
    tail = angs[len(angs) // 2:]
    cauchy = len(tail) >= 1 and all(b <= a * (1 + 1e-9) + 1e-13 for a, b in zip(tail, tail[1:]))
    return ExtensionResult(flags[-1], seq[-1][1], tuple(y for _, y in seq), angs, cauchy, False,
                           "" if cauchy else "sequence not yet Cauchy at this sample depth")
