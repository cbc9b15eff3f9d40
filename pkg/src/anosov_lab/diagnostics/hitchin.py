"""Aggregate certification of Hitchin type representations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import AnosovLabError
from ..freegroup import cyclic_core, primitive_root, rotations, word_key, word_to_str
from ..hyperbolic import Kind
from ..matnum import jordan_chevalley
from ..posflags import is_positive_tuple
from .cusps import parabolic_growth_exponents
from .fits import Verdict, slope_verdict
from .gaps import _pmap, gap_samples, gap_statistics
from .limits import limit_map_sample

MAX_DIM = 8
# determinant margin below which a sampled flag pair counts as degenerate
TRANS_TOL = 1e-12


@dataclass
class Category:
    name: str
    verdict: Verdict
    margin: float
    detail: dict = field(default_factory=dict)
    error: Optional[str] = None

    def to_json(self) -> dict:
        out = {"verdict": self.verdict.value, "margin": self.margin, "detail": self.detail}
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class HitchinReport:
    categories: dict

    @property
    def verdict(self) -> Verdict:
        return Verdict.combine(c.verdict for c in self.categories.values())

    def failing(self) -> list:
        return [n for n, c in self.categories.items() if c.verdict is Verdict.FAIL]

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "categories": {n: c.to_json() for n, c in self.categories.items()}}


def guard(name, fn):
    try:
        return fn()
    except AnosovLabError as exc:
        return Category(name, Verdict.FAIL, math.nan, {}, f"{type(exc).__name__}: {exc}")


def _class_key(core) -> tuple:
    return min(rotations(core), key=word_key)


def loxodromy_category(rep, ball, rate_tol: float = 0.01, jobs: int = 1) -> Category:
    """Every hyperbolic element has all eigenvalue gaps open.

    The margin is the smallest ``log(lambda_k / lambda_{k+1}) / l(gamma)``
    over hyperbolic elements and all k.
    """
    hyp = [g for g in ball if g.kind is Kind.HYPERBOLIC]
    if not hyp:
        return Category("loxodromy", Verdict.INCONCLUSIVE, math.nan, {"n": 0})
    rates = _pmap(lambda g: rep.log_eigen_gaps(g.word) / g.translation_length, hyp, jobs)
    R = np.array(rates)
    i, k = np.unravel_index(int(np.argmin(R)), R.shape)
    margin = float(R[i, k])
    return Category("loxodromy", slope_verdict(margin, rate_tol), margin,
                    {"n": len(hyp), "worst_word": hyp[i].name, "worst_k": int(k) + 1})


def parabolic_category(rep, ball, n_range=None, jobs: int = 1) -> Category:
    """Every parabolic image has a single Jordan block with exponents ``d + 1 - 2j``.

    Conjugate words share their cyclic core and a power has the Jordan type
    and growth exponents of its root, so each primitive root is examined
    once, on its best conditioned rotation. The margin is the smallest drop
    between consecutive fitted growth exponents.
    """
    d = rep.d
    cores = {}
    for g in ball:
        if g.kind is Kind.PARABOLIC:
            cores.setdefault(_class_key(primitive_root(cyclic_core(g.word)[1])[0]), g.word)
    if not cores:
        return Category("parabolic", Verdict.INCONCLUSIVE, math.nan, {"n": 0})
    expected = np.array([d + 1 - 2 * j for j in range(1, d + 1)])

    def one(core):
        _, r = rep.best_rotation(core)
        jc = jordan_chevalley(rep.evaluate(r))
        sizes = sorted((b.size for b in jc.block_spec), reverse=True)
        single = len(sizes) == 1 and sizes[0] == d
        kw = {} if n_range is None else {"n_range": n_range}
        gr = parabolic_growth_exponents(rep, r, **kw)
        c = np.array(gr.exponents)
        return single, sizes, float(np.min(-np.diff(c))) if d > 1 else math.inf, bool(np.all(np.array(gr.nearest) == expected)), gr

    res = _pmap(one, list(cores), jobs)
    bad = [(word_to_str(w), s) for w, (ok, s, _, exp_ok, _) in zip(cores, res) if not (ok and exp_ok)]
    margin = float(min(m for _, _, m, _, _ in res))
    verdict = Verdict.FAIL if bad else Verdict.PASS
    return Category("parabolic", verdict, margin, {"n": len(cores), "failures": bad[:20]})


def positivity_category(rep, sample, tuple_budget: int, rng: np.random.Generator, sizes=(3, 4),
                        pos_tol: float = 1e-10, jobs: int = 1, flags=None,
                        trans_tol: float = TRANS_TOL) -> Category:
    """Positivity of random cyclically ordered tuples from the full-flag limit map.

    ``flags`` may pass precomputed ``(angles, flags)``; otherwise the limit
    map is evaluated on ``sample``. Each tuple is drawn without replacement
    and listed in increasing boundary angle, which is the positive cyclic
    order of the circle. Flags at nearby sampled points have determinant
    margins of order ``gap^(j (d - j))``, so the degeneracy threshold
    ``trans_tol`` sits well below the default of :func:`transverse`.
    """
    if flags is None:
        lm = limit_map_sample(rep, sample, k=None, on_failure="raise", jobs=jobs)
        ang, vals = lm.angles, lm.values
    else:
        ang, vals = flags
    n = len(vals)
    order = np.argsort(ang)
    tuples = []
    for m in sizes:
        if n < m:
            continue
        for _ in range(tuple_budget):
            pick = np.sort(rng.choice(n, m, replace=False))
            tuples.append(tuple(int(order[i]) for i in pick))
    if not tuples:
        return Category("positivity", Verdict.INCONCLUSIVE, math.nan, {"n": 0})

    def one(t):
        try:
            r = is_positive_tuple([vals[i] for i in t], tol=trans_tol, pos_tol=pos_tol)
            return r.value, r.margin
        except AnosovLabError:
            return False, 0.0

    res = _pmap(one, tuples, jobs)
    values = [v for v, _ in res]
    margins = np.array([m for _, m in res])
    if any(v is False for v in values):
        verdict = Verdict.FAIL
    elif any(v is None for v in values):
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    i = int(np.argmin(margins))
    rows = [{"tuple": n, "size": len(t), "angles": " ".join(repr(float(ang[j])) for j in t),
             "value": "inconclusive" if v is None else bool(v), "margin": float(m)}
            for n, (t, (v, m)) in enumerate(zip(tuples, res))]
    return Category("positivity", verdict, float(margins[i]),
                    {"n": len(tuples), "n_points": n, "rejected": sum(v is False for v in values),
                     "worst_tuple": [float(ang[j]) for j in tuples[i]], "rows": rows})


def gap_category(rep, ball, slope_tol: float = 0.01, samples=None, jobs: int = 1) -> Category:
    """All per-k singular value gap verdicts; the margin is the smallest fitted lower slope."""
    if samples is None:
        samples = gap_samples(rep, ball, jobs)
    stats = [gap_statistics(rep, ball, k, slope_tol=slope_tol, samples=samples) for k in range(1, rep.d)]
    margin = float(min(s.fit.lower_slope for s in stats))
    return Category("gaps", Verdict.combine(s.verdict for s in stats), margin,
                    {str(s.k): {"verdict": s.verdict.value, "lower_slope": s.fit.lower_slope} for s in stats})


def hitchin_certify(rep, ball: Sequence, limit_sample, tuple_budget: int = 200,
                    rng: Optional[np.random.Generator] = None, sizes=(3, 4), slope_tol: float = 0.01,
                    n_range=None, jobs: int = 1) -> HitchinReport:
    """Loxodromy, parabolic Jordan shape, positivity and gap checks.

    Each category reports its verdict and worst margin. A category whose
    computation raises records a FAIL with the error message.

    Raises
    ------
    ValueError
        If the dimension exceeds the positivity cap of 8.
    """
    if rep.d > MAX_DIM:
        raise ValueError(f"positivity certification is capped at d = {MAX_DIM}")
    rng = rng if rng is not None else np.random.default_rng(0)
    cats = {}
    cats["loxodromy"] = guard("loxodromy", lambda: loxodromy_category(rep, ball, slope_tol, jobs))
    cats["parabolic"] = guard("parabolic", lambda: parabolic_category(rep, ball, n_range, jobs))
    cats["positivity"] = guard("positivity", lambda: positivity_category(rep, limit_sample, tuple_budget, rng,
                                                                         sizes, jobs=jobs))
    cats["gaps"] = guard("gaps", lambda: gap_category(rep, ball, slope_tol, jobs=jobs))
    return HitchinReport(cats)
