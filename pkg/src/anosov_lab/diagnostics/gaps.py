"""Singular value gaps, eigenvalue gaps and orbit quasi-isometry scatters."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import EmptySampleError
from ..freegroup import GroupElement, word_to_str
from ..hyperbolic import Kind
from .fits import FitResult, Verdict, fit_bounds, slope_verdict


@dataclass(frozen=True)
class GapSample:
    word: tuple
    displacement: float
    translation_length: float
    log_singular_gaps: np.ndarray
    log_eigen_gaps: np.ndarray
    symmetric_space_dist: float
    hyperbolic: bool

    def to_row(self) -> dict:
        row = {
            "word": word_to_str(self.word),
            "displacement": self.displacement,
            "translation_length": self.translation_length,
            "symmetric_space_dist": self.symmetric_space_dist,
        }
        for k, g in enumerate(self.log_singular_gaps, start=1):
            row[f"log_sv_gap_{k}"] = float(g)
        for k, g in enumerate(self.log_eigen_gaps, start=1):
            row[f"log_eig_gap_{k}"] = float(g)
        return row


def _pmap(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def gap_samples(rep, ball: Sequence[GroupElement], jobs: int = 1) -> list:
    """One :class:`GapSample` per ball element, in ball order."""

    def one(g: GroupElement) -> GapSample:
        lsv = rep.log_singular_values(g.word)
        hyp = g.kind is Kind.HYPERBOLIC
        lev = rep.log_eigen_moduli(g.word)
        # clip tiny negative rounding: gaps are nonnegative by definition
        sg = np.maximum(-np.diff(lsv), 0.0)
        eg = np.maximum(-np.diff(lev), 0.0)
        return GapSample(tuple(g.word), g.displacement, g.translation_length, sg, eg,
                         float(math.sqrt(float(np.sum(lsv ** 2)))), hyp)

    return _pmap(one, list(ball), jobs)


@dataclass(frozen=True)
class GapStatistics:
    k: int
    fit: FitResult
    verdict: Verdict
    zero_gap_words: tuple
    slope_tol: float
    samples: tuple

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "fit": self.fit.to_json(),
            "verdict": self.verdict.value,
            "label": "gap-open" if self.verdict is Verdict.PASS else (
                "gap-closed" if self.verdict is Verdict.FAIL else "inconclusive"),
            "zero_gap_words": [word_to_str(w) for w in self.zero_gap_words],
            "slope_tol": self.slope_tol,
        }


def gap_statistics(rep, ball: Sequence[GroupElement], k: int, slope_tol: float = 0.01,
                   zero_tol: float = 1e-9, displacement_min: float = 2.0,
                   samples: Optional[Sequence[GapSample]] = None, jobs: int = 1) -> GapStatistics:
    """Scatter of ``log(sigma_k / sigma_{k+1})`` against ``d(i, gamma i)`` with fitted bounds.

    The verdict fails when the fitted lower slope is at most ``slope_tol``
    or when an element of displacement above ``displacement_min`` has a
    vanishing gap; it passes when the slope exceeds ``2 * slope_tol``.
    """
    if not 1 <= k <= rep.d - 1:
        raise ValueError(f"k must lie in [1, {rep.d - 1}]")
    if samples is None:
        samples = gap_samples(rep, ball, jobs)
    if not samples:
        raise EmptySampleError("empty ball")
    xs = np.array([s.displacement for s in samples])
    ys = np.array([s.log_singular_gaps[k - 1] for s in samples])
    fit = fit_bounds(xs, ys)
    zero = tuple(s.word for s in samples if s.displacement > displacement_min and s.log_singular_gaps[k - 1] <= zero_tol)
    verdict = Verdict.FAIL if zero else slope_verdict(fit.lower_slope, slope_tol)
    return GapStatistics(k, fit, verdict, zero, slope_tol, tuple(samples))


@dataclass(frozen=True)
class EigengapStatistics:
    k: int
    fit: FitResult
    min_rate: float
    min_rate_word: tuple
    verdict: Verdict
    n_hyperbolic: int

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "fit": self.fit.to_json(),
            "min_rate": self.min_rate,
            "min_rate_word": word_to_str(self.min_rate_word),
            "verdict": self.verdict.value,
            "n_hyperbolic": self.n_hyperbolic,
        }


def eigengap_statistics(rep, ball: Sequence[GroupElement], k: int, slope_tol: float = 0.01,
                        samples: Optional[Sequence[GapSample]] = None, jobs: int = 1) -> EigengapStatistics:
    """Scatter of ``log(lambda_k / lambda_{k+1})`` against the translation length.

    Also reports the uniform periodic contraction rate
    ``min log(lambda_k / lambda_{k+1}) / l(gamma)`` over hyperbolic elements.

    Raises
    ------
    EmptySampleError
        If the ball has no hyperbolic element.
    """
    if samples is None:
        samples = gap_samples(rep, [g for g in ball if g.kind is Kind.HYPERBOLIC], jobs)
    hyp = [s for s in samples if s.hyperbolic]
    if not hyp:
        raise EmptySampleError("no hyperbolic elements: eigenvalue gap scatter is empty")
    xs = np.array([s.translation_length for s in hyp])
    ys = np.array([s.log_eigen_gaps[k - 1] for s in hyp])
    fit = fit_bounds(xs, ys)
    rates = ys / xs
    i = int(np.argmin(rates))
    min_rate = float(rates[i])
    verdict = slope_verdict(min_rate, slope_tol)
    return EigengapStatistics(k, fit, min_rate, hyp[i].word, verdict, len(hyp))


@dataclass(frozen=True)
class QIStatistics:
    fit: FitResult
    verdict: Verdict

    def to_json(self) -> dict:
        return {"fit": self.fit.to_json(), "verdict": self.verdict.value,
                "label": "QI" if self.verdict is Verdict.PASS else self.verdict.value}


def orbit_qi_check(rep, ball: Sequence[GroupElement], slope_tol: float = 0.01,
                   samples: Optional[Sequence[GapSample]] = None, jobs: int = 1) -> QIStatistics:
    """Scatter of the symmetric space distance ``sqrt(sum_j log(sigma_j)^2)`` against ``d(i, gamma i)``."""
    if samples is None:
        samples = gap_samples(rep, ball, jobs)
    if not samples:
        raise EmptySampleError("empty ball")
    xs = np.array([s.displacement for s in samples])
    ys = np.array([s.symmetric_space_dist for s in samples])
    fit = fit_bounds(xs, ys)
    return QIStatistics(fit, slope_verdict(fit.lower_slope, slope_tol))
