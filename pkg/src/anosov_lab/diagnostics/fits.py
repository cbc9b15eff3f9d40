"""Verdicts and extremal exponential bound fitting."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptySampleError


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"

    @classmethod
    def combine(cls, verdicts) -> "Verdict":
        vs = list(verdicts)
        if any(v is cls.FAIL for v in vs):
            return cls.FAIL
        if any(v is cls.INCONCLUSIVE for v in vs):
            return cls.INCONCLUSIVE
        return cls.PASS


def slope_verdict(slope: float, slope_tol: float) -> Verdict:
    """FAIL at or below ``slope_tol``, PASS above twice of it, INCONCLUSIVE between."""
    if not np.isfinite(slope):
        return Verdict.INCONCLUSIVE
    if slope <= slope_tol:
        return Verdict.FAIL
    if slope > 2.0 * slope_tol:
        return Verdict.PASS
    return Verdict.INCONCLUSIVE


def _hull(points, upper: bool):
    """Monotone chain hull of points sorted by (x, y); upper or lower chain."""
    out = []
    for p in points:
        while len(out) >= 2:
            (x1, y1), (x2, y2) = out[-2], out[-1]
            cross = (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1)
            if (upper and cross >= 0) or (not upper and cross <= 0):
                out.pop()
            else:
                break
        out.append(p)
    return out


def _last_edge_slope(xs, ys, upper: bool, min_span: float = 0.1, x_rtol: float = 1e-9) -> float:
    """Terminal slope of the upper or lower hull.

    Abscissae within ``x_rtol`` (relative) are merged, keeping the top point
    for the upper hull and the bottom one for the lower hull, and the slope
    is the chord from the last hull vertex back to the nearest vertex at
    least ``min_span`` of the x range away, so that rounding noise between
    nearly equal abscissae cannot set the slope.
    """
    if xs.size == 0:
        return math.nan
    order = np.lexsort((ys, xs))
    tol = x_rtol * max(1.0, float(np.max(np.abs(xs))))
    pts = []
    for x, y in zip(xs[order].tolist(), ys[order].tolist()):
        if pts and x - pts[-1][0] <= tol:
            if (upper and y > pts[-1][1]) or (not upper and y < pts[-1][1]):
                pts[-1] = (pts[-1][0], y)
            continue
        pts.append((x, y))
    if len(pts) < 2:
        return math.nan
    chain = _hull(pts, upper)
    span = min_span * (pts[-1][0] - pts[0][0])
    x2, y2 = chain[-1]
    j = len(chain) - 2
    while j > 0 and x2 - chain[j][0] < span:
        j -= 1
    x1, y1 = chain[j]
    return (y2 - y1) / (x2 - x1)


@dataclass(frozen=True)
class FitResult:
    """Least-squares line and extremal bounds ``-log A_lo + x / a_lo <= y <= log A_hi + a_hi x``.

    ``upper_slope`` is ``a_hi`` and ``lower_slope`` is ``1 / a_lo``. Both
    slopes are terminal slopes of the respective convex hull of the scatter
    (the lower one ignoring ``x < x_min``); the intercepts are then the
    smallest ones for which the bounds hold on every sample.
    """

    n: int
    ls_slope: float
    ls_intercept: float
    upper_slope: float
    log_A_hi: float
    lower_slope: float
    log_A_lo: float
    min_slack: float

    @property
    def a_hi(self) -> float:
        return self.upper_slope

    @property
    def A_hi(self) -> float:
        return math.exp(self.log_A_hi) if self.log_A_hi < 700 else math.inf

    @property
    def a_lo(self) -> float:
        return 1.0 / self.lower_slope if self.lower_slope > 0 else math.inf

    @property
    def A_lo(self) -> float:
        return math.exp(self.log_A_lo) if self.log_A_lo < 700 else math.inf

    # an undefined hull slope (too few distinct abscissae) was fitted as 0
    def upper(self, x):
        s = 0.0 if math.isnan(self.upper_slope) else self.upper_slope
        return self.log_A_hi + s * np.asarray(x)

    def lower(self, x):
        s = 0.0 if math.isnan(self.lower_slope) else self.lower_slope
        return s * np.asarray(x) - self.log_A_lo

    def holds(self, xs, ys, tol: float = 1e-9) -> bool:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        return bool(np.all(ys <= self.upper(xs) + tol) and np.all(ys >= self.lower(xs) - tol))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "ls_slope": self.ls_slope,
            "ls_intercept": self.ls_intercept,
            "a_hi": self.a_hi,
            "A_hi": self.A_hi,
            "log_A_hi": self.log_A_hi,
            "a_lo": self.a_lo,
            "A_lo": self.A_lo,
            "log_A_lo": self.log_A_lo,
            "lower_slope": self.lower_slope,
            "upper_slope": self.upper_slope,
            "min_slack": self.min_slack,
        }


def fit_bounds(xs, ys, x_min: float = 0.5) -> FitResult:
    """Fit two-sided affine bounds to a scatter (affine in log scale)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0:
        raise EmptySampleError("cannot fit an empty scatter")
    if np.ptp(xs) > 1e-12 * max(1.0, float(np.max(np.abs(xs)))):
        ls_slope, ls_intercept = np.polyfit(xs, ys, 1)
    else:
        ls_slope, ls_intercept = math.nan, float(np.mean(ys))
    s_hi = _last_edge_slope(xs, ys, upper=True)
    far = xs >= x_min
    s_lo = _last_edge_slope(xs[far], ys[far], upper=False) if far.sum() else math.nan
    s_hi_eff = 0.0 if math.isnan(s_hi) else s_hi
    s_lo_eff = 0.0 if math.isnan(s_lo) else s_lo
    log_A_hi = float(np.max(ys - s_hi_eff * xs))
    log_A_lo = float(np.max(s_lo_eff * xs - ys))
    slack = min(np.min(log_A_hi + s_hi_eff * xs - ys), np.min(ys - (s_lo_eff * xs - log_A_lo)))
    return FitResult(int(xs.size), float(ls_slope), float(ls_intercept), float(s_hi), log_A_hi,
                     float(s_lo), log_A_lo, float(slack))
