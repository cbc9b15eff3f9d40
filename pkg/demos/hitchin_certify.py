"""Hitchin certification of tau_d for the thrice-punctured sphere group.

Runs the loxodromy, parabolic, gap and positivity categories on a
limit-set sample and prints each verdict with its margin.

    python demos/hitchin_certify.py [d]
"""
import math
import sys

import numpy as np

from anosov_lab import MoebiusMap, enumerate_ball, sample_limit_set, tau_rep
from anosov_lab.diagnostics import hitchin_certify

d = int(sys.argv[1]) if len(sys.argv) > 1 else 4
gens = [MoebiusMap.from_matrix(m) for m in ([[1, 2], [0, 1]], [[1, 0], [2, 1]])]
ball = enumerate_ball(gens, 6)
sample = sample_limit_set(ball, math.pi / 100, max_points=50)

report = hitchin_certify(tau_rep(gens, d), ball, sample, tuple_budget=200, rng=np.random.default_rng(0))
print(f"tau_{d}: {report.verdict.value} ({len(sample)} limit points)")
for name, cat in report.categories.items():
    print(f"  {name:12s} {cat.verdict.value:13s} margin {cat.margin}")
