"""A family rho_t that is quasi-isometric on orbits yet loses its first gap at t != 0.

rho_t is the lift of a free Fuchsian pair to SL(2) plus a rank-two block
sending the parabolic generator to [[1, t], [0, 1]]. At t = 0 the extra
block is trivial and the cusp has the right growth; at t = 1 the first
singular value gap along the cusp powers stays at zero.

    python demos/rho_t_counterexample.py
"""
import numpy as np

from anosov_lab import MoebiusMap, enumerate_ball
from anosov_lab.diagnostics import gap_statistics, orbit_qi_check, parabolic_growth_exponents
from anosov_lab.reps import direct_sum, explicit_rep, lift_rep

U = [[1.0, 1.0], [0.0, 1.0]]
gens = [MoebiusMap.from_matrix([[5, 1], [4, 1]]), MoebiusMap.from_matrix(U)]
ball = enumerate_ball(gens, 6)

for t in (0.0, 1.0):
    rep = direct_sum(lift_rep(gens), explicit_rep([np.eye(2), [[1.0, t], [0.0, 1.0]]]))
    gap = gap_statistics(rep, ball, 1)
    qi = orbit_qi_check(rep, ball)
    growth = parabolic_growth_exponents(rep, (2,))
    print(f"t={t:g}")
    print(f"  gap k=1: {gap.verdict.value}, lower slope {gap.fit.lower_slope:.4f}, "
          f"{len(gap.zero_gap_words)} long words with vanishing gap")
    print(f"  orbit QI: {qi.verdict.value}")
    print(f"  cusp exponents {tuple(round(c, 3) for c in growth.exponents)}, k=1 {growth.verdicts[1].value}")
