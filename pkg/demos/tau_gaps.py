"""Singular value gaps of the tau_d images of the thrice-punctured sphere group.

For the orthonormal basis log(sigma_k / sigma_{k+1}) equals the hyperbolic
displacement d(i, gamma i) exactly, so every fitted slope is 1.

    python demos/tau_gaps.py [d] [L]
"""
import sys

import numpy as np

from anosov_lab import MoebiusMap, enumerate_ball, tau_rep
from anosov_lab.diagnostics import gap_samples, gap_statistics

d = int(sys.argv[1]) if len(sys.argv) > 1 else 4
L = int(sys.argv[2]) if len(sys.argv) > 2 else 6

gens = [MoebiusMap.from_matrix(m) for m in ([[1, 2], [0, 1]], [[1, 0], [2, 1]])]
ball = enumerate_ball(gens, L)
rep = tau_rep(gens, d, "orthonormal")
samples = gap_samples(rep, ball)
print(f"tau_{d}, {len(ball)} elements of word length <= {L}")
for k in range(1, d):
    st = gap_statistics(rep, ball, k, samples=samples)
    f = st.fit
    print(f"k={k}: slope in [{f.lower_slope:.6f}, {f.a_hi:.6f}], verdict {st.verdict.value}")

err = max(float(np.max(np.abs(s.log_singular_gaps - s.displacement))) for s in samples)
print(f"max |log gap - displacement| = {err:.2e}")
