"""
Correspondence association with l1 regularization
=================================================

Spectral matching (principal eigenvector of the affinity matrix) versus
the l1 regularized solution at a few noise levels.
"""

# %%
import numpy as np

from pgs.apps import build_association, count_correct, extract_matches, simulate_association, solve_association, spectral_solution

for noise in (0.0, 4.0, 8.0):
    res = []
    for run in range(10):
        qa, qb, truth = simulate_association(run, m=20, m_out=5, delta_pts=noise)
        p = build_association(qa, qb)
        x0 = spectral_solution(p)
        x, _ = solve_association(p)
        res.append((
            count_correct(extract_matches(x0.coords, p), truth),
            count_correct(extract_matches(x.coords, p), truth),
            np.sum(np.abs(x0.coords) > 0.01),
            np.sum(np.abs(x.coords) > 0.01),
        ))
    res = np.array(res, dtype=float).mean(axis=0)
    print(f"noise {noise:4.1f}: correct {res[0]:5.2f} -> {res[1]:5.2f}   support {res[2]:6.1f} -> {res[3]:5.1f}")
