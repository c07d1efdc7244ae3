"""
Proxy step-size on a small Rayleigh quotient
============================================

The tangent update is solved in closed form for a proxy step-size t', and
the actual step-size t = t' / c(t') follows. This script samples the
mapping and then runs the three solvers.
"""

# %%
import numpy as np

from pgs import Full, L1Reg, NuclearReg, ProblemInstance, QuadraticCost, SolverConfig, normalize, phi_diagnostics, riemannian_gradient, solve

rng = np.random.default_rng(0)
B = rng.standard_normal((9, 9))
q = QuadraticCost(B @ B.T)
h = NuclearReg(0.5, Full(3, 3))
p = ProblemInstance(q, h, 9)
x = normalize(rng.standard_normal(9))
rgrad = riemannian_gradient(x, q.euclid_grad(x.coords))

# %% the mapping t' -> t is increasing below 1 / h(x)
grid = np.linspace(0.05, 0.95, 10) / h.value(x.coords)
for tp, c, phi in phi_diagnostics(x, rgrad, h, grid):
    print(f"t' = {tp:8.4f}   c = {c:7.4f}   t = {phi:8.4f}")

# %% PGS, A-PGS and AM-PGS from the same start
for method in ("pgs", "apgs", "ampgs"):
    xs, trace = solve(p, x, SolverConfig(method=method))
    print(f"{method:6s} f = {trace.final_cost:.10f}  iterations = {trace.iterations:4d}  line-search = {trace.linesearch_total}")

# %% an l1 problem with a searched maximum proxy step-size
p1 = ProblemInstance(q, L1Reg(0.3), 9)
xs, trace = solve(p1, x, SolverConfig(strategy="searched-adaptive"))
print("t'_max =", trace.t_max_initial, " 1/L =", 1 / q.lipschitz, " search trials =", trace.search_trials)
print("nonzeros:", np.sum(np.abs(xs.coords) > 1e-8), "of 9")
