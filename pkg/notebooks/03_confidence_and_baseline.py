"""
Confidence level sweep and the PSO baseline
===========================================

Sweep the reserve confidence level, check the schedule against sampled
renewable output, and compare with the particle swarm baseline.
"""

# %%
from cies.baseline_hia import PsoParams, compare_methods, hia_solve
from cies.config import bundled_config
from cies.milp.audit import evaluate_objective
from cies.pipeline import alpha_sweep
from cies.problem import build_problem
from cies.validate import monte_carlo_reserve_check

problem = build_problem(bundled_config())
alphas = [0.8, 0.85, 0.9, 0.95, 1.0]
results = alpha_sweep(problem, alphas)
for a, r in zip(alphas, results):
    sol = r.solution
    print(f"alpha {a:.2f}: reserve {sol.reserve().sum():8.1f} kWh  cost {evaluate_objective(sol).total:9.2f}")

# %%
# Empirical adequacy at alpha = 0.9 over 10^4 draws per period.
sol = results[alphas.index(0.9)].solution
rates = monte_carlo_reserve_check(sol, problem.seqs, 0.9, n_samples=10_000)
print(f"lowest adequacy {rates.min():.4f} (period {rates.argmin() + 1})")

# %%
# A shortened swarm keeps this quick; the acceptance suite uses the defaults.
params = PsoParams(population=40, iterations=60)
rows = []
for a in (0.9, 0.95, 1.0):
    milp = results[alphas.index(a)].solution
    hia = hia_solve(problem, params, alpha=a)
    rows.append((a, evaluate_objective(milp).total, milp.wall_time, hia.cost, hia.wall_time))
for row in compare_methods(rows):
    print(row)
