"""Solve one small robust spanning tree instance with every method.

Run from the repository root:  python demos/quickstart.py
"""

import numpy as np

from robustfw import BudgetedSet, GraphInstance, MSTOracle, ProblemInstance, SolverConfig, solve
from robustfw.harness import brute_force_optimum

rng = np.random.default_rng(0)
graph = GraphInstance.complete(6)
oracle = MSTOracle(graph)
n = graph.num_edges

# nominal costs in [1, 10], deviations up to the nominal cost, 4 edges may deviate
c_lower = rng.integers(1, 11, n).astype(float)
d = np.array([rng.integers(1, c + 1) for c in c_lower], dtype=float)
uset = BudgetedSet(c_lower, d, gamma=4.0)
problem = ProblemInstance(n, oracle, uset, oracle.diameter_bound(), "k6")

f_star, _ = brute_force_optimum(problem)
print(f"exact optimum over conv(X): {f_star:.6f}\n")
print(f"{'method':<12} {'termination':<15} {'iters':>6} {'lmo':>6} {'f_best':>11} {'dual':>11}")
for method in ("FW", "AFW", "FW_CONVHULL", "CONSGEN"):
    cfg = SolverConfig(method=method, epsilon=0.5, max_iters=3000, max_lmo_calls=3000)
    res = solve(problem, cfg)
    dual = "" if res.dual_bound is None else f"{res.dual_bound:.6f}"
    print(f"{method:<12} {res.termination.value:<15} {res.iterations:>6} {res.lmo_calls:>6} "
          f"{res.f_best:>11.6f} {dual:>11}")
