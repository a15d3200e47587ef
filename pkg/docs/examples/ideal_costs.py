"""Cost of the idealised walk-then-reject sampler.

Prints the improvement ratio over the input walk for the case-study graph
families, then the odd-cycle cost table whose minimum sits near
``k = l**2 / 3 - 1``.

    python3 docs/examples/ideal_costs.py
"""

from walkestimate.experiments import case_study_graph
from walkestimate.ideal import (IdealParams, case_study_ratio, cycle_cost_AR, cycle_optimal_k,
                                cycle_optimal_k_bruteforce, f_at_t_opt, rw_cost, t_opt)

p = IdealParams(lam=0.05, d_max=64, gamma=8, delta=1e-3)
print("bound view: t_opt %.2f  f(t_opt) %.1f  c_RW %.1f" % (t_opt(p), f_at_t_opt(p), rw_cost(p)))

print("\nimprovement ratio 1 - c / c_RW (lazy Metropolis-Hastings walk)")
for model in ("barbell", "hypercube", "tree", "ba"):
    ratios = [case_study_ratio(case_study_graph(model, n))["ratio"] for n in (32, 64, 128)]
    print("  %-10s" % model + "  ".join("%.3f" % r for r in ratios))

print("\nodd cycles: expected steps per accepted sample")
for l in (5, 7, 9, 11):
    k = cycle_optimal_k_bruteforce(l)
    print("  l=%2d  best k %3d (approx %.1f)  cost %.2f" % (l, k, cycle_optimal_k(l),
                                                        cycle_cost_AR(l, k)))
