"""Weak transport: barycentric costs, and a cost that is not convex in p.

Run with ``python3 demos/03_weak_transport.py``.
"""

import numpy as np

from motstab import (Barycentric, CandidateSet, DiscreteMeasure, barycentric_value, check_C_monotone,
                     hunt_violation_generic, jensen_bound, scan_plan_subsets, solve_owt_barycentric)
from motstab.costs import min_atom_mass

###############################################################################
# A barycentric cost only sees the mean of each conditional law:
# C(x, p) = theta(mean(p)). By Jensen the value is at least theta(mean nu),
# and with theta = |.|, mu = nu = (d0 + d1)/2 that bound of 1/2 is attained:
# any coupling pays |m0|/2 + |m1|/2 with m0 + m1 = 1.

half = DiscreteMeasure([0.0, 1.0], [0.5, 0.5])
theta = Barycentric.absolute()
plan, value = solve_owt_barycentric(half, half, theta)
print("OWT value, theta=|.|, mu = nu = (d0 + d1)/2:", value)
print(np.round(plan.mass, 4))
print("value recomputed from the plan:", barycentric_value(plan, theta))
print("Jensen lower bound theta(mean nu):", jensen_bound(half, theta))

###############################################################################
# The optimizer is C-monotone: no finite group of rows can be rearranged more
# cheaply while keeping the pooled law.

rng = np.random.default_rng(0)
mu = DiscreteMeasure(rng.normal(size=4), rng.dirichlet(np.ones(4)))
nu = DiscreteMeasure(rng.normal(size=5) * 2, rng.dirichlet(np.ones(5)))
theta = Barycentric(((1.0, 0.0), (-2.0, 0.0), (0.5, 0.3)))
plan, value = solve_owt_barycentric(mu, nu, theta)
print(f"random instance: value {value:.5f}, subset gap {scan_plan_subsets(plan, theta, 3).gap:.2g}")

###############################################################################
# For a cost that is not convex in p the linear check does not apply. The
# cost C(x, p) = min over {0, 1} of p's mass there is concave, and the
# candidate set {(0, nu), (0, nu)} with nu = (d0 + d1)/2 pays
# 2 * C(0, nu) = 1. Splitting nu into d0 and d1 pays nothing.

cand = CandidateSet(((0.0, half), (0.0, half)))
rep = hunt_violation_generic(cand, min_atom_mass([0.0, 1.0]))
print("generic hunt:", "violated" if rep.is_violated else "pass", "gap", rep.gap)
for q in rep.competitors:
    print("  competitor:", dict(zip(q.atoms.tolist(), q.weights.tolist())))

# the same candidate set is fine for a linear cost
print("linear check, theta = |.|:", check_C_monotone(cand, Barycentric.absolute()).gap)
