"""Martingale transport: the optimizer, its barycenters, and its monotonicity.

Run with ``python3 demos/02_martingale_transport.py``.
"""

import numpy as np

from motstab import (DiscreteMeasure, InfeasibleOrder, TransportPlan, enumerate_vertices, is_martingale,
                     scan_plan_subsets, solve_mot, solve_ot)
from motstab.costs import Pointwise
from motstab.mot import martingale_lp

mu = DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])
nu = DiscreteMeasure([-3.0, -1.0, 0.0, 1.0, 3.0], [0.2, 0.15, 0.3, 0.15, 0.2])
c = Pointwise.named("abs")

plan, value = solve_mot(mu, nu, c)
print("MOT value for |y-x|:", value)
print(np.round(plan.mass, 4))
print("martingale:", is_martingale(plan))
for x, row in plan.rows():
    print(f"  law of Y given X={x:+g}: barycenter {row.atoms @ row.weights / row.weights.sum():+.3g}")

# dropping the martingale constraint can only lower the cost
_, ot_value = solve_ot(mu, nu, c)
print("unconstrained OT value:", ot_value)

###############################################################################
# An optimal plan admits no cheaper rearrangement of its conditional laws
# that keeps the pooled law and every barycenter. The subset scan solves that
# rearrangement LP on every group of rows.

rep = scan_plan_subsets(plan, c, plan.shape[0], martingale=True)
print("monotonicity gap of the optimizer:", rep.gap, "->", "violated" if rep.is_violated else "pass")

# the most expensive vertex of the martingale polytope is a plan with a
# profitable rearrangement, and the scan returns the cheaper competitors
verts = enumerate_vertices(martingale_lp(mu, nu, c.matrix(mu.atoms, nu.atoms)))
worst = max(verts, key=lambda v: v.value)
bad = TransportPlan(mu.atoms, nu.atoms, worst.primal.reshape(mu.size, nu.size))
rep = scan_plan_subsets(bad, c, bad.shape[0], martingale=True)
print(f"worst vertex costs {worst.value:.4f}; gap {rep.gap:.4f}")
for q in rep.competitors:
    print("  competitor:", dict(zip(q.atoms.tolist(), np.round(q.weights, 4).tolist())))

###############################################################################
# Pairs outside convex order have no martingale coupling.

try:
    solve_mot(nu, mu, c)
except InfeasibleOrder as e:
    print("reversed pair:", e)
