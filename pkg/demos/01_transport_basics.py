"""Discrete transport on the line: quantile coupling, the LP, and convex order.

Run with ``python3 demos/01_transport_basics.py``.
"""

import numpy as np

from motstab import DiscreteMeasure, convex_order, monotone_coupling, solve_ot, wasserstein
from motstab.costs import Pointwise

mu = DiscreteMeasure([-1.0, 0.0, 2.0], [0.2, 0.5, 0.3])
nu = DiscreteMeasure([-2.0, 1.0, 3.0], [0.4, 0.4, 0.2])

###############################################################################
# In one dimension the monotone (quantile) coupling is optimal for every
# convex function of y - x, so W_r needs no LP at all.

for r in (1.0, 2.0):
    print(f"W_{r:g}(mu, nu) = {wasserstein(mu, nu, r):.6f}")

print("monotone coupling (x, y, mass):")
for i, j, m in monotone_coupling(mu, nu):
    print(f"  {mu.atoms[i]:+g} -> {nu.atoms[j]:+g}  {m:.2f}")

###############################################################################
# The LP solver agrees with the quantile formula for the square cost.

plan, value = solve_ot(mu, nu, Pointwise.named("square"))
print("LP optimum for |y-x|^2:", value, " W_2^2:", wasserstein(mu, nu, 2.0) ** 2)
print(np.round(plan.mass, 3))

###############################################################################
# Convex order is the condition for martingale couplings to exist.
# Spreading a measure out keeps it above; shrinking it does not.

wide = DiscreteMeasure([-2.5, 0.0, 3.0], [0.2, 0.5, 0.3])
print("mean(mu) =", mu.atoms @ mu.weights, " mean(wide) =", wide.atoms @ wide.weights)
print("mu <=_c wide:", convex_order(mu, wide))
print("wide <=_c mu:", convex_order(wide, mu))
