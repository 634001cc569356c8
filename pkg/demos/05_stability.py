"""Stability of martingale transport under perturbation of the marginals and the cost.

A geometric schedule bins mu on a mesh h_k, dilates nu by eps_k and adds
delta_k to the cost, with h_k = eps_k = delta_k = 2^-k. Every perturbed pair
stays in convex order, so each step has an optimizer.

Run with ``python3 demos/05_stability.py``.
"""

import numpy as np

from motstab import (DiscreteMeasure, NonUniqueOptimizer, PerturbationSchedule, adapted_distance, dilate,
                     plan_distance, require_unique_optimizer, solve_mot, run_monotonicity_stability, run_plan_stability,
                     run_value_stability)
from motstab.costs import Pointwise

mu = DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])
nu = DiscreteMeasure([-2.0, 2.0], [0.5, 0.5])
c = Pointwise.named("abs")

run = run_value_stability(mu, nu, c, PerturbationSchedule.geometric(12))
print("value run, limit value", run.limit_value)
print(run.to_csv())

###############################################################################
# The cost bump alone moves the value by exactly delta_k, since every
# coupling pays the constant. That sets the pace of convergence.

bump_only = PerturbationSchedule.geometric(6, mesh=False, dilation=False)
gaps = run_value_stability(mu, nu, c, bump_only).column("value_gap")
print("bump only, gap * 2^k:", np.round(gaps * 2.0 ** np.arange(1, 7), 12))

###############################################################################
# Plans converge too when the limit optimizer is unique.

mu = DiscreteMeasure([-1.0, 0.0, 2.0], [0.3, 0.4, 0.3])
nu = DiscreteMeasure([-3.0, -1.0, 1.0, 4.0], [0.15, 0.3125, 0.3625, 0.175])
cube = Pointwise.named("cube")
unique = require_unique_optimizer(mu, nu, cube)
run = run_plan_stability(mu, nu, cube, PerturbationSchedule.geometric(10))
print("plan distances:", [f"{d:.2e}" for d in run.column("plan_dist")])

###############################################################################
# Optimizers stay martingale monotone along the way, and so does the limit.

run = run_monotonicity_stability(mu, nu, cube, PerturbationSchedule.geometric(6))
print("max monotonicity gap along the run:", run.column("mono_gap").max(), " limit:", run.limit_mono_gap)

###############################################################################
# When every coupling costs the same, uniqueness fails and the plan run
# refuses to start.

flat = Pointwise(func=lambda x, y: x ** 2 + 0 * y, name="flat")
try:
    require_unique_optimizer(mu, nu, flat)
except NonUniqueOptimizer as e:
    print("flat cost:", e)

###############################################################################
# The nested distance also compares conditional laws, so it is at least the
# plain distance between plans.

wider = dilate(nu, 0.25)
plan_k, _ = solve_mot(mu, wider, cube)
print(f"plain distance {plan_distance(plan_k, unique):.4f}  nested distance {adapted_distance(plan_k, unique):.4f}")
