"""Competitors survive small perturbations of the candidate family.

Given a family p_1..p_N and a cheaper competitor q_1..q_N with the same
pooled law, perturb the p_i slightly. The constructions return a competitor
of the perturbed family that stays close to q. The martingale version also
restores every barycenter.

Run with ``python3 demos/04_competitors.py``.
"""

import numpy as np

from motstab import (DiscreteMeasure, build_competitors, build_mart_competitors, decompose, mean, pooled,
                     repair_barycenters, wasserstein)

p = [DiscreteMeasure([-1.0, 1.0], [0.5, 0.5]), DiscreteMeasure.dirac(0.0)]
q = [DiscreteMeasure.dirac(0.0), DiscreteMeasure([-1.0, 1.0], [0.5, 0.5])]
print("pooled(p) == pooled(q):", pooled(p) == pooled(q))

dec = decompose(p, q)
print("mass moved from p_i to q_j:")
print(np.array([[m.total_mass for m in row] for row in dec.m]))

for k in range(1, 7):
    s = 2.0 ** -k
    pp = [p[0].translate(s), p[1].translate(-s)]
    out = build_competitors(p, q, pp)
    mart = build_mart_competitors(p, q, pp)
    d = max(wasserstein(a, b) for a, b in zip(out, q))
    dm = max(wasserstein(a, b) for a, b in zip(mart, q))
    bary = max(abs(mean(a) - mean(b)) for a, b in zip(mart, pp))
    print(f"shift {s:<9g} W1 to q: {d:.5f}  martingale: {dm:.5f}  barycenter error {bary:.1e}")

###############################################################################
# The barycenter repair on its own: exchange mass between competitors until
# each mean matches its target.

out = build_competitors(p, q, pp)
fixed, trace = repair_barycenters(out, pp)
print("repair steps:", len(trace.steps), " residuals:", [f"{r:.1e}" for r in trace.residuals])
