"""Random instance generators shared by the test modules.

Atoms are small integers so that near-ties between costs of different
couplings do not blur the verdicts under test.
"""

import numpy as np

from motstab.measures import DiscreteMeasure
from motstab.transport import TransportPlan


def random_measure(rng, size, lo=-4, hi=4):
    atoms = rng.choice(np.arange(lo, hi + 1), size=size, replace=False).astype(float)
    return DiscreteMeasure(atoms, rng.dirichlet(np.ones(size)))


def martingale_pair(rng, max_mu=4, max_nu=6, spread=2):
    """``mu <=_c nu`` built by splitting each atom of mu into two integers around it."""
    while True:
        m = int(rng.integers(1, max_mu + 1))
        mu = random_measure(rng, m, -3, 3)
        ys, ws = [], []
        for x, w in mu:
            if rng.random() < 0.2:
                ys.append(x)
                ws.append(w)
                continue
            a = x - rng.integers(1, spread + 1)
            b = x + rng.integers(1, spread + 1)
            lam = (b - x) / (b - a)
            ys += [a, b]
            ws += [w * lam, w * (1 - lam)]
        nu = DiscreteMeasure(ys, ws)
        if nu.size <= max_nu and nu.size >= 2:
            return mu, nu


def random_coupling(rng, mu, nu, n_mix=2):
    """A mixture of a few random vertices of the coupling polytope (not optimal in general)."""
    from motstab.costs import Pointwise
    from motstab.transport import solve_ot

    mass = np.zeros((mu.size, nu.size))
    lam = rng.dirichlet(np.ones(n_mix))
    for l in lam:
        table = rng.normal(size=(mu.size, nu.size))
        plan, _ = solve_ot(mu, nu, Pointwise.from_table(mu.atoms, nu.atoms, table))
        mass += l * plan.mass
    return TransportPlan(mu.atoms, nu.atoms, mass)


def random_table(rng, mu, nu):
    from motstab.costs import Pointwise

    return Pointwise.from_table(mu.atoms, nu.atoms, rng.integers(0, 10, size=(mu.size, nu.size)).astype(float))


# acceptance summary lines, printed by the terminal-summary hook in conftest
ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return ok
