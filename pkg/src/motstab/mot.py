"""Martingale optimal transport on the real line."""

from __future__ import annotations

import numpy as np

from .costs import Pointwise
from .errors import InfeasibleOrder, NumericalFailure
from .lp import LinearProgram, Status, solve_lp
from .measures import DiscreteMeasure, convex_order
from .transport import TransportPlan, coupling_lp

MARTINGALE_TOL = 1e-8


class MartingalePlan(TransportPlan):
    """Transport plan whose rows have barycenter equal to their x-atom.

    Construction verifies the martingale property at ``MARTINGALE_TOL``.
    """

    def __post_init__(self):
        super().__post_init__()
        if not is_martingale(self, MARTINGALE_TOL):
            raise ValueError("plan is not a martingale coupling")

    @property
    def verified(self) -> bool:
        return True


def is_martingale(plan: TransportPlan, tol: float = MARTINGALE_TOL) -> bool:
    """Every row with positive mass has barycenter within ``tol`` of its x-atom.

    The check is on the unnormalized identity
    ``|sum_j y_j pi_ij - x_i mu_i| <= tol``.
    """
    w = plan.mass.sum(axis=1)
    dev = plan.mass @ plan.y_atoms - plan.x_atoms * w
    return bool(np.all(np.abs(dev[w > 0]) <= tol))


def martingale_lp(mu: DiscreteMeasure, nu: DiscreteMeasure, cost: np.ndarray) -> LinearProgram:
    """Transport LP plus one barycenter equality per x-atom."""
    base = coupling_lp(mu, nu, cost)
    m, n = mu.size, nu.size
    bary = np.kron(np.eye(m), nu.atoms[None, :])
    A = np.vstack([base.constraint_matrix, bary])
    b = np.concatenate([base.rhs, mu.atoms * mu.weights])
    return LinearProgram(base.objective, A, b)


def solve_mot(mu: DiscreteMeasure, nu: DiscreteMeasure, c: Pointwise) -> tuple[MartingalePlan, float]:
    """Optimal martingale coupling of ``mu`` and ``nu`` for pointwise cost ``c``.

    Raises
    ------
    InfeasibleOrder
        If ``mu`` is not smaller than ``nu`` in convex order.
    """
    mu.require_probability("mu")
    nu.require_probability("nu")
    if not convex_order(mu, nu):
        raise InfeasibleOrder("infeasible: convex order violated")
    C = c.matrix(mu.atoms, nu.atoms)
    sol = solve_lp(martingale_lp(mu, nu, C))
    if sol.status is Status.INFEASIBLE:
        # convex order held within tolerance but the equalities could not be met
        raise InfeasibleOrder("infeasible: martingale constraints cannot be satisfied")
    if not sol.optimal:
        raise NumericalFailure(f"martingale LP reported {sol.status.value}")
    plan = MartingalePlan(mu.atoms, nu.atoms, sol.primal.reshape(mu.size, nu.size))
    return plan, float(np.sum(C * plan.mass))
