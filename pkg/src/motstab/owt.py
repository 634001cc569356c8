"""Weak optimal transport for linear and barycentric costs."""

from __future__ import annotations

import numpy as np

from .costs import Barycentric, GenericOracle, Pointwise  # noqa: F401 - re-exported cost specs
from .errors import NumericalFailure
from .lp import LinearProgram, solve_lp
from .measures import DiscreteMeasure, mean
from .transport import TransportPlan, coupling_lp, solve_ot

CostSpec = Pointwise | Barycentric | GenericOracle


def solve_owt_linear(mu: DiscreteMeasure, nu: DiscreteMeasure, c: Pointwise) -> tuple[TransportPlan, float]:
    """Weak transport with ``C(x, p) = int c(x, y) p(dy)``.

    Linear in ``p``, so the weak problem is the classical one and this
    delegates to :func:`solve_ot`.
    """
    return solve_ot(mu, nu, c)


def barycentric_value(plan: TransportPlan, theta: Barycentric) -> float:
    """``sum_i mu_i theta(mean of row i)`` for a given plan."""
    return float(sum(w * theta(x, p) for (x, p), w in zip(plan.rows(), plan.mu.weights)))


def barycentric_lp(mu: DiscreteMeasure, nu: DiscreteMeasure, theta: Barycentric):
    """Epigraph LP for ``V_theta``.

    Variables are ``pi[i, j]`` (row major), then ``s_i``, then one slack per
    (row, piece). With ``u_i = s_i + mu_i * L`` standing for
    ``mu_i * theta(row mean)``, the piece constraints read
    ``s_i - a * sum_j y_j pi_ij - slack = mu_i * (b - L)``, where ``L`` is a
    lower bound of theta on the hull of supp(nu), so ``s_i >= 0`` loses
    nothing. Returns the program and ``L``.
    """
    m, n = mu.size, nu.size
    K = len(theta.pieces)
    L = theta.lower_bound(float(nu.atoms[0]), float(nu.atoms[-1]))
    base = coupling_lp(mu, nu, np.zeros(m * n))
    nvar = m * n + m + m * K
    A = np.zeros((base.m + m * K, nvar))
    A[:base.m, :m * n] = base.constraint_matrix
    b = np.zeros(base.m + m * K)
    b[:base.m] = base.rhs
    r = base.m
    for i in range(m):
        for k, (a, bk) in enumerate(theta.pieces):
            A[r, i * n:(i + 1) * n] = -a * nu.atoms
            A[r, m * n + i] = 1.0
            A[r, m * n + m + i * K + k] = -1.0
            b[r] = mu.weights[i] * (bk - L)
            r += 1
    c = np.zeros(nvar)
    c[m * n:m * n + m] = 1.0
    return LinearProgram(c, A, b), L


def solve_owt_barycentric(mu: DiscreteMeasure, nu: DiscreteMeasure,
                          theta: Barycentric) -> tuple[TransportPlan, float]:
    """Minimize ``sum_i mu_i theta(mean pi_{x_i})`` over couplings of mu and nu."""
    mu.require_probability("mu")
    nu.require_probability("nu")
    lp, L = barycentric_lp(mu, nu, theta)
    sol = solve_lp(lp)
    if not sol.optimal:
        raise NumericalFailure(f"barycentric LP reported {sol.status.value}")
    m, n = mu.size, nu.size
    plan = TransportPlan(mu.atoms, nu.atoms, sol.primal[:m * n].reshape(m, n))
    # report the value of the plan itself; it equals the LP value at optimum
    return plan, barycentric_value(plan, theta)


def jensen_bound(nu: DiscreteMeasure, theta: Barycentric) -> float:
    """``theta(mean nu)``, a lower bound of ``V_theta(mu, nu)`` for every mu."""
    return float(theta.theta(mean(nu)))
