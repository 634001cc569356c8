"""Classical discrete optimal transport and c-cyclical monotonicity."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .costs import Pointwise
from .errors import NumericalFailure, TooLarge
from .lp import LinearProgram, solve_lp
from .measures import DiscreteMeasure
from .report import GAP_TOL, Method, MonotonicityReport

MARGINAL_TOL = 1e-8
SUPPORT_TOL = 1e-10
CYCLE_BUDGET = 10**6


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Coupling of two discrete measures stored as a dense mass matrix.

    ``mass[i, j]`` is the mass sent from ``x_atoms[i]`` to ``y_atoms[j]``.
    The marginals are implied by the row and column sums.
    """

    x_atoms: np.ndarray
    y_atoms: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_atoms, dtype=float).ravel()
        y = np.asarray(self.y_atoms, dtype=float).ravel()
        P = np.asarray(self.mass, dtype=float).reshape(x.size, y.size)
        if np.any(P < -1e-12):
            raise ValueError(f"plan has negative entry {P.min()!r}")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(y) <= 0):
            raise ValueError("plan atoms must be strictly increasing")
        P = np.where(P <= 0, 0.0, P)
        for arr in (x, y, P):
            arr.setflags(write=False)
        object.__setattr__(self, "x_atoms", x)
        object.__setattr__(self, "y_atoms", y)
        object.__setattr__(self, "mass", P)

    @property
    def mu(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.x_atoms, self.mass.sum(axis=1))

    @property
    def nu(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.y_atoms, self.mass.sum(axis=0))

    @property
    def shape(self) -> tuple[int, int]:
        return self.mass.shape

    def row(self, i: int) -> DiscreteMeasure:
        """Conditional law of the second coordinate given ``x_atoms[i]``."""
        return DiscreteMeasure(self.y_atoms, self.mass[i]).normalized()

    def rows(self) -> list[tuple[float, DiscreteMeasure]]:
        """Disintegration ``(x_i, pi_{x_i})`` over atoms with positive mass."""
        w = self.mass.sum(axis=1)
        return [(float(self.x_atoms[i]), self.row(i)) for i in range(len(w)) if w[i] > 0]

    def support(self, tol: float = SUPPORT_TOL) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(self.mass > tol)
        return list(zip(ii.tolist(), jj.tolist()))

    def cost(self, c: Pointwise) -> float:
        return float(np.sum(c.matrix(self.x_atoms, self.y_atoms) * self.mass))

    def check_marginals(self, mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = MARGINAL_TOL) -> bool:
        return self.mu.allclose(mu, tol) and self.nu.allclose(nu, tol)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransportPlan):
            return NotImplemented
        return (np.array_equal(self.x_atoms, other.x_atoms) and np.array_equal(self.y_atoms, other.y_atoms)
                and np.array_equal(self.mass, other.mass))

    __hash__ = None


def coupling_lp(mu: DiscreteMeasure, nu: DiscreteMeasure, cost: np.ndarray) -> LinearProgram:
    """Transport LP over row-major variables ``pi[i, j]``."""
    m, n = mu.size, nu.size
    rows = np.kron(np.eye(m), np.ones((1, n)))
    cols = np.kron(np.ones((1, m)), np.eye(n))
    A = np.vstack([rows, cols])
    b = np.concatenate([mu.weights, nu.weights])
    return LinearProgram(np.asarray(cost, dtype=float).ravel(), A, b)


def _plan_from_lp(lp, mu, nu, exact=False):
    sol = solve_lp(lp, exact=exact)
    if not sol.optimal:
        raise NumericalFailure(f"transport LP reported {sol.status.value}")
    return TransportPlan(mu.atoms, nu.atoms, sol.primal.reshape(mu.size, nu.size)), sol


def solve_ot(mu: DiscreteMeasure, nu: DiscreteMeasure, c: Pointwise) -> tuple[TransportPlan, float]:
    """Optimal coupling and value of ``min sum c(x_i, y_j) pi_ij`` over couplings of mu, nu."""
    mu.require_probability("mu")
    nu.require_probability("nu")
    C = c.matrix(mu.atoms, nu.atoms)
    plan, sol = _plan_from_lp(coupling_lp(mu, nu, C), mu, nu)
    return plan, float(np.sum(C * plan.mass))


def _cycle_count(s: int, max_cycle: int) -> int:
    # ordered tuples up to rotation
    return sum(math.perm(s, L) // L for L in range(2, min(max_cycle, s) + 1))


def _canonical_cycles(s, L):
    for first in range(s - L + 1):
        for rest in itertools.permutations(range(first + 1, s), L - 1):
            yield (first,) + rest


def check_cyclical_monotone(plan: TransportPlan, c: Pointwise, max_cycle: int,
                            tol: float = GAP_TOL) -> MonotonicityReport:
    """Exhaustive search for a cycle in the support that lowers the cost.

    For each ordered tuple of distinct support points ``(x_k, y_k)`` of
    length at most ``max_cycle`` the gain of the cyclic shift
    ``sum c(x_k, y_k) - sum c(x_k, y_{k+1})`` is computed; the largest gain
    is the gap. Rotations of a tuple give the same gain and are skipped.
    ``subset`` on the report lists the support points of the best cycle.
    """
    if max_cycle < 2:
        raise ValueError("max_cycle must be at least 2")
    supp = plan.support()
    s = len(supp)
    count = _cycle_count(s, max_cycle)
    if count > CYCLE_BUDGET:
        raise TooLarge(f"{count} cycles over {s} support points exceed the budget {CYCLE_BUDGET}")
    if s < 2:
        return MonotonicityReport.from_gap(0.0, Method.CYCLE_ENUMERATION, tol)
    si = np.array([i for i, _ in supp])
    sj = np.array([j for _, j in supp])
    C = c.matrix(plan.x_atoms, plan.y_atoms)
    best, best_cycle = 0.0, None
    for L in range(2, min(max_cycle, s) + 1):
        gen = _canonical_cycles(s, L)
        while True:
            block = np.array(list(itertools.islice(gen, 50_000)), dtype=np.intp)
            if block.size == 0:
                break
            xi, yj = si[block], sj[block]
            gain = C[xi, yj].sum(axis=1) - C[xi, np.roll(yj, -1, axis=1)].sum(axis=1)
            k = int(np.argmax(gain))
            if gain[k] > best:
                best, best_cycle = float(gain[k]), tuple(block[k].tolist())
    rep = MonotonicityReport.from_gap(best, Method.CYCLE_ENUMERATION, tol)
    if rep.is_violated:
        rep.subset = best_cycle
    return rep
