"""Checkers for C-monotonicity and martingale C-monotonicity of finite families.

A candidate family is a list of pairs ``(x_i, p_i)``; a competitor is any
list ``q_1..q_N`` of probability measures with ``sum q_i = sum p_i`` (and, in
the martingale variant, ``mean q_i = x_i``). The family is monotone when no
competitor has lower total cost. Because the pooled measure is fixed, every
competitor lives on the pooled support, so for pointwise and barycentric
costs the best competitor is the solution of a finite LP. For black-box
costs only a sound search is offered.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .costs import Barycentric, GenericOracle, Pointwise
from .errors import InfeasibleBarycenters, NumericalFailure, TooLarge
from .lp import MAX_BASES_ENUM, MAX_VARS_ENUM, LinearProgram, Status, _independent_rows, enumerate_vertices, solve_lp
from .measures import DiscreteMeasure, atomwise_distance, mean, pooled
from .report import GAP_TOL, Method, MonotonicityReport
from .transport import TransportPlan

BARY_TOL = 1e-8
POOLED_TOL = 1e-8
HUNT_MAX_SUPPORT = 12


@dataclass(frozen=True)
class CandidateSet:
    """Finite family of pairs ``(x_i, p_i)`` with ``p_i`` probability measures."""

    pairs: tuple[tuple[float, DiscreteMeasure], ...]

    def __post_init__(self):
        pairs = tuple((float(x), p) for x, p in self.pairs)
        if not pairs:
            raise ValueError("candidate set is empty")
        for _, p in pairs:
            p.require_probability("candidate measure")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_plan(cls, plan: TransportPlan, indices=None) -> "CandidateSet":
        """Disintegration pairs of ``plan``, optionally only rows in ``indices``."""
        rows = plan.rows()
        if indices is not None:
            rows = [rows[i] for i in indices]
        return cls(tuple(rows))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def xs(self) -> np.ndarray:
        return np.array([x for x, _ in self.pairs])

    @property
    def measures(self) -> list[DiscreteMeasure]:
        return [p for _, p in self.pairs]

    @property
    def pooled(self) -> DiscreteMeasure:
        return pooled(self.measures)

    def barycenter_errors(self) -> np.ndarray:
        return np.array([mean(p) - x for x, p in self.pairs])


def _competitor_system(cand: CandidateSet, martingale: bool):
    """Equality system for competitors ``q[i, j]`` on the pooled support."""
    P = cand.pooled
    ys = P.atoms
    N, S = len(cand), ys.size
    rows = np.kron(np.eye(N), np.ones((1, S)))
    cols = np.kron(np.ones((1, N)), np.eye(S))
    blocks = [rows, cols]
    rhs = [np.ones(N), P.weights]
    if martingale:
        blocks.append(np.kron(np.eye(N), ys[None, :]))
        rhs.append(cand.xs)
    return ys, np.vstack(blocks), np.concatenate(rhs)


def _check_barycenters(cand: CandidateSet) -> None:
    P = cand.pooled
    lo, hi = P.hull
    xs = cand.xs
    bad = (xs < lo - BARY_TOL) | (xs > hi + BARY_TOL)
    if np.any(bad):
        raise InfeasibleBarycenters(
            f"x = {xs[bad].tolist()} outside the pooled hull [{lo}, {hi}]")
    err = cand.barycenter_errors()
    if np.any(np.abs(err) > BARY_TOL):
        raise ValueError(f"candidate is not a martingale family: barycenter errors {err.tolist()}")


def _competitors_from(q: np.ndarray, ys: np.ndarray) -> list[DiscreteMeasure]:
    return [DiscreteMeasure(ys, row) for row in q]


def _solve_or_raise(lp: LinearProgram, martingale: bool):
    sol = solve_lp(lp)
    if sol.status is Status.INFEASIBLE:
        if martingale:
            raise InfeasibleBarycenters("barycenter constraints are infeasible on the pooled support")
        raise NumericalFailure("competitor LP reported infeasible although the candidate is feasible")
    if not sol.optimal:
        raise NumericalFailure(f"competitor LP reported {sol.status.value}")
    return sol


def _linear_check(cand, c: Pointwise, martingale, tol):
    ys, A, b = _competitor_system(cand, martingale)
    C = c.matrix(cand.xs, ys)
    current = float(sum(c(x, p) for x, p in cand.pairs))
    sol = _solve_or_raise(LinearProgram(C.ravel(), A, b), martingale)
    q = sol.primal.reshape(len(cand), ys.size)
    best = float(np.sum(C * q))
    return MonotonicityReport.from_gap(current - best, Method.EXACT_LP, tol, _competitors_from(q, ys),
                                       current_cost=current, best_cost=best)


def _barycentric_check(cand, theta: Barycentric, martingale, tol):
    ys, A0, b0 = _competitor_system(cand, martingale)
    N, S = len(cand), ys.size
    K = len(theta.pieces)
    L = theta.lower_bound(float(ys[0]), float(ys[-1]))
    nvar = N * S + N + N * K
    A = np.zeros((A0.shape[0] + N * K, nvar))
    A[:A0.shape[0], :N * S] = A0
    b = np.concatenate([b0, np.zeros(N * K)])
    r = A0.shape[0]
    for i in range(N):
        for k, (a, bk) in enumerate(theta.pieces):
            # t_i = s_i + L >= a * mean(q_i) + b_k
            A[r, i * S:(i + 1) * S] = -a * ys
            A[r, N * S + i] = 1.0
            A[r, N * S + N + i * K + k] = -1.0
            b[r] = bk - L
            r += 1
    obj = np.zeros(nvar)
    obj[N * S:N * S + N] = 1.0
    current = float(sum(theta(x, p) for x, p in cand.pairs))
    sol = _solve_or_raise(LinearProgram(obj, A, b), martingale)
    q = sol.primal[:N * S].reshape(N, S)
    comps = _competitors_from(q, ys)
    # score the competitors with theta itself rather than the epigraph variables
    best = float(sum(theta(x, p) for x, p in zip(cand.xs, comps)))
    return MonotonicityReport.from_gap(current - best, Method.EXACT_LP, tol, comps,
                                       current_cost=current, best_cost=best)


def check_C_monotone_linear(cand: CandidateSet, c: Pointwise, tol: float = GAP_TOL) -> MonotonicityReport:
    """Exact C-monotonicity check for ``C(x, p) = int c(x, y) p(dy)``."""
    return _linear_check(cand, c, False, tol)


def check_C_monotone(cand: CandidateSet, cost: Pointwise | Barycentric,
                     tol: float = GAP_TOL) -> MonotonicityReport:
    """Exact C-monotonicity check for pointwise or barycentric costs."""
    if isinstance(cost, Pointwise):
        return _linear_check(cand, cost, False, tol)
    if isinstance(cost, Barycentric):
        return _barycentric_check(cand, cost, False, tol)
    raise TypeError(f"exact check needs a Pointwise or Barycentric cost, got {type(cost).__name__}")


def check_mart_C_monotone(cand: CandidateSet, cost: Pointwise | Barycentric,
                          tol: float = GAP_TOL) -> MonotonicityReport:
    """Exact martingale C-monotonicity check: competitors keep every barycenter.

    Raises
    ------
    InfeasibleBarycenters
        If some ``x_i`` lies outside the hull of the pooled support.
    """
    _check_barycenters(cand)
    if isinstance(cost, Pointwise):
        return _linear_check(cand, cost, True, tol)
    if isinstance(cost, Barycentric):
        return _barycentric_check(cand, cost, True, tol)
    raise TypeError(f"exact check needs a Pointwise or Barycentric cost, got {type(cost).__name__}")


def scan_plan_subsets(plan: TransportPlan, cost, max_size: int, martingale: bool = False,
                      tol: float = GAP_TOL) -> MonotonicityReport:
    """Check every subset of at most ``max_size`` disintegration rows.

    Returns the report with the largest gap, tagged with the row indices.
    """
    rows = plan.rows()
    check = check_mart_C_monotone if martingale else check_C_monotone
    worst = None
    for k in range(1, min(max_size, len(rows)) + 1):
        for idx in itertools.combinations(range(len(rows)), k):
            rep = check(CandidateSet(tuple(rows[i] for i in idx)), cost, tol)
            rep.subset = idx
            if worst is None or rep.gap > worst.gap:
                worst = rep
    return worst


# black-box search


def _competitor_vertices(cand, martingale, rng, n_random):
    ys, A, b = _competitor_system(cand, martingale)
    n = A.shape[1]
    r = len(_independent_rows(A))
    lp = LinearProgram(np.zeros(n), A, b)
    if n <= MAX_VARS_ENUM and math.comb(n, r) <= MAX_BASES_ENUM:
        verts = [v.primal for v in enumerate_vertices(lp)]
    else:
        verts = []
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            for sign in (1.0, -1.0):
                sol = solve_lp(LinearProgram(sign * e, A, b))
                if sol.optimal:
                    verts.append(sol.primal)
        for _ in range(n_random):
            sol = solve_lp(LinearProgram(rng.standard_normal(n), A, b))
            if sol.optimal:
                verts.append(sol.primal)
        uniq = {tuple(np.round(v, 12)): v for v in verts}
        verts = list(uniq.values())
    verts.sort(key=lambda v: tuple((-v).tolist()))
    return ys, A, b, np.array(verts)


def hunt_violation_generic(cand: CandidateSet, C: GenericOracle, budget: int = 2000, martingale: bool = False,
                           seed: int = 0, tol: float = GAP_TOL) -> MonotonicityReport:
    """Search the competitor polytope for a family cheaper than the candidate.

    Deterministic given ``seed``. Points examined, in order: the polytope's
    vertices, a grid on the segments between vertex pairs, random convex
    combinations, then local refinement around the incumbent. Every point is
    a convex combination of feasible vertices, hence feasible. A reported
    violation is re-verified; a pass is not a certificate.
    """
    if martingale:
        _check_barycenters(cand)
    if cand.pooled.size > HUNT_MAX_SUPPORT:
        raise TooLarge(f"pooled support of size {cand.pooled.size} exceeds {HUNT_MAX_SUPPORT}")
    rng = np.random.default_rng(seed)
    ys, A, b, V = _competitor_vertices(cand, martingale, rng, n_random=min(50, budget // 10))
    N, S = len(cand), ys.size
    xs = cand.xs
    current = float(sum(C(x, p) for x, p in cand.pairs))

    def total(q):
        return float(sum(C(x, DiscreteMeasure(ys, row)) for x, row in zip(xs, q.reshape(N, S))))

    best_q, best_val = None, np.inf
    evals = 0

    def consider(q):
        nonlocal best_q, best_val, evals
        evals += 1
        v = total(q)
        if v < best_val - 1e-15:
            best_q, best_val = q, v

    def points():
        yield from V
        grid = np.linspace(0.0, 1.0, 5)[1:-1]
        for i, j in itertools.combinations(range(len(V)), 2):
            for t in grid:
                yield (1 - t) * V[i] + t * V[j]
        while True:
            k = min(len(V), 3)
            idx = rng.choice(len(V), size=k, replace=False)
            w = rng.dirichlet(np.ones(k))
            yield w @ V[idx]

    gen = points()
    explore = budget * 3 // 4
    while evals < explore:
        consider(next(gen))
    step = 0.5
    while evals < budget and best_q is not None:
        j = rng.integers(len(V))
        consider((1 - step) * best_q + step * V[j])
        step = max(step * 0.97, 1e-6)

    if best_q is None:
        return MonotonicityReport.from_gap(0.0, Method.GRID_SEARCH, tol, current_cost=current)
    q = np.where(best_q <= 0, 0.0, best_q).reshape(N, S)
    comps = _competitors_from(q, ys)
    # re-verify feasibility and value from scratch
    if atomwise_distance(pooled(comps), cand.pooled) > POOLED_TOL:
        raise NumericalFailure("search produced a competitor with the wrong pooled measure")
    if martingale and np.any(np.abs([mean(p) - x for x, p in zip(xs, comps)]) > BARY_TOL):
        raise NumericalFailure("search produced a competitor with a wrong barycenter")
    best = float(sum(C(x, p) for x, p in zip(xs, comps)))
    return MonotonicityReport.from_gap(current - best, Method.GRID_SEARCH, tol, comps,
                                       current_cost=current, best_cost=best)
