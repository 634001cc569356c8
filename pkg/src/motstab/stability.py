"""Perturbation experiments for martingale transport, and distances between plans.

A schedule shrinks three perturbations to zero together: ``mu`` is binned on
a mesh ``h_k`` (convex-order decreasing), ``nu`` is dilated by ``eps_k``
(convex-order increasing) and the cost is bumped by ``delta_k * g``. Every
perturbed pair therefore stays in convex order and has martingale couplings.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .costs import Pointwise
from .errors import InfeasibleOrder, NonUniqueOptimizer, NumericalFailure
from .lp import enumerate_vertices, solve_lp
from .measures import DiscreteMeasure, bin as bin_measure, convex_order, dilate, wasserstein
from .monotone import scan_plan_subsets
from .mot import martingale_lp, solve_mot
from .transport import SUPPORT_TOL, TransportPlan, coupling_lp

UNIQUE_TOL = 1e-9
CSV_COLUMNS = ("k", "w1_mu", "w1_nu", "value", "value_gap", "plan_dist", "mono_gap")


def constant_bump(x, y):
    return np.ones(np.broadcast(x, y).shape)


@dataclass
class PerturbationSchedule:
    """Per-step (bin mesh for mu, dilation for nu, cost bump amplitude).

    A zero mesh or dilation means that marginal is left alone. ``bump`` is the
    direction ``g`` of the cost perturbation, with ``|g| <= 1``.
    """

    steps: list[tuple[float, float, float]]
    bump: Callable[[np.ndarray, np.ndarray], np.ndarray] = constant_bump

    @classmethod
    def geometric(cls, n_steps: int, ratio: float = 0.5, mesh: bool = True, dilation: bool = True,
                  cost: bool = True, bump=constant_bump) -> "PerturbationSchedule":
        """Steps ``k = 1..n_steps`` with every active perturbation equal to ``ratio**k``."""
        if not 0 < ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        steps = []
        for k in range(1, n_steps + 1):
            s = ratio ** k
            steps.append((s if mesh else 0.0, s if dilation else 0.0, s if cost else 0.0))
        return cls(steps, bump)

    @classmethod
    def zero(cls, n_steps: int) -> "PerturbationSchedule":
        return cls([(0.0, 0.0, 0.0)] * n_steps)

    def perturb(self, mu, nu, c: Pointwise, k: int):
        """The perturbed instance ``(mu_k, nu_k, c_k)`` for 0-based step ``k``."""
        h, eps, delta = self.steps[k]
        mu_k = bin_measure(mu, h) if h > 0 else mu
        nu_k = dilate(nu, eps) if eps > 0 else nu
        c_k = c.bumped(delta, self.bump) if delta != 0 else c
        return mu_k, nu_k, c_k


@dataclass
class StepRecord:
    k: int
    w1_mu: float
    w1_nu: float
    value: float
    value_gap: float
    plan_dist: float = math.nan
    mono_gap: float = math.nan


@dataclass
class StabilityRun:
    mode: str
    records: list[StepRecord]
    limit_value: float
    limit_plan: TransportPlan
    tolerance: float
    passed: bool
    limit_mono_gap: float = math.nan
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([r.k] + [repr(float(getattr(r, col))) for col in CSV_COLUMNS[1:]])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [
            f"mode: {self.mode}",
            f"limit_value: {self.limit_value!r}",
            f"limit_mono_gap: {self.limit_mono_gap!r}",
            f"tolerance: {self.tolerance!r}",
            f"passed: {str(self.passed).lower()}",
        ]
        lines += [f"note: {n}" for n in self.notes]
        lines.append("records:")
        lines += ["  " + line for line in self.to_csv().splitlines()]
        return "\n".join(lines) + "\n"

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


def parse_run_csv(text: str) -> list[StepRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"unexpected header {rows[0]}")
    return [StepRecord(int(r[0]), *map(float, r[1:])) for r in rows[1:]]


# distances between plans


def _support_atoms(plan: TransportPlan):
    ii, jj = np.nonzero(plan.mass > SUPPORT_TOL)
    pts = np.column_stack([plan.x_atoms[ii], plan.y_atoms[jj]])
    w = plan.mass[ii, jj]
    return pts, w / w.sum()


def _discrete_ot(a: np.ndarray, b: np.ndarray, cost: np.ndarray) -> float:
    mu = DiscreteMeasure(np.arange(a.size), a)
    nu = DiscreteMeasure(np.arange(b.size), b)
    if mu.size != a.size or nu.size != b.size:
        raise ValueError("zero weights must be removed before calling _discrete_ot")
    sol = solve_lp(coupling_lp(mu, nu, cost))
    if not sol.optimal:
        raise NumericalFailure(f"plan distance LP reported {sol.status.value}")
    return float(sol.value)


def plan_distance(plan1: TransportPlan, plan2: TransportPlan) -> float:
    """W1 between two plans as measures on the plane with ground metric ``|x-x'| + |y-y'|``."""
    p1, w1 = _support_atoms(plan1)
    p2, w2 = _support_atoms(plan2)
    cost = np.abs(p1[:, None, 0] - p2[None, :, 0]) + np.abs(p1[:, None, 1] - p2[None, :, 1])
    return _discrete_ot(w1, w2, cost)


def adapted_distance(plan1: TransportPlan, plan2: TransportPlan, r: float = 1.0) -> float:
    """Nested distance between two plans.

    Optimal transport between the first marginals, with ground cost
    ``|x - x'| + W_r(pi_x, pi'_x')`` between the conditional laws.
    """
    rows1, rows2 = plan1.rows(), plan2.rows()
    a = plan1.mu.weights
    b = plan2.mu.weights
    a, b = a / a.sum(), b / b.sum()
    cost = np.array([[abs(x1 - x2) + wasserstein(p1, p2, r) for x2, p2 in rows2] for x1, p1 in rows1])
    return _discrete_ot(a, b, cost)


# uniqueness


def optimal_vertices(mu: DiscreteMeasure, nu: DiscreteMeasure, c: Pointwise, tol: float = UNIQUE_TOL):
    """All vertices of the martingale polytope whose cost is within ``tol`` of the minimum."""
    C = c.matrix(mu.atoms, nu.atoms)
    verts = enumerate_vertices(martingale_lp(mu, nu, C))
    if not verts:
        return []
    best = min(v.value for v in verts)
    return [v for v in verts if v.value <= best + tol]


def require_unique_optimizer(mu, nu, c: Pointwise, tol: float = UNIQUE_TOL) -> TransportPlan:
    """The unique MOT optimizer, found by vertex enumeration.

    Raises
    ------
    NonUniqueOptimizer
        When two distinct vertices are optimal within ``tol``.
    """
    opt = optimal_vertices(mu, nu, c, tol)
    if not opt:
        raise InfeasibleOrder("infeasible: martingale polytope is empty")
    if len(opt) > 1:
        raise NonUniqueOptimizer(f"{len(opt)} optimal vertices within {tol}")
    return TransportPlan(mu.atoms, nu.atoms, opt[0].primal.reshape(mu.size, nu.size))


# experiments


def _prepare(mu, nu, schedule):
    mu.require_probability("mu")
    nu.require_probability("nu")
    if not convex_order(mu, nu):
        raise InfeasibleOrder("infeasible: convex order violated")


def _base_records(mu, nu, c, schedule):
    limit_plan, limit_value = solve_mot(mu, nu, c)
    out = []
    for k in range(len(schedule.steps)):
        mu_k, nu_k, c_k = schedule.perturb(mu, nu, c, k)
        if not convex_order(mu_k, nu_k):
            raise InfeasibleOrder(f"step {k + 1}: perturbed pair left convex order")
        plan_k, value_k = solve_mot(mu_k, nu_k, c_k)
        rec = StepRecord(k + 1, wasserstein(mu_k, mu), wasserstein(nu_k, nu), value_k, abs(value_k - limit_value))
        out.append((rec, plan_k, c_k))
    return limit_plan, limit_value, out


def run_value_stability(mu, nu, c: Pointwise, schedule: PerturbationSchedule,
                        tolerance: float = 1e-5) -> StabilityRun:
    """Solve MOT along the schedule and track ``|value_k - value|``.

    The growth condition ``c(x, y) <= r (1 + |x| + |y|)`` is the caller's
    responsibility; it holds automatically on finite grids.
    """
    _prepare(mu, nu, schedule)
    limit_plan, limit_value, steps = _base_records(mu, nu, c, schedule)
    records = [rec for rec, _, _ in steps]
    passed = bool(records) and records[-1].value_gap <= tolerance
    return StabilityRun("value", records, limit_value, limit_plan, tolerance, passed)


def run_plan_stability(mu, nu, c: Pointwise, schedule: PerturbationSchedule,
                       tolerance: float = 1e-4) -> StabilityRun:
    """Track the plane-W1 distance from each step's optimizer to the unique limit optimizer."""
    _prepare(mu, nu, schedule)
    unique = require_unique_optimizer(mu, nu, c)
    limit_plan, limit_value, steps = _base_records(mu, nu, c, schedule)
    records = []
    for rec, plan_k, _ in steps:
        rec.plan_dist = plan_distance(plan_k, unique)
        records.append(rec)
    passed = bool(records) and records[-1].plan_dist <= tolerance
    run = StabilityRun("plan", records, limit_value, unique, tolerance, passed)
    run.notes.append("limit optimizer verified unique by vertex enumeration")
    return run


def run_monotonicity_stability(mu, nu, c: Pointwise, schedule: PerturbationSchedule,
                               tolerance: float = 1e-8, max_subset: int = 3) -> StabilityRun:
    """Martingale monotonicity gap of every step's optimizer, and of the limit plan.

    The limit plan is the optimizer of the unperturbed problem, standing in
    for the weak limit of the step optimizers.
    """
    _prepare(mu, nu, schedule)
    limit_plan, limit_value, steps = _base_records(mu, nu, c, schedule)
    records = []
    for rec, plan_k, c_k in steps:
        rec.mono_gap = scan_plan_subsets(plan_k, c_k, max_subset, martingale=True).gap
        records.append(rec)
    limit_gap = scan_plan_subsets(limit_plan, c, max_subset, martingale=True).gap
    gaps = [r.mono_gap for r in records] + [limit_gap]
    passed = max(gaps) <= tolerance
    run = StabilityRun("monotone", records, limit_value, limit_plan, tolerance, passed, limit_gap)
    run.notes.append("limit plan is the solver output on the unperturbed instance")
    return run

