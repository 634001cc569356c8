"""Approximating competitor families when the candidate family is perturbed.

Given a family ``p_1..p_N``, a competitor ``q_1..q_N`` with the same pooled
measure, and perturbed measures ``p'_1..p'_N``, build competitors ``q'`` of
the perturbed family that stay close to ``q``:

1. split every ``p_i`` into pieces ``m[i][j]`` with ``sum_j m[i][j] = p_i``
   and ``sum_i m[i][j] = q_j`` (:func:`decompose`);
2. push each piece of ``p_i`` along the quantile coupling of ``p_i`` and
   ``p'_i`` and reassemble (:func:`build_competitors`);
3. in the martingale case, move small amounts of mass between pairs of
   competitors until each barycenter is back on target
   (:func:`repair_barycenters`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePooled, NumericalFailure, RepairFailed
from .lp import LinearProgram, solve_lp
from .measures import (MERGE_TOL, DiscreteMeasure, atomwise_distance, mean, monotone_coupling, nearest_index, pooled,
                       transport_cost_1d)

POOLED_TOL = 1e-9
BARY_TOL = 1e-8


@dataclass
class Decomposition:
    """``m[i][j]``: the part of ``p_i`` that ends up in ``q_j``."""

    m: list[list[DiscreteMeasure]]

    @property
    def n(self) -> int:
        return len(self.m)

    def row_sum(self, i: int) -> DiscreteMeasure:
        return pooled(self.m[i])

    def col_sum(self, j: int) -> DiscreteMeasure:
        return pooled(self.m[i][j] for i in range(self.n))


@dataclass
class RepairStep:
    donor: int
    receiver: int
    high: tuple[float, ...]
    low: tuple[float, ...]
    amount: float


@dataclass
class RepairTrace:
    """Sequence of mass exchanges and the final barycenter residuals.

    In every step the receiver gains ``amount`` of the donor's mass on the
    ``high`` atoms and gives back the same amount of its own mass on the
    ``low`` atoms, so both measures keep unit mass and the pooled measure is
    unchanged.
    """

    steps: list[RepairStep] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)


def _grid(measures):
    return pooled(measures).atoms


def _on_grid(m: DiscreteMeasure, grid: np.ndarray) -> np.ndarray:
    idx = nearest_index(grid, m.atoms)
    out = np.zeros(grid.size)
    np.add.at(out, idx, m.weights)
    return out


def decompose(p: list[DiscreteMeasure], q: list[DiscreteMeasure]) -> Decomposition:
    """Pieces ``m[i][j] <= p_i ^ q_j`` with row sums ``p_i`` and column sums ``q_j``.

    Atom by atom this is a transportation feasibility problem. Each block is
    solved with the LP core, with unit cost on off-diagonal pieces so that
    mass shared by ``p_i`` and ``q_i`` stays on the diagonal; remaining ties
    go by Bland's lowest-index rule. Rows are rescaled afterwards so the row
    sums hold to rounding.
    """
    N = len(p)
    if len(q) != N:
        raise ValueError(f"families differ in length: {N} vs {len(q)}")
    if atomwise_distance(pooled(p), pooled(q)) > POOLED_TOL:
        raise InfeasiblePooled("sum of p differs from sum of q")
    grid = _grid(list(p) + list(q))
    P = np.array([_on_grid(pi, grid) for pi in p])  # (N, S)
    Q = np.array([_on_grid(qi, grid) for qi in q])
    S = grid.size
    M = np.zeros((N, N, S))
    off = (1.0 - np.eye(N)).ravel()
    rows = np.kron(np.eye(N), np.ones((1, N)))
    cols = np.kron(np.ones((1, N)), np.eye(N))
    A = np.vstack([rows, cols])
    for s in range(S):
        lp = LinearProgram(off, A, np.concatenate([P[:, s], Q[:, s]]))
        sol = solve_lp(lp)
        if not sol.optimal:
            raise InfeasiblePooled(f"no decomposition at atom {grid[s]!r}: {sol.status.value}")
        block = sol.primal.reshape(N, N)
        rs = block.sum(axis=1)
        scale = np.divide(P[:, s], rs, out=np.zeros(N), where=rs > 0)
        M[:, :, s] = block * scale[:, None]
    return Decomposition([[DiscreteMeasure(grid, M[i, j]) for j in range(N)] for i in range(N)])


def transported_decomposition(p, q, p_perturbed, r: float = 1.0) -> tuple[Decomposition, Decomposition]:
    """The decomposition of ``(p, q)`` and its image under the quantile couplings.

    Returns ``(m, m_prime)`` where ``m_prime[i][j]`` is ``m[i][j]`` pushed
    through the disintegration of the optimal coupling of ``p_i`` and
    ``p'_i``. ``r`` only matters for the distance bound; the quantile
    coupling is optimal for every order.
    """
    N = len(p)
    if len(p_perturbed) != N:
        raise ValueError("p_perturbed must have the same length as p")
    for name, fam in (("p", p), ("q", q), ("p_perturbed", p_perturbed)):
        for k, meas in enumerate(fam):
            meas.require_probability(f"{name}[{k}]")
    dec = decompose(p, q)
    pushed = []
    for i in range(N):
        src, dst = p[i], p_perturbed[i]
        coupling = monotone_coupling(src, dst)
        # kernel[z, y']: fraction of atom z of p_i sent to atom y' of p'_i
        kernel = np.zeros((src.size, dst.size))
        for a, b, mass in coupling:
            kernel[a, b] += mass
        kernel /= src.weights[:, None]
        row = []
        for j in range(N):
            piece = dec.m[i][j]
            w = np.zeros(src.size)
            idx = nearest_index(src.atoms, piece.atoms)
            np.add.at(w, idx, piece.weights)
            row.append(DiscreteMeasure(dst.atoms, w @ kernel))
        pushed.append(row)
    return dec, Decomposition(pushed)


def build_competitors(p, q, p_perturbed, r: float = 1.0) -> list[DiscreteMeasure]:
    """Competitors of ``p_perturbed`` that approximate ``q``.

    ``q'_j = sum_i m'[i][j]``; the pooled measure of the output equals the
    pooled measure of ``p_perturbed``.
    """
    _, moved = transported_decomposition(p, q, p_perturbed, r)
    out = [moved.col_sum(j) for j in range(moved.n)]
    err = atomwise_distance(pooled(out), pooled(p_perturbed))
    if err > 1e-10:
        raise NumericalFailure(f"pooled equality broken by {err:.3g}")
    return out


def piece_distance_bound(p, q, p_perturbed, r: float = 1.0) -> list[tuple[float, float]]:
    """Per index ``i``: (``sum_j W_r(m'_ij, m_ij)^r``, ``W_r(p'_i, p_i)^r``)."""
    dec, moved = transported_decomposition(p, q, p_perturbed, r)
    out = []
    for i in range(dec.n):
        lhs = sum(transport_cost_1d(dec.m[i][j], moved.m[i][j], r) for j in range(dec.n))
        rhs = transport_cost_1d(p[i], p_perturbed[i], r)
        out.append((lhs, rhs))
    return out


# barycenter repair


def _lex_key(m: DiscreteMeasure):
    return m.hull


def _admissible(a: DiscreteMeasure, b: DiscreteMeasure) -> bool:
    """Closed hulls intersect; :func:`_exchange` then checks that the chosen atoms are ordered."""
    la, ua = a.hull
    lb, ub = b.hull
    return min(ua, ub) - max(la, lb) >= -MERGE_TOL


def _exchange(q, up, down, amount_needed):
    """Raise the barycenter of ``q[up]`` using mass from ``q[down]``.

    Takes the highest atom of ``q[down]`` and the lowest atom of ``q[up]``;
    swaps ``alpha`` of mass between them, where ``alpha`` achieves
    ``amount_needed`` of barycenter shift on ``q[up]`` (and the opposite shift
    on ``q[down]``) unless capped by the available masses. Returns the step,
    or ``None`` when the two atoms are not ordered.
    """
    hi_y = float(q[down].atoms[-1])
    lo_y = float(q[up].atoms[0])
    sep = hi_y - lo_y
    if sep <= MERGE_TOL:
        return None, 0.0
    cap = min(float(q[down].weights[-1]), float(q[up].weights[0]))
    alpha = min(amount_needed / sep, cap)
    if alpha <= 0:
        return None, 0.0
    exhaust_down = alpha >= q[down].weights[-1]
    exhaust_up = alpha >= q[up].weights[0]
    new_up_w = q[up].weights.copy()
    new_up_w[0] = 0.0 if exhaust_up else new_up_w[0] - alpha
    new_down_w = q[down].weights.copy()
    new_down_w[-1] = 0.0 if exhaust_down else new_down_w[-1] - alpha
    q[up] = DiscreteMeasure(np.append(q[up].atoms, hi_y), np.append(new_up_w, alpha))
    q[down] = DiscreteMeasure(np.append(q[down].atoms, lo_y), np.append(new_down_w, alpha))
    return RepairStep(donor=down, receiver=up, high=(hi_y,), low=(lo_y,), amount=alpha), alpha * sep


def repair_barycenters(q_perturbed, p_perturbed, tol: float = 1e-10) -> tuple[list[DiscreteMeasure], RepairTrace]:
    """Move mass between competitors until ``mean(q_i) = mean(p'_i)`` for every ``i``.

    Indices are visited in lexicographic order of ``(min supp, max supp)``.
    The first index whose barycenter is off by more than ``tol`` is paired
    with an admissible partner (intersecting hulls), preferring partners with
    a residual of the opposite sign and then later indices, and mass is
    exchanged between the partner's top atom and the index's bottom atom (or
    the reverse). Each
    step zeroes a residual or exhausts an atom. Gives up after ``10 N^2``
    steps.

    Raises
    ------
    RepairFailed
        When a residual above ``tol`` remains and no admissible move exists.
    """
    q = list(q_perturbed)
    N = len(q)
    if len(p_perturbed) != N:
        raise ValueError("families differ in length")
    if atomwise_distance(pooled(q), pooled(p_perturbed)) > 1e-10:
        raise InfeasiblePooled("sum of q_perturbed differs from sum of p_perturbed")
    targets = np.array([mean(pi) for pi in p_perturbed])
    trace = RepairTrace()

    def residuals():
        return targets - np.array([mean(qi) for qi in q])

    max_steps = 10 * N * N
    while True:
        res = residuals()
        if np.all(np.abs(res) <= tol):
            break
        if len(trace.steps) >= max_steps:
            trace.residuals = res.tolist()
            raise RepairFailed(f"no convergence within {max_steps} steps", res.tolist())
        order = sorted(range(N), key=lambda k: (_lex_key(q[k]), k))
        i = next(k for k in order if abs(res[k]) > tol)
        rank = order.index(i)
        partners = [j for j in order if j != i and _admissible(q[i], q[j])]
        opposite = [j for j in partners if res[j] * res[i] < 0 and abs(res[j]) > tol]
        later = [j for j in partners if order.index(j) > rank]
        # preferred partners first, the rest as fallbacks
        pool = list(dict.fromkeys(opposite + later + partners))
        step = None
        for j in pool:
            need = abs(res[i]) if j not in opposite else min(abs(res[i]), abs(res[j]))
            if res[i] > 0:
                step, _ = _exchange(q, up=i, down=j, amount_needed=need)
            else:
                step, _ = _exchange(q, up=j, down=i, amount_needed=need)
            if step is not None:
                break
        if step is None:
            trace.residuals = res.tolist()
            raise RepairFailed(f"index {i} has residual {res[i]:.3g} and no admissible partner", res.tolist())
        trace.steps.append(step)
    trace.residuals = residuals().tolist()
    return q, trace


def build_mart_competitors(p, q, p_perturbed, r: float = 1.0, tol: float = 1e-10) -> list[DiscreteMeasure]:
    """Competitors of ``p_perturbed`` close to ``q`` that also keep barycenters.

    ``q`` must be a competitor of ``p`` with ``mean q_i = mean p_i``. The
    output satisfies ``sum q'_i = sum p'_i`` and ``mean q'_i = mean p'_i``;
    both are re-checked before returning.
    """
    for i, (pi, qi) in enumerate(zip(p, q)):
        if abs(mean(pi) - mean(qi)) > BARY_TOL:
            raise ValueError(f"q[{i}] has barycenter {mean(qi)!r}, p[{i}] has {mean(pi)!r}")
    moved = build_competitors(p, q, p_perturbed, r)
    out, _ = repair_barycenters(moved, p_perturbed, tol)
    if atomwise_distance(pooled(out), pooled(p_perturbed)) > 1e-10:
        raise NumericalFailure("pooled equality broken after repair")
    errs = [abs(mean(a) - mean(b)) for a, b in zip(out, p_perturbed)]
    if max(errs) > BARY_TOL:
        raise NumericalFailure(f"barycenter error {max(errs):.3g} after repair")
    return out
