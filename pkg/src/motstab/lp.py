"""Dense simplex solver for ``min c @ x  s.t.  A @ x = b, x >= 0``.

Two-phase tableau method with Bland's rule (lowest index enters, ties in the
ratio test leave by lowest basic index), so runs are deterministic and cannot
cycle on the degenerate programs that competitor checks produce. Every
optimal answer is certified afterwards from the final basis: primal
feasibility, dual feasibility of the reduced costs and a condition-number
bound. ``enumerate_vertices`` is a brute-force oracle over all bases for small
programs.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NumericalFailure, TooLarge

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
NEG_TOL = 1e-10
COND_LIMIT = 1e12
MAX_VARS_ENUM = 24
MAX_BASES_ENUM = 10**6


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """Equality-form program; every variable is implicitly nonnegative."""

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        A = np.atleast_2d(np.asarray(self.constraint_matrix, dtype=float))
        b = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if A.size == 0:
            A = np.zeros((b.size, c.size))
        if A.shape != (b.size, c.size):
            raise ValueError(f"constraint matrix shape {A.shape} does not match ({b.size}, {c.size})")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("LP coefficients must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "rhs", b)

    @property
    def n(self) -> int:
        return self.objective.size

    @property
    def m(self) -> int:
        return self.rhs.size

    def residual(self, x: np.ndarray) -> float:
        if self.m == 0:
            return 0.0
        return float(np.abs(self.constraint_matrix @ x - self.rhs).max())


@dataclass
class LPSolution:
    status: Status
    primal: np.ndarray = field(default_factory=lambda: np.zeros(0))
    value: float = math.nan
    iterations: int = 0
    basis: tuple[int, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _pivot(T, row, col):
    T[row] = T[row] / T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0
    nz = np.flatnonzero(colvals != 0)
    if nz.size:
        T[nz] -= colvals[nz, None] * T[row][None, :]


def _simplex_loop(T, basis, ncols, tol, max_iter):
    """Run Bland pivots on tableau ``T`` whose last row holds reduced costs.

    Only columns ``< ncols`` may enter. Returns (status, iterations) where the
    status is OPTIMAL or UNBOUNDED.
    """
    m = T.shape[0] - 1
    it = 0
    while True:
        red = T[m, :ncols]
        cand = np.flatnonzero(red < -tol)
        if cand.size == 0:
            return Status.OPTIMAL, it
        col = int(cand[0])
        column = T[:m, col]
        pos = np.flatnonzero(column > tol)
        if pos.size == 0:
            return Status.UNBOUNDED, it
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        if tol:
            ties = pos[ratios <= best + tol * max(1.0, abs(best))]
        else:
            ties = pos[ratios == best]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if it > max_iter:
            raise NumericalFailure(f"simplex exceeded {max_iter} pivots")


def solve_lp(lp: LinearProgram, exact: bool = False, max_iter: int = 50_000) -> LPSolution:
    """Minimize ``lp`` and return a certified basic optimal solution.

    Floating point runs use a revised simplex that refactorizes the basis at
    every pivot, so rounding does not accumulate. With ``exact=True`` a
    tableau is carried in :class:`fractions.Fraction` arithmetic (inputs are
    converted exactly from their binary values) and no tolerances are used;
    certification is then by construction.
    """
    if not exact:
        return _solve_revised(lp, max_iter)
    return _solve_tableau(lp, exact, max_iter)


def _solve_tableau(lp: LinearProgram, exact: bool, max_iter: int) -> LPSolution:
    m, n = lp.m, lp.n
    if exact:
        A = np.array([[Fraction(v) for v in row] for row in lp.constraint_matrix], dtype=object).reshape(m, n)
        b = np.array([Fraction(v) for v in lp.rhs], dtype=object)
        c = np.array([Fraction(v) for v in lp.objective], dtype=object)
        zero, one, tol = Fraction(0), Fraction(1), 0
    else:
        A, b, c = lp.constraint_matrix.copy(), lp.rhs.copy(), lp.objective.copy()
        zero, one, tol = 0.0, 1.0, PIVOT_TOL

    if m == 0:
        if np.any(lp.objective < 0):
            return LPSolution(Status.UNBOUNDED)
        return LPSolution(Status.OPTIMAL, np.zeros(n), 0.0, 0, ())

    neg = b < zero
    A[neg] = -A[neg]
    b[neg] = -b[neg]

    # phase 1: artificial basis
    T = np.empty((m + 1, n + m + 1), dtype=object if exact else float)
    T[:m, :n] = A
    T[:m, n:n + m] = zero
    for i in range(m):
        T[i, n + i] = one
    T[:m, -1] = b
    T[m, :] = zero
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = [n + i for i in range(m)]
    status, it1 = _simplex_loop(T, basis, n, tol, max_iter)
    scale = max(1.0, float(np.abs(lp.rhs).max()))
    if -T[m, -1] > (0 if exact else FEAS_TOL * scale):
        return LPSolution(Status.INFEASIBLE, iterations=it1)

    # drive artificials out of the basis, dropping redundant rows
    keep_rows = []
    for r in range(m):
        if basis[r] >= n:
            row = T[r, :n]
            cand = np.flatnonzero(np.abs(row.astype(float)) > tol) if not exact else np.flatnonzero(row != 0)
            if cand.size:
                col = int(cand[0])
                _pivot(T, r, col)
                basis[r] = col
                keep_rows.append(r)
        else:
            keep_rows.append(r)
    T = np.vstack([T[keep_rows][:, list(range(n)) + [n + m]], np.zeros((1, n + 1), dtype=T.dtype)])
    if exact:
        T[-1, :] = zero
    basis = [basis[r] for r in keep_rows]
    rows_used = keep_rows
    k = len(basis)

    # phase 2: reduced costs c - c_B B^-1 A
    cb = np.array([c[j] for j in basis], dtype=T.dtype)
    T[k, :n] = c - (cb @ T[:k, :n] if k else zero)
    T[k, -1] = -(cb @ T[:k, -1]) if k else zero
    status, it2 = _simplex_loop(T, basis, n, tol, max_iter)
    iterations = it1 + it2
    if status is Status.UNBOUNDED:
        return LPSolution(Status.UNBOUNDED, iterations=iterations)

    if exact:
        x = np.zeros(n, dtype=object)
        x[:] = zero
        for r, j in enumerate(basis):
            x[j] = T[r, -1]
        value = sum((c[j] * x[j] for j in range(n)), zero)
        return LPSolution(Status.OPTIMAL, np.array([float(v) for v in x]), float(value), iterations,
                          tuple(sorted(basis)))

    x = _certify(lp, A[rows_used], b[rows_used], c, basis)
    return LPSolution(Status.OPTIMAL, x, float(lp.objective @ x), iterations, tuple(sorted(basis)))


def _revised_loop(A, b, c, basis, ncols, max_iter, it0=0):
    """Bland pivots with a fresh basis solve each iteration.

    ``basis`` is updated in place. Returns (status, iterations).
    """
    cscale = max(1.0, float(np.abs(c[:ncols]).max())) if ncols else 1.0
    it = it0
    while True:
        B = A[:, basis]
        xb = np.maximum(np.linalg.solve(B, b), 0.0)
        y = np.linalg.solve(B.T, c[basis])
        red = c[:ncols] - A[:, :ncols].T @ y
        red[[j for j in basis if j < ncols]] = 0.0
        cand = np.flatnonzero(red < -PIVOT_TOL * cscale)
        if cand.size == 0:
            return Status.OPTIMAL, it - it0
        col = int(cand[0])
        d = np.linalg.solve(B, A[:, col])
        pos = np.flatnonzero(d > PIVOT_TOL)
        if pos.size == 0:
            return Status.UNBOUNDED, it - it0
        best = (xb[pos] / d[pos]).min()
        # tied rows are those driven to zero by the step, judged on the
        # values themselves (a ratio tolerance misfires when d is large)
        after = xb[pos] - best * d[pos]
        ties = pos[after <= 1e-12 * max(1.0, float(xb.max()))]
        row = int(min(ties, key=lambda r: basis[r]))
        basis[row] = col
        it += 1
        if it - it0 > max_iter:
            raise NumericalFailure(f"simplex exceeded {max_iter} pivots")


def _solve_revised(lp: LinearProgram, max_iter: int) -> LPSolution:
    n = lp.n
    A, b, c = lp.constraint_matrix.copy(), lp.rhs.copy(), lp.objective.copy()
    if lp.m == 0:
        if np.any(c < 0):
            return LPSolution(Status.UNBOUNDED)
        return LPSolution(Status.OPTIMAL, np.zeros(n), 0.0, 0, ())
    scale = max(1.0, float(np.abs(b).max()))

    # dependent rows are dropped first; an inconsistent one means infeasible
    keep = _independent_rows(A)
    if len(keep) < lp.m:
        drop = np.setdiff1d(np.arange(lp.m), keep)
        W = np.linalg.lstsq(A[keep].T, A[drop].T, rcond=None)[0]
        if np.abs(W.T @ b[keep] - b[drop]).max() > FEAS_TOL * scale:
            return LPSolution(Status.INFEASIBLE)
        A, b = A[keep], b[keep]
    m = A.shape[0]
    neg = b < 0
    A[neg] = -A[neg]
    b[neg] = -b[neg]

    # phase 1 over [A | I]
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    _, it1 = _revised_loop(A1, b, c1, basis, n, max_iter)
    xb = np.linalg.solve(A1[:, basis], b)
    if float(xb[basis >= n].sum()) > FEAS_TOL * scale:
        return LPSolution(Status.INFEASIBLE, iterations=it1)

    # swap zero-level artificials for structural columns, largest pivot first
    for r in range(m):
        if basis[r] < n:
            continue
        Binv_r = np.linalg.solve(A1[:, basis].T, np.eye(m)[r])
        row = Binv_r @ A
        row[[j for j in basis if j < n]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) <= PIVOT_TOL:
            raise NumericalFailure("could not drive an artificial variable out of the basis")
        basis[r] = j

    status, it2 = _revised_loop(A, b, c, basis, n, max_iter)
    if status is Status.UNBOUNDED:
        return LPSolution(Status.UNBOUNDED, iterations=it1 + it2)
    basis = [int(j) for j in basis]
    x = _certify(lp, A, b, c, basis)
    return LPSolution(Status.OPTIMAL, x, float(lp.objective @ x), it1 + it2, tuple(sorted(basis)))


def _certify(lp, A, b, c, basis):
    """Recompute the basic solution from scratch and check optimality conditions."""
    n = lp.n
    x = np.zeros(n)
    if basis:
        B = A[:, basis]
        cond = np.linalg.cond(B)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise NumericalFailure(f"final basis condition number {cond:.3g} exceeds {COND_LIMIT:.0e}")
        xb = np.linalg.solve(B, b)
        # one step of iterative refinement
        xb += np.linalg.solve(B, b - B @ xb)
        x[basis] = xb
        y = np.linalg.solve(B.T, c[basis])
        reduced = c - A.T @ y
    else:
        reduced = c
    if np.any(x < -NEG_TOL):
        raise NumericalFailure(f"basic solution has negative entry {x.min():.3g}")
    x = np.where(x <= 0, 0.0, x)
    scale = max(1.0, float(np.abs(lp.rhs).max()))
    if lp.residual(x) > FEAS_TOL * scale:
        raise NumericalFailure(f"constraint residual {lp.residual(x):.3g} exceeds tolerance")
    cscale = max(1.0, float(np.abs(c).max()))
    if np.any(reduced < -1e-7 * cscale):
        raise NumericalFailure(f"reduced cost {reduced.min():.3g} violates optimality")
    return x


def _independent_rows(A, tol=1e-10):
    """Indices of a maximal set of linearly independent rows, greedy in order."""
    rows = []
    Q = np.zeros((0, A.shape[1]))
    for i, a in enumerate(A):
        v = a - Q.T @ (Q @ a) if Q.size else a.copy()
        v = v - Q.T @ (Q @ v) if Q.size else v
        nv = np.linalg.norm(v)
        if nv > tol * max(1.0, np.linalg.norm(a)):
            rows.append(i)
            Q = np.vstack([Q, v / nv])
    return rows


def enumerate_vertices(lp: LinearProgram, chunk: int = 20_000) -> list[LPSolution]:
    """All basic feasible solutions of ``lp`` by brute force over column subsets.

    Guarded by ``n <= 24`` and ``C(n, rank) <= 10**6``. Each vertex is returned
    once (bases that give the same point are merged), as an OPTIMAL-status
    solution carrying its objective value.
    """
    n = lp.n
    A, b = lp.constraint_matrix, lp.rhs
    if n > MAX_VARS_ENUM:
        raise TooLarge(f"{n} variables exceed the enumeration limit {MAX_VARS_ENUM}")
    rows = _independent_rows(A) if lp.m else []
    r = len(rows)
    ncomb = math.comb(n, r)
    if ncomb > MAX_BASES_ENUM:
        raise TooLarge(f"C({n},{r}) = {ncomb} bases exceed the enumeration limit")
    scale = max(1.0, float(np.abs(b).max())) if lp.m else 1.0
    if r == 0:
        x = np.zeros(n)
        if lp.residual(x) <= FEAS_TOL * scale:
            return [LPSolution(Status.OPTIMAL, x, 0.0, 0, ())]
        return []
    Ar, br = A[rows], b[rows]
    found: dict[tuple, LPSolution] = {}
    combos = itertools.combinations(range(n), r)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        M = Ar[:, block].transpose(1, 0, 2)  # (K, r, r)
        sv = np.linalg.svd(M, compute_uv=False)
        ok = sv[:, -1] > 1e-10 * np.maximum(1.0, sv[:, 0])
        if not ok.any():
            continue
        block, M = block[ok], M[ok]
        xb = np.linalg.solve(M, np.broadcast_to(br, (M.shape[0], r))[..., None])[..., 0]
        feas = np.all(xb >= -NEG_TOL, axis=1)
        for cols, vals in zip(block[feas], xb[feas]):
            x = np.zeros(n)
            x[cols] = np.where(vals <= 0, 0.0, vals)
            if lp.residual(x) > FEAS_TOL * scale:
                continue
            key = tuple(np.round(x, 9).tolist())
            if key not in found:
                found[key] = LPSolution(Status.OPTIMAL, x, float(lp.objective @ x), 0, tuple(cols.tolist()))
    return list(found.values())


def vertex_minimum(lp: LinearProgram) -> float:
    """Smallest objective value over all vertices (``inf`` when infeasible)."""
    verts = enumerate_vertices(lp)
    return min((v.value for v in verts), default=math.inf)
