"""Finitely supported measures on the real line.

A :class:`DiscreteMeasure` is canonical on construction: atoms are sorted,
atoms closer than :data:`MERGE_TOL` are merged and zero-weight atoms dropped.
All metric computations in one dimension go through the monotone (quantile)
coupling, which is optimal for every cost ``|x - y|**r`` with ``r >= 1``.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import NotProbability, ZeroMass

MERGE_TOL = 1e-12
PROB_TOL = 1e-10
ORDER_TOL = 1e-9
NEG_TOL = 1e-12


class DiscreteMeasure:
    """Nonnegative measure with finitely many atoms on the real line.

    Parameters
    ----------
    atoms : sequence of float
        Support locations, in any order, duplicates allowed.
    weights : sequence of float
        Nonnegative masses, same length as ``atoms``. Entries in
        ``[-1e-12, 0)`` are treated as rounding noise and clipped.
    """

    __slots__ = ("atoms", "weights")

    def __init__(self, atoms: Iterable[float], weights: Iterable[float]):
        x = np.asarray(list(atoms) if not isinstance(atoms, np.ndarray) else atoms, dtype=float).ravel()
        w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=float).ravel()
        if x.shape != w.shape:
            raise ValueError(f"atoms and weights differ in length: {x.size} vs {w.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise ValueError("atoms and weights must be finite")
        if np.any(w < -NEG_TOL):
            raise ValueError(f"negative weight {w.min()!r}")
        w = np.where(w < 0, 0.0, w)
        x, w = _canonicalize(x, w)
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", x)
        object.__setattr__(self, "weights", w)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteMeasure is immutable")

    # construction helpers

    @classmethod
    def dirac(cls, x: float, mass: float = 1.0) -> "DiscreteMeasure":
        return cls([x], [mass])

    @classmethod
    def uniform(cls, atoms: Sequence[float]) -> "DiscreteMeasure":
        n = len(atoms)
        return cls(atoms, [1.0 / n] * n)

    @classmethod
    def zero(cls) -> "DiscreteMeasure":
        return cls([], [])

    # basic properties

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def size(self) -> int:
        return int(self.atoms.size)

    def is_probability(self, tol: float = PROB_TOL) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def require_probability(self, name: str = "measure") -> None:
        if not self.is_probability():
            raise NotProbability(f"{name} has total mass {self.total_mass!r}, expected 1")

    def mass_at(self, y: float, tol: float = MERGE_TOL) -> float:
        idx = np.flatnonzero(np.abs(self.atoms - y) <= tol)
        return float(self.weights[idx].sum())

    @property
    def hull(self) -> tuple[float, float]:
        """Endpoints of the convex hull of the support."""
        if self.size == 0:
            raise ZeroMass("empty measure has no support")
        return float(self.atoms[0]), float(self.atoms[-1])

    # algebra

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return DiscreteMeasure(
            np.concatenate([self.atoms, other.atoms]),
            np.concatenate([self.weights, other.weights]),
        )

    def __mul__(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.atoms, self.weights * float(c))

    __rmul__ = __mul__

    def normalized(self) -> "DiscreteMeasure":
        m = self.total_mass
        if m <= 0:
            raise ZeroMass("cannot normalize the zero measure")
        return DiscreteMeasure(self.atoms, self.weights / m)

    def translate(self, t: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.atoms + t, self.weights)

    def restrict(self, lo: float, hi: float) -> "DiscreteMeasure":
        """Restriction to the closed interval ``[lo, hi]``."""
        keep = (self.atoms >= lo) & (self.atoms <= hi)
        return DiscreteMeasure(self.atoms[keep], self.weights[keep])

    # comparisons

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return np.array_equal(self.atoms, other.atoms) and np.array_equal(self.weights, other.weights)

    __hash__ = None

    def allclose(self, other: "DiscreteMeasure", tol: float = 1e-9) -> bool:
        """Atom-wise comparison: largest mass difference over the union of supports."""
        return atomwise_distance(self, other) <= tol

    def __repr__(self) -> str:
        body = ", ".join(f"{w:.6g}@{x:.6g}" for x, w in zip(self.atoms, self.weights))
        return f"DiscreteMeasure({body})"

    def __iter__(self):
        return iter(zip(self.atoms.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return self.size


def _canonicalize(x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep = w > 0
    x, w = x[keep], w[keep]
    if x.size == 0:
        return np.zeros(0), np.zeros(0)
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    # group runs whose consecutive gaps are within the merge tolerance
    starts = np.concatenate([[True], np.diff(x) > MERGE_TOL])
    group = np.cumsum(starts) - 1
    n = int(group[-1]) + 1
    if n == x.size:
        return x.copy(), w.copy()
    wsum = np.bincount(group, weights=w, minlength=n)
    xsum = np.bincount(group, weights=w * x, minlength=n)
    merged = xsum / wsum
    # groups of identical locations keep that location bit for bit
    first = np.flatnonzero(starts)
    same = np.minimum.reduceat(x, first) == np.maximum.reduceat(x, first)
    merged[same] = x[first[same]]
    return merged, wsum


def nearest_index(grid: np.ndarray, pts, tol: float = 1e3 * MERGE_TOL) -> np.ndarray:
    """Index of the grid atom nearest to each point; ``ValueError`` if none is within ``tol``."""
    pts = np.asarray(pts, dtype=float)
    idx = np.clip(np.searchsorted(grid, pts), 0, grid.size - 1)
    left = np.clip(idx - 1, 0, grid.size - 1)
    pick = np.where(np.abs(grid[left] - pts) < np.abs(grid[idx] - pts), left, idx)
    far = np.abs(grid[pick] - pts) > tol
    if np.any(far):
        raise ValueError(f"no grid atom near {pts[far].tolist()}")
    return pick


def atomwise_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Largest absolute mass difference over atoms of the union of supports."""
    xs = np.concatenate([a.atoms, b.atoms])
    ws = np.concatenate([a.weights, -b.weights])
    if xs.size == 0:
        return 0.0
    order = np.argsort(xs, kind="stable")
    xs, ws = xs[order], ws[order]
    starts = np.concatenate([[True], np.diff(xs) > MERGE_TOL])
    group = np.cumsum(starts) - 1
    net = np.bincount(group, weights=ws)
    return float(np.abs(net).max())


def pooled(measures: Iterable[DiscreteMeasure]) -> DiscreteMeasure:
    """Sum of a family of measures."""
    ms = list(measures)
    if not ms:
        return DiscreteMeasure.zero()
    return DiscreteMeasure(
        np.concatenate([m.atoms for m in ms]),
        np.concatenate([m.weights for m in ms]),
    )


def mean(m: DiscreteMeasure) -> float:
    """Barycenter of ``m`` (normalized by its total mass)."""
    total = m.total_mass
    if total <= 0:
        raise ZeroMass("mean of the zero measure is undefined")
    return float(np.dot(m.atoms, m.weights) / total)


def monotone_coupling(p: DiscreteMeasure, q: DiscreteMeasure) -> list[tuple[int, int, float]]:
    """Quantile coupling of two measures of equal mass.

    Returns triples ``(i, j, mass)`` with ``i`` indexing ``p.atoms`` and ``j``
    indexing ``q.atoms``, in increasing order of both indices.
    """
    if abs(p.total_mass - q.total_mass) > PROB_TOL * max(1.0, p.total_mass):
        raise ValueError(f"masses differ: {p.total_mass!r} vs {q.total_mass!r}")
    if p.size == 0:
        return []
    cp = np.cumsum(p.weights)
    cq = np.cumsum(q.weights)
    breaks = np.union1d(cp, cq[:-1])
    breaks = breaks[breaks <= cp[-1]]
    lo = np.concatenate([[0.0], breaks[:-1]])
    seg = breaks - lo
    keep = seg > 0
    lo, seg = lo[keep], seg[keep]
    mid = lo + seg / 2
    ii = np.searchsorted(cp, mid)
    jj = np.minimum(np.searchsorted(cq, mid), q.size - 1)
    return list(zip(ii.tolist(), jj.tolist(), seg.tolist()))


def transport_cost_1d(p: DiscreteMeasure, q: DiscreteMeasure, r: float = 1.0) -> float:
    """Optimal cost of moving ``p`` onto ``q`` for ground cost ``|x - y|**r``.

    Works for measures of equal (not necessarily unit) mass; this is the raw
    infimum, without the ``1/r`` root.
    """
    if p.size == 0 and q.size == 0:
        return 0.0
    total = 0.0
    for i, j, m in monotone_coupling(p, q):
        total += m * abs(p.atoms[i] - q.atoms[j]) ** r
    return float(total)


def wasserstein(p: DiscreteMeasure, q: DiscreteMeasure, r: float = 1.0) -> float:
    """Wasserstein distance of order ``r`` between probability measures.

    For ``r > 1`` the ``r``-th root is taken (metric convention); for
    ``r == 1`` the two conventions coincide.
    """
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r!r}")
    p.require_probability("p")
    q.require_probability("q")
    cost = transport_cost_1d(p, q, r)
    return cost if r == 1 else cost ** (1.0 / r)


def call_potential(m: DiscreteMeasure, t: np.ndarray) -> np.ndarray:
    """``u(t) = sum_i w_i (x_i - t)_+`` evaluated at every point of ``t``."""
    t = np.asarray(t, dtype=float)
    return np.maximum(m.atoms[None, :] - t[:, None], 0.0) @ m.weights


def convex_order(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = ORDER_TOL) -> bool:
    """True iff ``mu`` is smaller than ``nu`` in convex order.

    Equal means plus pointwise domination of call potentials. The potentials
    are piecewise linear with kinks at atoms, so checking the union of both
    supports is exact.
    """
    if mu.size == 0 or nu.size == 0:
        return mu.size == nu.size
    if abs(mean(mu) - mean(nu)) > tol:
        return False
    grid = np.union1d(mu.atoms, nu.atoms)
    return bool(np.all(call_potential(mu, grid) <= call_potential(nu, grid) + tol))


def bin(mu: DiscreteMeasure, mesh: float) -> DiscreteMeasure:  # noqa: A001 - public name
    """Collapse each cell ``[k*mesh, (k+1)*mesh)`` to its conditional barycenter.

    The result is smaller than ``mu`` in convex order and within ``mesh`` of
    it in W1.
    """
    if mesh <= 0:
        raise ValueError(f"mesh must be positive, got {mesh!r}")
    mu.require_probability("mu")
    cells = np.floor(mu.atoms / mesh).astype(np.int64)
    uniq, group = np.unique(cells, return_inverse=True)
    w = np.bincount(group, weights=mu.weights, minlength=uniq.size)
    xw = np.bincount(group, weights=mu.weights * mu.atoms, minlength=uniq.size)
    return DiscreteMeasure(xw / w, w)


def dilate(nu: DiscreteMeasure, eps: float) -> DiscreteMeasure:
    """Split every atom ``y`` into ``y - eps`` and ``y + eps`` with half its weight.

    Mean preserving and convex-order increasing. The W1 distance to ``nu`` is
    exactly ``eps`` as long as atoms are at least ``2*eps`` apart, and at most
    ``eps`` otherwise.
    """
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps!r}")
    nu.require_probability("nu")
    if eps == 0:
        return nu
    x = np.concatenate([nu.atoms - eps, nu.atoms + eps])
    w = np.concatenate([nu.weights, nu.weights]) / 2.0
    return DiscreteMeasure(x, w)


def min_spacing(m: DiscreteMeasure) -> float:
    if m.size < 2:
        return math.inf
    return float(np.diff(m.atoms).min())
