"""Cost specifications.

Three shapes of cost are supported:

* :class:`Pointwise` -- ``c(x, y)``, integrated against a conditional law;
  a named family (``abs``, ``square``, ``cube``, ``sqrt``), a Python callable, or a finite table.
* :class:`Barycentric` -- ``C(x, p) = theta(mean p)`` with ``theta`` the
  maximum of finitely many affine pieces (hence convex).
* :class:`GenericOracle` -- any ``C(x, p)`` given as a black box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .measures import DiscreteMeasure, mean, nearest_index

_NAMED = {
    "abs": lambda x, y: np.abs(y - x),
    "square": lambda x, y: (y - x) ** 2,
    "cube": lambda x, y: np.abs(y - x) ** 3,
    "sqrt": lambda x, y: np.sqrt(np.abs(y - x)),
}


@dataclass(frozen=True)
class Pointwise:
    """Cost ``c(x, y)``.

    Either ``func`` (vectorized over broadcast arrays) or a finite ``table``
    with its ``x_atoms``/``y_atoms`` grid must be set. ``bumps`` holds
    additive perturbations ``(delta, g)`` applied on top of the base cost.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    name: str = "callable"
    x_atoms: np.ndarray | None = None
    y_atoms: np.ndarray | None = None
    table: np.ndarray | None = None
    bumps: tuple = field(default=())

    @classmethod
    def named(cls, name: str) -> "Pointwise":
        try:
            return cls(func=_NAMED[name], name=name)
        except KeyError:
            raise ValueError(f"unknown cost family {name!r}; choose from {sorted(_NAMED)}") from None

    @classmethod
    def from_table(cls, x_atoms, y_atoms, table) -> "Pointwise":
        x = np.asarray(x_atoms, dtype=float)
        y = np.asarray(y_atoms, dtype=float)
        t = np.asarray(table, dtype=float)
        if t.shape != (x.size, y.size):
            raise ValueError(f"table shape {t.shape} does not match grid ({x.size}, {y.size})")
        if not np.all(np.isfinite(t)):
            raise ValueError("cost table must be finite")
        return cls(name="table", x_atoms=x, y_atoms=y, table=t)

    def bumped(self, delta: float, g: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "Pointwise":
        """The cost ``c + delta * g``."""
        return Pointwise(self.func, self.name, self.x_atoms, self.y_atoms, self.table,
                         self.bumps + ((float(delta), g),))

    def matrix(self, xs, ys) -> np.ndarray:
        """Cost evaluated on the grid ``xs`` x ``ys``."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if self.table is not None:
            ri = _lookup(self.x_atoms, xs, "x")
            ci = _lookup(self.y_atoms, ys, "y")
            out = self.table[np.ix_(ri, ci)].copy()
        else:
            out = np.asarray(self.func(xs[:, None], ys[None, :]), dtype=float)
            out = np.broadcast_to(out, (xs.size, ys.size)).copy()
        for delta, g in self.bumps:
            out += delta * np.broadcast_to(np.asarray(g(xs[:, None], ys[None, :]), dtype=float), out.shape)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"cost {self.name!r} is not finite on the working grid")
        return out

    def __call__(self, x: float, p: DiscreteMeasure) -> float:
        """Integrated cost ``C(x, p) = sum_y c(x, y) p(y)``."""
        return float(self.matrix([x], p.atoms)[0] @ p.weights)


def _lookup(grid, pts, axis):
    try:
        return nearest_index(grid, pts)
    except ValueError:
        raise ValueError(f"cost table has no {axis}-atom near some of {pts.tolist()}") from None


@dataclass(frozen=True)
class Barycentric:
    """``C(x, p) = theta(mean p)`` with ``theta(m) = max_k (a_k m + b_k)``."""

    pieces: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pcs = tuple((float(a), float(b)) for a, b in self.pieces)
        if not pcs:
            raise ValueError("theta needs at least one affine piece")
        if not all(np.isfinite(v) for pc in pcs for v in pc):
            raise ValueError("affine pieces must be finite")
        object.__setattr__(self, "pieces", pcs)

    @classmethod
    def absolute(cls) -> "Barycentric":
        return cls(((1.0, 0.0), (-1.0, 0.0)))

    @property
    def slopes(self) -> np.ndarray:
        return np.array([a for a, _ in self.pieces])

    @property
    def intercepts(self) -> np.ndarray:
        return np.array([b for _, b in self.pieces])

    def theta(self, m):
        m = np.asarray(m, dtype=float)
        return np.max(self.slopes * m[..., None] + self.intercepts, axis=-1)

    def lower_bound(self, lo: float, hi: float) -> float:
        """A lower bound of ``theta`` on ``[lo, hi]``: the best affine minorant's minimum."""
        a, b = self.slopes, self.intercepts
        return float(np.max(np.minimum(a * lo + b, a * hi + b)))

    def growth_constant(self, r: float = 1.0) -> float:
        """``c0`` with ``|theta(x)| <= c0 (1 + |x|**r)`` for all real ``x``."""
        base = max(float(np.abs(self.slopes).max()), float(np.abs(self.intercepts).max()))
        return base if r == 1 else 2.0 * base

    def __call__(self, x: float, p: DiscreteMeasure) -> float:
        return float(self.theta(mean(p)))


@dataclass(frozen=True)
class GenericOracle:
    """Black-box cost ``C(x, p)``."""

    func: Callable[[float, DiscreteMeasure], float]
    name: str = "oracle"

    def __call__(self, x: float, p: DiscreteMeasure) -> float:
        return float(self.func(x, p))


def min_atom_mass(locations: Sequence[float]) -> GenericOracle:
    """``C(x, p) = min_k p({y_k})`` over the given locations (concave in ``p``)."""
    locs = tuple(float(v) for v in locations)

    def f(x, p):
        return min(p.mass_at(y, tol=1e-9) for y in locs)

    return GenericOracle(f, name="minmass:" + ",".join(repr(v) for v in locs))
