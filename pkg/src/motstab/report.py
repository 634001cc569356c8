"""Verdict record shared by the monotonicity checkers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .measures import DiscreteMeasure

GAP_TOL = 1e-8


class Method(enum.Enum):
    EXACT_LP = "ExactLP"
    GRID_SEARCH = "GridSearch"
    CYCLE_ENUMERATION = "CycleEnumeration"


@dataclass
class MonotonicityReport:
    """Outcome of a monotonicity check.

    ``gap`` is the current cost minus the best competitor cost found (clamped
    at zero). ``competitors`` is filled only when a violation was found.
    ``subset`` records which candidate indices (rows of a plan) were checked,
    when the report comes from a scan over subsets.
    """

    is_violated: bool
    gap: float
    method: Method
    competitors: list[DiscreteMeasure] = field(default_factory=list)
    current_cost: float | None = None
    best_cost: float | None = None
    subset: tuple[int, ...] | None = None

    @classmethod
    def from_gap(cls, gap, method, tol=GAP_TOL, competitors=(), **kw) -> "MonotonicityReport":
        gap = max(0.0, float(gap))
        violated = gap > tol
        return cls(violated, gap, method, list(competitors) if violated else [], **kw)
