"""Plain-text file formats.

Floats are written with ``repr`` so that every file re-parses to the same
binary values.

* measure: one ``location,weight`` per line
* plan / cost table: header row ``,y_1,...,y_n`` then rows ``x_i,v_i1,...``
* theta pieces: one ``slope,intercept`` per line
* candidate set: plan layout, repeated x allowed, each row a probability law

Lines starting with ``#`` and blank lines are ignored everywhere.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from .competitors import RepairTrace
from .costs import Barycentric, Pointwise
from .measures import DiscreteMeasure
from .monotone import CandidateSet
from .report import MonotonicityReport
from .transport import TransportPlan


class ParseError(ValueError):
    """Malformed input file."""


def _rows(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        out.append((lineno, [cell.strip() for cell in next(csv.reader([s]))]))
    return out


def _float(cell: str, lineno: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"line {lineno}: {cell!r} is not a number") from None
    if not np.isfinite(v):
        raise ParseError(f"line {lineno}: non-finite value {cell!r}")
    return v


def _fmt(v) -> str:
    return repr(float(v))


# measures


def parse_measure(text: str) -> DiscreteMeasure:
    locs, weights = [], []
    for lineno, cells in _rows(text):
        if len(cells) != 2:
            raise ParseError(f"line {lineno}: expected 'location,weight', got {len(cells)} fields")
        locs.append(_float(cells[0], lineno))
        weights.append(_float(cells[1], lineno))
    try:
        return DiscreteMeasure(locs, weights)
    except ValueError as e:
        raise ParseError(str(e)) from None


def format_measure(m: DiscreteMeasure) -> str:
    return "".join(f"{_fmt(x)},{_fmt(w)}\n" for x, w in m)


# matrices with labelled axes


def _parse_matrix(text: str):
    rows = _rows(text)
    if not rows:
        raise ParseError("empty matrix file")
    lineno, head = rows[0]
    if head[0] != "":
        raise ParseError(f"line {lineno}: header must start with an empty cell")
    ys = [_float(c, lineno) for c in head[1:]]
    xs, vals = [], []
    for lineno, cells in rows[1:]:
        if len(cells) != len(ys) + 1:
            raise ParseError(f"line {lineno}: expected {len(ys) + 1} fields, got {len(cells)}")
        xs.append(_float(cells[0], lineno))
        vals.append([_float(c, lineno) for c in cells[1:]])
    if not xs:
        raise ParseError("matrix has no rows")
    return np.array(xs), np.array(ys), np.array(vals)


def _format_matrix(xs, ys, vals) -> str:
    lines = ["," + ",".join(_fmt(y) for y in ys)]
    for x, row in zip(xs, vals):
        lines.append(_fmt(x) + "," + ",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_plan(text: str) -> TransportPlan:
    xs, ys, vals = _parse_matrix(text)
    try:
        return TransportPlan(xs, ys, vals)
    except ValueError as e:
        raise ParseError(str(e)) from None


def format_plan(plan: TransportPlan) -> str:
    return _format_matrix(plan.x_atoms, plan.y_atoms, plan.mass)


def parse_cost_table(text: str) -> Pointwise:
    xs, ys, vals = _parse_matrix(text)
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise ParseError("cost table atoms must be strictly increasing")
    return Pointwise.from_table(xs, ys, vals)


def format_cost_table(c: Pointwise, xs, ys) -> str:
    return _format_matrix(xs, ys, c.matrix(xs, ys))


def parse_candidates(text: str) -> CandidateSet:
    xs, ys, vals = _parse_matrix(text)
    try:
        return CandidateSet(tuple((x, DiscreteMeasure(ys, row)) for x, row in zip(xs, vals)))
    except ValueError as e:
        raise ParseError(str(e)) from None


def format_candidates(cand: CandidateSet) -> str:
    grid = cand.pooled.atoms
    vals = [[p.mass_at(y) for y in grid] for p in cand.measures]
    return _format_matrix(cand.xs, grid, vals)


# theta


def parse_theta(text: str) -> Barycentric:
    pieces = []
    for lineno, cells in _rows(text):
        if len(cells) != 2:
            raise ParseError(f"line {lineno}: expected 'slope,intercept'")
        pieces.append((_float(cells[0], lineno), _float(cells[1], lineno)))
    if not pieces:
        raise ParseError("theta file has no pieces")
    return Barycentric(tuple(pieces))


def format_theta(theta: Barycentric) -> str:
    return "".join(f"{_fmt(a)},{_fmt(b)}\n" for a, b in theta.pieces)


# reports


def format_report(rep: MonotonicityReport) -> str:
    lines = [
        f"verdict: {'violated' if rep.is_violated else 'pass'}",
        f"gap: {_fmt(rep.gap)}",
        f"method: {rep.method.value}",
    ]
    if rep.current_cost is not None:
        lines.append(f"current_cost: {_fmt(rep.current_cost)}")
    if rep.best_cost is not None:
        lines.append(f"best_cost: {_fmt(rep.best_cost)}")
    if rep.subset is not None:
        lines.append("subset: " + ",".join(str(i) for i in rep.subset))
    for i, q in enumerate(rep.competitors):
        lines.append(f"competitor {i}:")
        lines += ["  " + line for line in format_measure(q).splitlines()]
    return "\n".join(lines) + "\n"


def parse_report_competitors(text: str) -> list[DiscreteMeasure]:
    """The competitor measures of a formatted report, in order."""
    blocks: list[list[str]] = []
    for line in text.splitlines():
        if line.startswith("competitor "):
            blocks.append([])
        elif blocks and line.startswith("  "):
            blocks[-1].append(line.strip())
    return [parse_measure("\n".join(b)) for b in blocks]


def format_report_csv(rep: MonotonicityReport) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["verdict", "gap", "method", "current_cost", "best_cost"])
    w.writerow(["violated" if rep.is_violated else "pass", _fmt(rep.gap), rep.method.value,
                "" if rep.current_cost is None else _fmt(rep.current_cost),
                "" if rep.best_cost is None else _fmt(rep.best_cost)])
    return buf.getvalue()


def format_measures(ms, header: str = "measure") -> str:
    out = []
    for i, q in enumerate(ms):
        out.append(f"# {header} {i}")
        out.append(format_measure(q).rstrip("\n"))
    return "\n".join(out) + "\n"


def parse_measures(text: str) -> list[DiscreteMeasure]:
    """Inverse of :func:`format_measures`: blocks separated by ``# <name> <i>`` lines."""
    blocks: list[list[str]] = []
    for line in text.splitlines():
        if line.startswith("#"):
            blocks.append([])
        elif line.strip():
            if not blocks:
                blocks.append([])
            blocks[-1].append(line)
    return [parse_measure("\n".join(b)) for b in blocks]


def format_trace(trace: RepairTrace) -> str:
    """Exchange steps as CSV, followed by the final residual of each index."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "donor", "receiver", "high", "low", "amount"])
    for k, s in enumerate(trace.steps):
        w.writerow([k, s.donor, s.receiver, " ".join(map(_fmt, s.high)), " ".join(map(_fmt, s.low)), _fmt(s.amount)])
    for i, r in enumerate(trace.residuals):
        buf.write(f"# residual {i}: {_fmt(r)}\n")
    return buf.getvalue()


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def load_measure(path) -> DiscreteMeasure:
    return parse_measure(read_text(path))


def load_plan(path) -> TransportPlan:
    return parse_plan(read_text(path))
