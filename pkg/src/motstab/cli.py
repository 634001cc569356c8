"""Command-line front end.

Exit codes: 0 success or pass, 1 a mathematically negative result
(violation found, pair not in convex order, non-unique optimizer, ...),
2 usage or parse error, 3 numerical failure. Results go to stdout or
``--out``; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import importlib
import sys

from . import io as fio
from .competitors import build_competitors, build_mart_competitors, repair_barycenters
from .costs import _NAMED, GenericOracle, Pointwise, min_atom_mass
from .errors import (InfeasibleBarycenters, InfeasibleOrder, InfeasiblePooled, NonUniqueOptimizer,
                     NotProbability, NumericalFailure, RepairFailed, TooLarge, ZeroMass)
from .measures import convex_order, wasserstein
from .monotone import CandidateSet, check_C_monotone, check_mart_C_monotone, hunt_violation_generic, scan_plan_subsets
from .mot import solve_mot
from .owt import solve_owt_barycentric
from .report import GAP_TOL
from .stability import (PerturbationSchedule, adapted_distance, run_monotonicity_stability, run_plan_stability,
                        run_value_stability)
from .transport import check_cyclical_monotone, solve_ot

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

NEGATIVE = (InfeasibleOrder, InfeasibleBarycenters, InfeasiblePooled, RepairFailed, NonUniqueOptimizer)


class UsageError(Exception):
    pass


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _ratio(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def _add_common(p):
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("text", "csv"), default="text", help="output format (default: text)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--feas-tol", type=_positive, default=1e-8, help="feasibility tolerance (default: 1e-8)")
    p.add_argument("--gap-tol", type=_positive, default=GAP_TOL, help="violation tolerance on gaps (default: 1e-8)")


def _add_marginals(p):
    p.add_argument("--mu", required=True, help="measure file for the first marginal")
    p.add_argument("--nu", required=True, help="measure file for the second marginal")


def _add_cost(p, theta=False):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cost", choices=sorted(_NAMED), help="named pointwise cost (default: abs)")
    g.add_argument("--cost-table", help="cost table file (plan layout)")
    if theta:
        g.add_argument("--theta", help="file of 'slope,intercept' pieces of a convex theta")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="motstab", description="Discrete OT, martingale OT and weak OT on the real line.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("solve-ot", help="optimal coupling for a pointwise cost")
    _add_marginals(p)
    _add_cost(p)
    _add_common(p)

    p = sub.add_parser("solve-mot", help="optimal martingale coupling for a pointwise cost")
    _add_marginals(p)
    _add_cost(p)
    _add_common(p)

    p = sub.add_parser("solve-owt", help="weak transport for a linear or barycentric cost")
    _add_marginals(p)
    _add_cost(p, theta=True)
    _add_common(p)

    p = sub.add_parser("check-cyclical", help="c-cyclical monotonicity of a plan")
    p.add_argument("--plan", required=True, help="plan file")
    p.add_argument("--max-cycle", type=int, help="longest cycle checked (default: support size)")
    _add_cost(p)
    _add_common(p)

    p = sub.add_parser("check-monotone", help="C-monotonicity of a plan or a candidate set")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--plan", help="plan file; every subset of rows up to --max-subset is checked")
    src.add_argument("--candidates", help="candidate-set file (plan layout, repeated x allowed)")
    p.add_argument("--max-subset", type=int, help="largest row subset for --plan (default: all rows)")
    p.add_argument("--martingale", action="store_true", help="competitors must keep every barycenter")
    p.add_argument("--generic", action="store_true", help="black-box search with --oracle instead of an exact LP")
    p.add_argument("--budget", type=int, default=2000, help="points examined by --generic (default: 2000)")
    p.add_argument("--oracle", default="minmass:0,1",
                   help="generic cost: 'minmass:y1,y2,...' or 'module:function' (default: minmass:0,1)")
    _add_cost(p, theta=True)
    _add_common(p)

    p = sub.add_parser("build-competitors", help="competitors of a perturbed family close to a given one")
    p.add_argument("--p", required=True, dest="p_file", help="measures file with the family p")
    p.add_argument("--q", required=True, dest="q_file", help="measures file with a competitor q of p")
    p.add_argument("--p-perturbed", required=True, help="measures file with the perturbed family")
    p.add_argument("--martingale", action="store_true", help="also restore the barycenters")
    p.add_argument("--r", type=_positive, default=1.0, help="Wasserstein order (default: 1)")
    _add_common(p)

    p = sub.add_parser("stability", help="perturbation experiment for martingale transport")
    _add_marginals(p)
    _add_cost(p)
    p.add_argument("--mode", choices=("value", "plan", "monotone"), default="value")
    p.add_argument("--steps", type=int, default=10, help="number of schedule steps (default: 10)")
    p.add_argument("--geom-ratio", type=_ratio, default=0.5, help="perturbation size ratio**k (default: 0.5)")
    p.add_argument("--no-mesh", action="store_true", help="do not bin mu")
    p.add_argument("--no-dilation", action="store_true", help="do not dilate nu")
    p.add_argument("--no-bump", action="store_true", help="do not perturb the cost")
    p.add_argument("--tol", type=_positive, help="pass threshold on the final step (mode dependent default)")
    _add_common(p)

    p = sub.add_parser("adapted-dist", help="nested distance between two plans")
    p.add_argument("--plan1", required=True)
    p.add_argument("--plan2", required=True)
    p.add_argument("--r", type=_positive, default=1.0, help="order of the inner Wasserstein distance (default: 1)")
    _add_common(p)

    p = sub.add_parser("wasserstein", help="W_r between two measures")
    _add_marginals(p)
    p.add_argument("--r", type=_positive, default=1.0, help="order (default: 1)")
    _add_common(p)

    p = sub.add_parser("convex-order", help="whether mu is below nu in convex order")
    _add_marginals(p)
    _add_common(p)
    return ap


# helpers


def _pointwise(args) -> Pointwise:
    if getattr(args, "cost_table", None):
        return fio.parse_cost_table(fio.read_text(args.cost_table))
    return Pointwise.named(args.cost or "abs")


def _cost(args):
    if getattr(args, "theta", None):
        return fio.parse_theta(fio.read_text(args.theta))
    return _pointwise(args)


def _oracle(spec: str) -> GenericOracle:
    kind, _, rest = spec.partition(":")
    if not rest:
        raise UsageError(f"bad oracle spec {spec!r}")
    if kind == "minmass":
        try:
            return min_atom_mass([float(v) for v in rest.split(",")])
        except ValueError:
            raise UsageError(f"bad location list in {spec!r}") from None
    try:
        func = getattr(importlib.import_module(kind), rest)
    except (ImportError, AttributeError) as e:
        raise UsageError(f"cannot load oracle {spec!r}: {e}") from None
    return GenericOracle(func, name=spec)


def _value_line(v: float) -> str:
    return f"# value: {v!r}\n"


def _number(v: float, fmt: str, name: str) -> str:
    return f"{name}\n{v!r}\n" if fmt == "csv" else f"{v!r}\n"


# commands


def cmd_solve(args):
    mu, nu = fio.load_measure(args.mu), fio.load_measure(args.nu)
    if args.command == "solve-ot":
        plan, value = solve_ot(mu, nu, _pointwise(args))
    elif args.command == "solve-mot":
        plan, value = solve_mot(mu, nu, _pointwise(args))
    else:
        cost = _cost(args)
        plan, value = (solve_ot(mu, nu, cost) if isinstance(cost, Pointwise)
                       else solve_owt_barycentric(mu, nu, cost))
    head = "" if args.format == "csv" else _value_line(value)
    return EXIT_OK, head + fio.format_plan(plan)


def _report_out(rep, fmt):
    text = fio.format_report_csv(rep) if fmt == "csv" else fio.format_report(rep)
    return (EXIT_NEGATIVE if rep.is_violated else EXIT_OK), text


def cmd_check_cyclical(args):
    plan = fio.load_plan(args.plan)
    max_cycle = args.max_cycle or len(plan.support())
    rep = check_cyclical_monotone(plan, _pointwise(args), max_cycle, args.gap_tol)
    return _report_out(rep, args.format)


def cmd_check_monotone(args):
    if args.generic:
        if args.plan:
            cand = CandidateSet.from_plan(fio.load_plan(args.plan))
        else:
            cand = fio.parse_candidates(fio.read_text(args.candidates))
        rep = hunt_violation_generic(cand, _oracle(args.oracle), args.budget, args.martingale, args.seed,
                                     args.gap_tol)
        return _report_out(rep, args.format)
    cost = _cost(args)
    if args.plan:
        plan = fio.load_plan(args.plan)
        size = args.max_subset or plan.shape[0]
        rep = scan_plan_subsets(plan, cost, size, args.martingale, args.gap_tol)
    else:
        cand = fio.parse_candidates(fio.read_text(args.candidates))
        check = check_mart_C_monotone if args.martingale else check_C_monotone
        rep = check(cand, cost, args.gap_tol)
    return _report_out(rep, args.format)


def cmd_build_competitors(args):
    p = fio.parse_measures(fio.read_text(args.p_file))
    q = fio.parse_measures(fio.read_text(args.q_file))
    pp = fio.parse_measures(fio.read_text(args.p_perturbed))
    if not len(p) == len(q) == len(pp):
        raise UsageError(f"families have lengths {len(p)}, {len(q)}, {len(pp)}")
    if args.martingale:
        out = build_mart_competitors(p, q, pp, args.r)
        _, trace = repair_barycenters(build_competitors(p, q, pp, args.r), pp)
        if args.format == "csv":
            return EXIT_OK, fio.format_trace(trace)
        return EXIT_OK, fio.format_measures(out, "competitor") + "".join(
            "# " + line + "\n" for line in fio.format_trace(trace).splitlines())
    return EXIT_OK, fio.format_measures(build_competitors(p, q, pp, args.r), "competitor")


def cmd_stability(args):
    mu, nu = fio.load_measure(args.mu), fio.load_measure(args.nu)
    sched = PerturbationSchedule.geometric(args.steps, args.geom_ratio, mesh=not args.no_mesh,
                                           dilation=not args.no_dilation, cost=not args.no_bump)
    c = _pointwise(args)
    if args.mode == "value":
        run = run_value_stability(mu, nu, c, sched, args.tol or 1e-5)
    elif args.mode == "plan":
        run = run_plan_stability(mu, nu, c, sched, args.tol or 1e-4)
    else:
        run = run_monotonicity_stability(mu, nu, c, sched, args.tol or args.gap_tol)
    text = run.to_csv() if args.format == "csv" else run.to_text()
    return (EXIT_OK if run.passed else EXIT_NEGATIVE), text


def cmd_adapted(args):
    d = adapted_distance(fio.load_plan(args.plan1), fio.load_plan(args.plan2), args.r)
    return EXIT_OK, _number(d, args.format, "adapted_distance")


def cmd_wasserstein(args):
    d = wasserstein(fio.load_measure(args.mu), fio.load_measure(args.nu), args.r)
    return EXIT_OK, _number(d, args.format, "wasserstein")


def cmd_convex_order(args):
    ok = convex_order(fio.load_measure(args.mu), fio.load_measure(args.nu), max(args.feas_tol, 1e-9))
    word = "true" if ok else "false"
    return (EXIT_OK if ok else EXIT_NEGATIVE), (f"convex_order\n{word}\n" if args.format == "csv" else word + "\n")


COMMANDS = {
    "solve-ot": cmd_solve,
    "solve-mot": cmd_solve,
    "solve-owt": cmd_solve,
    "check-cyclical": cmd_check_cyclical,
    "check-monotone": cmd_check_monotone,
    "build-competitors": cmd_build_competitors,
    "stability": cmd_stability,
    "adapted-dist": cmd_adapted,
    "wasserstein": cmd_wasserstein,
    "convex-order": cmd_convex_order,
}


def dispatch(args) -> int:
    try:
        code, text = COMMANDS[args.command](args)
    except NEGATIVE as e:
        print(str(e), file=sys.stderr)
        return EXIT_NEGATIVE
    except (NumericalFailure, TooLarge) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (fio.ParseError, UsageError, NotProbability, ZeroMass, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
