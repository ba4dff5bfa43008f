"""Command-line interface.

Subcommands:

* ``solve``: run the bound solver on a quadratic (or dummy-label) instance
  and print a report.
* ``lap``: solve a single square or dummy-label instance exactly, print the
  assignment, value, dual, and a relative-interior self-check flag.
* ``verify``: cross-check the solvers against exhaustive enumeration on a
  small instance.
* ``batch``: run a method-by-instance grid from a manifest and print the
  result table.

Exit codes: 0 success, 1 input error, 2 internal invariant violation
(including failed ``verify`` checks).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .batch import run_batch
from .bounds import METHODS, SolverConfig, run
from .formats import ParseError, augment_instance, load_instance
from .lap import equality_subgraph, solve_lap
from .model import (
    IlapInstance,
    IqapInstance,
    LapInstance,
    dual_objective,
    ilap_objective,
    lap_objective,
)
from .oracle import (
    GuardExceeded,
    brute_force_optimum,
    check_dual_relative_interior,
    search_space_size,
    SEARCH_SPACE_GUARD,
)
from .reduction import (
    decompose_assignment,
    lift_assignment,
    map_dual,
    reduce_ilap_to_lap,
    solve_ilap,
)
from .relative_interior import (
    perfectly_matchable_edges,
    shift_to_relative_interior,
)
from .results import groups_to_csv, render_group_table, rows_to_csv, table_to_json


class InputError(Exception):
    pass


class CheckFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's default 2."""

    def error(self, message):
        raise InputError(message)


def _load(args, *, augment: bool = False):
    fmt = "qaplib" if getattr(args, "qaplib", False) else "auto"
    try:
        return load_instance(args.input, fmt=fmt,
                             dummy_cost=getattr(args, "dummy_cost", 0.0),
                             tolerance=args.tolerance, augment=augment)
    except (OSError, ParseError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _as_iqap(inst) -> IqapInstance:
    if isinstance(inst, IqapInstance):
        return inst
    if isinstance(inst, IlapInstance):
        return IqapInstance(inst, [])
    raise InputError("bound solving needs a dummy label; "
                     "this is a square instance (try the 'lap' subcommand)")


def _cmd_solve(args) -> int:
    inst = _as_iqap(_load(args, augment=args.augment))
    if args.time_limit is None and args.max_iters is None:
        raise InputError("set --time-limit or --max-iters")
    config = SolverConfig(
        method=args.method,
        time_limit=args.time_limit,
        max_iterations=args.max_iters,
        bound_improvement_epsilon=args.epsilon,
    )
    report = run(inst, config, instance_tag=args.input)
    if args.output == "json":
        print(json.dumps(report.to_dict(include_trajectory=args.trajectory),
                         indent=2))
    else:
        out = io.StringIO()
        writer = csv.writer(out)
        header = ["instance", "method", "final_bound", "iterations", "wall_time"]
        row = [report.instance, report.method, report.final_bound,
               report.iterations, report.wall_time]
        if args.trajectory:
            header.append("bound_trajectory")
            row.append(";".join(repr(b) for b in report.bound_trajectory))
        writer.writerow(header)
        writer.writerow(row)
        sys.stdout.write(out.getvalue())
    return 0


def _lap_payload(inst: LapInstance) -> dict:
    solved = solve_lap(inst)
    if solved is None:
        return {"status": "infeasible"}
    x, dual = solved
    shifted = shift_to_relative_interior(inst, dual, x)
    subgraph = equality_subgraph(inst, shifted)
    flag = set(subgraph.edges()) == perfectly_matchable_edges(subgraph, x)
    return {
        "status": "optimal",
        "value": lap_objective(inst, x),
        "assignment": {inst.vertex_name(v): inst.label_name(lab)
                       for v, lab in enumerate(x)},
        "alpha": list(shifted.alpha),
        "beta": list(shifted.beta),
        "dual_objective": dual_objective(inst, shifted),
        "relative_interior": flag,
    }


def _ilap_payload(inst: IlapInstance) -> dict:
    reduced = reduce_ilap_to_lap(inst)
    solved = solve_lap(reduced.lap)
    assert solved is not None, "the reduced instance always has a matching"
    xp, dual_p = solved
    shifted = shift_to_relative_interior(reduced.lap, dual_p, xp)
    subgraph = equality_subgraph(reduced.lap, shifted)
    flag = set(subgraph.edges()) == perfectly_matchable_edges(subgraph, xp)
    x1, x2 = decompose_assignment(inst, xp)
    if ilap_objective(inst, x1) <= ilap_objective(inst, x2):
        x = x1
    else:
        x = x2
    dual = map_dual(inst, shifted)
    return {
        "status": "optimal",
        "value": ilap_objective(inst, x),
        "assignment": {inst.vertex_name(v): inst.label_name(lab)
                       for v, lab in enumerate(x)},
        "alpha": list(dual.alpha),
        "beta": list(dual.beta),
        "dual_objective": dual_objective(inst, dual),
        "relative_interior": flag,
    }


def _cmd_lap(args) -> int:
    inst = _load(args)
    if isinstance(inst, IqapInstance):
        if inst.edges:
            raise InputError("instance has pairwise costs; use 'solve'")
        inst = inst.unary
    if isinstance(inst, LapInstance):
        payload = _lap_payload(inst)
    else:
        payload = _ilap_payload(inst)
    if args.output == "json":
        print(json.dumps(payload, indent=2))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")
    return 0


def _check(name: str, ok: bool, detail: str = "") -> bool:
    suffix = f" ({detail})" if detail else ""
    print(f"{name}: {'ok' if ok else 'FAIL'}{suffix}")
    return ok


def _verify_lap(inst: LapInstance) -> bool:
    value, optima = brute_force_optimum(inst)
    solved = solve_lap(inst)
    if value is None:
        return _check("solver agrees instance is infeasible", solved is None)
    if not _check("solver finds an optimum", solved is not None):
        return False
    x, dual = solved
    ok = _check("solver value matches enumeration",
                abs(lap_objective(inst, x) - value) <= inst.atol,
                f"value {value}")
    ok &= _check("dual objective matches",
                 abs(dual_objective(inst, dual) - value) <= inst.atol)
    shifted = shift_to_relative_interior(inst, dual, x)
    ok &= _check("shifted dual is in the relative interior",
                 check_dual_relative_interior(inst, shifted))
    return ok


def _verify_ilap(inst: IlapInstance) -> bool:
    value, _ = brute_force_optimum(inst)
    x, dual = solve_ilap(inst, mode="relative_interior")
    ok = _check("solver value matches enumeration",
                abs(ilap_objective(inst, x) - value) <= inst.atol,
                f"value {value}")
    ok &= _check("dual objective matches",
                 abs(dual_objective(inst, dual) - value) <= inst.atol)
    ok &= _check("mapped dual is in the relative interior",
                 check_dual_relative_interior(inst, dual))
    xp = lift_assignment(inst, x)
    reduced = reduce_ilap_to_lap(inst)
    ok &= _check("lifted assignment keeps the objective",
                 abs(lap_objective(reduced.lap, xp)
                     - ilap_objective(inst, x)) <= inst.atol)
    return ok


def _verify_iqap(inst: IqapInstance) -> bool:
    value, _ = brute_force_optimum(inst)
    scale = 1 + inst.max_abs_cost
    ok = True
    for method in METHODS:
        config = SolverConfig(method=method, max_iterations=10)
        report = run(inst, config)
        traj = report.bound_trajectory
        monotone = all(b2 >= b1 - 1e-8 * scale for b1, b2 in zip(traj, traj[1:]))
        ok &= _check(f"{method}: trajectory is non-decreasing", monotone)
        ok &= _check(f"{method}: bound does not exceed the optimum",
                     report.final_bound <= value + 1e-8 * scale,
                     f"bound {report.final_bound}, optimum {value}")
    augmented = augment_instance(inst)
    if search_space_size(augmented) <= SEARCH_SPACE_GUARD:
        aug_value, _ = brute_force_optimum(augmented)
        ok &= _check("augmentation keeps the optimum", aug_value == value)
    return ok


def _cmd_verify(args) -> int:
    inst = _load(args)
    try:
        size = search_space_size(inst)
        if size > SEARCH_SPACE_GUARD:
            print(f"skipped: search space of {size} assignments exceeds "
                  f"the enumeration guard of {SEARCH_SPACE_GUARD}")
            return 0
        if isinstance(inst, LapInstance):
            ok = _verify_lap(inst)
        elif isinstance(inst, IlapInstance):
            ok = _verify_ilap(inst)
        else:
            ok = _verify_iqap(inst)
    except GuardExceeded as exc:
        print(f"skipped: {exc}")
        return 0
    if not ok:
        raise CheckFailure("verification failed")
    print("all checks passed")
    return 0


def _cmd_batch(args) -> int:
    try:
        methods, rows, groups = run_batch(args.manifest, workers=args.workers)
    except (OSError, ParseError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(str(exc)) from exc
    if args.output == "json":
        print(table_to_json(rows, groups))
    elif args.output == "csv":
        if args.rows:
            sys.stdout.write(rows_to_csv(rows))
        else:
            sys.stdout.write(groups_to_csv(groups, methods))
    else:
        print(render_group_table(groups, methods))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qapbound",
        description="Dual lower bounds for sparse incomplete quadratic "
                    "assignment problems")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run the bound solver on an instance")
    solve.add_argument("--method", choices=METHODS, default="hung-ri")
    solve.add_argument("--input", required=True)
    solve.add_argument("--qaplib", action="store_true",
                       help="treat the input as a flow/distance benchmark file")
    solve.add_argument("--augment", action="store_true",
                       help="price shared-label collisions before solving")
    solve.add_argument("--time-limit", type=float, default=None, metavar="S")
    solve.add_argument("--max-iters", type=int, default=None, metavar="N")
    solve.add_argument("--tolerance", type=float, default=1e-9)
    solve.add_argument("--epsilon", type=float, default=1e-9,
                       help="stop once one iteration improves the bound by less")
    solve.add_argument("--dummy-cost", type=float, default=0.0)
    solve.add_argument("--output", choices=("json", "csv"), default="json")
    solve.add_argument("--trajectory", action="store_true",
                       help="include the per-iteration bounds in the output")
    solve.set_defaults(func=_cmd_solve)

    lap = sub.add_parser("lap", help="solve one assignment instance exactly")
    lap.add_argument("--input", required=True)
    lap.add_argument("--tolerance", type=float, default=1e-9)
    lap.add_argument("--dummy-cost", type=float, default=0.0)
    lap.add_argument("--output", choices=("json", "text"), default="json")
    lap.set_defaults(func=_cmd_lap)

    verify = sub.add_parser(
        "verify", help="cross-check the solvers against enumeration")
    verify.add_argument("--input", required=True)
    verify.add_argument("--tolerance", type=float, default=1e-9)
    verify.add_argument("--dummy-cost", type=float, default=0.0)
    verify.set_defaults(func=_cmd_verify)

    batch = sub.add_parser("batch", help="run a manifest of benchmark jobs")
    batch.add_argument("--manifest", required=True)
    batch.add_argument("--workers", type=int, default=None)
    batch.add_argument("--output", choices=("json", "csv", "text"),
                       default="json")
    batch.add_argument("--rows", action="store_true",
                       help="with --output csv, print per-instance rows")
    batch.set_defaults(func=_cmd_batch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CheckFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def console_entry() -> None:
    raise SystemExit(main())
