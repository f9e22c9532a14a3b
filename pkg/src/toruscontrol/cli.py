"""Batch command-line front door.

Subcommands: classify, closure, ensemble-check, simulate, plan, bump,
separation.  Exit codes: 0 success, 1 input/usage error, 2 soundness
violation (the brute-force oracle exceeded the predicted closure, which
would indicate a bug, never a user error).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as tcio
from .closure import (
    UNCLASSIFIED,
    bruteforce_closure,
    compare_tables,
    membership,
    predicted_closure,
    table_from_descriptor,
)
from .dynamics import integrate_flow, variational_jacobian
from .ensemble import (
    bracket_generating_test,
    bump_field,
    separation_bound,
)
from .lattice import dual_group
from .planner import PlanProblem, plan_ensemble, verify_plan
from .torus import torus_distance
from .trigfield import (
    basis_constant_fields,
    c1_norm_bound,
    check_class_Vd,
    mean,
    mean_normalized,
)


class InputError(Exception):
    pass


def _load_field(path, normalize=False):
    try:
        f = tcio.field_from_dict(tcio.read_json(path))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read field file {path}: {exc}") from exc
    shift = None
    if normalize and any(c != 0 for c in mean(f)):
        shift = [str(c) for c in mean(f)]
        f = mean_normalized(f)
    return f, shift


def _load_ensemble(path):
    try:
        return tcio.ensemble_from_dict(tcio.read_json(path))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read ensemble file {path}: {exc}") from exc


def _emit(data: dict, out_path: str | None) -> None:
    if out_path:
        tcio.write_json(out_path, data)
    else:
        tcio.dump_json(data, sys.stdout)


def cmd_classify(args) -> int:
    f, shift = _load_field(args.field, normalize=True)
    desc = predicted_closure(f)
    report = check_class_Vd(f)
    out = {
        "descriptor": tcio.descriptor_to_dict(desc),
        "class_report": {
            "finite": report.finite,
            "span_modes": report.span_modes,
            "span_values": report.span_values,
            "divergence_free": report.divergence_free,
            "in_Vd": report.in_vd,
        },
    }
    if shift:
        out["mean_removed"] = shift
    if desc.kind == "full_lattice":
        dual = dual_group(desc.lattice)
        out["dual"] = {
            "basis": [[str(x) for x in row] for row in dual.basis],
            "quotient_reps": [[str(x) for x in row] for row in dual.quotient_reps],
        }
    _emit(out, args.output)
    return 0


def cmd_closure(args) -> int:
    f, shift = _load_field(args.field, normalize=True)
    desc = predicted_closure(f)
    generators = [f] + basis_constant_fields(f.dim)
    oracle = bruteforce_closure(generators, args.inner_box, args.outer_box, args.depth)
    out = {
        "descriptor": tcio.descriptor_to_dict(desc),
        "oracle_table": tcio.table_to_dict(oracle),
    }
    if shift:
        out["mean_removed"] = shift
    if desc.kind == UNCLASSIFIED:
        out["verdict"] = "unclassified: oracle output only"
        _emit(out, args.output)
        if not args.oracle_only:
            print(
                "field is outside the proven classification; rerun with "
                "--oracle-only to accept the brute-force table",
                file=sys.stderr,
            )
            return 1
        return 0
    predicted = table_from_descriptor(desc, args.inner_box)
    cmp_result = compare_tables(oracle, predicted)
    if not cmp_result["sound"]:
        out["verdict"] = "SOUNDNESS VIOLATION: oracle exceeds prediction"
        out["mismatched_modes"] = [list(m) for m in cmp_result["mismatched_modes"]]
        _emit(out, args.output)
        return 2
    if cmp_result["equal"]:
        out["verdict"] = "oracle matches predicted closure on the box"
    else:
        out["verdict"] = "oracle is a strict subset of the prediction (under-generated)"
        out["mismatched_modes"] = [list(m) for m in cmp_result["mismatched_modes"]]
    _emit(out, args.output)
    return 0


def cmd_ensemble_check(args) -> int:
    f, _ = _load_field(args.field, normalize=True)
    gamma = _load_ensemble(args.ensemble)
    if f.dim != gamma.dim:
        raise InputError("field and ensemble dimensions differ")
    desc = predicted_closure(f)
    if desc.kind == UNCLASSIFIED:
        if not args.use_oracle:
            print(
                "field is outside the proven classification; rerun with "
                "--use-oracle to rank-test the brute-force table",
                file=sys.stderr,
            )
            return 1
        table = bruteforce_closure(
            [f] + basis_constant_fields(f.dim), args.inner_box, args.outer_box, args.depth
        )
        source = "bruteforce"
    else:
        table = table_from_descriptor(desc, args.inner_box)
        source = "predicted"
    report = bracket_generating_test(table, gamma)
    _emit(
        {
            "rank": report.rank,
            "needed": report.needed,
            "generating": report.generating,
            "table_source": source,
            "points": len(gamma),
        },
        args.output,
    )
    return 0


def cmd_simulate(args) -> int:
    f, _ = _load_field(args.field)
    gamma = _load_ensemble(args.ensemble)
    try:
        ctrl = tcio.control_from_dict(tcio.read_json(args.control))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read control file {args.control}: {exc}") from exc
    if f.dim != gamma.dim or ctrl.dim != f.dim:
        raise InputError("field/ensemble/control dimensions differ")
    traj = integrate_flow(f, ctrl, gamma.array(), args.dt)
    tcio.write_trajectory_csv(args.output, traj, f.dim)
    jacs = variational_jacobian(f, ctrl, gamma.array(), args.dt)
    diag = {
        "final_time": traj.times[-1],
        "volume_dets": [float(np.linalg.det(j)) for j in jacs],
        "trajectory_csv": args.output,
    }
    if len(gamma) >= 2:
        ends = traj.final()
        min_dist = min(
            torus_distance(ends[i], ends[j])
            for i in range(len(gamma))
            for j in range(i + 1, len(gamma))
        )
        pair = gamma if len(gamma) == 2 else None
        diag["min_final_separation"] = min_dist
        if pair is not None:
            diag["separation_bound"] = separation_bound(f, pair, ctrl.total_time)
    tcio.dump_json(diag, sys.stdout)
    return 0


def cmd_plan(args) -> int:
    f, _ = _load_field(args.field)
    start = _load_ensemble(args.source)
    target = _load_ensemble(args.dest)
    problem = PlanProblem(
        field=f,
        start=start,
        target=target,
        segments=args.segments,
        horizon=args.horizon,
        tolerance=args.tol,
        seed=args.seed,
    )
    result = plan_ensemble(problem)
    out = {
        "control": tcio.control_to_dict(result.control),
        "achieved_error": result.achieved_error,
        "iterations": result.iterations,
        "converged": result.converged,
        "objective": result.objective,
        "restarts_used": result.restarts_used,
        "separation_consistent": result.separation_consistent,
    }
    _emit(out, args.output)
    return 0


def cmd_bump(args) -> int:
    target = [float(x) for x in args.target.split(",")]
    center = (
        [float(x) for x in args.center.split(",")]
        if args.center
        else [np.pi] * len(target)
    )
    if len(center) != len(target):
        raise InputError("center and target dimensions differ")
    try:
        bump = bump_field(target, center, args.rin, args.rout)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    d = bump.dim
    axes = [np.linspace(0, 2 * np.pi, args.grid, endpoint=False)] * d
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    values = bump.evaluate(pts)
    divs = bump.divergence_at(pts)
    out = {
        "dim": d,
        "center": list(bump.center),
        "target": list(bump.target),
        "r_in": bump.r_in,
        "r_out": bump.r_out,
        "grid": args.grid,
        "points": pts.tolist(),
        "values": values.tolist(),
        "max_abs_divergence": float(np.max(np.abs(divs))),
        "value_at_center": bump.evaluate(np.array([bump.center]))[0].tolist(),
    }
    _emit(out, args.output)
    return 0


def cmd_separation(args) -> int:
    f, _ = _load_field(args.field)
    gamma = _load_ensemble(args.ensemble)
    if len(gamma) != 2:
        raise InputError("separation bound needs an ensemble of exactly two points")
    bound = separation_bound(f, gamma, args.horizon)
    _emit(
        {
            "bound": bound,
            "norm_bound_used": c1_norm_bound(f).bound,
            "T": args.horizon,
        },
        args.output,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toruscontrol",
        description="Exact closure analysis, simulation and ensemble planning "
        "for constant-control perturbations of divergence-free torus fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("classify", help="closure classification and class report")
    pc.add_argument("-f", "--field", required=True)
    pc.add_argument("-o", "--output")
    pc.set_defaults(func=cmd_classify)

    po = sub.add_parser("closure", help="predicted closure vs brute-force oracle")
    po.add_argument("-f", "--field", required=True)
    po.add_argument("--inner-box", type=int, default=3, dest="inner_box")
    po.add_argument("--outer-box", type=int, default=8, dest="outer_box")
    po.add_argument("--depth", type=int, default=6)
    po.add_argument("--oracle-only", action="store_true")
    po.add_argument("-o", "--output")
    po.set_defaults(func=cmd_closure)

    pe = sub.add_parser("ensemble-check", help="bracket-generating rank test")
    pe.add_argument("-f", "--field", required=True)
    pe.add_argument("-e", "--ensemble", required=True)
    pe.add_argument("--inner-box", type=int, default=3, dest="inner_box")
    pe.add_argument("--outer-box", type=int, default=8, dest="outer_box")
    pe.add_argument("--depth", type=int, default=6)
    pe.add_argument("--use-oracle", action="store_true")
    pe.add_argument("-o", "--output")
    pe.set_defaults(func=cmd_ensemble_check)

    ps = sub.add_parser("simulate", help="integrate the controlled flow")
    ps.add_argument("-f", "--field", required=True)
    ps.add_argument("-c", "--control", required=True)
    ps.add_argument("-x", "--ensemble", required=True)
    ps.add_argument("--dt", type=float, default=1e-3)
    ps.add_argument("-o", "--output", default="trajectory.csv")
    ps.set_defaults(func=cmd_simulate)

    pp = sub.add_parser("plan", help="steer an ensemble to a target")
    pp.add_argument("-f", "--field", required=True)
    pp.add_argument("--from", dest="source", required=True)
    pp.add_argument("--to", dest="dest", required=True)
    pp.add_argument("-S", "--segments", type=int, default=12)
    pp.add_argument("-T", "--horizon", type=float, default=8.0)
    pp.add_argument("--tol", type=float, default=1e-2)
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("-o", "--output")
    pp.set_defaults(func=cmd_plan)

    pb = sub.add_parser("bump", help="divergence-free bump field on a grid")
    pb.add_argument("--target", required=True, help="comma-separated vector")
    pb.add_argument("--center", help="comma-separated point (default: pi,...)")
    pb.add_argument("--rin", type=float, required=True)
    pb.add_argument("--rout", type=float, required=True)
    pb.add_argument("--grid", type=int, default=8)
    pb.add_argument("-o", "--output")
    pb.set_defaults(func=cmd_bump)

    pd = sub.add_parser("separation", help="certified pairwise separation bound")
    pd.add_argument("-f", "--field", required=True)
    pd.add_argument("-e", "--ensemble", required=True)
    pd.add_argument("-T", "--horizon", type=float, required=True)
    pd.add_argument("-o", "--output")
    pd.set_defaults(func=cmd_separation)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
