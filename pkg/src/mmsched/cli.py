"""Command-line entry point ``mmsched``.

Exit codes: 0 success, 1 runtime error, 2 usage error, 3 infeasible (instance,
model or schedule), 4 no answer within the given limits.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import io as mmio
from .core import BUILTIN_INSTANCES, ScheduleStructureError, validate_schedule
from .formulations import (FormulationOptions, OptionError, build_model, certificate_points,
                           complete, decode, model_label, needs_mode_choice)
from .milp import eval_point, stats, write_lp, write_mps
from .preprocess import resource_strength

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_UNKNOWN = 0, 1, 2, 3, 4
MC_CHOICES = {"none": "none", "full": "full", "agg": "aggregate", "aggregate": "aggregate"}


class CliError(Exception):
    def __init__(self, message, code=EXIT_ERROR):
        super().__init__(message)
        self.code = code


def load(ref: str):
    """Instance from a built-in name or a file path."""
    if ref in BUILTIN_INSTANCES:
        return BUILTIN_INSTANCES[ref]()
    if not Path(ref).exists():
        raise CliError(f"no such instance file or built-in name: {ref}", EXIT_USAGE)
    return mmio.read_instance(ref)


def emit(rows, fmt: str, out=None):
    """Print a list of flat dicts as text, CSV or JSON lines."""
    out = out or sys.stdout
    if fmt == "json":
        for row in rows:
            out.write(json.dumps(row, default=str) + "\n")
    elif fmt == "csv":
        if rows:
            w = csv.DictWriter(out, list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    else:
        for row in rows:
            out.write("  ".join(f"{k}={v}" for k, v in row.items()) + "\n")


def _model_opts(args) -> tuple[str, FormulationOptions]:
    kind = args.model
    mc = MC_CHOICES[args.mc] if args.mc else None
    if kind == "see-a" and mc not in (None, "aggregate"):
        raise CliError("see-a implies --mc agg", EXIT_USAGE)
    opts = FormulationOptions(
        mode_consistency=mc, time_windows=args.tw, variable_fixing=args.vf,
        incompatible_pairs=args.rc, strong_event_time=args.strong_event_time,
        fct_linearization="auxiliary" if args.aux else "triple",
        experimental=args.experimental)
    if args.rc and not kind.startswith("fct"):
        raise CliError("--rc applies to the flow models only", EXIT_USAGE)
    if args.vf and kind.startswith("fct"):
        raise CliError("--vf applies to the event models only", EXIT_USAGE)
    return kind, opts


def _add_model_flags(p):
    p.add_argument("--model", required=True,
                   choices=["see", "see-a", "rsee", "ooe", "ooe-a", "fct-w", "fct-s"])
    p.add_argument("--mc", choices=sorted(MC_CHOICES), help="mode consistency rows")
    p.add_argument("--tw", action="store_true", help="time-window constraints")
    p.add_argument("--vf", action="store_true", help="variable fixing (event models)")
    p.add_argument("--rc", action="store_true", help="incompatible-pair rows (fct-w)")
    p.add_argument("--strong-event-time", action="store_true",
                   help="add the three-event duration rows (ooe, ooe-a)")
    p.add_argument("--aux", action="store_true",
                   help="fct-s: product-variable linearization of the flow bounds")
    p.add_argument("--experimental", action="store_true",
                   help="allow enhancements on rsee")
    p.add_argument("instance")


def cmd_parse(args):
    inst = load(args.file)
    row = {"name": inst.name or args.file, "A": inst.A,
           "modes": "/".join(str(c) for c in sorted(set(inst.mode_counts()))),
           "R": inst.R, "N": inst.N, "precedences": len(inst.precedence)}
    for k in range(1, inst.R + 1):
        rs = resource_strength(inst, k)
        row[f"RS{k}"] = "undefined" if rs is None else str(rs)
    if args.format == "text":
        print(f"{row['name']} & {inst.A} & {row['modes']} & {inst.R} & {inst.N}")
    emit([row], args.format)
    return EXIT_OK


def cmd_derive(args):
    inst = load(args.file)
    if args.scale is not None:
        inst = mmio.scale_renewables(inst, args.scale)
    if args.strip_renewables:
        inst = mmio.strip_renewables(inst)
    text = mmio.write_psplib_mm(inst) if args.to == "psplib" else mmio.write_canonical(inst)
    _write(text, args.output)
    return EXIT_OK


def _write(text, path):
    if path and path != "-":
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_build(args):
    inst = load(args.instance)
    kind, opts = _model_opts(args)
    model = build_model(kind, inst, opts)
    if args.stats:
        st = stats(model)
        emit([{"model": model_label(kind, opts), "vars": st.variables, "binaries": st.binaries,
               "cons": st.constraints, "nonzeros": st.nonzeros}], args.format)
        return EXIT_OK
    if args.lp:
        text = write_lp(model)
    else:
        text = write_mps(model, fixed=args.fixed)
    _write(text, args.output)
    return EXIT_OK


def cmd_solve(args):
    from .solve import SolveRequest, get_backend, solve
    inst = load(args.instance)
    kind, opts = _model_opts(args)
    model = build_model(kind, inst, opts)
    backend = get_backend(args.backend, args.command)
    out = solve(SolveRequest(model, args.time_limit, relaxation=args.relax, backend=backend))
    row = {"instance": inst.name or args.instance, "model": model_label(kind, opts),
           "relaxation": args.relax, "status": out.status, "objective": out.objective,
           "bound": out.bound, "makespan": "", "wall_time": round(out.wall_time, 4),
           "backend": out.backend, "message": out.message}
    if out.has_solution and not args.relax:
        sched = decode(kind, inst, out.point, allow_mode_choice=needs_mode_choice(kind, opts))
        row["makespan"] = sched.makespan
        if args.schedule_out:
            Path(args.schedule_out).write_text(mmio.write_schedule(sched))
    emit([row], args.format)
    return {"optimal": EXIT_OK, "feasible": EXIT_OK, "infeasible": EXIT_INFEASIBLE,
            "unknown": EXIT_UNKNOWN}.get(out.status, EXIT_ERROR)


def cmd_validate(args):
    inst = load(args.instance)
    sched = mmio.parse_schedule(Path(args.schedule).read_text(), inst)
    try:
        report = validate_schedule(inst, sched, tol=args.tol)
    except ScheduleStructureError as exc:
        raise CliError(f"malformed schedule: {exc}") from None
    rows = [{"check": c, "ok": ok} for c, ok in report.checks.items()]
    rows += [{"check": v.check, "ok": False, "indices": v.indices, "amount": v.amount,
              "detail": v.detail} for v in report.violations]
    if args.format == "text":
        print(f"feasible={report.feasible} makespan={sched.makespan} tol={report.tol}")
        for v in report.violations:
            print(f"  {v.check} {v.indices} excess={v.amount} {v.detail}")
    else:
        emit(rows, args.format)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_oracle(args):
    from .oracle import solve_exact
    inst = load(args.instance)
    res = solve_exact(inst, node_limit=args.node_limit, time_limit=args.time_limit,
                      force=args.force)
    if args.format == "text":
        if res.optimal:
            print(res.makespan)
            sys.stdout.write(mmio.write_schedule(res.schedule))
        else:
            print(res.status)
    else:
        rows = [{"status": res.status, "makespan": res.makespan, "nodes": res.nodes,
                 "wall_time": round(res.wall_time, 4)}]
        if res.optimal:
            rows[0]["start"] = list(res.schedule.start)
            rows[0]["mode"] = list(res.schedule.mode)
        emit(rows, args.format)
    return {"optimal": EXIT_OK, "infeasible": EXIT_INFEASIBLE}.get(res.status, EXIT_UNKNOWN)


def cmd_bench(args):
    from .bench import BenchConfig, records_as_dicts, run_benchmark, write_summary
    cfg = BenchConfig.load(args.config)
    if args.time_limit:
        cfg.time_limit = args.time_limit
    if args.workers:
        cfg.workers = args.workers

    def progress(row):
        if args.verbose:
            print(f"{row['dataset']} {row['instance']} {row['model']} {row['status']} "
                  f"{row['makespan']}", file=sys.stderr)
    records, _ = run_benchmark(cfg, progress)
    target = args.output or cfg.output
    if args.format == "json":
        emit(records_as_dicts(records), "json")
    elif target:
        write_summary(records, target)
    else:
        write_summary(records, sys.stdout)
    return EXIT_OK


def cmd_counterexample(args):
    from .core import example1_instance, remark_instance
    from .solve import SolveRequest, get_backend, solve
    backend = get_backend(args.backend, args.command)
    rows = []
    for label, inst in (("example1", example1_instance()), ("remark", remark_instance())):
        res = {}
        for mc in ("none", "full"):
            model = build_model("see", inst, FormulationOptions(mode_consistency=mc))
            out = solve(SolveRequest(model, args.time_limit, backend=backend))
            if out.status != "optimal":
                raise CliError(f"{label}: solver status {out.status} ({out.message})")
            res[mc] = round(out.objective)
            valid = "valid"
            if mc == "none":
                try:
                    decode("see", inst, out.point)
                except ValueError:
                    valid = "INVALID"
            res[mc + "_valid"] = valid
        rows.append({"instance": label, "see_without_mc": res["none"],
                     "see_with_mc": res["full"], "without_mc_schedule": res["none_valid"]})
        if args.format == "text":
            print(f"{label}: SEE without MC: makespan {res['none']} "
                  f"({res['none_valid']}); SEE with MC: makespan {res['full']}")
    inst = example1_instance()
    cert = certificate_points()
    plain = build_model("see", inst, FormulationOptions(mode_consistency="none"))
    guarded = build_model("see", inst, FormulationOptions(mode_consistency="full"))
    for name in ("solution_a", "solution_b"):
        r0 = eval_point(plain, complete(plain, cert[name]))
        r1 = eval_point(guarded, complete(guarded, cert[name]))
        row = {"certificate": name, "objective": r0.objective,
               "feasible_without_mc": r0.feasible, "feasible_with_mc": r1.feasible,
               "violated_with_mc": ",".join(r1.violated())}
        rows.append(row)
        if args.format == "text":
            tail = f"violates {row['violated_with_mc']}" if not r1.feasible else "feasible"
            print(f"{name}: objective {r0.objective}, feasible without MC: {r0.feasible}; "
                  f"with MC: {tail}")
    if args.format != "text":
        emit(rows, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmsched", description=__doc__.splitlines()[0])
    ap.add_argument("--format", choices=["text", "csv", "json"], default="text",
                    help="output mode; json prints one JSON object per line")
    sub = ap.add_subparsers(dest="command_name", required=True)

    p = sub.add_parser("parse", help="summarise an instance")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("derive", help="write a scaled or renewable-free variant")
    p.add_argument("--scale", type=int, metavar="DELTA")
    p.add_argument("--strip-renewables", action="store_true")
    p.add_argument("--to", choices=["canonical", "psplib"], default="canonical")
    p.add_argument("-o", "--output")
    p.add_argument("file")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("build", help="export a model as MPS or LP")
    _add_model_flags(p)
    p.add_argument("--lp", action="store_true", help="CPLEX LP instead of MPS")
    p.add_argument("--fixed", action="store_true", help="fixed-format MPS (8-char names)")
    p.add_argument("--stats", action="store_true", help="print size statistics only")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="solve a model and report the outcome")
    _add_model_flags(p)
    _add_backend_flags(p)
    p.add_argument("--relax", action="store_true", help="solve the LP relaxation")
    p.add_argument("--schedule-out", help="write the decoded schedule here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a schedule file against an instance")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("instance")
    p.add_argument("schedule")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="exact minimum makespan for tiny instances")
    p.add_argument("--node-limit", type=int, default=10_000_000)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--force", action="store_true")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run a benchmark config and print the summary CSV")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("-o", "--output")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("config")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("counterexample", help="reproduce the mode-consistency counterexample")
    _add_backend_flags(p)
    p.set_defaults(func=cmd_counterexample)
    return ap


def _add_backend_flags(p):
    p.add_argument("--backend", choices=["scipy", "highspy", "process", "highs"],
                   help="default: process if MMSCHED_SOLVER_CMD is set, else highspy "
                        "when installed, else scipy")
    p.add_argument("--command", help="command template for the process backend")
    p.add_argument("--time-limit", type=float, default=300.0)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mmsched: {exc}", file=sys.stderr)
        return exc.code
    except (OptionError, mmio.ParseError) as exc:
        print(f"mmsched: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, OptionError) else EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"mmsched: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
