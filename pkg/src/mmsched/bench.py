"""Batch runs over data sets and models with the usual scheduling-benchmark columns.

A run is described by a JSON config::

    {
      "name": "demo",
      "datasets": {"c15": ["corpus:c15/*.mm"], "tiny": ["example1", "remark"]},
      "models": ["SEE", "OOE-A-TW", "FCT-W-TW-RC"],
      "time_limit": 60,
      "workers": 2,
      "backend": "highspy",
      "transform": {"scale": 10},
      "oracle_check": false,
      "seed": 0,
      "log": "runs.csv",
      "output": "summary.csv"
    }

Instance entries are built-in names, ``corpus:<glob>`` patterns into the
shipped corpus, or file globs relative to the config file. ``backend`` is a
backend name or ``{"command": "<template>"}``; when absent the default backend
of :func:`mmsched.solve.get_backend` is used. ``transform`` may hold
``scale`` (an integer factor for renewable data) and ``strip_renewables``.

Every finished (data set, instance, model) triple is appended to the log at
once, so an interrupted batch resumes where it stopped.
"""
from __future__ import annotations

import csv
import glob
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .core import BUILTIN_INSTANCES, Instance
from .formulations import build_model, decode, needs_mode_choice, parse_model_spec
from .io import read_instance, scale_renewables, strip_renewables
from .milp import stats
from .core import validate_schedule
from .solve import ProcessBackend, SolveRequest, get_backend, solve

LOG_FIELDS = ["dataset", "instance", "model", "options", "backend", "seed", "status",
              "objective", "bound", "makespan", "cpu", "build_time", "vars", "binaries",
              "cons", "nonzeros", "oracle", "message"]
SUMMARY_FIELDS = ["Model", "Feas", "Opt", "Best", "dz", "CPU", "Vars", "Cons",
                  "dataset", "instances", "seed", "options", "backend"]
DZ_NOTE = ("# dz: mean percentage gap to the least makespan found by any model, over "
           "instances this model solved without proving optimality; instances without "
           "a solution are excluded")


@dataclass
class BenchmarkRecord:
    dataset: str
    model: str
    feas: int
    opt: int
    best: int
    dz: float | None
    cpu: float | None
    vars: float | None
    cons: float | None
    instances: int = 0
    options: str = ""
    backend: str = ""
    seed: int = 0


@dataclass
class BenchConfig:
    name: str = "bench"
    datasets: dict | None = None
    models: tuple = ()
    time_limit: float = 300.0
    workers: int = 1
    backend: object = None
    transform: dict | None = None
    oracle_check: bool = False
    seed: int = 0
    log: str | None = None
    output: str | None = None
    base: str = "."

    @classmethod
    def load(cls, path) -> "BenchConfig":
        path = Path(path)
        data = json.loads(path.read_text())
        return cls.from_dict(data, base=str(path.parent))

    @classmethod
    def from_dict(cls, data: dict, base: str = ".") -> "BenchConfig":
        known = set(cls.__dataclass_fields__) - {"base"}
        unknown = set(data) - known - {"instances"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "instances" in data:
            data.setdefault("datasets", {})
            data["datasets"] = dict(data["datasets"], default=data.pop("instances"))
        data["models"] = tuple(data.get("models", ()))
        for spec in data["models"]:
            parse_model_spec(spec)
        return cls(base=base, **data)


def resolve_instances(entries, base=".") -> list[tuple[str, object]]:
    """Expand instance entries to ``(label, source)`` pairs in a stable order."""
    out = []
    for entry in entries:
        if entry in BUILTIN_INSTANCES:
            out.append((entry, entry))
        elif entry.startswith("corpus:"):
            root = resources.files("mmsched") / "data" / "corpus"
            hits = sorted(glob.glob(str(Path(str(root)) / entry[len("corpus:"):])))
            if not hits:
                raise FileNotFoundError(f"no corpus file matches {entry!r}")
            out += [(Path(h).stem, h) for h in hits]
        else:
            pattern = entry if os.path.isabs(entry) else os.path.join(base, entry)
            hits = sorted(glob.glob(pattern))
            if not hits:
                raise FileNotFoundError(f"no instance file matches {entry!r}")
            out += [(Path(h).stem, h) for h in hits]
    return out


def load_instance(source, transform: dict | None = None) -> Instance:
    inst = BUILTIN_INSTANCES[source]() if source in BUILTIN_INSTANCES else read_instance(source)
    transform = transform or {}
    if transform.get("scale", 1) != 1:
        inst = scale_renewables(inst, int(transform["scale"]))
    if transform.get("strip_renewables"):
        inst = strip_renewables(inst)
    return inst


def _backend_from(spec):
    if isinstance(spec, dict):
        return ProcessBackend(spec.get("command"), spec.get("format", "mps"))
    return get_backend(spec)


def run_one(dataset, label, source, model_spec, cfg: BenchConfig) -> dict:
    """Build, solve and verify one (instance, model) pair; never raises."""
    row = dict.fromkeys(LOG_FIELDS, "")
    row.update(dataset=dataset, instance=label, model=model_spec, seed=cfg.seed)
    try:
        inst = load_instance(source, cfg.transform)
        kind, opts = parse_model_spec(model_spec)
        row["options"] = opts.tag()
        t0 = time.perf_counter()
        model = build_model(kind, inst, opts)
        row["build_time"] = round(time.perf_counter() - t0, 4)
        st = stats(model)
        row.update(vars=st.variables, binaries=st.binaries, cons=st.constraints,
                   nonzeros=st.nonzeros)
        backend = _backend_from(cfg.backend)
        row["backend"] = backend.name
        out = solve(SolveRequest(model, cfg.time_limit, backend=backend))
        row.update(status=out.status, cpu=round(out.wall_time, 4), message=out.message)
        row["objective"] = "" if out.objective is None else out.objective
        row["bound"] = "" if out.bound is None else out.bound
        if out.has_solution:
            sched = decode(kind, inst, out.point, allow_mode_choice=needs_mode_choice(kind, opts))
            report = validate_schedule(inst, sched)
            if not report.feasible:
                row["status"] = "error"
                row["message"] = f"decoded schedule infeasible: {report.violations[0].check}"
            else:
                row["makespan"] = sched.makespan
        if cfg.oracle_check and inst.A <= 10:
            from .oracle import solve_exact
            res = solve_exact(inst, time_limit=cfg.time_limit)
            if res.optimal:
                row["oracle"] = res.makespan
                if row["status"] == "optimal" and row["makespan"] != res.makespan:
                    row["message"] = f"oracle mismatch: {res.makespan}"
    except Exception as exc:  # logged, the batch goes on
        row["status"] = "error"
        row["message"] = f"{type(exc).__name__}: {exc}"
    return row


def _read_log(path) -> list[dict]:
    if not path or not Path(path).exists():
        return []
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def run_benchmark(cfg: BenchConfig, progress=None) -> tuple[list[BenchmarkRecord], list[dict]]:
    """Run (or resume) a batch and aggregate it. Returns records and the per-run log."""
    jobs = []
    for dataset, entries in (cfg.datasets or {}).items():
        for label, source in resolve_instances(entries, cfg.base):
            for spec in cfg.models:
                jobs.append((dataset, label, source, spec))
    log_rows = _read_log(cfg.log)
    done = {(r["dataset"], r["instance"], r["model"]) for r in log_rows}
    todo = [j for j in jobs if (j[0], j[1], j[3]) not in done]

    writer = fh = None
    if cfg.log:
        new = not Path(cfg.log).exists() or Path(cfg.log).stat().st_size == 0
        fh = open(cfg.log, "a", newline="")
        writer = csv.DictWriter(fh, LOG_FIELDS)
        if new:
            writer.writeheader()

    def record(row):
        log_rows.append({k: str(v) for k, v in row.items()})
        if writer:
            writer.writerow(row)
            fh.flush()
        if progress:
            progress(row)

    try:
        if cfg.workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                futures = [pool.submit(run_one, *job, cfg) for job in todo]
                for fut in futures:
                    record(fut.result())
        else:
            for job in todo:
                record(run_one(*job, cfg))
    finally:
        if fh:
            fh.close()
    wanted = {(j[0], j[1], j[3]) for j in jobs}
    rows = [r for r in log_rows if (r["dataset"], r["instance"], r["model"]) in wanted]
    return aggregate(rows, cfg), rows


def _num(x):
    if x in ("", None):
        return None
    f = float(x)
    return int(f) if f.is_integer() else f


def aggregate(rows: list[dict], cfg: BenchConfig | None = None) -> list[BenchmarkRecord]:
    """Per data set and model: Feas/Opt/Best counts, mean dz, CPU, Vars, Cons.

    Records are ranked by Feas, then Opt, then Best, all descending.
    """
    by_instance: dict = {}
    for r in rows:
        z = _num(r["makespan"])
        if z is not None:
            key = (r["dataset"], r["instance"])
            by_instance[key] = min(z, by_instance.get(key, z))
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["dataset"], r["model"]), []).append(r)
    records = []
    for (dataset, model), rs in groups.items():
        feas = opt = best = 0
        dz = []
        for r in rs:
            z = _num(r["makespan"])
            if z is None:
                continue
            feas += 1
            zbest = by_instance[(dataset, r["instance"])]
            if r["status"] == "optimal":
                opt += 1
            elif zbest > 0:
                dz.append(100.0 * (z - zbest) / zbest)
            if z == zbest:
                best += 1

        def mean(field):
            vals = [_num(r[field]) for r in rs if _num(r[field]) is not None]
            return sum(vals) / len(vals) if vals else None
        records.append(BenchmarkRecord(
            dataset, model, feas, opt, best, sum(dz) / len(dz) if dz else None,
            mean("cpu"), mean("vars"), mean("cons"), len(rs),
            rs[0].get("options", ""), rs[0].get("backend", ""),
            int(rs[0].get("seed") or 0)))
    records.sort(key=lambda rec: (rec.dataset, -rec.feas, -rec.opt, -rec.best, rec.model))
    return records


def write_summary(records: list[BenchmarkRecord], path_or_file) -> None:
    def fmt(x, digits=2):
        return "" if x is None else f"{x:.{digits}f}"
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        fh.write(DZ_NOTE + "\n")
        w = csv.writer(fh)
        w.writerow(SUMMARY_FIELDS)
        for r in records:
            w.writerow([r.model, r.feas, r.opt, r.best, fmt(r.dz), fmt(r.cpu, 3),
                        fmt(r.vars, 1), fmt(r.cons, 1), r.dataset, r.instances, r.seed,
                        r.options, r.backend])
    finally:
        if own:
            fh.close()


def records_as_dicts(records) -> list[dict]:
    return [asdict(r) for r in records]
