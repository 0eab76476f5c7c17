"""Solver backends and the verified ``solve`` entry point.

Backends:

``highspy``  in-process HiGHS through the optional ``highspy`` package
``scipy``    in-process HiGHS through :func:`scipy.optimize.milp`
``process``  any external program driven by a command template
``highs``    the process backend running the bundled highspy shim

The command template may use ``{model}``, ``{solution}``, ``{time_limit}``
and ``{presolve}`` (``on`` or ``off``, see ``presolve_setting``)
placeholders and is read from ``MMSCHED_SOLVER_CMD`` when not given. The
program must write the neutral solution file::

    #status optimal|feasible|infeasible|unknown|error
    #objective <value>
    #bound <value>
    <variable name> <value>
    ...

Every point a backend reports is polished (binaries rounded, continuous part
re-solved) and re-checked with :func:`mmsched.milp.eval_point` before it is
returned.
"""
from __future__ import annotations

import math
import os
import re
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csr_matrix

from .milp import BINARY, MilpModel, eval_point, export_names, relax, write_lp, write_mps

STATUSES = ("optimal", "feasible", "infeasible", "unknown", "error")
ENV_COMMAND = "MMSCHED_SOLVER_CMD"
DEFAULT_COMMAND = f"{shlex.quote(sys.executable)} -m mmsched.backends.highs_shim " \
                  "{model} {solution} --time-limit {time_limit} --presolve {presolve}"
GAP_TOL = 1e-6


class BackendError(RuntimeError):
    """The solver process failed or could not be started."""


class SolutionParseError(BackendError):
    """The neutral solution file is missing or malformed."""


@dataclass
class RawResult:
    status: str
    objective: float | None = None
    bound: float | None = None
    values: dict | None = None  # variable name -> value
    message: str = ""


@dataclass
class SolveRequest:
    model: MilpModel
    time_limit: float = 300.0
    relaxation: bool = False
    backend: object = None
    tol: float = 1e-6
    gap: float = GAP_TOL
    workdir: str | None = None
    polish: bool = True

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time limit must be positive")


@dataclass
class SolveOutcome:
    status: str
    objective: float | None
    bound: float | None
    point: dict | None
    wall_time: float
    backend: str = ""
    message: str = ""
    violations: list = field(default_factory=list)

    @property
    def has_solution(self) -> bool:
        return self.status in ("optimal", "feasible")


# -- in-process backend -------------------------------------------------------

def model_arrays(model: MilpModel):
    """Dense bounds and a CSR row matrix: ``c, lb, ub, is_int, A, lo, hi``."""
    n = len(model.variables)
    c = np.zeros(n)
    for idx, coef in model.objective.items():
        c[idx] = float(coef)
    lb = np.array([float(v.lb) for v in model.variables])
    ub = np.array([float(v.ub) for v in model.variables])
    is_int = np.array([v.kind == BINARY for v in model.variables], dtype=bool)
    rows, cols, data, lo, hi = [], [], [], [], []
    for r, con in enumerate(model.constraints):
        for idx, coef in con.coeffs.items():
            rows.append(r)
            cols.append(idx)
            data.append(float(coef))
        rhs = float(con.rhs)
        lo.append(rhs if con.sense in (">=", "=") else -np.inf)
        hi.append(rhs if con.sense in ("<=", "=") else np.inf)
    A = csr_matrix((data, (rows, cols)), shape=(len(model.constraints), n))
    return c, lb, ub, is_int, A, np.array(lo), np.array(hi)


def presolve_setting(model: MilpModel, override: bool | None = None) -> bool:
    """Whether to run MIP presolve on ``model``.

    An explicit ``override`` wins. Otherwise the model's ``meta["presolve"]``
    hint decides, and presolve is on when there is none. The flow builders
    turn it off: HiGHS presolve (scipy's bundled build and highspy alike)
    has returned wrong "optimal" makespans on them.
    """
    if override is not None:
        return override
    return bool(model.meta.get("presolve", True))


class ScipyBackend:
    """HiGHS via :func:`scipy.optimize.milp`.

    ``presolve=None`` follows the model's hint (:func:`presolve_setting`).
    """

    name = "scipy"

    def __init__(self, presolve: bool | None = None):
        self.presolve = presolve

    def run(self, model: MilpModel, time_limit: float, workdir=None, gap=GAP_TOL) -> RawResult:
        c, lb, ub, is_int, A, lo, hi = model_arrays(model)
        constraints = [LinearConstraint(A, lo, hi)] if A.shape[0] else []
        options = {"time_limit": float(time_limit), "mip_rel_gap": gap, "disp": False,
                   "presolve": presolve_setting(model, self.presolve)}
        res = milp(c, integrality=is_int.astype(int), bounds=Bounds(lb, ub),
                   constraints=constraints, options=options)
        values = None
        if res.x is not None:
            values = {v.name: float(x) for v, x in zip(model.variables, res.x)}
        bound = getattr(res, "mip_dual_bound", None)
        if res.status == 0:
            status = "optimal"
            if bound is None or (isinstance(bound, float) and math.isnan(bound)):
                bound = res.fun
        elif res.status == 1:
            status = "feasible" if values is not None else "unknown"
        elif res.status == 2:
            status = "infeasible"
        else:
            status = "error"
        return RawResult(status, None if res.fun is None else float(res.fun),
                         None if bound is None else float(bound), values, res.message)


def polish(model: MilpModel, values: dict, tol: float = 1e-5) -> dict | None:
    """Snap near-integral binaries and re-solve the continuous part as an LP.

    MIP solvers accept binaries within about 1e-6 of an integer, which with
    big-M rows leaves the continuous values slightly off. Fixing the rounded
    binaries and re-solving gives a clean vertex. Returns None when a binary is
    not within ``tol`` of an integer or the rounded binaries admit no point.
    """
    c, lb, ub, is_int, A, lo, hi = model_arrays(model)
    x = np.array([values[v.name] for v in model.variables])
    snapped = np.round(x[is_int])
    if np.any(np.abs(x[is_int] - snapped) > tol):
        return None
    lb[is_int] = ub[is_int] = snapped
    constraints = [LinearConstraint(A, lo, hi)] if A.shape[0] else []
    res = milp(c, bounds=Bounds(lb, ub), constraints=constraints,
               options={"presolve": False, "disp": False})
    if res.status != 0:
        return None
    out = {v.name: float(val) for v, val in zip(model.variables, res.x)}
    for v in model.variables:
        if v.kind == BINARY:
            out[v.name] = int(round(out[v.name]))
    return out


# -- external process backend -------------------------------------------------

def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "model"


def read_solution(text: str) -> RawResult:
    """Parse the neutral solution format."""
    status, objective, bound, values = None, None, None, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "#status":
                status = parts[1]
            elif parts[0] == "#objective":
                objective = None if parts[1] == "none" else float(parts[1])
            elif parts[0] == "#bound":
                bound = None if parts[1] == "none" else float(parts[1])
            elif parts[0].startswith("#"):
                continue
            elif len(parts) == 2:
                values[parts[0]] = float(parts[1])
            else:
                raise ValueError
        except (IndexError, ValueError):
            raise SolutionParseError(f"line {lineno}: cannot parse {raw!r}") from None
    if status not in STATUSES:
        raise SolutionParseError(f"missing or unknown #status ({status!r})")
    return RawResult(status, objective, bound, values or None)


def write_solution(path, status, objective=None, bound=None, values=()) -> None:
    def num(x):
        return "none" if x is None else repr(float(x))
    lines = [f"#status {status}", f"#objective {num(objective)}", f"#bound {num(bound)}"]
    lines += [f"{name} {float(v)!r}" for name, v in values]
    Path(path).write_text("\n".join(lines) + "\n")


class ProcessBackend:
    """Runs an external solver on an exported model file."""

    name = "process"

    def __init__(self, command: str | None = None, fmt: str = "mps"):
        self.command = command or os.environ.get(ENV_COMMAND) or DEFAULT_COMMAND
        if fmt not in ("mps", "lp"):
            raise ValueError("model format must be mps or lp")
        self.fmt = fmt

    def run(self, model: MilpModel, time_limit: float, workdir=None, gap=GAP_TOL) -> RawResult:
        own = workdir is None
        tmp = tempfile.TemporaryDirectory(prefix="mmsched-") if own else None
        folder = Path(tmp.name if own else workdir)
        folder.mkdir(parents=True, exist_ok=True)
        try:
            stem = _safe(model.name)
            model_path = folder / f"{stem}.{self.fmt}"
            sol_path = folder / f"{stem}.sol"
            if sol_path.exists():
                sol_path.unlink()
            model_path.write_text(write_mps(model) if self.fmt == "mps" else write_lp(model))
            cmd = self.command.format(model=shlex.quote(str(model_path)),
                                      solution=shlex.quote(str(sol_path)),
                                      time_limit=f"{time_limit:g}",
                                      presolve="on" if presolve_setting(model) else "off")
            try:
                proc = subprocess.run(cmd, shell=True, capture_output=True, text=True,
                                      timeout=time_limit + 60)
            except subprocess.TimeoutExpired:
                return RawResult("unknown", message="solver process exceeded its time limit")
            if proc.returncode != 0:
                raise BackendError(f"solver exited with {proc.returncode}: "
                                   f"{proc.stderr.strip()[-500:]}")
            if not sol_path.exists():
                raise SolutionParseError("solver wrote no solution file")
            raw = read_solution(sol_path.read_text())
            if raw.values is not None:
                cols, _ = export_names(model)
                back = dict(zip(cols, (v.name for v in model.variables)))
                raw.values = {back.get(k, k): v for k, v in raw.values.items()}
            return raw
        finally:
            if tmp is not None:
                tmp.cleanup()


def _highspy():
    from .backends.highspy_backend import HighspyBackend
    return HighspyBackend()


BACKENDS = {"scipy": ScipyBackend, "process": ProcessBackend, "highspy": _highspy}


def _has_highspy() -> bool:
    try:
        import highspy  # noqa: F401
    except ImportError:
        return False
    return True


def get_backend(spec=None, command: str | None = None):
    """Backend by name.

    ``None`` picks ``process`` when a command is given or named in the
    environment, else ``highspy`` when it is installed, else ``scipy``.
    """
    if spec is not None and not isinstance(spec, str):
        return spec
    if spec is None:
        if command or os.environ.get(ENV_COMMAND):
            spec = "process"
        else:
            spec = "highspy" if _has_highspy() else "scipy"
    if spec == "process":
        return ProcessBackend(command)
    if spec == "highs":
        return ProcessBackend(DEFAULT_COMMAND if command is None else command)
    try:
        return BACKENDS[spec]()
    except KeyError:
        raise ValueError(f"unknown backend {spec!r}; "
                         "choose from scipy, highspy, process, highs") from None


def solve(request: SolveRequest) -> SolveOutcome:
    """Solve, then verify the returned point against the model itself."""
    backend = get_backend(request.backend)
    model = relax(request.model) if request.relaxation else request.model
    t0 = time.perf_counter()
    try:
        raw = backend.run(model, request.time_limit, request.workdir, request.gap)
    except SolutionParseError as exc:
        return SolveOutcome("error", None, None, None, time.perf_counter() - t0,
                            backend.name, f"unparseable solution: {exc}")
    except BackendError as exc:
        return SolveOutcome("error", None, None, None, time.perf_counter() - t0,
                            backend.name, f"process failure: {exc}")
    wall = time.perf_counter() - t0
    out = SolveOutcome(raw.status, raw.objective, raw.bound, None, wall, backend.name,
                       raw.message)
    if raw.status not in ("optimal", "feasible"):
        return out
    if raw.values is None:
        out.status = "error"
        out.message = "solver reported a solution but returned no values"
        return out
    missing = [v.name for v in model.variables if v.name not in raw.values]
    if missing:
        out.status = "error"
        out.message = f"verification failed: {len(missing)} variables missing ({missing[0]})"
        return out
    point = raw.values
    if request.polish and not request.relaxation and any(v.kind == BINARY
                                                         for v in model.variables):
        point = polish(model, point) or point
    report = eval_point(model, point, tol=request.tol,
                        check_integrality=not request.relaxation)
    out.point = point
    out.objective = float(report.objective)
    if not report.feasible:
        out.status = "error"
        out.violations = report.violations
        out.message = f"verification failed: {len(report.violations)} violations " \
                      f"(first {report.violations[0].name})"
        return out
    if out.status == "optimal" and out.bound is not None:
        if abs(out.objective - out.bound) > request.gap * max(1.0, abs(out.objective)) + request.tol:
            out.status = "feasible"
    return out
