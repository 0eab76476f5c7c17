"""A small solver-agnostic MILP representation.

Variables are addressed by a *key*, a tuple such as ``("x", i, m, e)``; the
exported name is the key joined by underscores (``x_1_2_0``). Coefficients,
bounds and right-hand sides are kept as ints or Fractions.
"""
from __future__ import annotations

import copy
import gc
import hashlib
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from operator import mul
from typing import Iterable, Mapping

INF = math.inf
BINARY = "B"
CONTINUOUS = "C"
SENSES = ("<=", "=", ">=")


class ModelError(ValueError):
    pass


class MissingAssignmentError(KeyError):
    pass


def key_name(key) -> str:
    if isinstance(key, str):
        return key
    return "_".join(map(str, key))


def _norm(x):
    if type(x) is int:
        return x
    if isinstance(x, float):
        if math.isinf(x):
            return x
        frac = Fraction(x)
    elif isinstance(x, Fraction):
        frac = x
    else:
        return int(x)
    return frac.numerator if frac.denominator == 1 else frac


@contextmanager
def paused_gc():
    """Suspend the cyclic garbage collector while building a large model.

    Rows are plain dicts and tuples without reference cycles, but their
    sheer number triggers repeated full collections.
    """
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


@dataclass
class Variable:
    key: tuple
    name: str
    kind: str
    lb: object
    ub: object
    index: int

    @property
    def fixed(self) -> bool:
        return self.lb == self.ub


class Constraint:
    """One row; the name is derived from ``key`` on demand."""

    __slots__ = ("key", "family", "coeffs", "sense", "rhs")

    def __init__(self, key: tuple, family: str, coeffs: dict, sense: str, rhs):
        self.key = key
        self.family = family
        self.coeffs = coeffs  # variable index -> coefficient
        self.sense = sense
        self.rhs = rhs

    @property
    def name(self) -> str:
        return key_name(self.key)

    def __repr__(self):
        return f"Constraint({self.name!r}, {self.coeffs!r}, {self.sense!r}, {self.rhs!r})"


@dataclass
class ModelStats:
    variables: int
    binaries: int
    constraints: int
    nonzeros: int


class MilpModel:
    """Minimisation model: variables, linear rows and a linear objective."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, object] = {}
        self._by_key: dict = {}
        self._index: dict = {}  # key -> variable index
        self._by_name: dict = {}
        self._rows: set = set()
        self.meta: dict = {}

    # construction
    def add_var(self, key, kind=CONTINUOUS, lb=0, ub=INF) -> Variable:
        key = tuple(key) if not isinstance(key, str) else (key,)
        if key in self._by_key:
            raise ModelError(f"duplicate variable {key}")
        if kind not in (BINARY, CONTINUOUS):
            raise ModelError(f"unknown variable kind {kind!r}")
        lb, ub = _norm(lb), _norm(ub)
        if lb > ub:
            raise ModelError(f"empty domain for {key}: [{lb}, {ub}]")
        name = key_name(key)
        if name in self._by_name:
            raise ModelError(f"name clash on {name!r}")
        var = Variable(key, name, kind, lb, ub, len(self.variables))
        self.variables.append(var)
        self._by_key[key] = var
        self._index[key] = var.index
        self._by_name[name] = var
        return var

    def var(self, key) -> Variable:
        key = tuple(key) if not isinstance(key, str) else (key,)
        return self._by_key[key]

    def column(self, key) -> int:
        """Column index of a variable."""
        return self.var(key).index

    def _resolve(self, vkey, row):
        try:
            return self.var(vkey).index
        except (KeyError, TypeError):
            raise ModelError(f"constraint {key_name(row)} references undeclared {vkey}") from None

    def has(self, key) -> bool:
        key = tuple(key) if not isinstance(key, str) else (key,)
        return key in self._by_key

    def by_name(self, name: str) -> Variable:
        return self._by_name[name]

    def fix(self, key, value):
        var = self.var(key)
        value = _norm(value)
        if not var.lb <= value <= var.ub:
            raise ModelError(f"cannot fix {var.name} to {value} outside [{var.lb}, {var.ub}]")
        var.lb = var.ub = value

    def add_constr(self, family: str, index: tuple, terms: Iterable, sense: str, rhs=0):
        """Add ``sum(coef * var) <sense> rhs``.

        ``terms`` yields ``(key, coef)`` pairs; repeated keys are summed and zero
        coefficients dropped. A plain ``int`` in place of a key is taken as a
        column index, as returned by ``column``.
        """
        if sense not in SENSES:
            raise ModelError(f"bad sense {sense!r}")
        key = (family, *index)
        rows = self._rows
        if key in rows:
            raise ModelError(f"duplicate constraint {key_name(key)}")
        coeffs: dict[int, object] = {}
        index_of = self._index
        clean = True  # every coefficient a nonzero int
        for vkey, coef in terms:
            if not coef:
                continue
            idx = vkey if type(vkey) is int else index_of.get(vkey)
            if idx is None:
                idx = self._resolve(vkey, key)
            if idx in coeffs:
                coeffs[idx] += coef
                clean = False
            else:
                coeffs[idx] = coef
                if type(coef) is not int:
                    clean = False
        if not clean:
            coeffs = {i: c if type(c) is int else _norm(c) for i, c in coeffs.items() if c}
        if coeffs and (min(coeffs) < 0 or max(coeffs) >= len(self.variables)):
            raise ModelError(f"constraint {key_name(key)} references a column out of range")
        rows.add(key)
        con = Constraint(key, family, coeffs, sense, rhs if type(rhs) is int else _norm(rhs))
        self.constraints.append(con)
        return con

    def set_objective(self, terms: Iterable):
        self.objective = {}
        for key, coef in terms:
            idx = self.var(key).index
            self.objective[idx] = _norm(self.objective.get(idx, 0) + coef)

    def constraint(self, name: str) -> Constraint:
        for con in self.constraints:
            if con.name == name:
                return con
        raise KeyError(name)

    def families(self) -> dict:
        out: dict[str, int] = {}
        for con in self.constraints:
            out[con.family] = out.get(con.family, 0) + 1
        return out

    def point(self, values: Mapping, default=None) -> dict:
        """Turn a ``key -> value`` mapping into a full ``name -> value`` point."""
        named = {key_name(tuple(k) if not isinstance(k, str) else (k,)): v
                 for k, v in values.items()}
        out = {}
        for var in self.variables:
            if var.name in named:
                out[var.name] = named[var.name]
            elif default is not None:
                out[var.name] = default
        unknown = set(named) - set(out)
        if unknown:
            raise MissingAssignmentError(f"point names unknown variables: {sorted(unknown)[:5]}")
        return out

    def copy(self, share_rows: bool = False) -> "MilpModel":
        """Independent copy; ``share_rows`` reuses the (unmodified) constraint objects."""
        out = MilpModel(self.name)
        out.variables = [Variable(v.key, v.name, v.kind, v.lb, v.ub, v.index)
                         for v in self.variables]
        if share_rows:
            out.constraints = list(self.constraints)
        else:
            out.constraints = [Constraint(c.key, c.family, dict(c.coeffs), c.sense, c.rhs)
                               for c in self.constraints]
        out.objective = dict(self.objective)
        out._by_key = {v.key: v for v in out.variables}
        out._index = dict(self._index)
        out._by_name = {v.name: v for v in out.variables}
        out._rows = set(self._rows)
        out.meta = copy.deepcopy(self.meta)
        return out


def relax(model: MilpModel) -> MilpModel:
    """LP relaxation: binaries become continuous in [0, 1] (fixings kept)."""
    with paused_gc():
        out = model.copy(share_rows=True)
    out.name = model.name if model.name.endswith("-lp") else model.name + "-lp"
    for var in out.variables:
        if var.kind == BINARY:
            var.kind = CONTINUOUS
            var.lb, var.ub = max(var.lb, 0), min(var.ub, 1)
    return out


def stats(model: MilpModel) -> ModelStats:
    return ModelStats(
        variables=len(model.variables),
        binaries=sum(1 for v in model.variables if v.kind == BINARY),
        constraints=len(model.constraints),
        nonzeros=sum(len(c.coeffs) for c in model.constraints),
    )


@dataclass
class PointViolation:
    name: str
    kind: str  # "bound", "row" or "integrality"
    amount: object


@dataclass
class PointReport:
    objective: object
    violations: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def violated(self, prefix: str = "") -> list[str]:
        return [v.name for v in self.violations if v.name.startswith(prefix)]


def eval_point(model: MilpModel, point: Mapping, tol=1e-6,
               check_integrality: bool = False) -> PointReport:
    """Evaluate bounds and rows at ``point`` (a ``name -> value`` mapping).

    Exact (``int``/``Fraction``) points are evaluated exactly. Integrality is
    only checked on request so relaxed points can be tested against the
    unrelaxed model's rows.
    """
    values = []
    for var in model.variables:
        try:
            values.append(point[var.name])
        except KeyError:
            raise MissingAssignmentError(f"no value for variable {var.name}") from None
    report = PointReport(objective=sum(c * values[i] for i, c in model.objective.items()))
    scale = _common_denominator(values)
    for var, val in zip(model.variables, values):
        if val < var.lb - tol:
            report.violations.append(PointViolation(var.name, "bound", var.lb - val))
        elif val > var.ub + tol:
            report.violations.append(PointViolation(var.name, "bound", val - var.ub))
        if check_integrality and var.kind == BINARY and abs(val - round(val)) > tol:
            report.violations.append(PointViolation(var.name, "integrality",
                                                    abs(val - round(val))))
    if scale is not None:
        # rational point: integer arithmetic on values scaled by a common denominator
        values = [v * scale for v in values]
        values = [v.numerator if isinstance(v, Fraction) else v for v in values]
    else:
        scale = 1
    at = values.__getitem__
    for con in model.constraints:
        lhs = sum(map(mul, con.coeffs.values(), map(at, con.coeffs)))
        rhs = con.rhs * scale
        if con.sense == "<=":
            excess = lhs - rhs
        elif con.sense == ">=":
            excess = rhs - lhs
        else:
            excess = abs(lhs - rhs)
        if excess > tol * scale:
            amount = excess if scale == 1 else _norm(Fraction(excess, scale))
            report.violations.append(PointViolation(con.name, "row", amount))
    return report


def _common_denominator(values):
    """Least common denominator of an all-rational point, else None."""
    den = 1
    for v in values:
        if type(v) is int:
            continue
        if not isinstance(v, Fraction):
            return None
        den = math.lcm(den, v.denominator)
    return den


# export


def format_number(x) -> str:
    """Render a coefficient with full precision (exact when the decimal terminates)."""
    x = _norm(x) if not isinstance(x, float) or not math.isinf(x) else x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    den = x.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(twos, fives)
        scaled = x * 10 ** digits
        sign = "-" if scaled < 0 else ""
        s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
        return f"{sign}{s[:-digits]}.{s[-digits:]}".rstrip("0").rstrip(".")
    return repr(float(x))


FIXED_NAME_LIMIT = 8


def export_names(model: MilpModel, limit: int | None = None) -> tuple[list, list]:
    """Column and row names, shortened with a hash suffix beyond ``limit`` chars."""

    def shorten(name):
        if limit is None or len(name) <= limit:
            return name
        digest = hashlib.sha1(name.encode()).hexdigest()
        return name[: limit - 4] + digest[:4]

    cols = [shorten(v.name) for v in model.variables]
    rows = [shorten(c.name) for c in model.constraints]
    for kind, names in (("column", cols), ("row", rows)):
        if len(set(names)) != len(names):
            raise ModelError(f"{kind} name collision after sanitization")
    if "OBJ" in rows:
        raise ModelError("row name 'OBJ' is reserved")
    return cols, rows


def write_mps(model: MilpModel, fixed: bool = False) -> str:
    """Free MPS by default; ``fixed=True`` aligns fields and limits names to 8 chars.

    Integrality is carried by ``BV`` bounds for unfixed binaries; fixed
    binaries are written as ``FX`` columns.
    """
    cols, rows = export_names(model, FIXED_NAME_LIMIT if fixed else None)

    def line(*fields):
        if not fixed:
            return " " + " ".join(fields).rstrip()
        f = list(fields) + [""] * (6 - len(fields))
        # fields start at columns 2, 5, 15, 25, 40, 50
        return (" " + f[0].ljust(2) + " " + f[1].ljust(8) + "  " + f[2].ljust(8) + "  "
                + f[3].rjust(12) + "   " + f[4].ljust(8) + "  " + f[5].rjust(12)).rstrip()

    sense_code = {"<=": "L", ">=": "G", "=": "E"}
    out = [f"NAME          {model.name[:8] if fixed else model.name}", "ROWS", line("N", "OBJ")]
    for con, rname in zip(model.constraints, rows):
        out.append(line(sense_code[con.sense], rname))
    out.append("COLUMNS")
    by_col: list[list] = [[] for _ in model.variables]
    for r, con in enumerate(model.constraints):
        for idx, coef in con.coeffs.items():
            by_col[idx].append((r, coef))
    for idx, var in enumerate(model.variables):
        entries = []
        if idx in model.objective:
            entries.append(("OBJ", model.objective[idx]))
        entries += [(rows[r], c) for r, c in sorted(by_col[idx])]
        if not entries:
            # keep empty columns visible to readers
            entries = [("OBJ", 0)]
        for rname, coef in entries:
            out.append(line("", cols[idx], rname, format_number(coef)))
    out.append("RHS")
    for con, rname in zip(model.constraints, rows):
        if con.rhs != 0:
            out.append(line("", "RHS", rname, format_number(con.rhs)))
    out.append("BOUNDS")
    for var, cname in zip(model.variables, cols):
        lb, ub = var.lb, var.ub
        if var.fixed:
            out.append(line("FX", "BND", cname, format_number(lb)))
            continue
        if var.kind == BINARY and lb == 0 and ub == 1:
            out.append(line("BV", "BND", cname))
            continue
        if var.kind == BINARY:
            raise ModelError(f"binary {var.name} with bounds [{lb}, {ub}]")
        if lb == -INF and ub == INF:
            out.append(line("FR", "BND", cname))
            continue
        if lb == -INF:
            out.append(line("MI", "BND", cname))
        elif lb != 0:
            out.append(line("LO", "BND", cname, format_number(lb)))
        if ub != INF:
            out.append(line("UP", "BND", cname, format_number(ub)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _lp_expr(terms, cols, width=250) -> list[str]:
    parts = []
    for idx, coef in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        parts.append(f"{sign} {cols[idx]}" if mag == 1 else f"{sign} {format_number(mag)} {cols[idx]}")
    if not parts:
        parts = ["0 " + cols[0]] if cols else ["0"]
    lines, cur = [], ""
    for p in parts:
        if len(cur) + len(p) + 1 > width and cur:
            lines.append(cur)
            cur = ""
        cur = f"{cur} {p}" if cur else p
    lines.append(cur)
    return lines


def write_lp(model: MilpModel) -> str:
    """CPLEX-style LP text."""
    cols, rows = export_names(model)
    out = [f"\\ model {model.name}", "Minimize"]
    obj = _lp_expr(sorted(model.objective.items()), cols)
    out.append(" obj: " + obj[0])
    out += ["   " + x for x in obj[1:]]
    out.append("Subject To")
    for con, rname in zip(model.constraints, rows):
        expr = _lp_expr(sorted(con.coeffs.items()), cols)
        expr[-1] += f" {con.sense} {format_number(con.rhs)}"
        out.append(f" {rname}: " + expr[0])
        out += ["   " + x for x in expr[1:]]
    out.append("Bounds")
    binaries = []
    for var, cname in zip(model.variables, cols):
        lb, ub = var.lb, var.ub
        if var.kind == BINARY and not var.fixed and (lb, ub) == (0, 1):
            binaries.append(cname)
            continue
        if var.fixed:
            out.append(f" {cname} = {format_number(lb)}")
        elif lb == -INF and ub == INF:
            out.append(f" {cname} free")
        else:
            lo = "-inf" if lb == -INF else format_number(lb)
            hi = "+inf" if ub == INF else format_number(ub)
            out.append(f" {lo} <= {cname} <= {hi}")
    if binaries:
        out.append("Binaries")
        for i in range(0, len(binaries), 8):
            out.append(" " + " ".join(binaries[i:i + 8]))
    out.append("End")
    return "\n".join(out) + "\n"
