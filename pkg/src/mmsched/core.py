"""Multi-mode project scheduling instances and schedule validation.

Activities are numbered ``1..A``; mode and resource numbers are 1-based as
well, so ``instance.b(i, m, k)`` reads exactly like the usual notation.
Durations and demands are kept as Python ints (or ``Fraction`` when the input
is not integral) so that validation of integral data is exact.
"""
from __future__ import annotations

import graphlib
import logging
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6


class InstanceError(ValueError):
    """Raised when instance data violates a structural invariant."""


class ScheduleStructureError(ValueError):
    """Raised when a schedule does not fit the instance it is checked against."""


def exact(value) -> int | Fraction:
    """Coerce a number to ``int`` or ``Fraction`` without losing precision."""
    if isinstance(value, bool):
        raise TypeError("booleans are not numeric data")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, float):
        frac = Fraction(value)
    elif isinstance(value, str):
        frac = Fraction(value.strip())
    elif isinstance(value, Real):
        frac = Fraction(float(value))
    else:
        raise TypeError(f"not a number: {value!r}")
    return frac.numerator if frac.denominator == 1 else frac


@dataclass(frozen=True)
class Mode:
    """One execution mode of an activity.

    ``renewable[k-1]`` is the per-period demand on renewable resource ``k``;
    ``nonrenewable[k-1]`` the total demand on non-renewable resource ``k``.
    """

    id: int
    duration: int | Fraction
    renewable: tuple = ()
    nonrenewable: tuple = ()


@dataclass(frozen=True)
class InstanceSource:
    """Where an instance came from; not part of instance equality."""

    format: str
    origin: str = ""
    metadata: tuple = ()

    def meta(self) -> dict:
        return dict(self.metadata)


@dataclass(frozen=True)
class Instance:
    """A multi-mode resource-constrained project scheduling instance.

    Use :meth:`create` to build from raw data; it filters modes whose demand
    exceeds a capacity. The plain constructor validates strictly.
    """

    activities: tuple  # activities[i-1] = tuple of Mode
    renewable_capacity: tuple = ()
    nonrenewable_capacity: tuple = ()
    precedence: frozenset = frozenset()
    name: str = field(default="", compare=False)
    source: InstanceSource | None = field(default=None, compare=False)

    def __post_init__(self):
        acts = tuple(tuple(modes) for modes in self.activities)
        object.__setattr__(self, "activities", acts)
        object.__setattr__(self, "renewable_capacity",
                           tuple(exact(c) for c in self.renewable_capacity))
        object.__setattr__(self, "nonrenewable_capacity",
                           tuple(exact(c) for c in self.nonrenewable_capacity))
        object.__setattr__(self, "precedence",
                           frozenset((int(i), int(j)) for i, j in self.precedence))
        self._check()

    def _check(self):
        A = len(self.activities)
        if A < 1:
            raise InstanceError("an instance needs at least one activity")
        R, N = self.R, self.N
        for i, modes in enumerate(self.activities, start=1):
            if not modes:
                raise InstanceError(f"activity {i} has no modes")
            ids = [m.id for m in modes]
            if len(set(ids)) != len(ids):
                raise InstanceError(f"activity {i} has duplicate mode ids {ids}")
            for m in modes:
                if m.duration < 0:
                    raise InstanceError(f"negative duration for ({i},{m.id})")
                if len(m.renewable) != R or len(m.nonrenewable) != N:
                    raise InstanceError(f"demand vector length mismatch for ({i},{m.id})")
                for k, (d, cap) in enumerate(zip(m.renewable, self.renewable_capacity), 1):
                    if d < 0 or d > cap:
                        raise InstanceError(
                            f"b[{i},{m.id},{k}]={d} outside [0, B_{k}={cap}]")
                for k, (d, cap) in enumerate(zip(m.nonrenewable, self.nonrenewable_capacity), 1):
                    if d < 0 or d > cap:
                        raise InstanceError(
                            f"w[{i},{m.id},{k}]={d} outside [0, W_{k}={cap}]")
        for i, j in self.precedence:
            if not (1 <= i <= A and 1 <= j <= A) or i == j:
                raise InstanceError(f"precedence pair ({i},{j}) out of range 1..{A}")
        sorter = graphlib.TopologicalSorter({j: set() for j in range(1, A + 1)})
        for i, j in self.precedence:
            sorter.add(j, i)
        try:
            sorter.prepare()
        except graphlib.CycleError as exc:
            raise InstanceError(f"precedence relation has a cycle: {exc.args[1]}") from None

    @classmethod
    def create(cls, activities: Sequence[Sequence[Mode]], renewable_capacity=(),
               nonrenewable_capacity=(), precedence: Iterable = (), name: str = "",
               source: InstanceSource | None = None) -> "Instance":
        """Build an instance, dropping modes that cannot fit their resources."""
        B = tuple(exact(c) for c in renewable_capacity)
        W = tuple(exact(c) for c in nonrenewable_capacity)
        kept = []
        for i, modes in enumerate(activities, start=1):
            ok = []
            for m in modes:
                m = Mode(int(m.id), exact(m.duration),
                         tuple(exact(d) for d in m.renewable),
                         tuple(exact(d) for d in m.nonrenewable))
                if any(d > c for d, c in zip(m.renewable, B)) or \
                        any(d > c for d, c in zip(m.nonrenewable, W)):
                    warnings.warn(f"{name or 'instance'}: dropping infeasible mode "
                                  f"{m.id} of activity {i}", stacklevel=2)
                    continue
                ok.append(m)
            if not ok:
                raise InstanceError(f"activity {i} has no feasible mode left")
            kept.append(tuple(ok))
        return cls(tuple(kept), B, W, frozenset(precedence), name=name, source=source)

    # sizes
    @property
    def A(self) -> int:
        return len(self.activities)

    activity_count = A

    @property
    def R(self) -> int:
        return len(self.renewable_capacity)

    @property
    def N(self) -> int:
        return len(self.nonrenewable_capacity)

    # indexed accessors, all 1-based
    def modes(self, i: int) -> tuple:
        return self.activities[i - 1]

    def mode_ids(self, i: int) -> list[int]:
        return [m.id for m in self.activities[i - 1]]

    def mode(self, i: int, m: int) -> Mode:
        for mode in self.activities[i - 1]:
            if mode.id == m:
                return mode
        raise KeyError(f"activity {i} has no mode {m}")

    def p(self, i: int, m: int):
        return self.mode(i, m).duration

    def b(self, i: int, m: int, k: int):
        return self.mode(i, m).renewable[k - 1]

    def w(self, i: int, m: int, k: int):
        return self.mode(i, m).nonrenewable[k - 1]

    def B(self, k: int):
        return self.renewable_capacity[k - 1]

    def W(self, k: int):
        return self.nonrenewable_capacity[k - 1]

    def p_min(self, i: int):
        return min(m.duration for m in self.activities[i - 1])

    def p_max(self, i: int):
        return max(m.duration for m in self.activities[i - 1])

    def mode_counts(self) -> list[int]:
        return [len(modes) for modes in self.activities]

    def summary(self) -> dict:
        counts = self.mode_counts()
        return {
            "name": self.name,
            "A": self.A,
            "modes": counts[0] if len(set(counts)) == 1 else f"{min(counts)}-{max(counts)}",
            "R": self.R,
            "N": self.N,
            "precedences": len(self.precedence),
        }


@dataclass(frozen=True)
class Schedule:
    """Start time and mode per activity (index ``i-1``) plus the makespan."""

    start: tuple
    mode: tuple
    makespan: int | Fraction | float

    @classmethod
    def of(cls, instance: Instance, start: Sequence, mode: Sequence) -> "Schedule":
        """Build a schedule and compute its makespan from the instance data."""
        start = tuple(start)
        mode = tuple(int(m) for m in mode)
        if len(start) != instance.A or len(mode) != instance.A:
            raise ScheduleStructureError(
                f"schedule covers {len(start)} activities, instance has {instance.A}")
        cmax = max(s + instance.p(i, m) for i, (s, m) in enumerate(zip(start, mode), 1))
        return cls(start, mode, cmax)

    def S(self, i: int):
        return self.start[i - 1]

    def m(self, i: int) -> int:
        return self.mode[i - 1]


@dataclass(frozen=True)
class Violation:
    check: str
    indices: tuple
    amount: float | int | Fraction
    detail: str = ""


@dataclass
class ValidationReport:
    tol: float
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __str__(self):
        lines = [f"feasible: {self.feasible} (tol={self.tol})"]
        for name, ok in self.checks.items():
            lines.append(f"  {name}: {'ok' if ok else 'VIOLATED'}")
        for v in self.violations:
            lines.append(f"  - {v.check} {v.indices}: excess {v.amount} {v.detail}".rstrip())
        return "\n".join(lines)


def validate_schedule(instance: Instance, schedule: Schedule,
                      tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check precedence, capacity and makespan of ``schedule``.

    Renewable usage is piecewise constant and only increases at start times,
    so checking the profile at every start time is sufficient.

    Raises
    ------
    ScheduleStructureError
        If the schedule references activities or modes the instance lacks.
    """
    A = instance.A
    if len(schedule.start) != A or len(schedule.mode) != A:
        raise ScheduleStructureError(
            f"schedule covers {len(schedule.start)}/{len(schedule.mode)} activities, "
            f"instance has {A}")
    for i in range(1, A + 1):
        if schedule.m(i) not in instance.mode_ids(i):
            raise ScheduleStructureError(f"activity {i} has no mode {schedule.m(i)}")

    report = ValidationReport(tol=tol)
    viol = report.violations
    S = schedule.start
    p = [instance.p(i, schedule.m(i)) for i in range(1, A + 1)]
    C = [S[i] + p[i] for i in range(A)]

    n0 = len(viol)
    for i in range(1, A + 1):
        if S[i - 1] < -tol:
            viol.append(Violation("start", (i,), -S[i - 1], "negative start time"))
    report.checks["start"] = len(viol) == n0

    n0 = len(viol)
    for i, j in sorted(instance.precedence):
        excess = C[i - 1] - S[j - 1]
        if excess > tol:
            viol.append(Violation("precedence", (i, j), excess))
    report.checks["precedence"] = len(viol) == n0

    n0 = len(viol)
    for t in sorted(set(S)):
        # an activity ending within tol of t no longer overlaps t
        active = [i for i in range(A) if S[i] <= t + tol and t < C[i] - tol]
        for k in range(1, instance.R + 1):
            use = sum(instance.b(i + 1, schedule.m(i + 1), k) for i in active)
            excess = use - instance.B(k)
            if excess > tol:
                viol.append(Violation("renewable", (k, t), excess,
                                      f"activities {[i + 1 for i in active]}"))
    report.checks["renewable"] = len(viol) == n0

    n0 = len(viol)
    for k in range(1, instance.N + 1):
        use = sum(instance.w(i, schedule.m(i), k) for i in range(1, A + 1))
        excess = use - instance.W(k)
        if excess > tol:
            viol.append(Violation("nonrenewable", (k,), excess))
    report.checks["nonrenewable"] = len(viol) == n0

    n0 = len(viol)
    cmax = max(C)
    if abs(cmax - schedule.makespan) > tol:
        viol.append(Violation("makespan", (), abs(cmax - schedule.makespan),
                              f"reported {schedule.makespan}, recomputed {cmax}"))
    report.checks["makespan"] = len(viol) == n0
    return report


def _two_mode_chain(first: int) -> list:
    return [(first, first + 1)]


def example1_instance() -> Instance:
    """Two activities in series, two modes each (durations 1 and 2), one unit resource."""
    acts = [(Mode(1, 1, (1,)), Mode(2, 2, (1,))) for _ in range(2)]
    return Instance(tuple(acts), (1,), (), frozenset(_two_mode_chain(1)), name="example1")


def remark_instance() -> Instance:
    """Example 1 extended by a second identical two-activity chain (3 before 4)."""
    acts = [(Mode(1, 1, (1,)), Mode(2, 2, (1,))) for _ in range(4)]
    prec = frozenset(_two_mode_chain(1) + _two_mode_chain(3))
    return Instance(tuple(acts), (1,), (), prec, name="remark")


BUILTIN_INSTANCES = {"example1": example1_instance, "remark": remark_instance}
