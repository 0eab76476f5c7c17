"""Exact reference solver for tiny instances.

Mode vectors are enumerated in lexicographic order and skipped when they break
a non-renewable budget or cannot beat the incumbent on their critical path.
For each remaining vector a depth-first search builds schedules in order of
non-decreasing start time, placing every activity at time 0 or at the finish
time of an already placed activity. Every semi-active schedule arises this
way, so the search is exhaustive; all arithmetic is exact.
"""
from __future__ import annotations

import graphlib
import itertools
import math
import time
from dataclasses import dataclass

from .core import Instance, Schedule, validate_schedule

DEFAULT_NODE_LIMIT = 10_000_000
MAX_ACTIVITIES = 12
MAX_MODE_VECTORS = 1_000_000


class OracleLimitError(ValueError):
    """Instance too large for exhaustive search (pass ``force=True`` to try anyway)."""


@dataclass
class OracleResult:
    status: str  # "optimal", "infeasible" or "unknown"
    makespan: int | None
    schedule: Schedule | None
    nodes: int
    vectors: int
    wall_time: float

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def ma_feasible(instance: Instance, mode_vector) -> bool:
    """True iff the modes respect every non-renewable budget."""
    for k in range(1, instance.N + 1):
        used = sum(instance.w(i, m, k) for i, m in enumerate(mode_vector, 1))
        if used > instance.W(k):
            return False
    return True


class _Search:
    def __init__(self, instance: Instance, node_limit: int):
        self.inst = instance
        self.A = instance.A
        self.R = instance.R
        self.preds = {j: [] for j in range(1, self.A + 1)}
        self.succs = {i: [] for i in range(1, self.A + 1)}
        for i, j in instance.precedence:
            self.preds[j].append(i)
            self.succs[i].append(j)
        sorter = graphlib.TopologicalSorter({j: set(self.preds[j]) for j in self.preds})
        self.topo = list(sorter.static_order())
        self.node_limit = node_limit
        self.nodes = 0
        self.best = None  # (makespan, start tuple, mode tuple)

    def tails(self, p):
        tail = {}
        for i in reversed(self.topo):
            tail[i] = p[i] + max((tail[j] for j in self.succs[i]), default=0)
        return tail

    def critical_path(self, p):
        return max(self.tails(p).values(), default=0)

    def solve_vector(self, modes):
        inst = self.inst
        p = {i: inst.p(i, modes[i - 1]) for i in range(1, self.A + 1)}
        b = {i: inst.mode(i, modes[i - 1]).renewable for i in range(1, self.A + 1)}
        tail = self.tails(p)
        caps = inst.renewable_capacity
        # no resource conflict possible: earliest starts are optimal
        if all(sum(b[i][k] for i in b) <= caps[k] for k in range(self.R)):
            start = {}
            for j in self.topo:
                start[j] = max((start[i] + p[i] for i in self.preds[j]), default=0)
            cmax = max((start[j] + p[j] for j in start), default=0)
            self.nodes += 1
            if self.best is None or cmax < self.best[0]:
                self.best = (cmax, tuple(start[j] for j in range(1, self.A + 1)), tuple(modes))
            return
        self._dfs(p, b, tail, caps, modes)

    def _dfs(self, p, b, tail, caps, modes):
        A, R = self.A, self.R
        start = {}
        order = []

        def usage_at(t):
            use = [0] * R
            for i in order:
                if start[i] <= t < start[i] + p[i]:
                    for k in range(R):
                        use[k] += b[i][k]
            return use

        def rec(t_cur, last, cmax):
            self.nodes += 1
            if self.nodes > self.node_limit:
                raise _NodeLimit
            if len(order) == A:
                if self.best is None or cmax < self.best[0]:
                    self.best = (cmax, tuple(start[j] for j in range(1, A + 1)), tuple(modes))
                return
            rest = [j for j in range(1, A + 1) if j not in start]
            lb = max(cmax, t_cur + max(tail[j] for j in rest))
            if self.best is not None and lb >= self.best[0]:
                return
            times = sorted({0} | {start[i] + p[i] for i in order})
            for j in rest:
                if any(i not in start for i in self.preds[j]):
                    continue
                ready = max([t_cur] + [start[i] + p[i] for i in self.preds[j]])
                for t in times:
                    if t < ready or (t == t_cur and j < last):
                        continue
                    if self.best is not None and t + tail[j] >= self.best[0]:
                        break
                    use = usage_at(t)
                    if any(use[k] + b[j][k] > caps[k] for k in range(R)):
                        continue
                    start[j] = t
                    order.append(j)
                    rec(t, j, max(cmax, t + p[j]))
                    order.pop()
                    del start[j]

        rec(0, 0, 0)


class _NodeLimit(Exception):
    pass


def solve_exact(instance: Instance, node_limit: int = DEFAULT_NODE_LIMIT,
                time_limit: float | None = None, force: bool = False) -> OracleResult:
    """Minimum makespan by exhaustive search.

    Returns status ``"unknown"`` (never a wrong value) if the node or time
    limit is hit, and ``"infeasible"`` when no mode vector fits the
    non-renewable budgets.
    """
    A = instance.A
    n_vectors = math.prod(instance.mode_counts())
    if not force and (A > MAX_ACTIVITIES or n_vectors > MAX_MODE_VECTORS):
        raise OracleLimitError(f"{A} activities and {n_vectors} mode vectors exceed the "
                               "exhaustive-search limits")
    t0 = time.perf_counter()
    search = _Search(instance, node_limit)
    vectors = 0
    try:
        for modes in itertools.product(*(instance.mode_ids(i) for i in range(1, A + 1))):
            if time_limit is not None and time.perf_counter() - t0 > time_limit:
                raise _NodeLimit
            if not ma_feasible(instance, modes):
                continue
            vectors += 1
            if search.best is not None:
                p = {i: instance.p(i, modes[i - 1]) for i in range(1, A + 1)}
                if search.critical_path(p) >= search.best[0]:
                    continue
            search.solve_vector(modes)
    except _NodeLimit:
        return OracleResult("unknown", None, None, search.nodes, vectors,
                            time.perf_counter() - t0)
    wall = time.perf_counter() - t0
    if search.best is None:
        return OracleResult("infeasible", None, None, search.nodes, vectors, wall)
    cmax, start, modes = search.best
    schedule = Schedule.of(instance, start, modes)
    report = validate_schedule(instance, schedule, tol=0)
    if not report.feasible:  # pragma: no cover - would be a search bug
        raise AssertionError(f"oracle produced an invalid schedule: {report}")
    return OracleResult("optimal", cmax, schedule, search.nodes, vectors, wall)
