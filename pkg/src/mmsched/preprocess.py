"""Precedence-graph machinery and the model enhancement data.

Node ``0`` is the super-source and node ``A+1`` the super-sink; both carry a
single zero mode. Time windows come from a multi-mode CPM pass that uses the
shortest duration of every activity.
"""
from __future__ import annotations

import graphlib
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .core import Instance


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class AonGraph:
    """Activity-on-node graph with source ``0`` and sink ``A+1``.

    ``hull`` is the transitive closure over all nodes; ``anc`` and ``desc``
    count ancestors/descendants among real activities (index ``i-1``).
    """

    A: int
    arcs: frozenset
    hull: frozenset
    anc: tuple
    desc: tuple

    @property
    def sink(self) -> int:
        return self.A + 1

    @property
    def nodes(self) -> range:
        return range(self.A + 2)

    def successors(self, i: int) -> list[int]:
        return sorted(j for a, j in self.arcs if a == i)

    def predecessors(self, j: int) -> list[int]:
        return sorted(i for i, b in self.arcs if b == j)

    def related(self, i: int, j: int) -> bool:
        return (i, j) in self.hull or (j, i) in self.hull

    def topological_order(self) -> list[int]:
        sorter = graphlib.TopologicalSorter({v: set() for v in self.nodes})
        for i, j in self.arcs:
            sorter.add(j, i)
        return list(sorter.static_order())


def _closure(nodes, arcs) -> set:
    succ = {v: set() for v in nodes}
    for i, j in arcs:
        succ[i].add(j)
    reach = {}
    sorter = graphlib.TopologicalSorter({v: set() for v in nodes})
    for i, j in arcs:
        sorter.add(j, i)
    try:
        order = list(sorter.static_order())
    except graphlib.CycleError as exc:
        raise CycleError(f"precedence graph has a cycle: {exc.args[1]}") from None
    for v in reversed(order):
        r = set()
        for w in succ[v]:
            r.add(w)
            r |= reach[w]
        reach[v] = r
    return {(v, w) for v in nodes for w in reach[v]}


def build_aon(instance: Instance) -> AonGraph:
    A = instance.A
    sink = A + 1
    arcs = set(instance.precedence)
    has_pred = {j for _, j in instance.precedence}
    has_succ = {i for i, _ in instance.precedence}
    for i in range(1, A + 1):
        if i not in has_pred:
            arcs.add((0, i))
        if i not in has_succ:
            arcs.add((i, sink))
    hull = _closure(range(A + 2), arcs)
    inner = _closure(range(1, A + 1), instance.precedence)
    anc = tuple(sum(1 for a, b in inner if b == i) for i in range(1, A + 1))
    desc = tuple(sum(1 for a, b in inner if a == i) for i in range(1, A + 1))
    return AonGraph(A, frozenset(arcs), frozenset(hull), anc, desc)


@dataclass(frozen=True)
class TimeWindows:
    """Earliest/latest start per node ``0..A+1`` and the horizon ``L[A+1]``."""

    E: tuple
    L: tuple

    @property
    def horizon(self):
        return self.L[-1]


def default_horizon(instance: Instance):
    """Sum of the longest durations: a serial schedule always fits within it."""
    return sum(instance.p_max(i) for i in range(1, instance.A + 1))


def _pmin(instance, i):
    return 0 if i == 0 or i == instance.A + 1 else instance.p_min(i)


def time_windows(instance: Instance, graph: AonGraph, horizon=None) -> TimeWindows:
    """Forward/backward CPM pass with the shortest duration of each activity."""
    T = default_horizon(instance) if horizon is None else horizon
    order = graph.topological_order()
    preds = {v: [] for v in graph.nodes}
    succs = {v: [] for v in graph.nodes}
    for i, j in graph.arcs:
        preds[j].append(i)
        succs[i].append(j)
    E = [0] * (graph.A + 2)
    for v in order:
        E[v] = max((E[u] + _pmin(instance, u) for u in preds[v]), default=0)
    L = [T] * (graph.A + 2)
    for v in reversed(order):
        if succs[v]:
            L[v] = min(L[w] for w in succs[v]) - _pmin(instance, v)
    L[0] = 0
    if E[graph.sink] > T:
        raise ValueError(f"horizon {T} below critical path length {E[graph.sink]}")
    return TimeWindows(tuple(E), tuple(L))


@dataclass(frozen=True, order=True)
class IncompatiblePair:
    """Two activity-mode combinations ``(activity, mode)`` that overload some resource."""

    u: tuple
    v: tuple


def incompatible_pairs(instance: Instance, graph: AonGraph,
                       include_related: bool = False) -> frozenset:
    """All pairs on distinct activities whose joint demand exceeds some capacity.

    Pairs whose activities are ordered by the transitive hull can never overlap
    and are skipped unless ``include_related`` is set.
    """
    combos = [(i, m.id) for i in range(1, instance.A + 1) for m in instance.modes(i)]
    out = set()
    for u, v in combinations(combos, 2):
        if u[0] == v[0]:
            continue
        if not include_related and graph.related(u[0], v[0]):
            continue
        mu, mv = instance.mode(*u), instance.mode(*v)
        if any(a + b > cap for a, b, cap in
               zip(mu.renewable, mv.renewable, instance.renewable_capacity)):
            out.add(IncompatiblePair(*sorted((u, v))))
    return frozenset(out)


UNDEFINED = None


def _peak_demand(instance: Instance, k: int) -> int | Fraction:
    """Peak usage of resource k in the earliest-start schedule using max-demand modes."""
    A = instance.A
    chosen = {}
    for i in range(1, A + 1):
        # highest demand on k; lowest mode id on ties
        chosen[i] = max(instance.modes(i), key=lambda m: (m.renewable[k - 1], -m.id))
    sorter = graphlib.TopologicalSorter({i: set() for i in range(1, A + 1)})
    for i, j in instance.precedence:
        sorter.add(j, i)
    start = {}
    for j in sorter.static_order():
        start[j] = max((start[i] + chosen[i].duration
                        for i, jj in instance.precedence if jj == j), default=0)
    peak = 0
    for t in set(start.values()):
        use = sum(chosen[i].renewable[k - 1] for i in range(1, A + 1)
                  if start[i] <= t < start[i] + chosen[i].duration)
        peak = max(peak, use)
    return peak


def resource_strength(instance: Instance, k: int):
    """Resource strength of renewable resource ``k`` (1-based) as an exact Fraction.

    Returns ``UNDEFINED`` (None) when the minimum and peak demand coincide.
    """
    if not 1 <= k <= instance.R:
        raise IndexError(f"renewable resource {k} out of range 1..{instance.R}")
    kmin = max(min(m.renewable[k - 1] for m in instance.modes(i))
               for i in range(1, instance.A + 1))
    kmax = _peak_demand(instance, k)
    if kmax == kmin:
        return UNDEFINED
    return Fraction(instance.B(k) - kmin) / Fraction(kmax - kmin)
