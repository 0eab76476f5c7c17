"""Flow-based continuous-time models FCT-W and FCT-S.

Nodes are ``0..A+1`` with ``0`` the source and ``A+1`` the sink. Both dummies
carry a single mode ``0`` with zero duration; their resource "demand" is the
full capacity so that the sink-to-source arc closes the flow network.
"""
from __future__ import annotations

from itertools import permutations

from ..core import Instance
from ..milp import BINARY, MilpModel
from ..preprocess import AonGraph, TimeWindows, build_aon, incompatible_pairs, time_windows
from .options import FormulationOptions, OptionError


def node_modes(instance: Instance, i: int) -> list[int]:
    if i == 0 or i == instance.A + 1:
        return [0]
    return instance.mode_ids(i)


def node_duration(instance: Instance, i: int, m: int):
    return 0 if m == 0 else instance.p(i, m)


def node_demand(instance: Instance, i: int, m: int, k: int):
    """Renewable demand with dummies requesting the full capacity."""
    return instance.B(k) if m == 0 else instance.b(i, m, k)


def big_m_start(instance: Instance, tw: TimeWindows, i: int, j: int):
    """Big-M of the start-time coupling row for the ordered pair (i, j)."""
    pmax = 0 if i in (0, instance.A + 1) else instance.p_max(i)
    return tw.L[i] + pmax - tw.E[j]


def big_m_flow(instance: Instance, i: int, j: int, k: int):
    """Largest flow that can ever pass from i to j on resource k."""
    bi = max(node_demand(instance, i, m, k) for m in node_modes(instance, i))
    bj = max(node_demand(instance, j, m, k) for m in node_modes(instance, j))
    return min(bi, bj)


def build_fct(instance: Instance, graph: AonGraph | None = None,
              tw: TimeWindows | None = None,
              opts: FormulationOptions = FormulationOptions()) -> MilpModel:
    """Flow model with weak (``opts.flow_bound="weak"``) or strong flow bounds.

    The strong variant keeps the weak ``f <= M y`` rows and adds
    ``f <= sum b_i x_i`` and ``f <= sum b_j x_j``; with
    ``opts.fct_linearization="auxiliary"`` it instead introduces the product
    variables of the textbook linearization.
    """
    strong = opts.flow_bound == "strong"
    if strong and opts.incompatible_pairs:
        raise OptionError("incompatible-pair rows are only defined for the weak flow model")
    graph = graph or build_aon(instance)
    tw = tw or time_windows(instance, graph)
    A, R, N = instance.A, instance.R, instance.N
    sink = A + 1
    V = range(A + 2)
    label = "fct-s" if strong else "fct-w"
    model = MilpModel(f"{label}-{instance.name or 'instance'}")
    model.meta.update(kind=label, A=A)
    # HiGHS MIP presolve has returned wrong optima on these models; the
    # backends read this hint (see ``mmsched.solve.presolve_setting``)
    model.meta["presolve"] = False

    for i in V:
        for m in node_modes(instance, i):
            model.add_var(("x", i, m), BINARY, 0, 1)
    for i in V:
        for j in V:
            model.add_var(("y", i, j), BINARY, 0, 1)
    for i in V:
        for j in V:
            for k in range(1, R + 1):
                model.add_var(("f", i, j, k))
    for i in V:
        if opts.time_windows:
            model.add_var(("s", i), lb=tw.E[i], ub=tw.L[i])
        else:
            model.add_var(("s", i))
    model.fix(("s", 0), 0)
    model.set_objective([(("s", sink), 1)])

    def usage(i, k, scale=1):
        return [(("x", i, m), scale * node_demand(instance, i, m, k))
                for m in node_modes(instance, i)]

    # flow-bound pairs: i leaves from A or the source, j enters A or the sink
    flow_pairs = [(i, j) for i in range(0, A + 1) for j in range(1, A + 2) if i != j]

    for i in V:
        model.add_constr("mode", (i,), [(("x", i, m), 1) for m in node_modes(instance, i)],
                         "=", 1)
    for i, j in permutations(V, 2):
        M = big_m_start(instance, tw, i, j)
        terms = [(("s", i), 1), (("s", j), -1), (("y", i, j), M)]
        terms += [(("x", i, m), node_duration(instance, i, m)) for m in node_modes(instance, i)]
        model.add_constr("start", (i, j), terms, "<=", M)
    for i in V:
        for j in V:
            if i < j:
                model.add_constr("order", (i, j), [(("y", i, j), 1), (("y", j, i), 1)], "<=", 1)
    for i, j, v in permutations(V, 3):
        model.add_constr("trans", (i, j, v),
                         [(("y", i, j), 1), (("y", j, v), 1), (("y", i, v), -1)], "<=", 1)
    for k in range(1, R + 1):
        for i, j in flow_pairs:
            model.add_constr("flow_ub", (i, j, k),
                             [(("f", i, j, k), 1), (("y", i, j), -big_m_flow(instance, i, j, k))],
                             "<=", 0)
    if strong:
        for k in range(1, R + 1):
            for i, j in flow_pairs:
                if opts.fct_linearization == "triple":
                    model.add_constr("flow_src", (i, j, k),
                                     [(("f", i, j, k), 1)] + usage(i, k, -1), "<=", 0)
                    model.add_constr("flow_dst", (i, j, k),
                                     [(("f", i, j, k), 1)] + usage(j, k, -1), "<=", 0)
                else:
                    _auxiliary_bounds(model, instance, i, j, k, usage)
    for k in range(1, R + 1):
        for i in V:
            model.add_constr("out", (i, k), [(("f", i, j, k), 1) for j in V] + usage(i, k, -1),
                             "=", 0)
        for j in V:
            model.add_constr("in", (j, k), [(("f", i, j, k), 1) for i in V] + usage(j, k, -1),
                             "=", 0)
    for k in range(1, N + 1):
        model.add_constr("nr", (k,), [(("x", i, m), instance.w(i, m, k))
                                      for i in range(1, A + 1) for m in instance.mode_ids(i)],
                         "<=", instance.W(k))

    # fixings: sink-to-source flow, no loops, hull orientation, no self precedence
    for k in range(1, R + 1):
        for j in range(0, A + 1):
            model.fix(("f", sink, j, k), instance.B(k) if j == 0 else 0)
        for i in V:
            model.fix(("f", i, i, k), 0)
    for i, j in sorted(graph.hull):
        model.fix(("y", i, j), 1)
        model.fix(("y", j, i), 0)
    for i in V:
        model.fix(("y", i, i), 0)

    if opts.incompatible_pairs:
        for pair in sorted(incompatible_pairs(instance, graph)):
            (iu, mu), (iv, mv) = pair.u, pair.v
            model.add_constr("rc", (iu, mu, iv, mv),
                             [(("y", iu, iv), 1), (("y", iv, iu), 1),
                              (("x", iu, mu), -1), (("x", iv, mv), -1)], ">=", -1)
    return model


def _auxiliary_bounds(model, instance, i, j, k, usage):
    """``f <= y * min(a_i, a_j)`` through product variables u = y a_i, g = y a_j."""
    for tag, node in (("u", i), ("g", j)):
        cap = max(node_demand(instance, node, m, k) for m in node_modes(instance, node))
        key = (tag, i, j, k)
        model.add_var(key, lb=0, ub=cap)
        model.add_constr(f"{tag}_y", (i, j, k), [(key, 1), (("y", i, j), -cap)], "<=", 0)
        model.add_constr(f"{tag}_a", (i, j, k), [(key, 1)] + usage(node, k, -1), "<=", 0)
        model.add_constr(f"{tag}_lo", (i, j, k),
                         [(key, 1), (("y", i, j), -cap)] + usage(node, k, -1), ">=", -cap)
        model.add_constr(f"flow_{tag}", (i, j, k), [(("f", i, j, k), 1), (key, -1)], "<=", 0)
