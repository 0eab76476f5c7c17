"""Start/end event models: SEE (with optional mode consistency) and RSEE."""
from __future__ import annotations

from ..core import Instance
from ..milp import BINARY, MilpModel
from ..preprocess import AonGraph, TimeWindows, build_aon, time_windows
from .options import FormulationOptions, OptionError


def _prepare(instance, graph, tw):
    graph = graph or build_aon(instance)
    tw = tw or time_windows(instance, graph)
    return graph, tw


def build_see(instance: Instance, graph: AonGraph | None = None,
              tw: TimeWindows | None = None,
              opts: FormulationOptions = FormulationOptions()) -> MilpModel:
    """Start/end event model.

    ``opts.mode_consistency``: ``"none"`` gives the model as found in the
    earlier literature (admits mode switches), ``"full"`` adds one row per
    start assignment, ``"aggregate"`` one row per activity-mode (SEE-A).
    """
    graph, tw = _prepare(instance, graph, tw)
    mc = opts.mode_consistency or "full"
    A, R, N = instance.A, instance.R, instance.N
    acts = range(1, A + 1)
    M = {i: instance.mode_ids(i) for i in acts}
    p = instance.p
    label = "see-a" if mc == "aggregate" else "see"
    model = MilpModel(f"{label}-{instance.name or 'instance'}")
    model.meta.update(kind=label, A=A, mode_consistency=mc)

    # x at event A and y at event 0 are eliminated up front
    for i in acts:
        for m in M[i]:
            for e in range(A):
                model.add_var(("x", i, m, e), BINARY, 0, 1)
    for i in acts:
        for m in M[i]:
            for e in range(1, A + 1):
                model.add_var(("y", i, m, e), BINARY, 0, 1)
    for e in range(A + 1):
        model.add_var(("s", e))
    for e in range(A):
        for k in range(1, R + 1):
            model.add_var(("r", e, k), lb=0, ub=instance.B(k))
    model.set_objective([(("s", A), 1)])

    def x(i, m, e):
        return ("x", i, m, e)

    def y(i, m, e):
        return ("y", i, m, e)

    model.add_constr("s0", (), [(("s", 0), 1)], "=", 0)
    for e in range(A):
        model.add_constr("order", (e,), [(("s", e), 1), (("s", e + 1), -1)], "<=", 0)
    for i in acts:
        for m in M[i]:
            pim = p(i, m)
            for e in range(A):
                for f in range(e + 1, A + 1):
                    model.add_constr("evt", (i, m, e, f),
                                     [(("s", f), 1), (("s", e), -1),
                                      (x(i, m, e), -pim), (y(i, m, f), -pim)], ">=", -pim)
    for i in acts:
        model.add_constr("start", (i,), [(x(i, m, e), 1) for m in M[i] for e in range(A)],
                         "=", 1)
        model.add_constr("end", (i,), [(y(i, m, e), 1) for m in M[i] for e in range(1, A + 1)],
                         "=", 1)
    for i in acts:
        for e in range(1, A):
            terms = [(y(i, m, ee), 1) for m in M[i] for ee in range(1, e + 1)]
            terms += [(x(i, m, ee), 1) for m in M[i] for ee in range(e, A)]
            model.add_constr("seq", (i, e), terms, "<=", 1)
    for i, j in sorted(instance.precedence):
        for e in range(1, A + 1):
            terms = [(y(i, m, ee), 1) for m in M[i] for ee in range(e, A + 1)]
            terms += [(x(j, m, ee), 1) for m in M[j] for ee in range(e)]
            model.add_constr("prec", (i, j, e), terms, "<=", 1)
    for k in range(1, R + 1):
        model.add_constr("res0", (k,), [(("r", 0, k), 1)] +
                         [(x(i, m, 0), -instance.b(i, m, k)) for i in acts for m in M[i]],
                         "=", 0)
        for e in range(1, A):
            terms = [(("r", e, k), 1), (("r", e - 1, k), -1)]
            for i in acts:
                for m in M[i]:
                    b = instance.b(i, m, k)
                    terms += [(x(i, m, e), -b), (y(i, m, e), b)]
            model.add_constr("res", (e, k), terms, "=", 0)
    for k in range(1, N + 1):
        model.add_constr("nr", (k,), [(x(i, m, e), instance.w(i, m, k))
                                      for i in acts for m in M[i] for e in range(A)],
                         "<=", instance.W(k))

    if mc == "full":
        for i in acts:
            for m in M[i]:
                other = [(y(i, mm, f), 1) for mm in M[i] if mm != m for f in range(1, A + 1)]
                for e in range(A):
                    model.add_constr("mc", (i, m, e), [(x(i, m, e), 1)] + other, "<=", 1)
    elif mc == "aggregate":
        for i in acts:
            for m in M[i]:
                terms = [(x(i, m, e), 1) for e in range(A)]
                terms += [(y(i, mm, f), 1) for mm in M[i] if mm != m for f in range(1, A + 1)]
                model.add_constr("mca", (i, m), terms, "<=", 1)

    if opts.time_windows:
        _see_time_windows(model, instance, tw, M)
    if opts.variable_fixing:
        for i in acts:
            lo, hi = graph.anc[i - 1], A - graph.desc[i - 1]
            for m in M[i]:
                for e in range(A):
                    if e < lo or e >= hi:
                        model.fix(x(i, m, e), 0)
                for e in range(1, A + 1):
                    if e <= lo or e > hi:
                        model.fix(y(i, m, e), 0)
    return model


def _see_time_windows(model, instance, tw, M):
    A = instance.A
    E, L = tw.E, tw.L
    LT = L[A + 1]
    for i in range(1, A + 1):
        for e in range(1, A):
            started = [(("x", i, m, ee), E[i]) for m in M[i] for ee in range(e + 1)]
            model.add_constr("tw_start_lb", (i, e), started + [(("s", e), -1)], "<=", 0)
            model.add_constr("tw_start_ub", (i, e),
                             [(("s", e), 1)] + [(("x", i, m, e), -(L[i] - LT)) for m in M[i]],
                             "<=", LT)
        for e in range(1, A + 1):
            ended = [(("y", i, m, ee), E[i] + instance.p(i, m))
                     for m in M[i] for ee in range(1, e + 1)]
            model.add_constr("tw_end_lb", (i, e), ended + [(("s", e), -1)], "<=", 0)
            model.add_constr("tw_end_ub", (i, e),
                             [(("s", e), 1)] + [(("y", i, m, e), -(L[i] + instance.p(i, m) - LT))
                                                for m in M[i]], "<=", LT)
    model.add_constr("tw_cmax_lb", (), [(("s", A), 1)], ">=", E[A + 1])
    model.add_constr("tw_cmax_ub", (), [(("s", A), 1)], "<=", LT)


def build_rsee(instance: Instance, graph: AonGraph | None = None,
               opts: FormulationOptions = FormulationOptions()) -> MilpModel:
    """Revised start/end event model on cumulative ("started until e") binaries.

    Mode consistency is built in. Time windows and variable fixing are not
    defined for this model and are refused unless ``opts.experimental``.
    """
    if (opts.time_windows or opts.variable_fixing or opts.incompatible_pairs) \
            and not opts.experimental:
        raise OptionError("rsee supports no enhancements (set experimental to force)")
    graph = graph or build_aon(instance)
    A, R, N = instance.A, instance.R, instance.N
    acts = range(1, A + 1)
    M = {i: instance.mode_ids(i) for i in acts}
    model = MilpModel(f"rsee-{instance.name or 'instance'}")
    model.meta.update(kind="rsee", A=A)

    for i in acts:
        for m in M[i]:
            for e in range(A):
                model.add_var(("xt", i, m, e), BINARY, 0, 1)
    for i in acts:
        for m in M[i]:
            for e in range(1, A + 1):
                model.add_var(("yt", i, m, e), BINARY, 0, 1)
    for e in range(A + 1):
        model.add_var(("s", e))
    model.set_objective([(("s", A), 1)])

    # xt at -1 and yt at 0 are the constant zero
    def xt(i, m, e):
        return [] if e < 0 else [(("xt", i, m, e), 1)]

    def yt(i, m, e):
        return [] if e < 1 else [(("yt", i, m, e), 1)]

    def scaled(terms, c):
        return [(key, c * v) for key, v in terms]

    model.add_constr("s0", (), [(("s", 0), 1)], "=", 0)
    for e in range(A):
        model.add_constr("order", (e,), [(("s", e), 1), (("s", e + 1), -1)], "<=", 0)
    for i in acts:
        for m in M[i]:
            pim = instance.p(i, m)
            for e in range(A):
                for f in range(e + 1, A + 1):
                    model.add_constr("evt", (i, m, e, f),
                                     [(("s", f), 1), (("s", e), -1)]
                                     + scaled(yt(i, m, f), -pim) + scaled(xt(i, m, e - 1), pim),
                                     ">=", 0)
    for i in acts:
        model.add_constr("start", (i,), [(("xt", i, m, A - 1), 1) for m in M[i]], "=", 1)
        model.add_constr("end", (i,), [(("yt", i, m, A), 1) for m in M[i]], "=", 1)
    for i in acts:
        for m in M[i]:
            for e in range(A - 1):
                model.add_constr("mono_x", (i, m, e),
                                 [(("xt", i, m, e), 1), (("xt", i, m, e + 1), -1)], "<=", 0)
            for e in range(1, A):
                model.add_constr("mono_y", (i, m, e),
                                 [(("yt", i, m, e), 1), (("yt", i, m, e + 1), -1)], "<=", 0)
            for e in range(1, A + 1):
                model.add_constr("start_before_end", (i, m, e),
                                 [(("yt", i, m, e), 1), (("xt", i, m, e - 1), -1)], "<=", 0)
    for i, j in sorted(instance.precedence):
        for e in range(A):
            terms = [(("xt", j, m, e), 1) for m in M[j]]
            terms += scaled([t for m in M[i] for t in yt(i, m, e)], -1)
            model.add_constr("prec", (i, j, e), terms, "<=", 0)
    for e in range(A):
        for k in range(1, R + 1):
            terms = []
            for i in acts:
                for m in M[i]:
                    b = instance.b(i, m, k)
                    terms += scaled(xt(i, m, e), b) + scaled(yt(i, m, e), -b)
            model.add_constr("res", (e, k), terms, "<=", instance.B(k))
    for k in range(1, N + 1):
        model.add_constr("nr", (k,), [(("xt", i, m, A - 1), instance.w(i, m, k))
                                      for i in acts for m in M[i]], "<=", instance.W(k))
    for i in acts:
        for m in M[i]:
            terms = [(("yt", i, mm, A), 1) for mm in M[i] if mm != m]
            terms.append((("xt", i, m, A - 1), 1))
            model.add_constr("mc", (i, m), terms, "<=", 1)
    return model
