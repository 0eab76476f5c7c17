"""On/off event models: OOE and its aggregate variant OOE-A."""
from __future__ import annotations

from ..core import Instance
from ..milp import BINARY, MilpModel
from ..preprocess import AonGraph, TimeWindows, build_aon, time_windows
from .options import FormulationOptions, OptionError


def _z(i, m, e, A):
    # z at -1 and at A are the constant zero
    return [] if e < 0 or e >= A else [(("z", i, m, e), 1)]


def _sc(terms, c):
    return [(key, c * v) for key, v in terms]


def _common(instance: Instance, label: str, opts: FormulationOptions) -> MilpModel:
    A, N = instance.A, instance.N
    acts = range(1, A + 1)
    model = MilpModel(f"{label}-{instance.name or 'instance'}")
    for i in acts:
        for m in instance.mode_ids(i):
            for e in range(A):
                model.add_var(("z", i, m, e), BINARY, 0, 1)
    for e in range(A + 1):
        model.add_var(("s", e))
    for i in acts:
        for k in range(1, N + 1):
            model.add_var(("r", i, k))
    model.set_objective([(("s", A), 1)])

    model.add_constr("s0", (), [(("s", 0), 1)], "=", 0)
    for e in range(A):
        model.add_constr("order", (e,), [(("s", e), 1), (("s", e + 1), -1)], "<=", 0)
    col = model.column
    s = [col(("s", e)) for e in range(A + 1)]
    for i in acts:
        for m in instance.mode_ids(i):
            pim = instance.p(i, m)
            z = [col(("z", i, m, e)) for e in range(A)]
            # off after f - 1 (z_{f-1} - z_f), with z_A = 0
            tail = [None] + [[(s[f], 1), (z[f - 1], -pim)] + ([(z[f], pim)] if f < A else [])
                             for f in range(1, A + 1)]
            for e in range(A):
                # switched on at e (z_e - z_{e-1})
                head = [(s[e], -1), (z[e], -pim)] + ([(z[e - 1], pim)] if e else [])
                for f in range(e + 1, A + 1):
                    model.add_constr("evt", (i, m, e, f), tail[f] + head, ">=", -pim)
    if opts.strong_event_time:
        # supplementary to evt: active at f, inactive at e and g => s_g >= s_e + p
        for i in acts:
            for m in instance.mode_ids(i):
                pim = instance.p(i, m)
                for e in range(A):
                    for f in range(e + 1, A):
                        for g in range(f + 1, A + 1):
                            terms = [(("s", g), 1), (("s", e), -1)]
                            terms += _sc(_z(i, m, f, A), -pim) + _sc(_z(i, m, e, A), pim)
                            terms += _sc(_z(i, m, g, A), pim)
                            model.add_constr("evt_strong", (i, m, e, f, g), terms, ">=", 0)
    for i in acts:
        model.add_constr("active", (i,), [(("z", i, m, e), 1) for m in instance.mode_ids(i)
                                          for e in range(A)], ">=", 1)
    return model


def _prefix_sums(model, M, A):
    """Per activity, the unit terms of all z at events ``<= e`` and ``>= e``.

    Terms name columns by index, which skips the key lookup on these long rows.
    """
    before, after = {}, {}
    col = model.column
    for i, modes in M.items():
        lo, hi = [], [[] for _ in range(A + 1)]
        acc = []
        for e in range(A):
            acc = acc + [(col(("z", i, m, e)), 1) for m in modes]
            lo.append(acc)
        acc = []
        for e in range(A - 1, -1, -1):
            acc = [(col(("z", i, m, e)), 1) for m in modes] + acc
            hi[e] = acc
        before[i], after[i] = lo, hi
    return before, after


def _tail(model, instance, opts, graph, tw, M):
    """Renewable and non-renewable resource rows shared by both models."""
    A, R, N = instance.A, instance.R, instance.N
    acts = range(1, A + 1)
    col = model.column
    for e in range(A):
        for k in range(1, R + 1):
            model.add_constr("res", (e, k), [(col(("z", i, m, e)), instance.b(i, m, k))
                                             for i in acts for m in M[i]], "<=", instance.B(k))
    for i in acts:
        for e in range(A):
            for k in range(1, N + 1):
                model.add_constr("nr_use", (i, e, k),
                                 [(col(("z", i, m, e)), instance.w(i, m, k)) for m in M[i]]
                                 + [(col(("r", i, k)), -1)], "<=", 0)
    for k in range(1, N + 1):
        model.add_constr("nr", (k,), [(("r", i, k), 1) for i in acts], "<=", instance.W(k))


def _mode_consistency(model, instance, M):
    A = instance.A
    for i in range(1, A + 1):
        for m in M[i]:
            other = [(model.column(("z", i, mm, f)), 1) for mm in M[i] if mm != m
                     for f in range(A)]
            for e in range(A):
                model.add_constr("mc", (i, m, e), other + [(model.column(("z", i, m, e)), A)],
                                 "<=", A)


def _time_windows(model, instance, tw, M):
    A = instance.A
    E, L = tw.E, tw.L
    LT = L[A + 1]
    for i in range(1, A + 1):
        for e in range(1, A):
            active = [(("z", i, m, e), 1) for m in M[i]]
            model.add_constr("tw_active_lb", (i, e), _sc(active, E[i]) + [(("s", e), -1)],
                             "<=", 0)
            model.add_constr("tw_active_ub", (i, e),
                             [(("s", e), 1)] + _sc(active, -(L[i] - LT)), "<=", LT)
        for e in range(2, A):
            lb, ub = [], []
            for m in M[i]:
                drop = _z(i, m, e - 1, A) + _sc(_z(i, m, e, A), -1)
                lb += _sc(drop, E[i] + instance.p(i, m))
                ub += _sc(drop, -(L[i] + instance.p(i, m) - LT))
            model.add_constr("tw_end_lb", (i, e), lb + [(("s", e), -1)], "<=", 0)
            model.add_constr("tw_end_ub", (i, e), [(("s", e), 1)] + ub, "<=", LT)
    model.add_constr("tw_cmax_lb", (), [(("s", A), 1)], ">=", E[A + 1])
    model.add_constr("tw_cmax_ub", (), [(("s", A), 1)], "<=", LT)


def _variable_fixing(model, instance, graph, M):
    A = instance.A
    for i in range(1, A + 1):
        lo, hi = graph.anc[i - 1], A - graph.desc[i - 1]
        for m in M[i]:
            for e in range(A):
                if e < lo or e >= hi:
                    model.fix(("z", i, m, e), 0)


def build_ooe(instance: Instance, graph: AonGraph | None = None,
              tw: TimeWindows | None = None,
              opts: FormulationOptions = FormulationOptions()) -> MilpModel:
    """On/off event model with per-mode contiguity and precedence rows.

    Mode consistency is off by default; ``"full"`` adds the MC rows. The
    aggregate MC variant is not defined here.
    """
    graph = graph or build_aon(instance)
    tw = tw or time_windows(instance, graph)
    mc = opts.mode_consistency or "none"
    if mc == "aggregate":
        raise OptionError("ooe supports mode_consistency none or full")
    A = instance.A
    acts = range(1, A + 1)
    M = {i: instance.mode_ids(i) for i in acts}
    model = _common(instance, "ooe", opts)
    model.meta.update(kind="ooe", A=A, mode_consistency=mc)

    before, after = _prefix_sums(model, M, A)
    for i in acts:
        for m in M[i]:
            for e in range(1, A):
                model.add_constr("contig_bw", (i, m, e),
                                 before[i][e - 1] + [(("z", i, m, e), e), (("z", i, m, e - 1), -e)],
                                 "<=", e)
                model.add_constr("contig_fw", (i, m, e),
                                 after[i][e] + [(("z", i, m, e - 1), A - e), (("z", i, m, e), -(A - e))],
                                 "<=", A - e)
    for i, j in sorted(instance.precedence):
        for m in M[i]:
            for e in range(A):
                model.add_constr("prec", (i, j, m, e),
                                 before[j][e] + [(model.column(("z", i, m, e)), e + 1)],
                                 "<=", e + 1)
    _tail(model, instance, opts, graph, tw, M)
    if mc == "full":
        _mode_consistency(model, instance, M)
    if opts.time_windows:
        _time_windows(model, instance, tw, M)
    if opts.variable_fixing:
        _variable_fixing(model, instance, graph, M)
    return model


def build_ooe_a(instance: Instance, graph: AonGraph | None = None,
                tw: TimeWindows | None = None,
                opts: FormulationOptions = FormulationOptions()) -> MilpModel:
    """Aggregate on/off event model: contiguity and precedence summed over modes.

    Mode consistency rows are always added; an explicit
    ``mode_consistency="none"`` drops them, which admits activities that
    switch mode between consecutive events.
    """
    graph = graph or build_aon(instance)
    tw = tw or time_windows(instance, graph)
    mc = opts.mode_consistency or "full"
    if mc == "aggregate":
        raise OptionError("ooe-a supports mode_consistency full (default) or none")
    A = instance.A
    acts = range(1, A + 1)
    M = {i: instance.mode_ids(i) for i in acts}
    model = _common(instance, "ooe-a", opts)
    model.meta.update(kind="ooe-a", A=A, mode_consistency=mc)

    before, after = _prefix_sums(model, M, A)
    for i in acts:
        for e in range(1, A):
            change = [(("z", i, m, e), e) for m in M[i]] + [(("z", i, m, e - 1), -e) for m in M[i]]
            model.add_constr("contig_bw", (i, e), before[i][e - 1] + change, "<=", e)
        # at e = 0 the row is implied by the mode consistency rows
        for e in range(1, A):
            change = [(("z", i, m, e - 1), A - e) for m in M[i]] + \
                     [(("z", i, m, e), -(A - e)) for m in M[i]]
            model.add_constr("contig_fw", (i, e), after[i][e] + change, "<=", A - e)
    for i, j in sorted(instance.precedence):
        for e in range(A):
            terms = before[j][e] + [(model.column(("z", i, m, e)), e + 1) for m in M[i]]
            model.add_constr("prec", (i, j, e), terms, "<=", e + 1)
    _tail(model, instance, opts, graph, tw, M)
    if mc == "full":
        _mode_consistency(model, instance, M)
    if opts.time_windows:
        _time_windows(model, instance, tw, M)
    if opts.variable_fixing:
        _variable_fixing(model, instance, graph, M)
    return model
