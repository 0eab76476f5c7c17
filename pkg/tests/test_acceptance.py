"""Acceptance criteria 1 to 9, one test each.

Every test records PASS or FAIL in ``conftest.ACCEPTANCE``; the lines are
printed in the terminal summary. Run just this file with::

    pytest tests/test_acceptance.py -v

Criteria 2, 4, 5 and 6 solve models with the default backend (highspy when
installed, else scipy's HiGHS, or the command in MMSCHED_SOLVER_CMD). The
others need no solver, except the short benchmark runs of criterion 9.
"""
import functools
import glob
import json
import time
from importlib import resources
from pathlib import Path

import pytest

from conftest import ACCEPTANCE
from closed_forms import fct_counts, ooe_counts, see_counts
from instances import suite

from mmsched.bench import SUMMARY_FIELDS, BenchConfig, aggregate, run_benchmark
from mmsched.core import Instance, example1_instance, remark_instance, validate_schedule
from mmsched.formulations import (FormulationOptions, build_model, certificate_points, complete,
                                  decode, lemma1_point, needs_mode_choice, parse_model_spec)
from mmsched.io import read_instance, scale_renewables
from mmsched.milp import eval_point, relax, stats
from mmsched.oracle import solve_exact
from mmsched.preprocess import resource_strength
from mmsched.solve import SolveRequest, solve

CORPUS = Path(str(resources.files("mmsched") / "data" / "corpus"))
FROZEN = json.loads((Path(__file__).parent / "data" / "oracle_optima.json").read_text())
# generous: a few suite instances take over a minute in the start/end event models
TIME_LIMIT = 300

# every model that must reproduce the oracle optimum
EXACT_MODELS = ["SEE", "SEE-A", "RSEE", "OOE", "OOE-MC", "OOE-A", "FCT-W", "FCT-S"]
# the same models with the preprocessing enhancements that apply to them
ENHANCED = {"SEE-TW-VF": "SEE", "SEE-A-TW-VF": "SEE-A", "OOE-TW-VF": "OOE",
            "OOE-A-TW-VF": "OOE-A", "FCT-W-TW-RC": "FCT-W", "FCT-S-TW": "FCT-S"}


def criterion(n, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            ACCEPTANCE[n] = (False, title, "")
            t0 = time.perf_counter()
            note = fn(*args, **kwargs)
            took = f"{time.perf_counter() - t0:.1f} s"
            ACCEPTANCE[n] = (True, title, f"{note}, {took}" if note else took)
        return run
    return wrap


def corpus_files(*sets):
    return [f for s in sets for f in sorted(glob.glob(str(CORPUS / s / "*.mm")))]


def solve_spec(spec, inst, relaxation=False):
    kind, opts = parse_model_spec(spec)
    model = build_model(kind, inst, opts)
    out = solve(SolveRequest(model, TIME_LIMIT, relaxation=relaxation))
    return kind, opts, out


def checked(spec, inst):
    """``optimum`` with failures turned into a description, so a run reports all of them."""
    try:
        return optimum(spec, inst)
    except AssertionError as exc:
        return f"failed: {exc}"


def optimum(spec, inst):
    """Optimal makespan of ``spec`` on ``inst`` after decoding and validation.

    Returns None for a proven infeasible model and raises AssertionError for
    anything that is neither.
    """
    kind, opts, out = solve_spec(spec, inst)
    if out.status == "infeasible":
        return None
    assert out.status == "optimal", f"{spec} on {inst.name}: {out.status} {out.message}"
    sched = decode(kind, inst, out.point, allow_mode_choice=needs_mode_choice(kind, opts))
    report = validate_schedule(inst, sched)
    assert report.feasible, f"{spec} on {inst.name}: {report}"
    assert out.objective == pytest.approx(sched.makespan, abs=1e-6)
    return sched.makespan


@criterion(1, "counterexample certificates without a solver")
def test_criterion_1_counterexample():
    inst = example1_instance()
    point = certificate_points()["solution_a"]
    plain = build_model("see", inst, FormulationOptions(mode_consistency="none"))
    report = eval_point(plain, complete(plain, point))
    assert report.feasible and report.objective == 0
    guarded = build_model("see", inst, FormulationOptions(mode_consistency="full"))
    report = eval_point(guarded, complete(guarded, point))
    assert report.violated() == ["mc_1_2_0", "mc_2_2_1"]
    assert {v.kind for v in report.violations} == {"row"}
    for mc in ("none", "full", "aggregate"):
        model = build_model("see", inst, FormulationOptions(mode_consistency=mc))
        good = eval_point(model, complete(model, certificate_points()["solution_b"]))
        assert good.feasible and good.objective == 2


@criterion(2, "corrected optima 2 and 4 on the two built-in instances")
def test_criterion_2_corrected_optimum():
    models = ["SEE", "SEE-A", "RSEE", "OOE", "OOE-A", "FCT-W", "FCT-S"]
    for inst, want in ((example1_instance(), 2), (remark_instance(), 4)):
        assert solve_exact(inst).makespan == want
        for spec in models:
            assert optimum(spec, inst) == want, spec
    return f"{len(models)} models"


# runtime budget of criterion 3, in seconds
LEMMA1_BUDGET = 5.0


@criterion(3, "zero-makespan point feasible in the relaxed on/off event model")
def test_criterion_3_lemma1():
    t0 = time.perf_counter()
    # Example 1 plus every c15 and m2 file and the first five j20 files
    files = corpus_files("c15", "m2") + corpus_files("j20")[:5]
    instances = [example1_instance()] + [read_instance(f) for f in files]
    assert len(instances) >= 21
    for inst in instances:
        point = lemma1_point(inst)
        for mc in ("none", "full"):
            model = relax(build_model("ooe", inst, FormulationOptions(mode_consistency=mc)))
            report = eval_point(model, point, tol=1e-9)
            assert report.feasible and report.objective == 0, (inst.name, mc)
    took = time.perf_counter() - t0
    assert took < LEMMA1_BUDGET, f"{took:.1f} s over the {LEMMA1_BUDGET:.0f} s budget"
    return f"{len(instances)} instances"


@pytest.fixture(scope="module")
def random_suite():
    instances = suite()
    assert len(instances) == 200
    assert all(i.A <= 7 and max(i.mode_counts()) <= 3 and i.R <= 2 and i.N <= 2
               for i in instances)
    return instances


@pytest.fixture(scope="module")
def base_optima():
    # filled by criterion 4 and reused by criterion 5
    return {}


@criterion(4, "every formulation matches the exact oracle on 200 random instances")
def test_criterion_4_oracle_equivalence(random_suite, base_optima):
    mismatches = []
    for inst in random_suite:
        frozen = FROZEN[inst.name]
        want = solve_exact(inst)
        assert want.status == frozen["status"] and want.makespan == frozen["makespan"]
        for spec in EXACT_MODELS:
            got = checked(spec, inst)
            base_optima[inst.name, spec] = got
            if got != want.makespan:
                mismatches.append((inst.name, spec, got, want.makespan))
    assert not mismatches, mismatches[:10]
    return f"{len(random_suite)} instances x {len(EXACT_MODELS)} models"


@criterion(5, "time windows, variable fixing and incompatible pairs keep the optimum")
def test_criterion_5_enhancements(random_suite, base_optima):
    mismatches = []
    for inst in random_suite:
        for spec, base in ENHANCED.items():
            want = base_optima.get((inst.name, base), FROZEN[inst.name]["makespan"])
            got = checked(spec, inst)
            if got != want:
                mismatches.append((inst.name, spec, got, want))
    assert not mismatches, mismatches[:10]
    return f"{len(random_suite)} instances x {len(ENHANCED)} models"


@criterion(6, "strong flow bounds give an LP bound at least the weak one")
def test_criterion_6_lp_dominance(random_suite):
    worst = float("inf")
    for inst in [example1_instance()] + random_suite:
        bounds = []
        for spec in ("FCT-W", "FCT-S"):
            _, _, out = solve_spec(spec, inst, relaxation=True)
            assert out.status in ("optimal", "infeasible"), (inst.name, spec, out.message)
            bounds.append(float("inf") if out.status == "infeasible" else out.objective)
        weak, strong = bounds
        if weak == float("inf"):
            assert strong == float("inf"), inst.name
            continue
        assert strong >= weak - 1e-6, (inst.name, weak, strong)
        worst = min(worst, strong - weak)
    return f"{len(random_suite) + 1} instances, least margin {worst:.3g}"


@criterion(7, "renewable scaling leaves resource strength unchanged")
def test_criterion_7_scaling():
    checked = 0
    for f in corpus_files("c15", "j20", "mmlib50", "m2"):
        inst = read_instance(f)
        for delta in (2, 10):
            scaled = scale_renewables(inst, delta)
            # re-running the constructor re-checks every instance invariant
            Instance(scaled.activities, scaled.renewable_capacity,
                     scaled.nonrenewable_capacity, scaled.precedence)
            for k in range(1, inst.R + 1):
                rs = resource_strength(inst, k)
                if rs is None:
                    continue
                assert resource_strength(scaled, k) == rs
                checked += 1
    assert checked >= 20
    return f"{checked} resource checks"


@criterion(8, "model sizes equal the closed-form counts")
def test_criterion_8_sizes(random_suite):
    ex = example1_instance()

    def size(kind, opts=None):
        st = stats(build_model(kind, ex, opts))
        return st.variables, st.constraints
    assert size("see") == see_counts(ex) == (21, 33)
    assert size("ooe") == ooe_counts(ex)
    assert size("ooe", FormulationOptions("full")) == ooe_counts(ex, mc=True)
    assert size("fct-w") == fct_counts(ex)
    compared = 0
    others = [read_instance(f) for f in corpus_files("c15", "m2")[::3]]
    for inst in [ex, remark_instance()] + random_suite + others:
        if max(inst.mode_counts()) < 2:
            continue
        agg = stats(build_model("ooe-a", inst)).constraints
        mc = stats(build_model("ooe", inst, FormulationOptions("full"))).constraints
        if inst.A >= 2:
            assert agg < mc, inst.name
        else:
            # one activity, one event: both models have the same rows
            assert agg == mc, inst.name
        compared += 1
    return f"aggregate smaller on {compared} instances"


@criterion(9, "benchmark schema, ranking rule and size columns (no timing targets)")
def test_criterion_9_bench_schema(tmp_path):
    # the published timing columns are not reproduced; only structure and sizes
    files = corpus_files("c15")[:2] + corpus_files("j20")[:1]
    cfg = BenchConfig.from_dict({
        "datasets": {"c15": [files[0], files[1]], "j20": [files[2]]},
        "models": ["SEE", "OOE-A", "FCT-W"], "time_limit": 2,
        "log": str(tmp_path / "runs.csv")})
    records, rows = run_benchmark(cfg)
    assert len(rows) == 9 and len(records) == 6
    assert SUMMARY_FIELDS[:8] == ["Model", "Feas", "Opt", "Best", "dz", "CPU", "Vars", "Cons"]
    for rec in records:
        assert rec.opt <= rec.feas <= rec.instances and rec.best <= rec.feas
    for dataset in ("c15", "j20"):
        ranked = [(r.feas, r.opt, r.best) for r in records if r.dataset == dataset]
        assert ranked == sorted(ranked, reverse=True)
    closed = {"SEE": see_counts, "OOE-A": lambda i: ooe_counts(i, aggregate=True),
              "FCT-W": fct_counts}
    by_stem = {Path(f).stem: read_instance(f) for f in files}
    for rec in records:
        insts = [by_stem[r["instance"]] for r in rows
                 if r["dataset"] == rec.dataset and r["model"] == rec.model]
        want_vars = sum(closed[rec.model](i)[0] for i in insts) / len(insts)
        want_cons = sum(closed[rec.model](i)[1] for i in insts) / len(insts)
        assert rec.vars == want_vars
        assert rec.cons == want_cons
        assert want_vars / 2 <= rec.vars <= want_vars * 2
    # the ranking rule on a constructed log
    fake = [{"dataset": "d", "instance": i, "model": m, "status": s, "makespan": z,
             "cpu": "1", "vars": "1", "cons": "1"}
            for i, m, s, z in [("a", "P", "optimal", "5"), ("a", "Q", "feasible", "6"),
                               ("b", "P", "feasible", "7"), ("b", "Q", "time_limit", "")]]
    assert [r.model for r in aggregate(fake)] == ["P", "Q"]
    return "timings are not acceptance targets"
