import importlib.util
import shlex
import sys
from pathlib import Path

import pytest

from mmsched.core import Instance, Mode, example1_instance, remark_instance, validate_schedule
from mmsched.formulations import FormulationOptions, build_model, decode
from mmsched.milp import BINARY, MilpModel
from mmsched.solve import (ENV_COMMAND, ProcessBackend, ScipyBackend, SolutionParseError,
                           SolveRequest, get_backend, polish, presolve_setting, read_solution,
                           solve, write_solution)

FAKE = Path(__file__).parent / "data" / "fake_solver.py"


def fake(mode):
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(FAKE))} {mode} {{model}} {{solution}}"


def see():
    return build_model("see", example1_instance())


def test_scipy_backend_optimum():
    out = solve(SolveRequest(see(), 30, backend=ScipyBackend()))
    assert out.status == "optimal" and out.backend == "scipy"
    assert out.objective == pytest.approx(2)
    sched = decode("see", example1_instance(), out.point)
    assert sched.makespan == 2 and validate_schedule(example1_instance(), sched).feasible


def test_flawed_model_reaches_zero():
    out = solve(SolveRequest(build_model("see", remark_instance(), FormulationOptions("none")),
                             30))
    assert out.status == "optimal" and out.objective == pytest.approx(0)


def test_relaxation():
    out = solve(SolveRequest(build_model("ooe", example1_instance()), 30, relaxation=True))
    assert out.status == "optimal" and out.objective == pytest.approx(0)


def test_infeasible_model():
    m = MilpModel("nothing")
    m.add_var(("x",), BINARY, 0, 1)
    m.add_constr("c", (), [(("x",), 1)], ">=", 2)
    assert solve(SolveRequest(m, 10)).status == "infeasible"


def test_process_backend_with_shim():
    pytest.importorskip("highspy")
    out = solve(SolveRequest(see(), 30, backend=ProcessBackend()))
    assert out.status == "optimal" and out.backend == "process"
    assert decode("see", example1_instance(), out.point).makespan == 2


def test_process_backend_lp_format():
    pytest.importorskip("highspy")
    out = solve(SolveRequest(see(), 30, backend=ProcessBackend(fmt="lp")))
    assert out.status == "optimal"


def test_workdir_keeps_files(tmp_path):
    pytest.importorskip("highspy")
    solve(SolveRequest(see(), 30, backend=ProcessBackend(), workdir=str(tmp_path)))
    assert sorted(p.suffix for p in tmp_path.iterdir()) == [".mps", ".sol"]


def test_bad_command_is_an_error():
    out = solve(SolveRequest(see(), 10, backend=ProcessBackend(fake("crash"))))
    assert out.status == "error" and "license expired" in out.message
    out = solve(SolveRequest(see(), 10, backend=ProcessBackend("no-such-solver-binary {model}")))
    assert out.status == "error"


@pytest.mark.parametrize("mode, text", [("garbage", "unparseable"), ("silent", "no solution"),
                                        ("novalues", "no values")])
def test_broken_solution_files(mode, text):
    out = solve(SolveRequest(see(), 10, backend=ProcessBackend(fake(mode))))
    assert out.status == "error" and text in out.message


def test_wrong_point_fails_verification():
    out = solve(SolveRequest(see(), 10, backend=ProcessBackend(fake("zeros"))))
    assert out.status == "error"
    assert out.message.startswith("verification failed")
    assert out.violations


def test_reported_infeasibility_passes_through():
    out = solve(SolveRequest(see(), 10, backend=ProcessBackend(fake("infeasible"))))
    assert out.status == "infeasible" and out.point is None


def test_environment_template(monkeypatch):
    monkeypatch.setenv(ENV_COMMAND, fake("infeasible"))
    backend = get_backend()
    assert isinstance(backend, ProcessBackend) and backend.command == fake("infeasible")
    monkeypatch.delenv(ENV_COMMAND)
    want = "highspy" if importlib.util.find_spec("highspy") else "scipy"
    assert get_backend().name == want
    with pytest.raises(ValueError):
        get_backend("gurobi")


def test_solution_format_round_trip(tmp_path):
    path = tmp_path / "x.sol"
    write_solution(path, "feasible", 3.0, 2.5, [("x_1_1_0", 1.0), ("s_2", 3.0)])
    raw = read_solution(path.read_text())
    assert (raw.status, raw.objective, raw.bound) == ("feasible", 3.0, 2.5)
    assert raw.values == {"x_1_1_0": 1.0, "s_2": 3.0}
    with pytest.raises(SolutionParseError):
        read_solution("#objective 1\n")
    with pytest.raises(SolutionParseError):
        read_solution("#status maybe\n")


def test_request_validation():
    with pytest.raises(ValueError):
        SolveRequest(see(), 0)


def test_highspy_backend():
    pytest.importorskip("highspy")
    out = solve(SolveRequest(see(), 30, backend="highspy"))
    assert out.status == "optimal" and out.backend == "highspy" and out.objective == 2
    out = solve(SolveRequest(see(), 30, backend="highspy", relaxation=True))
    assert out.status == "optimal"


def one_activity():
    # mode 1: slow, no renewable use; mode 2: fast, uses part of the capacity
    return Instance(((Mode(1, 2, (0,)), Mode(2, 1, (4,))),), (7,), ())


@pytest.mark.parametrize("backend", ["scipy", "highspy", "highs"])
def test_strong_flow_model_optimum(backend):
    # a presolve defect in some bundled HiGHS builds reported 2 here
    if backend != "scipy":
        pytest.importorskip("highspy")
    out = solve(SolveRequest(build_model("fct-s", one_activity()), 30, backend=backend))
    assert out.status == "optimal" and out.objective == 1


def rnd129():
    # from the random suite; HiGHS presolve reported makespan 5 here
    return Instance(((Mode(1, 2, (1,), (4,)), Mode(2, 4, (2,), (4,))),
                     (Mode(1, 1, (0,), (4,)), Mode(2, 2, (4,), (1,)), Mode(3, 5, (0,), (2,))),
                     (Mode(1, 3, (1,), (1,)), Mode(2, 1, (4,), (1,))),
                     (Mode(1, 3, (2,), (3,)),)), (6,), (9,), frozenset({(2, 3)}))


@pytest.mark.parametrize("backend", ["scipy", "highspy", "highs"])
def test_strong_flow_model_on_suite_instance(backend):
    if backend != "scipy":
        pytest.importorskip("highspy")
    for kind in ("fct-s", "fct-w"):
        out = solve(SolveRequest(build_model(kind, rnd129()), 60, backend=backend))
        assert out.status == "optimal" and out.objective == 4, kind


def test_presolve_hint():
    inst = example1_instance()
    assert presolve_setting(build_model("see", inst))
    assert presolve_setting(build_model("ooe-a", inst))
    for kind in ("fct-w", "fct-s"):
        model = build_model(kind, inst)
        assert not presolve_setting(model)
        assert presolve_setting(model, True)
    assert not presolve_setting(see(), False)


def test_presolve_placeholder():
    # the template learns the hint; an "off" run reports infeasible here
    script = "import sys; open(sys.argv[1], 'w').write('#status ' + " \
             "('infeasible' if sys.argv[2] == 'off' else 'unknown') + chr(10))"
    cmd = f"{shlex.quote(sys.executable)} -c {shlex.quote(script)} {{solution}} {{presolve}}"
    flow = solve(SolveRequest(build_model("fct-w", example1_instance()), 30,
                              backend=ProcessBackend(cmd)))
    event = solve(SolveRequest(see(), 30, backend=ProcessBackend(cmd)))
    assert (flow.status, event.status) == ("infeasible", "unknown")


def test_polish_cleans_near_integral_points():
    model = see()
    exact = solve(SolveRequest(model, 30)).point
    noisy = {k: (v - 1e-7 if v == 1 else v) for k, v in exact.items()}
    noisy["s_2"] = 2.0000004
    clean = polish(model, noisy)
    assert clean["s_2"] == pytest.approx(2, abs=1e-12)
    assert all(clean[v.name] in (0, 1) for v in model.variables if v.kind == BINARY)
    half = dict(exact, x_1_1_0=0.5)
    assert polish(model, half) is None
