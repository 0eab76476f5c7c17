from fractions import Fraction
from pathlib import Path

import pytest

from mmsched.core import example1_instance
from mmsched.formulations import build_model, certificate_points, complete
from mmsched.milp import (BINARY, CONTINUOUS, INF, MilpModel, MissingAssignmentError,
                          ModelError, eval_point, export_names, format_number, relax, stats,
                          write_lp, write_mps)

GOLDEN = Path(__file__).parent / "data" / "golden"


def tiny():
    m = MilpModel("tiny")
    m.add_var(("x",), BINARY, 0, 1)
    m.add_constr("c", (1,), [(("x",), 1)], ">=", 1)
    m.set_objective([(("x",), 1)])
    return m


def mixed():
    m = MilpModel("mixed")
    m.add_var(("s", 0), CONTINUOUS, 0, 7)
    m.add_var(("f", 1, 2, 1), CONTINUOUS, -INF, INF)
    m.add_var(("y", 1, 2), BINARY, 0, 1)
    m.fix(("y", 1, 2), 1)
    m.add_constr("cap", (1, 2), [(("f", 1, 2, 1), 1), (("y", 1, 2), Fraction(-5, 2))], "<=", 0)
    m.add_constr("eq", (0,), [(("s", 0), 1)], "=", Fraction(1, 3))
    m.set_objective([(("s", 0), 1)])
    return m


@pytest.mark.parametrize("build, writer, golden", [
    (tiny, write_mps, "tiny.mps"),
    (tiny, lambda m: write_mps(m, fixed=True), "tiny_fixed.mps"),
    (tiny, write_lp, "tiny.lp"),
    (mixed, write_mps, "mixed.mps"),
    (mixed, write_lp, "mixed.lp"),
])
def test_golden_files(build, writer, golden):
    assert writer(build()) == (GOLDEN / golden).read_text()


def test_export_is_deterministic():
    a = build_model("see", example1_instance())
    b = build_model("see", example1_instance())
    assert write_mps(a) == write_mps(b)
    assert write_lp(a) == write_lp(b)


def test_names_follow_keys():
    m = build_model("fct-w", example1_instance())
    assert m.by_name("f_1_2_1").key == ("f", 1, 2, 1)
    assert m.by_name("x_1_2").kind == BINARY


def test_fixed_names_are_shortened_without_collisions():
    m = build_model("see", example1_instance())
    cols, rows = export_names(m, 8)
    assert all(len(n) <= 8 for n in cols + rows)
    assert len(set(rows)) == len(rows)
    assert "ENDATA" in write_mps(m, fixed=True)


def test_long_names_keep_distinct_suffixes():
    m = MilpModel()
    m.add_var(("abcdefgh", 1))
    m.add_var(("abcdefgh", 2))
    cols, _ = export_names(m, 8)
    assert len(set(cols)) == 2 and all(len(c) == 8 for c in cols)


def test_reserved_row_name():
    m2 = MilpModel()
    m2.add_var(("v",))
    m2.add_constr("OBJ", (), [(("v",), 1)], ">=", 0)
    with pytest.raises(ModelError, match="reserved"):
        export_names(m2)


def test_model_errors():
    m = MilpModel()
    m.add_var(("x",), BINARY, 0, 1)
    with pytest.raises(ModelError, match="duplicate"):
        m.add_var(("x",))
    with pytest.raises(ModelError, match="empty domain"):
        m.add_var(("z",), CONTINUOUS, 2, 1)
    with pytest.raises(ModelError, match="undeclared"):
        m.add_constr("c", (), [(("nope",), 1)], "<=", 0)
    with pytest.raises(ModelError, match="sense"):
        m.add_constr("c", (), [(("x",), 1)], "<", 0)
    m.add_constr("c", (), [(("x",), 1)], "<=", 0)
    with pytest.raises(ModelError, match="duplicate constraint"):
        m.add_constr("c", (), [(("x",), 1)], "<=", 0)
    with pytest.raises(ModelError, match="outside"):
        m.fix(("x",), 2)


def test_terms_may_name_columns_by_index():
    m = MilpModel()
    m.add_var(("a",))
    m.add_var(("b",))
    b = m.column(("b",))
    con = m.add_constr("c", (1, 2), [(b, 2), (("a",), 1), (b, -1)], "<=", 1)
    assert b == 1 and con.coeffs == {1: 1, 0: 1}
    assert con.name == "c_1_2" and m.constraint("c_1_2") is con
    with pytest.raises(ModelError, match="out of range"):
        m.add_constr("d", (), [(2, 1)], "<=", 1)
    with pytest.raises(ModelError, match="out of range"):
        m.add_constr("d", (), [(-1, 1)], "<=", 1)
    # rows are told apart by key; names that coincide are caught on export
    m.add_constr("e_1", (2,), [(0, 1)], "<=", 1)
    m.add_constr("e", (1, 2), [(0, 1)], "<=", 1)
    with pytest.raises(ModelError, match="collision"):
        export_names(m)


def test_terms_are_merged_and_zeros_dropped():
    m = MilpModel()
    m.add_var(("a",))
    m.add_var(("b",))
    con = m.add_constr("c", (), [(("a",), 1), (("a",), 2), (("b",), 0)], "<=", 1)
    assert con.coeffs == {0: 3}


def test_relax():
    m = build_model("see", example1_instance())
    assert stats(m).binaries == 16
    r = relax(m)
    assert stats(r).binaries == 0
    assert stats(r).constraints == stats(m).constraints
    assert [(c.name, c.coeffs, c.sense, c.rhs) for c in r.constraints] == \
        [(c.name, c.coeffs, c.sense, c.rhs) for c in m.constraints]
    assert all(0 <= v.lb and v.ub <= 1 for v, o in zip(r.variables, m.variables)
               if o.kind == BINARY)
    rr = relax(r)
    assert write_mps(rr) == write_mps(r)
    assert stats(m).binaries == 16  # the input is untouched


def test_relax_keeps_fixings():
    m = mixed()
    assert relax(m).var(("y", 1, 2)).lb == 1


def test_stats_recount():
    m = build_model("ooe", example1_instance())
    st = stats(m)
    assert st.nonzeros == sum(len(c.coeffs) for c in m.constraints)
    assert st.variables == len(m.variables)


def test_eval_point():
    m = tiny()
    report = eval_point(m, {"x": 0})
    assert report.violated() == ["c_1"]
    assert report.violations[0].amount == 1
    assert eval_point(m, {"x": 1}).feasible
    assert eval_point(m, {"x": Fraction(1, 2)}).violations[0].amount == Fraction(1, 2)
    half = eval_point(relax(m), {"x": 1})
    assert half.feasible and half.objective == 1
    with pytest.raises(MissingAssignmentError):
        eval_point(m, {})


def test_eval_point_checks_integrality_on_request():
    m = MilpModel()
    m.add_var(("x",), BINARY, 0, 1)
    assert eval_point(m, {"x": 0.5}).feasible
    kinds = [v.kind for v in eval_point(m, {"x": 0.5}, check_integrality=True).violations]
    assert kinds == ["integrality"]


def test_point_helper_rejects_unknown_names():
    m = build_model("see", example1_instance())
    with pytest.raises(MissingAssignmentError):
        m.point({"bogus_1": 1}, default=0)
    full = complete(m, certificate_points()["solution_b"])
    assert len(full) == len(m.variables)


def test_format_number():
    assert format_number(3) == "3"
    assert format_number(Fraction(5, 4)) == "1.25"
    assert format_number(Fraction(-1, 8)) == "-0.125"
    assert float(format_number(Fraction(1, 3))) == pytest.approx(1 / 3, abs=1e-15)


def test_external_reader_recounts(tmp_path):
    highspy = pytest.importorskip("highspy")
    m = build_model("see", example1_instance())
    path = tmp_path / "see.mps"
    path.write_text(write_mps(m))
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    lp = h.getLp()
    assert (lp.num_col_, lp.num_row_) == (stats(m).variables, stats(m).constraints)
