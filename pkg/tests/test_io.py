import glob
from fractions import Fraction
from importlib import resources
from pathlib import Path

import pytest

from mmsched.core import Instance, Mode, Schedule, example1_instance, remark_instance
from mmsched.io import (ParseError, parse_canonical, parse_mmlib, parse_psplib_mm,
                        parse_schedule, read_instance, scale_renewables, strip_renewables,
                        write_canonical, write_psplib_mm, write_schedule)

CORPUS = Path(str(resources.files("mmsched") / "data" / "corpus"))

MINIMAL = """\
************************************************************************
jobs (incl. supersource/sink ):  3
horizon                       :  4
************************************************************************
PRECEDENCE RELATIONS:
jobnr.    #modes  #successors   successors
   1        1          1           2
   2        2          1           3
   3        1          0
************************************************************************
REQUESTS/DURATIONS:
jnr. mode dur  R 1  N 1
------------------------------------------------------------------------
  1      1     0    0    0
  2      1     3    2    1
         2     1    4    3
  3      1     0    0    0
************************************************************************
RESOURCEAVAILABILITIES:
  R 1  N 1
    4    3
************************************************************************
"""


def corpus(folder):
    return sorted(glob.glob(str(CORPUS / folder / "*.mm")))


def test_minimal_file():
    inst = parse_psplib_mm(MINIMAL)
    assert inst.A == 1 and inst.precedence == frozenset()
    assert inst.modes(1) == (Mode(1, 3, (2,), (1,)), Mode(2, 1, (4,), (3,)))
    assert inst.renewable_capacity == (4,) and inst.nonrenewable_capacity == (3,)
    assert inst.source.format == "psplib-mm"
    assert inst.source.meta()["horizon"] == 4


@pytest.mark.parametrize("folder, A, modes", [("c15", 15, 3), ("j20", 20, 3), ("m2", 16, 2)])
def test_corpus_dimensions(folder, A, modes):
    files = corpus(folder)
    assert files
    for path in files:
        inst = read_instance(path)
        assert inst.A == A and inst.R == 2 and inst.N == 2
        assert set(inst.mode_counts()) == {modes}
        assert inst.source.format == "psplib-mm"


def test_mmlib_files():
    files = corpus("mmlib50")
    assert len(files) == 5
    for path in files:
        inst = read_instance(path)
        assert inst.source.format == "mmlib"
        assert (inst.A, inst.R, inst.N) == (50, 2, 2)
        assert set(inst.mode_counts()) == {3}
        assert inst == parse_mmlib(Path(path).read_text())


def test_dummies_are_stripped():
    inst = read_instance(corpus("c15")[0])
    jobs = inst.source.meta()["jobs"]
    assert jobs == inst.A + 2
    assert all(1 <= i <= inst.A and 1 <= j <= inst.A for i, j in inst.precedence)


@pytest.mark.parametrize("path", corpus("c15") + corpus("j20") + corpus("m2") + corpus("mmlib50"))
def test_round_trips(path):
    inst = read_instance(path)
    assert parse_canonical(write_canonical(inst)) == inst
    assert parse_psplib_mm(write_psplib_mm(inst)) == inst


def test_canonical_keeps_fractions_and_odd_mode_ids():
    inst = Instance(((Mode(3, Fraction(3, 2), (1,)), Mode(7, 2, (0,))),), (2,), ())
    text = write_canonical(inst)
    assert "3/2" in text
    assert parse_canonical(text) == inst


def test_read_instance_detects_formats(tmp_path):
    canon = tmp_path / "ex.txt"
    canon.write_text(write_canonical(example1_instance()))
    assert read_instance(canon) == example1_instance()
    mm = tmp_path / "tiny.mm"
    mm.write_text(MINIMAL)
    assert read_instance(mm).A == 1


@pytest.mark.parametrize("text, line", [
    (MINIMAL.replace("   2        2          1           3",
                     "   2        2          2           3"), 8),
    (MINIMAL.replace("  2      1     3    2    1", "  2      1     x    2    1"), 15),
    (MINIMAL.replace("    4    3\n", "    4\n"), 21),
    (MINIMAL.replace("  3      1     0    0    0", "  3      1     5    0    0"), None),
], ids=["successor-count", "non-numeric", "capacity-count", "dummy-duration"])
def test_malformed_files(text, line):
    with pytest.raises(ParseError) as err:
        parse_psplib_mm(text)
    if line is not None:
        assert err.value.line == line


def test_missing_section():
    with pytest.raises(ParseError, match="REQUESTS"):
        parse_psplib_mm(MINIMAL.replace("REQUESTS/DURATIONS:", "REQUESTS:"))


def test_job_count_must_match_header():
    with pytest.raises(ParseError, match="header"):
        parse_psplib_mm(MINIMAL.replace(":  3", ":  4", 1))


def test_canonical_errors():
    with pytest.raises(ParseError):
        parse_canonical("not a header\n")
    bad = write_canonical(example1_instance()).replace("prec 1 2", "prec 1")
    with pytest.raises(ParseError, match="prec"):
        parse_canonical(bad)


def test_scale():
    ex = scale_renewables(example1_instance(), 10)
    assert ex.B(1) == 10
    assert all(ex.b(i, m, 1) == 10 for i in (1, 2) for m in (1, 2))
    assert [m.duration for m in ex.modes(1)] == [1, 2]
    assert ex.name == "example1_d"
    assert scale_renewables(example1_instance(), 1) == example1_instance()
    with pytest.raises(ValueError):
        scale_renewables(example1_instance(), 0)


def test_strip():
    m2 = read_instance(corpus("m2")[0])
    mn = strip_renewables(m2)
    assert (mn.R, mn.N, mn.A) == (0, 2, 16)
    assert set(mn.mode_counts()) == {2}
    assert strip_renewables(mn) == mn
    ex = strip_renewables(example1_instance())
    assert ex.R == 0 and ex.N == 0


def test_schedule_round_trip():
    inst = remark_instance()
    sched = Schedule.of(inst, (0, 1, 2, Fraction(7, 2)), (1, 1, 1, 2))
    back = parse_schedule(write_schedule(sched), inst)
    assert back == sched


def test_schedule_errors():
    inst = example1_instance()
    with pytest.raises(ParseError, match="twice"):
        parse_schedule("1 0 1\n1 1 1\n", inst)
    with pytest.raises(ParseError, match="missing"):
        parse_schedule("1 0 1\n", inst)
    with pytest.raises(ParseError):
        parse_schedule("1 zero 1\n2 1 1\n", inst)
