import csv
import io
import json

import pytest

from mmsched.bench import (BenchConfig, SUMMARY_FIELDS, aggregate, resolve_instances,
                           run_benchmark, write_summary)


def cfg(tmp_path, **kw):
    base = dict(datasets={"tiny": ["example1"]}, models=["SEE", "FCT-W"], time_limit=30,
                log=str(tmp_path / "log.csv"))
    base.update(kw)
    return BenchConfig.from_dict(base, base=str(tmp_path))


def test_example1_two_models(tmp_path):
    records, rows = run_benchmark(cfg(tmp_path, oracle_check=True))
    assert len(rows) == 2 and all(r["oracle"] == "2" for r in rows)
    assert [(r.feas, r.opt, r.best, r.dz) for r in records] == [(1, 1, 1, None)] * 2
    see = next(r for r in records if r.model == "SEE")
    assert see.vars == 21


def test_empty_instance_list(tmp_path):
    records, rows = run_benchmark(cfg(tmp_path, datasets={"none": []}))
    assert records == [] and rows == []


def test_resume_skips_finished_pairs(tmp_path):
    c = cfg(tmp_path, datasets={"tiny": ["example1", "remark"]})
    first, _ = run_benchmark(c)
    seen = []
    again, _ = run_benchmark(c, progress=seen.append)
    assert seen == [] and again == first
    # drop the last log line to simulate an interrupted batch
    lines = (tmp_path / "log.csv").read_text().splitlines(True)
    (tmp_path / "log.csv").write_text("".join(lines[:-1]))
    resumed, _ = run_benchmark(c, progress=seen.append)
    assert len(seen) == 1
    assert [(r.model, r.feas, r.opt, r.best, r.vars, r.cons) for r in resumed] == \
        [(r.model, r.feas, r.opt, r.best, r.vars, r.cons) for r in first]


def test_errors_are_logged_not_raised(tmp_path):
    c = cfg(tmp_path, models=["SEE"], backend={"command": "no-such-binary {model}"})
    records, rows = run_benchmark(c)
    assert rows[0]["status"] == "error"
    assert records[0].feas == 0


def row(inst, model, status, z):
    return {"dataset": "d", "instance": inst, "model": model, "status": status,
            "makespan": "" if z is None else str(z), "cpu": "1", "vars": "10", "cons": "20",
            "options": "", "backend": "scipy", "seed": "0"}


def test_ranking_best_and_dz():
    rows = [row("a", "X", "optimal", 10), row("a", "Y", "feasible", 12),
            row("a", "Z", "optimal", 10),
            row("b", "X", "time_limit", None), row("b", "Y", "feasible", 5),
            row("b", "Z", "feasible", 5)]
    recs = {r.model: r for r in aggregate(rows)}
    assert (recs["X"].feas, recs["X"].opt, recs["X"].best) == (1, 1, 1)
    assert (recs["Y"].feas, recs["Y"].opt, recs["Y"].best) == (2, 0, 1)
    assert (recs["Z"].feas, recs["Z"].opt, recs["Z"].best) == (2, 1, 2)
    assert recs["Y"].dz == pytest.approx((20 + 0) / 2)
    assert recs["Z"].dz == pytest.approx(0) and recs["X"].dz is None
    assert [r.model for r in aggregate(rows)] == ["Z", "Y", "X"]


def test_summary_schema():
    buf = io.StringIO()
    write_summary(aggregate([row("a", "X", "optimal", 3)]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# dz")
    table = list(csv.reader(lines[1:]))
    assert table[0] == SUMMARY_FIELDS
    assert table[0][:8] == ["Model", "Feas", "Opt", "Best", "dz", "CPU", "Vars", "Cons"]
    assert table[1][:4] == ["X", "1", "1", "1"]


def test_config_loading(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"instances": ["example1"], "models": ["OOE-A"]}))
    c = BenchConfig.load(path)
    assert c.datasets == {"default": ["example1"]} and c.base == str(tmp_path)
    with pytest.raises(ValueError):
        BenchConfig.from_dict({"modles": []})
    with pytest.raises(ValueError):
        BenchConfig.from_dict({"models": ["NOPE"]})


def test_resolve_instances(tmp_path):
    assert len(resolve_instances(["corpus:c15/*"])) >= 5
    (tmp_path / "a.mm").write_text("x")
    assert resolve_instances(["*.mm"], str(tmp_path))[0][0] == "a"
    with pytest.raises(FileNotFoundError):
        resolve_instances(["corpus:nothing*"])
