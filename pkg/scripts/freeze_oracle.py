"""Recompute and freeze the exact optima of the random test suite.

Writes ``tests/data/oracle_optima.json``; run from the repository root.
"""
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from instances import fingerprint, suite  # noqa: E402

from mmsched.oracle import solve_exact  # noqa: E402

out = {}
t0 = time.perf_counter()
for inst in suite():
    res = solve_exact(inst)
    assert res.status != "unknown", inst.name
    out[inst.name] = {"fingerprint": fingerprint(inst), "status": res.status,
                      "makespan": res.makespan, "A": inst.A}
target = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracle_optima.json"
target.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
print(f"{len(out)} optima frozen in {time.perf_counter() - t0:.1f}s -> {target}")
