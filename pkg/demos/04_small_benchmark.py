"""
A small benchmark with the batch harness
========================================

Runs three models on the two built-in instances and two corpus instances,
then prints the summary table ranked by Feas, Opt and Best. The per-run log
is kept, so running the script again resumes instead of re-solving.
"""

import sys
import tempfile
from pathlib import Path

from mmsched.bench import BenchConfig, run_benchmark, write_summary

log = Path(tempfile.gettempdir()) / "mmsched_demo_runs.csv"
cfg = BenchConfig.from_dict({
    "datasets": {"tiny": ["example1", "remark"],
                 "m2": ["corpus:m2/m201_1.mm", "corpus:m2/m202_1.mm"]},
    "models": ["SEE", "OOE-A-TW", "FCT-W-TW"],
    "time_limit": 20,
    "oracle_check": True,
    "log": str(log),
})

records, rows = run_benchmark(cfg, progress=lambda r: print(
    r["dataset"], r["instance"], r["model"], r["status"], r["makespan"], file=sys.stderr))
write_summary(records, sys.stdout)
print(f"\nper-run log: {log} ({len(rows)} runs)")
