"""Solve an MPS/LP file with highspy and write the neutral solution file.

Usage::

    python -m mmsched.backends.highs_shim model.mps solution.sol --time-limit 300 --presolve on
"""
from __future__ import annotations

import argparse
import sys

from ..solve import write_solution
from .highspy_backend import highs_status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="highs_shim", description=__doc__.splitlines()[0])
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--time-limit", type=float, default=300.0)
    ap.add_argument("--gap", type=float, default=1e-6)
    ap.add_argument("--presolve", choices=("on", "off"), default="on")
    args = ap.parse_args(argv)
    try:
        import highspy
    except ImportError:
        print("highspy is not installed (pip install highspy)", file=sys.stderr)
        return 2

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", args.gap)
    h.setOptionValue("presolve", args.presolve)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.model}", file=sys.stderr)
        return 2
    h.run()
    status, objective, bound, cols = highs_status(h)
    values = () if cols is None else zip(h.getLp().col_names_, cols)
    write_solution(args.solution, status, objective, bound, values)
    return 0


if __name__ == "__main__":
    sys.exit(main())
