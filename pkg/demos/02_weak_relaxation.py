"""
The on/off event relaxation has bound zero
===========================================

Spread every activity evenly over all events and all modes, and set every
event time to zero. The point satisfies the LP relaxation of the on/off
event model on any instance, so its root bound is worthless.
"""

import glob
from importlib import resources

from mmsched import (FormulationOptions, build_model, eval_point, example1_instance,
                     lemma1_point, read_instance, relax)

corpus = str(resources.files("mmsched") / "data" / "corpus")
instances = [example1_instance()] + [read_instance(f) for f in
                                     sorted(glob.glob(corpus + "/c15/*.mm"))[:3]]

for inst in instances:
    point = lemma1_point(inst)
    for mc in ("none", "full"):
        model = relax(build_model("ooe", inst, FormulationOptions(mode_consistency=mc)))
        report = eval_point(model, point, tol=1e-9)
        print(f"{inst.name:10s} MC={mc:4s} rows={len(model.constraints):6d} "
              f"feasible={report.feasible} objective={report.objective}")
