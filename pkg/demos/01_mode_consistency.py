"""
Why start/end event models need mode consistency rows
======================================================

Two activities, one renewable resource. Each can run fast in mode 1 or
slowly in mode 2. Without rows tying the start mode to the end mode, the
solver starts an activity in one mode and ends it in another, and the
makespan collapses to zero.
"""

from mmsched import (FormulationOptions, build_model, certificate_points, eval_point,
                     example1_instance, solve, SolveRequest)
from mmsched.formulations import complete, decode

inst = example1_instance()
for i in range(1, inst.A + 1):
    print(f"activity {i}:", [(m.id, m.duration, m.renewable) for m in inst.modes(i)])

# solve the start/end event model with and without the rows
for mc in ("none", "full"):
    model = build_model("see", inst, FormulationOptions(mode_consistency=mc))
    out = solve(SolveRequest(model, time_limit=30))
    print(f"mode consistency {mc:4s}: status {out.status}, makespan {out.objective:g}")

# the zero-makespan point, checked row by row
plain = build_model("see", inst, FormulationOptions(mode_consistency="none"))
guarded = build_model("see", inst, FormulationOptions(mode_consistency="full"))
point = certificate_points()["solution_a"]
print("solution A without the rows:", eval_point(plain, complete(plain, point)).feasible)
print("solution A with the rows violates:", eval_point(guarded, complete(guarded, point)).violated())

# decoding refuses the point because activity 1 changes mode mid-way
try:
    decode("see", inst, complete(plain, point))
except ValueError as exc:
    print("decode:", exc)
