"""Named points: the two Example 1 solutions and the zero-makespan LP point."""
from __future__ import annotations

from fractions import Fraction

from ..core import Instance
from ..milp import MilpModel, key_name

# Start/end event solutions of the two-activity example, nonzeros only.
# A starts activity 1 in mode 2 but ends it in mode 1, so every event time is 0.
SOLUTION_A = {
    ("x", 1, 2, 0): 1, ("y", 1, 1, 1): 1,
    ("x", 2, 2, 1): 1, ("y", 2, 1, 2): 1,
    ("r", 0, 1): 1, ("r", 1, 1): 1,
}
# B runs both activities in mode 1 back to back.
SOLUTION_B = {
    ("x", 1, 1, 0): 1, ("y", 1, 1, 1): 1,
    ("x", 2, 1, 1): 1, ("y", 2, 1, 2): 1,
    ("s", 1): 1, ("s", 2): 2,
    ("r", 0, 1): 1, ("r", 1, 1): 1,
}


def certificate_points() -> dict[str, dict]:
    """Solution A and Solution B as sparse ``name -> value`` maps (missing = 0)."""
    return {
        "solution_a": {key_name(k): v for k, v in SOLUTION_A.items()},
        "solution_b": {key_name(k): v for k, v in SOLUTION_B.items()},
    }


def complete(model: MilpModel, sparse: dict) -> dict:
    """Fill a sparse point with zeros for every other model variable."""
    return model.point(sparse, default=0)


def lemma1_point(instance: Instance) -> dict:
    """Zero-makespan point of the relaxed on/off event model.

    Every activity-mode is active at every event with weight ``1/(|M_i| A)``,
    all event times are 0 and ``r_ik`` equals the per-event non-renewable use.
    """
    A = instance.A
    point = {}
    for i in range(1, A + 1):
        z = Fraction(1, len(instance.modes(i)) * A)
        for m in instance.mode_ids(i):
            for e in range(A):
                point[key_name(("z", i, m, e))] = z
        for k in range(1, instance.N + 1):
            point[key_name(("r", i, k))] = sum(instance.w(i, m, k) * z
                                               for m in instance.mode_ids(i))
    for e in range(A + 1):
        point[key_name(("s", e))] = 0
    return point
