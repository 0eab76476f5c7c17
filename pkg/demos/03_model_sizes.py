"""
How large is each formulation?
==============================

Variables and rows of every model on a 15-activity and a 20-activity
corpus instance, with and without the preprocessing enhancements.
"""

from importlib import resources

from mmsched import build_model, parse_model_spec, read_instance, stats

corpus = resources.files("mmsched") / "data" / "corpus"
labels = ["SEE", "SEE-A", "RSEE", "OOE", "OOE-MC", "OOE-A", "OOE-A-TW-VF",
          "FCT-W", "FCT-W-TW-RC", "FCT-S", "FCT-S-AUX"]

for name in ("c15/c1501_1.mm", "j20/j2001_1.mm"):
    inst = read_instance(str(corpus / name))
    print(f"\n{name}: A={inst.A}, modes per activity={set(inst.mode_counts())}")
    for label in labels:
        kind, opts = parse_model_spec(label)
        st = stats(build_model(kind, inst, opts))
        print(f"  {label:12s} vars={st.variables:6d} binaries={st.binaries:6d} "
              f"rows={st.constraints:7d} nonzeros={st.nonzeros:8d}")
