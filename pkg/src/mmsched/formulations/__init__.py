"""Model builders, decoder and certificate points.

Model kinds:

``see``    start/end events, full mode consistency by default
``see-a``  start/end events with aggregate mode consistency
``rsee``   start/end events on cumulative binaries
``ooe``    on/off events, per-mode contiguity
``ooe-a``  on/off events, aggregate contiguity plus mode consistency
``fct-w``  flow model with big-M flow bounds
``fct-s``  flow model with demand-based flow bounds
"""
from __future__ import annotations

from ..core import Instance
from ..milp import MilpModel, paused_gc
from ..preprocess import AonGraph, TimeWindows, build_aon, time_windows
from .certificates import SOLUTION_A, SOLUTION_B, certificate_points, complete, lemma1_point
from .decode import DecodeError, FractionalPointError, ModeInconsistencyError, decode
from .fct import big_m_flow, big_m_start, build_fct
from .ooe import build_ooe, build_ooe_a
from .options import EventScheme, FormulationOptions, OptionError
from .see import build_rsee, build_see

MODEL_KINDS = ("see", "see-a", "rsee", "ooe", "ooe-a", "fct-w", "fct-s")
MODE_CONSISTENT = ("see", "see-a", "rsee", "ooe", "ooe-a", "fct-w", "fct-s")

_SUFFIXES = {
    "TW": {"time_windows": True},
    "VF": {"variable_fixing": True},
    "RC": {"incompatible_pairs": True},
    "MC": {"mode_consistency": "full"},
    "NOMC": {"mode_consistency": "none"},
    "SE": {"strong_event_time": True},
    "AUX": {"fct_linearization": "auxiliary"},
}


def build_model(kind: str, instance: Instance, opts: FormulationOptions | None = None,
                graph: AonGraph | None = None, tw: TimeWindows | None = None) -> MilpModel:
    """Build the model ``kind`` for ``instance``."""
    with paused_gc():
        return _build(kind, instance, opts, graph, tw)


def _build(kind, instance, opts, graph, tw):
    opts = opts or FormulationOptions()
    kind = kind.lower()
    if kind not in MODEL_KINDS:
        raise OptionError(f"unknown model {kind!r}; expected one of {MODEL_KINDS}")
    graph = graph or build_aon(instance)
    if kind == "rsee":
        return build_rsee(instance, graph, opts)
    tw = tw or time_windows(instance, graph)
    if kind == "see":
        return build_see(instance, graph, tw, opts)
    if kind == "see-a":
        if opts.mode_consistency not in (None, "aggregate"):
            raise OptionError("see-a always uses aggregate mode consistency")
        return build_see(instance, graph, tw, opts.with_(mode_consistency="aggregate"))
    if kind == "ooe":
        return build_ooe(instance, graph, tw, opts)
    if kind == "ooe-a":
        return build_ooe_a(instance, graph, tw, opts)
    flow = "strong" if kind == "fct-s" else "weak"
    return build_fct(instance, graph, tw, opts.with_(flow_bound=flow))


def parse_model_spec(spec: str) -> tuple[str, FormulationOptions]:
    """Split a model label such as ``FCT-W-TW-RC`` or ``OOE-MC`` into kind and options."""
    text = spec.strip().lower()
    kind = max((k for k in MODEL_KINDS if text == k or text.startswith(k + "-")),
               key=len, default=None)
    if kind is None:
        raise OptionError(f"unknown model label {spec!r}")
    changes = {}
    rest = text[len(kind):].strip("-")
    for token in filter(None, rest.split("-")):
        try:
            changes.update(_SUFFIXES[token.upper()])
        except KeyError:
            raise OptionError(f"unknown option {token!r} in {spec!r}") from None
    return kind, FormulationOptions(**changes)


def model_label(kind: str, opts: FormulationOptions) -> str:
    """Inverse of :func:`parse_model_spec` for the options it understands."""
    parts = [kind.upper()]
    if opts.mode_consistency == "full" and kind in ("ooe",):
        parts.append("MC")
    if opts.mode_consistency == "none" and kind in ("see", "ooe-a"):
        parts.append("NOMC")
    for token, flag in (("SE", "strong_event_time"), ("TW", "time_windows"),
                        ("VF", "variable_fixing"), ("RC", "incompatible_pairs")):
        if getattr(opts, flag):
            parts.append(token)
    if opts.fct_linearization == "auxiliary":
        parts.append("AUX")
    return "-".join(parts)


def needs_mode_choice(kind: str, opts: FormulationOptions) -> bool:
    """True for the on/off model without mode consistency, whose optimal points
    may carry several modes sharing one active block."""
    return kind == "ooe" and (opts.mode_consistency or "none") == "none"


__all__ = [
    "MODEL_KINDS", "MODE_CONSISTENT", "FormulationOptions", "EventScheme", "OptionError",
    "build_model", "build_see", "build_rsee", "build_ooe", "build_ooe_a", "build_fct",
    "big_m_start", "big_m_flow", "parse_model_spec", "model_label", "needs_mode_choice",
    "decode", "DecodeError", "ModeInconsistencyError", "FractionalPointError",
    "certificate_points", "complete", "lemma1_point", "SOLUTION_A", "SOLUTION_B",
]
