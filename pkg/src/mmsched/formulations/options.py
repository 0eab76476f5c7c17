from __future__ import annotations

from dataclasses import dataclass, replace

MODE_CONSISTENCY = ("none", "full", "aggregate")
FLOW_BOUNDS = ("weak", "strong")
LINEARIZATIONS = ("triple", "auxiliary")


class OptionError(ValueError):
    """Unsupported option combination for a formulation."""


@dataclass(frozen=True)
class FormulationOptions:
    """Switches shared by all builders.

    ``mode_consistency=None`` picks the builder's own default: full for the
    start/end event model, none for the on/off event model, and always-on for
    the aggregate on/off event model.
    """

    mode_consistency: str | None = None
    time_windows: bool = False
    variable_fixing: bool = False
    incompatible_pairs: bool = False
    strong_event_time: bool = False
    flow_bound: str = "weak"
    fct_linearization: str = "triple"
    experimental: bool = False

    def __post_init__(self):
        if self.mode_consistency not in (None,) + MODE_CONSISTENCY:
            raise OptionError(f"mode_consistency must be one of {MODE_CONSISTENCY}")
        if self.flow_bound not in FLOW_BOUNDS:
            raise OptionError(f"flow_bound must be one of {FLOW_BOUNDS}")
        if self.fct_linearization not in LINEARIZATIONS:
            raise OptionError(f"fct_linearization must be one of {LINEARIZATIONS}")

    def with_(self, **changes) -> "FormulationOptions":
        return replace(self, **changes)

    def tag(self) -> str:
        parts = []
        if self.mode_consistency:
            parts.append(f"mc={self.mode_consistency}")
        for flag in ("time_windows", "variable_fixing", "incompatible_pairs",
                     "strong_event_time", "experimental"):
            if getattr(self, flag):
                parts.append(flag)
        if self.flow_bound != "weak":
            parts.append(f"flow={self.flow_bound}")
        if self.fct_linearization != "triple":
            parts.append(f"lin={self.fct_linearization}")
        return ",".join(parts) or "default"


@dataclass(frozen=True)
class EventScheme:
    """Event indices of an event-based model.

    Start/end event models use events ``0..A``; on/off event models use
    ``0..A-1`` for activity events plus the makespan slot ``A``.
    """

    A: int
    kind: str  # "start-end" or "on-off"

    @property
    def events(self) -> range:
        return range(self.A + 1)

    @property
    def activity_events(self) -> range:
        return range(self.A + 1) if self.kind == "start-end" else range(self.A)

    def pairs(self) -> list[tuple[int, int]]:
        first = range(self.A + 1) if self.kind == "start-end" else range(self.A)
        return [(e, f) for e in first for f in range(e + 1, self.A + 1)]
