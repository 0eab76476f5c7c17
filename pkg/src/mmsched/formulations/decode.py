"""Turn solver points back into schedules."""
from __future__ import annotations

from typing import Mapping

from ..core import Instance, Schedule
from ..milp import MilpModel, key_name


class DecodeError(ValueError):
    pass


class ModeInconsistencyError(DecodeError):
    """The point does not determine a single mode for some activity."""


class FractionalPointError(DecodeError):
    pass


def _reader(point: Mapping, tol):
    def binary(key) -> int:
        v = point.get(key_name(key), 0)
        r = round(v)
        if abs(v - r) > tol or r not in (0, 1):
            raise FractionalPointError(f"{key_name(key)} = {v} is not binary")
        return int(r)

    def cont(key):
        v = point.get(key_name(key), 0)
        r = round(v)
        return r if abs(v - r) <= tol else v
    return binary, cont


def _one(hits, what, i):
    if len(hits) != 1:
        raise DecodeError(f"activity {i}: expected exactly one {what}, found {len(hits)}")
    return hits[0]


def _see(instance, binary, cont):
    A = instance.A
    start, modes = [], []
    for i in range(1, A + 1):
        ms = instance.mode_ids(i)
        m, e = _one([(m, e) for m in ms for e in range(A) if binary(("x", i, m, e))],
                    "start assignment", i)
        m_end, _ = _one([(m, f) for m in ms for f in range(1, A + 1) if binary(("y", i, m, f))],
                        "end assignment", i)
        if m_end != m:
            raise ModeInconsistencyError(
                f"activity {i} starts in mode {m} but ends in mode {m_end}")
        start.append(cont(("s", e)))
        modes.append(m)
    return start, modes


def _rsee(instance, binary, cont):
    A = instance.A
    start, modes = [], []
    for i in range(1, A + 1):
        ms = instance.mode_ids(i)
        m = _one([m for m in ms if binary(("xt", i, m, A - 1))], "start mode", i)
        m_end = _one([m for m in ms if binary(("yt", i, m, A))], "end mode", i)
        if m_end != m:
            raise ModeInconsistencyError(
                f"activity {i} starts in mode {m} but ends in mode {m_end}")
        e = next(e for e in range(A) if binary(("xt", i, m, e)))
        start.append(cont(("s", e)))
        modes.append(m)
    return start, modes


def _ooe(instance, binary, cont, allow_mode_choice):
    A = instance.A
    start, modes = [], []
    for i in range(1, A + 1):
        blocks = {}
        for m in instance.mode_ids(i):
            active = tuple(e for e in range(A) if binary(("z", i, m, e)))
            if active:
                blocks[m] = active
        if not blocks:
            raise DecodeError(f"activity {i} is never active")
        if len(blocks) > 1:
            same = len(set(blocks.values())) == 1
            if not (allow_mode_choice and same):
                raise ModeInconsistencyError(
                    f"activity {i} is active in modes {sorted(blocks)} "
                    f"at events {[list(b) for b in blocks.values()]}")
        m = min(blocks)
        start.append(cont(("s", blocks[m][0])))
        modes.append(m)
    return start, modes


def _fct(instance, binary, cont):
    start, modes = [], []
    for i in range(1, instance.A + 1):
        m = _one([m for m in instance.mode_ids(i) if binary(("x", i, m))], "mode", i)
        start.append(cont(("s", i)))
        modes.append(m)
    return start, modes


def decode(kind: str | MilpModel, instance: Instance, point: Mapping, tol=1e-6,
           allow_mode_choice: bool = False) -> Schedule:
    """Schedule encoded by an integer point (``name -> value``).

    ``kind`` is a model kind (``see``, ``see-a``, ``rsee``, ``ooe``,
    ``ooe-a``, ``fct-w``, ``fct-s``) or a built model. Ambiguous mode choices
    raise :class:`ModeInconsistencyError`; ``allow_mode_choice`` accepts the
    one benign case of the on/off model without mode consistency, where
    several modes of an activity share the same active block, and picks the
    lowest mode.
    """
    if isinstance(kind, MilpModel):
        kind = kind.meta["kind"]
    binary, cont = _reader(point, tol)
    if kind in ("see", "see-a"):
        start, modes = _see(instance, binary, cont)
    elif kind == "rsee":
        start, modes = _rsee(instance, binary, cont)
    elif kind in ("ooe", "ooe-a"):
        start, modes = _ooe(instance, binary, cont, allow_mode_choice)
    elif kind in ("fct-w", "fct-s"):
        start, modes = _fct(instance, binary, cont)
    else:
        raise DecodeError(f"unknown model kind {kind!r}")
    return Schedule.of(instance, start, modes)
