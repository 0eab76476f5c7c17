"""Instance readers and writers, plus derived instance variants.

Two external layouts are read: the PSPLIB multi-mode ``.mm`` layout and the
MMLIB variant of it. Instances are written either back to the PSPLIB layout
or to a small canonical text format that round-trips exactly::

    # mmsched-instance 1
    name example1
    activities 2
    renewable 1
    nonrenewable
    mode 1 1 1 | 1 |
    mode 1 2 2 | 1 |
    mode 2 1 1 | 1 |
    mode 2 2 2 | 1 |
    prec 1 2

A ``mode`` line is ``mode <activity> <mode-id> <duration> | <b_1..b_R> | <w_1..w_N>``.
Numbers may be integers or exact fractions such as ``3/2``.
"""
from __future__ import annotations

import re
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .core import Instance, InstanceSource, Mode, Schedule, exact

CANONICAL_HEADER = "# mmsched-instance 1"


class ParseError(ValueError):
    """Malformed instance text; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-numeric token in {' '.join(tokens)!r}", lineno) from None


def _find(lines, marker, start=0):
    for idx in range(start, len(lines)):
        if lines[idx][1].upper().startswith(marker):
            return idx
    raise ParseError(f"missing section {marker!r}")


def _is_rule(text):
    return bool(text) and set(text) <= set("*-")


def _header_value(lines, key):
    for lineno, text in lines:
        if text.lower().startswith(key) and ":" in text:
            tail = text.split(":", 1)[1].split()
            if tail:
                return _ints(tail[:1], lineno)[0]
    return None


def _parse_mm(text: str, fmt: str, origin: str) -> Instance:
    lines = [(n, raw.strip()) for n, raw in enumerate(text.splitlines(), start=1)]
    lines = [(n, t) for n, t in lines if t]

    header_jobs = _header_value(lines, "jobs")
    horizon = _header_value(lines, "horizon")

    prec_at = _find(lines, "PRECEDENCE RELATIONS")
    req_at = _find(lines, "REQUESTS/DURATIONS", prec_at)
    avail_at = _find(lines, "RESOURCEAVAILABILITIES", req_at)

    # precedence block: skip the column-title line
    succ_rows = []
    for lineno, t in lines[prec_at + 2:req_at]:
        if _is_rule(t):
            continue
        nums = _ints(t.split(), lineno)
        if len(nums) < 3:
            raise ParseError("precedence row needs job, #modes, #successors", lineno)
        job, nmodes, nsucc, succ = nums[0], nums[1], nums[2], nums[3:]
        if len(succ) != nsucc:
            raise ParseError(f"job {job} lists {len(succ)} successors, header says {nsucc}",
                             lineno)
        succ_rows.append((lineno, job, nmodes, succ))
    jobs = len(succ_rows)
    if header_jobs is not None and header_jobs != jobs:
        raise ParseError(f"header announces {header_jobs} jobs, found {jobs}")
    if jobs < 3:
        raise ParseError("need source, sink and at least one real job")
    for expect, (lineno, job, _, _) in enumerate(succ_rows, start=1):
        if job != expect:
            raise ParseError(f"expected job {expect}, got {job}", lineno)

    # resource titles from the requests header, e.g. "jobnr. mode duration R 1 R 2 N 1 N 2"
    title_no, title = lines[req_at + 1]
    kinds = re.findall(r"\b([RND])\s*\d+", title)
    if "D" in kinds:
        raise ParseError("doubly constrained resources are not supported", title_no)
    nres = len(kinds)

    mode_rows = []
    for lineno, t in lines[req_at + 2:avail_at]:
        if _is_rule(t):
            continue
        mode_rows.append((lineno, _ints(t.split(), lineno)))

    avail_title_no, avail_title = lines[avail_at + 1]
    avail_kinds = re.findall(r"\b([RND])\s*\d+", avail_title)
    if avail_kinds != kinds:
        raise ParseError("resource columns differ between sections", avail_title_no)
    cap_no, cap_line = lines[avail_at + 2]
    caps = _ints(cap_line.split(), cap_no)
    if len(caps) != nres:
        raise ParseError(f"expected {nres} capacities, got {len(caps)}", cap_no)

    modes_by_job: dict[int, list] = {}
    pos = 0
    for lineno, job, nmodes, _ in succ_rows:
        modes = []
        for mcount in range(nmodes):
            if pos >= len(mode_rows):
                raise ParseError(f"missing mode rows for job {job}", lineno)
            rno, nums = mode_rows[pos]
            pos += 1
            # rows are ragged: first mode row carries the job number
            if len(nums) == nres + 3:
                if nums[0] != job:
                    raise ParseError(f"mode row belongs to job {nums[0]}, expected {job}", rno)
                nums = nums[1:]
            elif len(nums) != nres + 2:
                raise ParseError(f"mode row has {len(nums)} fields", rno)
            mid, dur, dem = nums[0], nums[1], nums[2:]
            if mid != mcount + 1:
                raise ParseError(f"expected mode {mcount + 1}, got {mid}", rno)
            modes.append((mid, dur, dem))
        modes_by_job[job] = modes
    if pos != len(mode_rows):
        raise ParseError("surplus mode rows", mode_rows[pos][0])

    ren_idx = [n for n, kind in enumerate(kinds) if kind == "R"]
    non_idx = [n for n, kind in enumerate(kinds) if kind == "N"]
    for dummy in (1, jobs):
        dm = modes_by_job[dummy]
        if len(dm) != 1 or dm[0][1] != 0 or any(dm[0][2]):
            raise ParseError(f"dummy job {dummy} must have one zero mode")

    activities = []
    for job in range(2, jobs):
        activities.append(tuple(
            Mode(mid, dur, tuple(dem[n] for n in ren_idx), tuple(dem[n] for n in non_idx))
            for mid, dur, dem in modes_by_job[job]))
    prec = set()
    for _, job, _, succ in succ_rows:
        for s in succ:
            if not 1 <= s <= jobs:
                raise ParseError(f"successor {s} of job {job} out of range")
            if job != 1 and s != jobs:
                prec.add((job - 1, s - 1))
    source = InstanceSource(fmt, origin, (("jobs", jobs), ("horizon", horizon)))
    name = Path(origin).stem if origin else ""
    return Instance.create(activities, [caps[n] for n in ren_idx], [caps[n] for n in non_idx],
                           prec, name=name, source=source)


def parse_psplib_mm(text: str, origin: str = "") -> Instance:
    """Parse a PSPLIB multi-mode file; the dummy first and last jobs are dropped."""
    return _parse_mm(text, "psplib-mm", origin)


def parse_mmlib(text: str, origin: str = "") -> Instance:
    """Parse an MMLIB file (same sections as PSPLIB, header block optional)."""
    return _parse_mm(text, "mmlib", origin)


def read_instance(path, fmt: str | None = None) -> Instance:
    """Read an instance file, guessing the format when ``fmt`` is None."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if fmt is None:
        if text.lstrip().startswith(CANONICAL_HEADER):
            fmt = "canonical"
        elif re.match(r"j\d{2,3}", path.stem, re.IGNORECASE) and "MMLIB" in str(path).upper():
            fmt = "mmlib"
        else:
            fmt = "psplib-mm"
    if fmt == "canonical":
        return parse_canonical(text, origin=str(path))
    if fmt == "mmlib":
        return parse_mmlib(text, origin=str(path))
    if fmt == "psplib-mm":
        return parse_psplib_mm(text, origin=str(path))
    raise ValueError(f"unknown instance format {fmt!r}")


def _num(x) -> str:
    x = exact(x)
    return str(x)


def write_canonical(instance: Instance) -> str:
    out = [CANONICAL_HEADER]
    if instance.name:
        out.append(f"name {instance.name}")
    out.append(f"activities {instance.A}")
    out.append(" ".join(["renewable"] + [_num(c) for c in instance.renewable_capacity]))
    out.append(" ".join(["nonrenewable"] + [_num(c) for c in instance.nonrenewable_capacity]))
    for i, modes in enumerate(instance.activities, start=1):
        for m in modes:
            ren = " ".join(_num(d) for d in m.renewable)
            non = " ".join(_num(d) for d in m.nonrenewable)
            out.append(f"mode {i} {m.id} {_num(m.duration)} | {ren} | {non}".rstrip())
    for i, j in sorted(instance.precedence):
        out.append(f"prec {i} {j}")
    return "\n".join(out) + "\n"


def parse_canonical(text: str, origin: str = "") -> Instance:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CANONICAL_HEADER:
        raise ParseError(f"expected header {CANONICAL_HEADER!r}", 1)
    name, count, ren, non = "", None, (), ()
    modes: dict[int, list] = {}
    prec = set()

    def number(tok, lineno):
        try:
            return exact(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad number {tok!r}", lineno) from None

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key == "name":
            name = rest.strip()
        elif key == "activities":
            count = int(number(rest, lineno))
        elif key == "renewable":
            ren = tuple(number(t, lineno) for t in rest.split())
        elif key == "nonrenewable":
            non = tuple(number(t, lineno) for t in rest.split())
        elif key == "mode":
            parts = rest.split("|")
            if len(parts) != 3:
                raise ParseError("mode line needs two '|' separators", lineno)
            head = parts[0].split()
            if len(head) != 3:
                raise ParseError("mode line needs activity, mode id and duration", lineno)
            i, mid = int(number(head[0], lineno)), int(number(head[1], lineno))
            mode = Mode(mid, number(head[2], lineno),
                        tuple(number(t, lineno) for t in parts[1].split()),
                        tuple(number(t, lineno) for t in parts[2].split()))
            modes.setdefault(i, []).append(mode)
        elif key == "prec":
            toks = rest.split()
            if len(toks) != 2:
                raise ParseError("prec line needs two activities", lineno)
            prec.add((int(number(toks[0], lineno)), int(number(toks[1], lineno))))
        else:
            raise ParseError(f"unknown keyword {key!r}", lineno)
    if count is None:
        raise ParseError("missing 'activities' line")
    if sorted(modes) != list(range(1, count + 1)):
        raise ParseError(f"mode lines do not cover activities 1..{count}")
    acts = [tuple(modes[i]) for i in range(1, count + 1)]
    return Instance(tuple(acts), ren, non, frozenset(prec), name=name,
                    source=InstanceSource("canonical", origin))


def write_psplib_mm(instance: Instance, horizon: int | None = None) -> str:
    """Render an integral instance in the PSPLIB ``.mm`` layout (dummies re-added)."""
    A, R, N = instance.A, instance.R, instance.N
    jobs = A + 2
    if horizon is None:
        horizon = sum(instance.p_max(i) for i in range(1, A + 1))
    rule = "*" * 72
    succ = {j: [] for j in range(1, jobs + 1)}
    has_pred = {j for _, j in instance.precedence}
    has_succ = {i for i, _ in instance.precedence}
    for i, j in sorted(instance.precedence):
        succ[i + 1].append(j + 1)
    for i in range(1, A + 1):
        if i not in has_pred:
            succ[1].append(i + 1)
        if i not in has_succ:
            succ[i + 1].append(jobs)
    titles = [f"R{k:2d}" for k in range(1, R + 1)] + [f"N{k:2d}" for k in range(1, N + 1)]
    out = [rule,
           f"file with basedata            : {instance.name or 'mmsched'}.bas",
           "initial value random generator: 0",
           rule,
           "projects                      :  1",
           f"jobs (incl. supersource/sink ):  {jobs}",
           f"horizon                       :  {horizon}",
           "RESOURCES",
           f"  - renewable                 :  {R}   R",
           f"  - nonrenewable              :  {N}   N",
           "  - doubly constrained        :  0   D",
           rule,
           "PROJECT INFORMATION:",
           "pronr.  #jobs rel.date duedate tardcost  MPM-Time",
           f"    1     {A}      0       0        0        0",
           rule,
           "PRECEDENCE RELATIONS:",
           "jobnr.    #modes  #successors   successors"]
    nmodes = [1] + [len(instance.modes(i)) for i in range(1, A + 1)] + [1]
    for j in range(1, jobs + 1):
        s = "".join(f"{x:4d}" for x in sorted(succ[j]))
        out.append(f"{j:4d}{nmodes[j - 1]:9d}{len(succ[j]):11d}      {s}".rstrip())
    out += [rule, "REQUESTS/DURATIONS:",
            "jnr. mode dur  " + "  ".join(titles),
            "-" * 72]
    zero = "".join(f"{0:5d}" for _ in titles)
    out.append(f"{1:3d}{1:6d}{0:5d}{zero}")
    for i in range(1, A + 1):
        for n, m in enumerate(instance.modes(i)):
            dem = "".join(f"{int(d):5d}" for d in (*m.renewable, *m.nonrenewable))
            job = f"{i + 1:3d}" if n == 0 else "   "
            out.append(f"{job}{n + 1:6d}{int(m.duration):5d}{dem}")
    out.append(f"{jobs:3d}{1:6d}{0:5d}{zero}")
    out += [rule, "RESOURCEAVAILABILITIES:",
            "  " + "  ".join(titles),
            "".join(f"{int(c):5d}" for c in (*instance.renewable_capacity,
                                            *instance.nonrenewable_capacity)),
            rule]
    return "\n".join(out) + "\n"


def scale_renewables(instance: Instance, delta: int) -> Instance:
    """Multiply every renewable demand and capacity by ``delta``."""
    if int(delta) != delta or delta < 1:
        raise ValueError(f"delta must be a positive integer, got {delta!r}")
    if delta == 1:
        return instance
    acts = tuple(tuple(replace(m, renewable=tuple(d * delta for d in m.renewable))
                       for m in modes) for modes in instance.activities)
    name = f"{instance.name}_d" if instance.name else ""
    return Instance(acts, tuple(c * delta for c in instance.renewable_capacity),
                    instance.nonrenewable_capacity, instance.precedence,
                    name=name, source=instance.source)


def strip_renewables(instance: Instance) -> Instance:
    """Drop all renewable resources (MN derivation)."""
    if instance.R == 0:
        return instance
    acts = tuple(tuple(replace(m, renewable=()) for m in modes)
                 for modes in instance.activities)
    name = f"{instance.name}N" if instance.name else ""
    return Instance(acts, (), instance.nonrenewable_capacity, instance.precedence,
                    name=name, source=instance.source)


def write_schedule(schedule: Schedule) -> str:
    """One ``i S_i m(i)`` line per activity."""
    def num(x):
        return repr(x) if isinstance(x, float) else _num(x)
    lines = ["# activity start mode", f"# makespan {num(schedule.makespan)}"]
    lines += [f"{i} {num(s)} {m}" for i, (s, m) in
              enumerate(zip(schedule.start, schedule.mode), 1)]
    return "\n".join(lines) + "\n"


def parse_schedule(text: str, instance: Instance) -> Schedule:
    """Read the ``i S_i m(i)`` format; the makespan is recomputed."""
    rows = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'activity start mode', got {raw!r}", lineno)
        try:
            i, s, m = int(parts[0]), exact(Fraction(parts[1])), int(parts[2])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"non-numeric token in {raw!r}", lineno) from None
        if i in rows:
            raise ParseError(f"activity {i} listed twice", lineno)
        rows[i] = (s, m)
    missing = set(range(1, instance.A + 1)) - set(rows)
    extra = set(rows) - set(range(1, instance.A + 1))
    if missing or extra:
        raise ParseError(f"schedule must list activities 1..{instance.A} "
                         f"(missing {sorted(missing)}, unknown {sorted(extra)})")
    start = [rows[i][0] for i in range(1, instance.A + 1)]
    mode = [rows[i][1] for i in range(1, instance.A + 1)]
    return Schedule(tuple(start), tuple(mode),
                    max((s + instance.p(i, m) for i, (s, m) in enumerate(zip(start, mode), 1)
                         if m in instance.mode_ids(i)), default=0))
