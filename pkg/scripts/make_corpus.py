"""Regenerate the synthetic instance corpus shipped with the package.

The public PSPLIB/MMLIB files are not redistributed here. Instead this script
writes deterministic look-alikes with the same dimensions (activities, modes,
resource counts, duration and demand ranges) in the PSPLIB ``.mm`` layout:

    c15      10 files  15 activities, 3 modes, 2 renewable, 2 non-renewable
    j20      10 files  20 activities, 3 modes, 2 renewable, 2 non-renewable
    mmlib50   5 files  50 activities, 3 modes, 2 renewable, 2 non-renewable
    m2        5 files  16 activities, 2 modes, 2 renewable, 2 non-renewable

Run from the repository root::

    python3 scripts/make_corpus.py [--out src/mmsched/data/corpus]
"""
from __future__ import annotations

import argparse
import random
from fractions import Fraction
from math import ceil
from pathlib import Path

from mmsched.core import Instance, Mode
from mmsched.io import write_psplib_mm
from mmsched.preprocess import _peak_demand

SETS = {
    # name: (file stem, count, activities, modes, seed)
    "c15": ("c15", 10, 15, 3, 15),
    "j20": ("j20", 10, 20, 3, 20),
    "mmlib50": ("J50", 5, 50, 3, 50),
    "m2": ("m2", 5, 16, 2, 16),
}
STRENGTHS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


def network(rng: random.Random, A: int) -> set:
    """Random precedence DAG on 1..A with 3 start activities and short arcs."""
    prec = set()
    starts = min(3, A)
    for j in range(starts + 1, A + 1):
        window = list(range(max(1, j - 6), j))
        for i in rng.sample(window, k=min(len(window), rng.choice((1, 1, 2, 3)))):
            prec.add((i, j))
    return prec


def modes_for(rng: random.Random, n: int) -> list[Mode]:
    durations = sorted(rng.randint(1, 10) for _ in range(n))
    out = []
    for m, p in enumerate(durations, 1):
        renewable = [0, 0]
        renewable[rng.randrange(2)] = rng.randint(1, 10)
        nonrenewable = [0, 0]
        nonrenewable[rng.randrange(2)] = rng.randint(1, 10)
        out.append(Mode(m, p, tuple(renewable), tuple(nonrenewable)))
    return out


def make(rng: random.Random, A: int, n_modes: int, name: str) -> Instance:
    prec = network(rng, A)
    acts = [modes_for(rng, n_modes) for _ in range(A)]
    loose = Instance(tuple(tuple(a) for a in acts), (10 * A, 10 * A), (10 * A, 10 * A),
                     frozenset(prec), name=name)
    caps = []
    for k in (1, 2):
        bmin = max(min(m.renewable[k - 1] for m in a) for a in acts)
        bmax = _peak_demand(loose, k)
        rs = rng.choice(STRENGTHS)
        # every mode must still fit on its own
        top = max(m.renewable[k - 1] for a in acts for m in a)
        caps.append(max(top, bmin + ceil(rs * (bmax - bmin))))
    budgets = []
    for k in (1, 2):
        wmin = sum(min(m.nonrenewable[k - 1] for m in a) for a in acts)
        wmax = sum(max(m.nonrenewable[k - 1] for m in a) for a in acts)
        top = max(m.nonrenewable[k - 1] for a in acts for m in a)
        budgets.append(max(top, wmin + ceil(Fraction(1, 2) * (wmax - wmin))))
    return Instance(tuple(tuple(a) for a in acts), tuple(caps), tuple(budgets),
                    frozenset(prec), name=name)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="src/mmsched/data/corpus")
    args = ap.parse_args(argv)
    for folder, (stem, count, A, n_modes, seed) in SETS.items():
        rng = random.Random(seed)
        target = Path(args.out) / folder
        target.mkdir(parents=True, exist_ok=True)
        for n in range(1, count + 1):
            name = f"{stem}{n:02d}_1" if folder != "mmlib50" else f"{stem}{n}_1"
            inst = make(rng, A, n_modes, name)
            (target / f"{name}.mm").write_text(write_psplib_mm(inst))
        print(f"{folder}: {count} instances in {target}")


if __name__ == "__main__":
    main()
