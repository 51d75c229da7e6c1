"""Seeded random instances for the verification suites.

Every generator takes a ``random.Random`` so suites are reproducible.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .ad import Scenario, window
from .bell import BellNode, PiPrefix
from .cantor import ClopenSet, PartialAssignment
from .slalom import And, Const, GenExpr, Height, Not, Or, PosT, Slalom


def clopen_set(rng: random.Random, coords, max_cylinders: int = 4) -> ClopenSet:
    coords = list(coords)
    phis = []
    for _ in range(rng.randint(0, max_cylinders)):
        dom = rng.sample(coords, rng.randint(0, len(coords)))
        phis.append({c: rng.randint(0, 1) for c in dom})
    return ClopenSet.from_cylinders(phis)


def scenario(rng: random.Random, m: int, blocks: int, ad_bound: int | None = None,
             max_len: int = 60) -> Scenario:
    """m families sharing only a random part below ``ad_bound``.

    Above the bound family j lives on the residue class j mod m, so the
    certificate holds for the infinite continuation as well.
    """
    ad_bound = rng.randint(2, 8) if ad_bound is None else ad_bound
    need = min(window(blocks - 1).stop, max_len)
    family, points = {}, {}
    for j in range(m):
        low = sorted(x for x in range(ad_bound) if rng.random() < 0.35)
        elems = low[: need // 2]
        x = ad_bound + (j - ad_bound) % m
        while len(elems) < need:
            if rng.random() < 0.7:
                elems.append(x)
            x += m
        label = f"a{j}"
        family[label] = elems
        width = elems[-1] + 1
        points[label] = ["".join(rng.choice("01") for _ in range(width)) for _ in range(blocks)]
    return Scenario(points, family, ad_bound)


def tau(rng: random.Random, coords, max_size: int = 3) -> PartialAssignment:
    coords = list(coords)
    dom = rng.sample(coords, rng.randint(0, min(max_size, len(coords))))
    return PartialAssignment.of({c: rng.randint(0, 1) for c in dom})


def fraction_choice(rng: random.Random, values) -> Fraction:
    return Fraction(rng.choice(list(values)))


def slalom(rng: random.Random, lo: int = 1, hi: int = 4, density: float = 0.4) -> Slalom:
    """Random slalom on levels [lo, hi)."""
    levels = {}
    for k in range(max(lo, 1), hi):
        if rng.random() < density:
            size = rng.randint(1, min((1 << k) - 1, 3))
            levels[k] = rng.sample(range(1 << k), size)
    return Slalom.of(levels)


def expression(rng: random.Random, depth: int = 3, hi: int = 4) -> GenExpr:
    """Random Boolean combination of generators with all atoms below ``hi``."""
    if depth == 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.55:
            return PosT(slalom(rng, hi=hi))
        if r < 0.95:
            n = rng.randint(0, hi)
            return Height(slalom(rng, hi=n, density=0.5), n)
        return Const(rng.random() < 0.5)
    r = rng.random()
    if r < 0.2:
        return Not(expression(rng, depth - 1, hi))
    args = tuple(expression(rng, depth - 1, hi) for _ in range(rng.randint(2, 3)))
    return And(args) if r < 0.65 else Or(args)


def slalom_class(rng: random.Random, delta: Fraction, k: int, max_level: int = 6):
    """k slaloms in one class: shared prefix below n, tail weight < 1 − δ."""
    n = rng.randint(0, 3)
    s = slalom(rng, hi=n, density=0.6)
    vs = []
    for _ in range(k):
        masks = dict(s.masks)
        budget = 1 - delta
        for _ in range(rng.randint(0, 6)):
            lvl = rng.randint(max(n, 1), max_level)
            cur = masks.get(lvl, 0)
            free = [j for j in range(1 << lvl) if not cur >> j & 1]
            step = Fraction(1, 1 << lvl)
            if len(free) > 1 and budget - step > 0:
                masks[lvl] = cur | 1 << rng.choice(free)
                budget -= step
        vs.append(Slalom._from_dict(masks))
    return (s, n), vs


def bell_node(rng: random.Random, depth: int, prefix=()) -> BellNode:
    seq = list(prefix)[:depth]
    for i in range(len(seq), depth):
        seq.append(rng.randint(0, i + 1))
    return BellNode(tuple(seq))


def pi_prefix(rng: random.Random, H: int, near=None, bias: float = 0.3,
              cover: bool = True) -> PiPrefix:
    """Random rows; with probability ``bias`` a row copies a prefix of ``near``.

    With ``cover`` off, only rows longer than ``near`` copy it, so no row
    swallows the whole cone of ``near``.
    """
    rows = []
    for n in range(H + 1):
        copy = near is not None and rng.random() < bias and (cover or n + 1 > len(near))
        base = near.seq[: n + 1] if copy else ()
        row = bell_node(rng, n + 1, base)
        while not cover and near is not None and near.extends(row):
            row = bell_node(rng, n + 1)
        rows.append(row)
    return PiPrefix(tuple(rows))
