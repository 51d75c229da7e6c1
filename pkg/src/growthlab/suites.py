"""Seeded verification suites.  Each returns a JSON-ready report whose bytes
depend only on the configuration.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import factorial
from typing import Callable

from . import ad, bell, cantor, density, generators, kelley, slalom
from .errors import EmptyCore
from .rational import fmt

PASS, FAIL = "pass", "fail"
MAX_FAILURES = 5


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    scale: float = 1.0  # fraction of the default instance counts

    def count(self, n: int) -> int:
        return max(1, round(n * self.scale))

    def rng(self, salt: str) -> random.Random:
        return random.Random(f"{self.seed}:{salt}")


class Check:
    """Accumulates one named check over many instances."""

    def __init__(self, name: str):
        self.name = name
        self.total = 0
        self.failures: list = []
        self.failed = 0
        self.extra: dict = {}

    def record(self, ok: bool, detail=None) -> bool:
        """``detail`` may be a thunk; it is only built for failures."""
        self.total += 1
        if not ok:
            self.failed += 1
            if len(self.failures) < MAX_FAILURES:
                self.failures.append(detail() if callable(detail) else detail)
        return ok

    def to_json(self) -> dict:
        out = {"name": self.name, "status": PASS if self.failed == 0 and self.total else FAIL,
               "instances": self.total, "failed": self.failed}
        if self.failures:
            out["failures"] = self.failures
        out.update(self.extra)
        return out


def _report(name: str, cfg: SuiteConfig, checks: list[Check], **info) -> dict:
    rows = [c.to_json() for c in checks]
    status = PASS if all(r["status"] == PASS for r in rows) else FAIL
    return {"suite": name, "seed": cfg.seed, "scale": cfg.scale, "checks": rows, **info,
            "status": status}


# -- clopen sets and density --------------------------------------------------------

def transfer(cfg: SuiteConfig) -> dict:
    rng = cfg.rng("transfer")
    sets = [cantor.cylinder(dict(enumerate(bits))) for bits in product((0, 1), repeat=6)]
    sets += [generators.clopen_set(rng, range(6), 4) for _ in range(cfg.count(1000))]
    laws = {k: Check(k) for k in ("density", "complement", "union", "intersection", "union-density")}
    for i, a in enumerate(sets):
        b = sets[(i * 7919 + 13) % len(sets)]
        for row in density.transfer_check(a, b)["checks"]:
            laws[row["law"]].record(row["pass"], {"a": a.to_json(), "b": b.to_json()})
    return _report("transfer", cfg, list(laws.values()), instances=len(sets))


# -- almost disjoint families -----------------------------------------------------------

def positive(cfg: SuiteConfig) -> dict:
    rng = cfg.rng("positive")
    check = Check("residual strictly above bound at N..N+3")
    redrawn = {"empty core": 0, "short prefix": 0}
    smallest = None
    target = cfg.count(100)
    while check.total < target:
        m = rng.randint(1, 4)
        s = generators.scenario(rng, m, blocks=6, max_len=60)
        tau = generators.tau(rng, range(s.ad_bound + 4))
        alphas = list(s.family)
        try:
            rep = ad.lower_bound_report(s, alphas, tau, extra_levels=3)
        except EmptyCore:
            redrawn["empty core"] += 1
            continue
        if len(rep["levels"]) < 4:
            redrawn["short prefix"] += 1
            continue
        check.record(rep["pass"], {"scenario": s.to_json(), "tau": tau.to_json(), "report": rep})
        for row in rep["levels"]:
            gap = Fraction(row["residual"]) - Fraction(rep["bound"])
            smallest = gap if smallest is None else min(smallest, gap)
    check.extra["min_gap"] = fmt(smallest) if smallest is not None else None
    return _report("positive", cfg, [check], redrawn=redrawn)


# -- slaloms ---------------------------------------------------------------------

def _submasks(m: int):
    s = m
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & m


def ll(cfg: SuiteConfig) -> dict:
    """Generator laws ll(1)-ll(3) on the height-4 universe.

    Exhaustive: ll(1) over every inclusion pair supported below 4; ll(1)
    converse, ll(2) and ll(3) over every pair with one member supported
    below 4 and the other below 3.  Seeded pairs below 4 add coverage.
    """
    table = slalom.OmegaTable(4)
    # a key lists the masks at levels 1, 2, 3
    keys = list(product(range(3), range(15), range(255)))
    sl = {k: slalom.Slalom._from_dict(dict(zip((1, 2, 3), k))) for k in keys}
    bits = {k: table.positive(v) for k, v in sl.items()}
    small = [k for k in keys if k[2] == 0]
    top = table._top

    forward = Check("ll(1) A ⊆ B implies T_B ⊆ T_A (all inclusion pairs)")
    for kb in keys:
        tb = bits[kb]
        for ka in product(*(_submasks(x) for x in kb)):
            forward.record(tb & ~bits[ka] == 0, lambda: {"A": sl[ka].to_json(), "B": sl[kb].to_json()})

    converse = Check("ll(1) A ⊄ B implies T_B ⊄ T_A")
    meet = Check("ll(2) T_A ∩ T_B = T_(A∪B)")
    finite = Check("ll(3) finiteness of T_A ∩ T_B matches decide_infinite")
    centered = Check("centered finite families have a slalom union")

    def separated(ka, kb):
        if any(x & ~y for x, y in zip(ka, kb)):
            converse.record(bits[kb] & ~bits[ka] != 0, lambda: {"A": sl[ka].to_json(), "B": sl[kb].to_json()})

    def pair(ka, kb):
        a, b = sl[ka], sl[kb]
        separated(ka, kb)
        separated(kb, ka)
        union = tuple(x | y for x, y in zip(ka, kb))
        full = any(u == (1 << (1 << k)) - 1 for k, u in zip((1, 2, 3), union))
        both = bits[ka] & bits[kb]
        if not full:
            meet.record(both == bits[union], lambda: {"A": a.to_json(), "B": b.to_json()})
        oracle = both & top != 0
        decided = slalom.is_infinite(slalom.conj(slalom.PosT(a), slalom.PosT(b)))
        finite.record(decided == oracle and oracle != full, lambda: {"A": a.to_json(), "B": b.to_json()})

    for ka in keys:
        for kb in small:
            pair(ka, kb)
    rng = cfg.rng("ll")
    for _ in range(cfg.count(20000)):
        pair(rng.choice(keys), rng.choice(keys))

    for _ in range(cfg.count(2000)):
        fam = [rng.choice(keys) for _ in range(rng.randint(2, 4))]
        subsets_ok = all(
            slalom.is_infinite(slalom.conj(*(slalom.PosT(sl[fam[i]]) for i in idx)))
            for r in range(1, len(fam) + 1) for idx in combinations(range(len(fam)), r))
        if subsets_ok:
            masks = slalom.union_masks(sl[k] for k in fam)
            centered.record(slalom.full_level(masks) is None, [sl[k].to_json() for k in fam])
    return _report("ll", cfg, [forward, converse, meet, finite, centered],
                   universe=len(keys), points=len(table.points))


def cl2(cfg: SuiteConfig) -> dict:
    rng = cfg.rng("cl2")
    measure = Check("a_w_measure exact > delta and ≥ union bound")
    witness = Check("cl2_witness |I| ≥ delta·k with an infinite intersection")
    kappa = Check("kappa_lp of the atomization > delta")
    deltas = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    least_margin = None
    for i in range(cfg.count(100)):
        delta = deltas[i % 3]
        cls, vs = generators.slalom_class(rng, delta, rng.randint(1, 6))
        s, n = cls
        info = {"delta": fmt(delta), "S": s.to_json(), "n": n, "Vs": [v.to_json() for v in vs]}
        for v in vs:
            mp = slalom.a_w_measure(v, n)
            measure.record(mp.exact > delta and mp.exact >= mp.union_bound, info)
        wit = slalom.cl2_witness(vs, delta, cls)
        ok = len(wit.indices) >= delta * len(vs) and slalom.decide_infinite(wit.conjunct(vs))
        witness.record(ok, {**info, "I": list(wit.indices)})
        atoms, sets = slalom.atomization(vs, cls)
        fam = kelley.FiniteFamily.of([str(a) for a in atoms],
                                     [[str(atoms[j]) for j in row] for row in sets])
        value = kelley.kappa_lp(fam).value
        kappa.record(value > delta, {**info, "kappa": fmt(value)})
        margin = value - delta
        least_margin = margin if least_margin is None else min(least_margin, margin)
    kappa.extra["min_margin"] = fmt(least_margin)
    return _report("cl2", cfg, [measure, witness, kappa])


def diagonal(cfg: SuiteConfig) -> dict:
    rng = cfg.rng("diagonal")
    check = Check("f(n) ∉ W_n(n)")
    for _ in range(cfg.count(100)):
        length = rng.randint(0, 16)
        wns = []
        for n in range(1, length + 1):
            full = (1 << (1 << n)) - 1
            if rng.random() < 0.3:
                mask = full & ~(1 << rng.randrange(1 << n))  # one escape left
            else:
                mask = rng.getrandbits(1 << n) & full
                if mask == full:
                    mask &= ~1
            extra = {} if n == 1 else {1: rng.randint(0, 2)}
            wns.append(slalom.Slalom._from_dict({**extra, n: mask}))
        H = length + rng.randint(0, 2)
        f = slalom.diagonal_escape(wns, H)
        ok = all(0 <= f[n] < 1 << n and f[n] not in set(wns[n - 1].values(n))
                 for n in range(1, length + 1))
        check.record(ok, {"length": length})
    return _report("diagonal", cfg, [check])


# -- intersection numbers ---------------------------------------------------------------

def kappa(cfg: SuiteConfig) -> dict:
    rng = cfg.rng("kappa")
    equal = Check("kappa_lp equals the stabilized upper bound (L ≤ 12)")
    duality = Check("weak duality at every length")
    certificate = Check("certificate witnesses evaluate to the value")
    for _ in range(cfg.count(200)):
        na = rng.randint(1, 6)
        ns = rng.randint(1, 5)
        sets = [rng.sample(range(na), rng.randint(1, min(na, 3))) for _ in range(ns)]
        fam = kelley.FiniteFamily.of([f"x{i}" for i in range(na)],
                                     [[f"x{i}" for i in s] for s in sets])
        cert = kelley.kappa_lp(fam)
        ub = kelley.kappa_upper_bounds(fam, 12)
        info = {"family": fam.to_json(), "value": fmt(cert.value), "upper": [fmt(u) for u in ub]}
        equal.record(ub[-1] == cert.value, info)
        duality.record(all(cert.value <= u for u in ub), info)
        certificate.record(cert.check(fam), info)
    return _report("kappa", cfg, [equal, duality, certificate])


# -- Bell's tree ---------------------------------------------------------------------------

def bell_measure(cfg: SuiteConfig) -> dict:
    mass = Check("depth-d node measures sum to 1 (d ≤ 8)")
    for d in range(9):
        total = Fraction(0)
        count = 0
        for t in bell.nodes_at(d):
            total += bell.node_measure(t)
            count += 1
        mass.record(total == 1 and count == factorial(d + 1), {"depth": d, "sum": fmt(total)})
    ladder = Check("(malo) ladder λ(A_{l+1} ∖ A_l) ≤ m/(l+2)!")
    rng = cfg.rng("bell-measure")
    for _ in range(cfg.count(100)):
        H = rng.randint(0, 7)
        s = generators.bell_node(rng, rng.randint(0, 3))
        pis = [generators.pi_prefix(rng, H, s, 0.4) for _ in range(rng.randint(1, 4))]
        rows = bell.malo_ladder(pis)
        ladder.record(all(r["pass"] for r in rows), {"pis": [p.to_json() for p in pis]})
    taylor = Check("taylor holds for 1 ≤ m ≤ 5, 3m < n ≤ 60")
    for m in range(1, 6):
        for n in range(3 * m + 1, 61):
            r = bell.taylor_check(m, n)
            taylor.record(r.holds, {"m": m, "n": n, "lhs_upper": fmt(r.lhs_upper), "rhs": fmt(r.rhs)})
    return _report("bell-measure", cfg, [mass, ladder, taylor])


def _iso_grid():
    """Exhaustive instance grid at heights 0..3 (see README for its extent)."""
    p0 = [bell.PiPrefix((r,)) for r in bell.nodes_at(1)]
    p1 = [bell.PiPrefix(rows) for rows in product(bell.nodes_at(1), bell.nodes_at(2))]
    p2 = [bell.PiPrefix(rows) for rows in product(bell.nodes_at(1), bell.nodes_at(2), bell.nodes_at(3))]
    shallow = [t for d in range(2) for t in bell.nodes_at(d)]
    for s in shallow:
        subsets0 = [[]] + [[p] for p in p0] + [list(c) for c in combinations(p0, 2)]
        for pos in subsets0:
            for neg in subsets0:
                yield 0, s, pos, neg
        negs1 = [[]] + [[p] for p in p1] + [list(c) for c in combinations(p1, 2)]
        for pos in [[]] + [[p] for p in p1]:
            for neg in negs1:
                yield 1, s, pos, neg
    for pos in [[]] + [[p] for p in p2]:
        for neg in [[]] + [[p] for p in p2]:
            yield 2, bell.ROOT, pos, neg
    # height 3: rows 0..2 from a fixed spine, row 3 ranging over all 120 nodes
    spine = (bell.BellNode((1,)), bell.BellNode((1, 0)), bell.BellNode((1, 0, 2)))
    p3 = [bell.PiPrefix(spine + (r,)) for r in bell.nodes_at(4)]
    for s in [t for d in range(3) for t in bell.nodes_at(d)]:
        for neg in p3:
            yield 3, s, [], [neg]
            yield 3, s, [neg], []


def bell_iso(cfg: SuiteConfig) -> dict:
    grid = Check("biconditional on the exhaustive grid (H ≤ 3)")
    for H, s, pos, neg in _iso_grid():
        r = bell.iso_condition_check(pos, neg, H, s)
        grid.record(r["pass"], lambda: {**r, "pos": [p.to_json() for p in pos], "neg": [p.to_json() for p in neg]})
    rand = Check("biconditional on seeded instances (H ≤ 5)")
    rng = cfg.rng("bell-iso")
    tally = {"empty": 0, "witness": 0}
    for _ in range(cfg.count(500)):
        H = rng.randint(0, 5)
        s = generators.bell_node(rng, rng.randint(0, 3))
        pos = [generators.pi_prefix(rng, H, s, 0.5) for _ in range(rng.randint(0, 2))]
        neg = [generators.pi_prefix(rng, H, s, 0.5) for _ in range(rng.randint(0, 3))]
        r = bell.iso_condition_check(pos, neg, H, s)
        tally[r["V"]["status"]] += 1
        rand.record(r["pass"], {**r, "pos": [p.to_json() for p in pos], "neg": [p.to_json() for p in neg]})
    rand.extra["verdicts"] = tally
    return _report("bell-iso", cfg, [grid, rand])


def bell_positivity(cfg: SuiteConfig) -> dict:
    rng = cfg.rng("bell-positivity")
    check = Check("gap λ([s]) − λ([s] ∩ ⋃ v_trunc) − tail bound > 0")
    redrawn = 0
    smallest = None
    while check.total < cfg.count(100):
        m = rng.randint(1, 3)
        s = generators.bell_node(rng, rng.randint(0, 3))
        n = max(len(s), 3 * m) + 1 + rng.randint(0, 2)
        H = n + rng.randint(0, 2)
        pis = [generators.pi_prefix(rng, H, s, 0.5, cover=False) for _ in range(m)]
        try:
            rep = bell.strict_positivity_check(s, pis, n)
        except bell.HypothesisFailed:
            redrawn += 1
            continue
        gap = Fraction(rep["gap"])
        smallest = gap if smallest is None else min(smallest, gap)
        check.record(rep["pass"], rep)
    check.extra["min_gap"] = fmt(smallest)
    return _report("bell-positivity", cfg, [check], redrawn=redrawn)


SUITES: dict[str, Callable[[SuiteConfig], dict]] = {
    "transfer": transfer,
    "positive": positive,
    "ll": ll,
    "kappa": kappa,
    "cl2": cl2,
    "bell-measure": bell_measure,
    "bell-iso": bell_iso,
    "bell-positivity": bell_positivity,
    "diagonal": diagonal,
}


def run_suite(name: str, cfg: SuiteConfig | None = None) -> dict:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](cfg or SuiteConfig())
