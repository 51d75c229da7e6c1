"""Intersection numbers of finite set families.

κ(s) for a finite sequence s of sets is the largest fraction of s with a
common point; κ of a family is the infimum over sequences.  Over a finite
atom universe that infimum is the value of the LP  max_μ min_i μ(A_i),
which the brute-force upper bounds corroborate.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import lcm
from typing import Mapping, Sequence

from . import config
from .errors import EmptyFamily, SequenceTooLong
from .rational import fmt
from .simplex import maximize


@dataclass(frozen=True)
class FiniteFamily:
    atoms: tuple[str, ...]
    sets: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, atoms: Sequence, sets: Sequence[Sequence]) -> FiniteFamily:
        atoms = tuple(str(a) for a in atoms)
        if len(set(atoms)) != len(atoms):
            raise ValueError("atom labels must be distinct")
        index = {a: i for i, a in enumerate(atoms)}
        out = []
        for j, s in enumerate(sets):
            try:
                fs = frozenset(index[str(a)] for a in s)
            except KeyError as exc:
                raise ValueError(f"set {j} names unknown atom {exc.args[0]!r}") from None
            if not fs:
                raise ValueError(f"set {j} is empty")
            out.append(fs)
        return cls(atoms, tuple(out))

    def to_json(self) -> dict:
        return {"atoms": list(self.atoms),
                "sets": [[self.atoms[i] for i in sorted(s)] for s in self.sets]}

    @classmethod
    def from_json(cls, obj: Mapping) -> FiniteFamily:
        return cls.of(obj["atoms"], obj["sets"])


def _profiles(fam: FiniteFamily) -> list[frozenset[int]]:
    """Maximal index sets of distinct sets with a common point."""
    distinct = sorted(set(fam.sets), key=sorted)
    guard = config.budget(config.SUBSET_EVALUATIONS)
    if 2 ** len(distinct) > guard:
        raise SequenceTooLong(f"{len(distinct)} distinct sets exceed the subset guard {guard}")
    good: list[frozenset[int]] = []
    # exhaustive over subsets of distinct sets, pruned by the running intersection
    def walk(i: int, chosen: tuple[int, ...], common: frozenset[int]):
        if i == len(distinct):
            if chosen:
                good.append(frozenset(chosen))
            return
        inter = common & distinct[i]
        if inter:
            walk(i + 1, chosen + (i,), inter)
        walk(i + 1, chosen, common)

    walk(0, (), frozenset(range(len(fam.atoms))))
    maximal = [g for g in good if not any(g < h for h in good)]
    by_set = {s: k for k, s in enumerate(distinct)}
    return [frozenset(j for j, s in enumerate(fam.sets) if by_set[s] in g) for g in maximal]


def _kappa_counts(profiles, counts: Mapping[int, int], length: int) -> Fraction:
    best = max(sum(c for j, c in counts.items() if j in p) for p in profiles)
    return Fraction(best, length)


def kappa_of_seq(fam: FiniteFamily, s: Sequence[int]) -> Fraction:
    if not s:
        raise ValueError("sequence must be nonempty")
    for i in s:
        if not 0 <= i < len(fam.sets):
            raise IndexError(f"set index {i} out of range")
    counts: dict[int, int] = {}
    for i in s:
        counts[i] = counts.get(i, 0) + 1
    return _kappa_counts(_profiles(fam), counts, len(s))


def kappa_upper_bounds(fam: FiniteFamily, L: int) -> list[Fraction]:
    """Entry ℓ-1 is the least κ(s) over sequences of length at most ℓ."""
    if L < 1:
        raise ValueError("L must be at least 1")
    if not fam.sets:
        raise EmptyFamily("no sets")
    profiles = _profiles(fam)
    out, best = [], Fraction(1)
    for ell in range(1, L + 1):
        for combo in combinations_with_replacement(range(len(fam.sets)), ell):
            counts: dict[int, int] = {}
            for i in combo:
                counts[i] = counts.get(i, 0) + 1
            best = min(best, _kappa_counts(profiles, counts, ell))
        out.append(best)
    return out


@dataclass(frozen=True)
class KappaCertificate:
    value: Fraction
    weights: tuple[Fraction, ...]  # lower witness: a probability on atoms
    sequence: tuple[int, ...]      # upper witness: set indices

    def lower_value(self, fam: FiniteFamily) -> Fraction:
        return min(sum(self.weights[a] for a in s) for s in fam.sets)

    def check(self, fam: FiniteFamily) -> bool:
        return (all(w >= 0 for w in self.weights) and sum(self.weights) == 1
                and self.lower_value(fam) == self.value
                and kappa_of_seq(fam, self.sequence) == self.value)

    def to_json(self, fam: FiniteFamily) -> dict:
        return {
            "value": fmt(self.value),
            "lower_witness": {fam.atoms[i]: fmt(w) for i, w in enumerate(self.weights) if w},
            "upper_witness": list(self.sequence),
        }


def kappa_lp(fam: FiniteFamily) -> KappaCertificate:
    """Exact κ with a measure achieving it and a sequence achieving it."""
    if not fam.sets:
        raise EmptyFamily("no sets")
    n_atoms, n_sets = len(fam.atoms), len(fam.sets)
    # variables: μ_0..μ_{a-1}, t ; constraints: t − μ(A_i) ≤ 0, Σμ ≤ 1
    A = [[-Fraction(int(x in s)) for x in range(n_atoms)] + [Fraction(1)] for s in fam.sets]
    A.append([Fraction(1)] * n_atoms + [Fraction(0)])
    b = [Fraction(0)] * n_sets + [Fraction(1)]
    c = [Fraction(0)] * n_atoms + [Fraction(1)]
    res = maximize(c, A, b)
    mu = list(res.x[:n_atoms])
    slack = 1 - sum(mu)
    if slack:
        mu[0] += slack  # extra mass never lowers any μ(A_i)
    y = res.y[:n_sets]
    total = sum(y)
    denom = lcm(*(q.denominator for q in (v / total for v in y)))
    seq = tuple(i for i, v in enumerate(y) for _ in range(int(v / total * denom)))
    return KappaCertificate(res.value, tuple(mu), seq)


def fragmentation_report(fams: Sequence[FiniteFamily], delta: Fraction) -> dict:
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie strictly between 0 and 1")
    rows = []
    for fam in fams:
        v = kappa_lp(fam).value
        rows.append({"value": fmt(v), "pass": v > delta})
    return {"delta": fmt(delta), "classes": rows, "pass": all(r["pass"] for r in rows)}
