"""Asymptotic density on eventually periodic sets, the residue-class
embedding of the clopen algebra, and staged unions of increasing chains.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Iterator, NamedTuple

from . import config
from .cantor import ClopenSet, PartialAssignment
from .errors import MonotonicityViolation
from .rational import fmt, parse


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _min_period(modulus: int, residues: frozenset[int]) -> int:
    for d in _divisors(modulus):
        if len(residues) * d % modulus:
            continue
        if all((r + d) % modulus in residues for r in residues):
            return d
    return modulus


@dataclass(frozen=True)
class PeriodicSet:
    """``{k : k mod M in residues}`` plus/minus finitely many exceptions.

    Build with :meth:`make`, which reduces the modulus to the least period
    and normalizes the deltas, so equal sets compare equal.
    """

    modulus: int
    residues: frozenset[int]
    added: frozenset[int] = frozenset()
    removed: frozenset[int] = frozenset()

    @classmethod
    def make(cls, modulus: int, residues: Iterable[int], added: Iterable[int] = (),
             removed: Iterable[int] = ()) -> PeriodicSet:
        if modulus < 1:
            raise ValueError("modulus must be positive")
        if modulus > config.MAX_MODULUS:
            raise ValueError(f"modulus {modulus} exceeds guard {config.MAX_MODULUS}")
        res = frozenset(r % modulus for r in residues)
        period = _min_period(modulus, res)
        res = frozenset(r for r in res if r < period)
        add = frozenset(k for k in added if k % period not in res)
        rem = frozenset(k for k in removed if k % period in res)
        for k in add | rem:
            if k < 0:
                raise ValueError("exceptions must be natural numbers")
        return cls(period, res, add, rem)

    @classmethod
    def omega(cls) -> PeriodicSet:
        return cls.make(1, [0])

    @classmethod
    def nothing(cls) -> PeriodicSet:
        return cls.make(1, [])

    def __contains__(self, k: int) -> bool:
        if k in self.added:
            return True
        return k % self.modulus in self.residues and k not in self.removed

    def density(self) -> Fraction:
        return Fraction(len(self.residues), self.modulus)

    @property
    def slack(self) -> int:
        """Bound on |count(N) - N*density| valid for every N."""
        return self.modulus + len(self.added) + len(self.removed)

    def count_below(self, n: int) -> int:
        """|self ∩ [0, n)| without walking [0, n)."""
        if n <= 0:
            return 0
        q, r = divmod(n, self.modulus)
        c = q * len(self.residues) + sum(1 for x in self.residues if x < r)
        c += sum(1 for k in self.added if k < n)
        c -= sum(1 for k in self.removed if k < n)
        return c

    def _combine(self, other: PeriodicSet, op: Callable[[bool, bool], bool]) -> PeriodicSet:
        m = _lcm(self.modulus, other.modulus)
        res = [r for r in range(m)
               if op(r % self.modulus in self.residues, r % other.modulus in other.residues)]
        added, removed = [], []
        for k in self.added | self.removed | other.added | other.removed:
            actual = op(k in self, k in other)
            base = op(k % self.modulus in self.residues, k % other.modulus in other.residues)
            if actual and not base:
                added.append(k)
            elif base and not actual:
                removed.append(k)
        return PeriodicSet.make(m, res, added, removed)

    def __or__(self, other: PeriodicSet) -> PeriodicSet:
        return self._combine(other, lambda x, y: x or y)

    def __and__(self, other: PeriodicSet) -> PeriodicSet:
        return self._combine(other, lambda x, y: x and y)

    def __sub__(self, other: PeriodicSet) -> PeriodicSet:
        return self._combine(other, lambda x, y: x and not y)

    def __invert__(self) -> PeriodicSet:
        res = frozenset(range(self.modulus)) - self.residues
        return PeriodicSet.make(self.modulus, res, self.removed, self.added)

    def is_empty(self) -> bool:
        return not self.residues and not self.added

    def issubset(self, other: PeriodicSet) -> bool:
        return (self - other).is_empty()

    __le__ = issubset

    def to_json(self) -> dict:
        return {
            "mod": self.modulus,
            "residues": sorted(self.residues),
            "added": sorted(self.added),
            "removed": sorted(self.removed),
        }

    @classmethod
    def from_json(cls, obj: dict) -> PeriodicSet:
        return cls.make(obj["mod"], obj["residues"], obj.get("added", ()), obj.get("removed", ()))


def density(p: PeriodicSet) -> Fraction:
    return p.density()


# -- residue-class embedding ---------------------------------------------------

def _residues_of(phi: PartialAssignment, n: int) -> Iterator[int]:
    base = sum(b << c for c, b in phi.entries)
    free = [i for i in range(n) if i not in phi.dom]
    for mask in range(1 << len(free)):
        k = base
        for j, bit in enumerate(free):
            if mask >> j & 1:
                k |= 1 << bit
        yield k


def psi0(a: ClopenSet) -> PeriodicSet:
    """Image of a clopen set under σ ↦ {k : k ≡ σ̌ mod 2^|σ|}.

    σ̌ is read least-significant bit first (coordinate i has weight 2^i), the
    convention under which [σ] = [σ0] ∪ [σ1] maps to a disjoint union.
    """
    cyl = a.cylinders
    n = max((c for p in cyl for c in p.dom), default=-1) + 1
    residues: set[int] = set()
    for phi in cyl:
        residues.update(_residues_of(phi, n))
    return PeriodicSet.make(1 << n, residues)


def transfer_check(a: ClopenSet, b: ClopenSet | None = None) -> dict:
    """Check measure transfer and the homomorphism laws for ``a`` (and ``b``)."""
    pa = psi0(a)
    rows = [
        _law("density", pa.density(), a.measure()),
        _law("complement", psi0(~a), ~pa),
    ]
    if b is not None:
        pb = psi0(b)
        rows.append(_law("union", psi0(a | b), pa | pb))
        rows.append(_law("intersection", psi0(a & b), pa & pb))
        rows.append(_law("union-density", (pa | pb).density(), (a | b).measure()))
    return {"checks": rows, "pass": all(r["pass"] for r in rows)}


def _law(name, lhs, rhs) -> dict:
    enc = (lambda v: fmt(v)) if isinstance(lhs, Fraction) else (lambda v: v.to_json())
    return {"law": name, "lhs": enc(lhs), "rhs": enc(rhs), "pass": lhs == rhs}


# -- staged unions ---------------------------------------------------------------

class ChainGenerator:
    """Single-consumer producer of an increasing chain of PeriodicSets.

    ``supremum`` is the declared density supremum, when known.
    """

    def __init__(self, sets: Iterable[PeriodicSet], supremum: Fraction | None = None):
        self._it = iter(sets)
        self.supremum = None if supremum is None else Fraction(supremum)
        self._peeked: list[PeriodicSet] = []

    def pull(self) -> PeriodicSet | None:
        if self._peeked:
            return self._peeked.pop()
        return next(self._it, None)

    def has_more(self) -> bool:
        if not self._peeked:
            nxt = next(self._it, None)
            if nxt is None:
                return False
            self._peeked.append(nxt)
        return True


@dataclass(frozen=True)
class StagedSet:
    """``⋃_k stage_k ∩ [start_k, start_{k+1})`` with the last stage running to ∞."""

    stages: tuple[tuple[PeriodicSet, int], ...]
    density: Fraction
    truncated: bool = False

    def __post_init__(self):
        starts = [s for _, s in self.stages]
        if not starts or starts[0] != 0:
            raise ValueError("first stage must start at 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("stage starts must increase strictly")

    @classmethod
    def of(cls, p: PeriodicSet) -> StagedSet:
        return cls(((p, 0),), p.density())

    @property
    def starts(self) -> list[int]:
        return [s for _, s in self.stages]

    def _region(self, k: int) -> int:
        return bisect.bisect_right(self.starts, k) - 1

    def __contains__(self, k: int) -> bool:
        return k in self.stages[self._region(k)][0]

    def count_below(self, n: int) -> int:
        total = 0
        for i, (p, start) in enumerate(self.stages):
            if start >= n:
                break
            stop = self.stages[i + 1][1] if i + 1 < len(self.stages) else n
            stop = min(stop, n)
            total += p.count_below(stop) - p.count_below(start)
        return total

    def error_bound(self, n: int) -> Fraction:
        """Certified bound on |count_below(n)/n - density|.

        Above: the set below n sits inside the current stage.  Below: it
        contains stage i above start_i, for every earlier or current i.
        """
        j = self._region(n - 1)
        pj, _ = self.stages[j]
        upper = pj.density() - self.density + Fraction(pj.slack, n)
        lower = min(
            self.density - p.density() + Fraction(p.slack + start, n)
            for p, start in self.stages[: j + 1]
        )
        return max(upper, lower, Fraction(0))

    def to_json(self) -> dict:
        return {
            "stages": [{"set": p.to_json(), "from": s} for p, s in self.stages],
            "density": fmt(self.density),
            "truncated": self.truncated,
        }

    @classmethod
    def from_json(cls, obj: dict) -> StagedSet:
        stages = tuple((PeriodicSet.from_json(s["set"]), int(s["from"])) for s in obj["stages"])
        return cls(stages, parse(obj["density"]), bool(obj.get("truncated", False)))


class DensityCount(NamedTuple):
    count: int
    estimate: Fraction
    error_bound: Fraction
    truncated: bool


def staged_count(s: StagedSet, n: int) -> DensityCount:
    if n < 1:
        raise ValueError("N must be at least 1")
    c = s.count_below(n)
    return DensityCount(c, Fraction(c, n), s.error_bound(n), s.truncated)


def _next_start(k: int, prev: tuple[PeriodicSet, int], cur: PeriodicSet) -> int:
    # Stage k takes over once both its own periodic error and the deficit
    # left by switching away from stage k-1 fall under 2^-k.
    p_prev, start_prev = prev
    return max(start_prev + 1, cur.slack << k, (p_prev.slack + start_prev) << k)


def buck_union(chain: ChainGenerator, budget: int) -> StagedSet:
    """Glue an increasing chain into one set whose density is the supremum.

    For every pulled A_k, A_k ∖ A lies below start_k, and for N ≥ start_k
    (k ≥ 1) the counting density is within 2^-k + (sup - d(A_{k-1})) of the
    declared density; the exact per-N bound is ``StagedSet.error_bound``.
    A chain cut off by ``budget`` comes back flagged ``truncated``.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    first = chain.pull()
    if first is None:
        raise ValueError("empty chain")
    stages = [(first, 0)]
    while len(stages) < budget:
        cur = chain.pull()
        if cur is None:
            break
        prev = stages[-1]
        if not prev[0].issubset(cur):
            raise MonotonicityViolation(f"stage {len(stages)} does not contain stage {len(stages) - 1}")
        stages.append((cur, _next_start(len(stages), prev, cur)))
    truncated = len(stages) == budget and chain.has_more()
    last = stages[-1][0].density()
    if truncated:
        declared = chain.supremum if chain.supremum is not None else last
    else:
        if chain.supremum is not None and chain.supremum != last:
            raise ValueError(f"finite chain ends at density {last}, declared {chain.supremum}")
        declared = last
    return StagedSet(tuple(stages), declared, truncated)
