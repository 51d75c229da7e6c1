"""Clopen subsets of the Cantor space 2^omega with exact Lebesgue measure.

A clopen set is stored as a reduced ordered binary decision tree over the
(sparse) coordinates it mentions, tested in increasing coordinate order.
Nodes are hash-consed, so two ClopenSets denote the same set exactly when
their roots are the same object.  Reading the tree's accepting paths back
gives the canonical list of pairwise disjoint cylinders.
"""
from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Mapping

from . import config
from .errors import OverlappingSupports, SupportTooLarge

__all__ = [
    "PartialAssignment",
    "ClopenSet",
    "cylinder",
    "union",
    "intersect",
    "complement",
    "measure",
    "support",
    "product_measure_check",
    "brute_force_measure",
]


@dataclass(frozen=True, order=True)
class PartialAssignment:
    """A finite partial function from coordinates to bits."""

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        coords = [c for c, _ in self.entries]
        if coords != sorted(set(coords)):
            raise ValueError(f"coordinates must be distinct and sorted: {coords}")
        for c, b in self.entries:
            if c < 0 or b not in (0, 1):
                raise ValueError(f"bad entry {c}->{b}")

    @classmethod
    def of(cls, mapping: Mapping[int, int] | Iterable[tuple[int, int]] = ()) -> PartialAssignment:
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return cls(tuple(sorted((int(c), int(b)) for c, b in items)))

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(c for c, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.entries)

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def get(self, coord: int, default=None):
        return self.as_dict().get(coord, default)

    def compatible(self, other: PartialAssignment) -> bool:
        mine = self.as_dict()
        return all(mine.get(c, b) == b for c, b in other.entries)

    def merge(self, other: PartialAssignment) -> PartialAssignment:
        if not self.compatible(other):
            raise ValueError("incompatible assignments")
        return PartialAssignment.of({**self.as_dict(), **other.as_dict()})

    def to_json(self) -> dict[str, int]:
        return {str(c): b for c, b in self.entries}

    @classmethod
    def from_json(cls, obj: Mapping[str, int]) -> PartialAssignment:
        return cls.of({int(k): int(v) for k, v in obj.items()})


# -- decision tree nodes ------------------------------------------------------

class _Node:
    __slots__ = ("var", "lo", "hi", "__weakref__")

    def __init__(self, var, lo, hi):
        self.var = var
        self.lo = lo
        self.hi = hi

    def __repr__(self):
        return f"_Node({self.var}, {self.lo!r}, {self.hi!r})"


# Intern table: a cache only, it never changes what any operation returns.
_unique: "weakref.WeakValueDictionary[tuple, _Node]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


def _mk(var, lo, hi):
    if lo is hi:
        return lo
    key = (var, id(lo), id(hi))
    with _lock:
        node = _unique.get(key)
        if node is None:
            node = _Node(var, lo, hi)
            _unique[key] = node
    return node


def _cube(phi: PartialAssignment):
    node = True
    for var, bit in reversed(phi.entries):
        node = _mk(var, node, False) if bit == 0 else _mk(var, False, node)
    return node


def _apply_top(op, a, b):
    # memo values also hold the operands so their ids stay valid
    memo: dict = {}

    def run(x, y):
        if isinstance(x, bool) and isinstance(y, bool):
            return op(x, y)
        key = (id(x), id(y))
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        vx = x.var if isinstance(x, _Node) else None
        vy = y.var if isinstance(y, _Node) else None
        if vy is None or (vx is not None and vx < vy):
            res = _mk(vx, run(x.lo, y), run(x.hi, y))
        elif vx is None or vy < vx:
            res = _mk(vy, run(x, y.lo), run(x, y.hi))
        else:
            res = _mk(vx, run(x.lo, y.lo), run(x.hi, y.hi))
        memo[key] = (res, x, y)
        return res

    return run(a, b)


def _negate(a, memo=None):
    if isinstance(a, bool):
        return not a
    memo = {} if memo is None else memo
    hit = memo.get(id(a))
    if hit is not None:
        return hit[0]
    res = _mk(a.var, _negate(a.lo, memo), _negate(a.hi, memo))
    memo[id(a)] = (res, a)
    return res


def _restrict(a, var, bit, memo=None):
    if isinstance(a, bool):
        return a
    memo = {} if memo is None else memo
    hit = memo.get(id(a))
    if hit is not None:
        return hit[0]
    if a.var == var:
        res = a.hi if bit else a.lo
    elif a.var > var:
        res = a
    else:
        res = _mk(a.var, _restrict(a.lo, var, bit, memo), _restrict(a.hi, var, bit, memo))
    memo[id(a)] = (res, a)
    return res


def _vars(a) -> set[int]:
    out: set[int] = set()
    seen: set[int] = set()
    stack = [a]
    while stack:
        n = stack.pop()
        if isinstance(n, bool) or id(n) in seen:
            continue
        seen.add(id(n))
        out.add(n.var)
        stack.append(n.lo)
        stack.append(n.hi)
    return out


def _measure(a, memo):
    if a is True:
        return Fraction(1)
    if a is False:
        return Fraction(0)
    hit = memo.get(id(a))
    if hit is None:
        hit = (_measure(a.lo, memo) + _measure(a.hi, memo)) / 2
        memo[id(a)] = hit
    return hit


def _paths(a, prefix: tuple) -> Iterator[tuple]:
    if a is True:
        yield prefix
    elif a is False:
        return
    else:
        yield from _paths(a.lo, prefix + ((a.var, 0),))
        yield from _paths(a.hi, prefix + ((a.var, 1),))


# -- public type ----------------------------------------------------------------

class ClopenSet:
    """Clopen subset of 2^omega in canonical form (immutable)."""

    __slots__ = ("_root", "__weakref__")

    def __init__(self, root=False):
        self._root = root

    @classmethod
    def full(cls) -> ClopenSet:
        return cls(True)

    @classmethod
    def empty(cls) -> ClopenSet:
        return cls(False)

    @classmethod
    def from_cylinders(cls, phis: Iterable[PartialAssignment | Mapping[int, int]]) -> ClopenSet:
        root = False
        for phi in phis:
            if not isinstance(phi, PartialAssignment):
                phi = PartialAssignment.of(phi)
            root = _apply_top(lambda x, y: x or y, root, _cube(phi))
        return cls(root)

    @property
    def cylinders(self) -> tuple[PartialAssignment, ...]:
        """Canonical pairwise-disjoint cylinders (accepting paths of the tree)."""
        return tuple(PartialAssignment(p) for p in _paths(self._root, ()))

    def is_empty(self) -> bool:
        return self._root is False

    def is_full(self) -> bool:
        return self._root is True

    def contains(self, point: Mapping[int, int]) -> bool:
        """Membership of any sequence agreeing with ``point`` on the tested coordinates."""
        node = self._root
        while isinstance(node, _Node):
            node = node.hi if point[node.var] else node.lo
        return node

    def restrict(self, coord: int, bit: int) -> ClopenSet:
        return ClopenSet(_restrict(self._root, coord, bit))

    def syntactic_support(self) -> frozenset[int]:
        return frozenset(_vars(self._root))

    def witness(self) -> PartialAssignment | None:
        """Some cylinder contained in the set, or None when empty."""
        for p in _paths(self._root, ()):
            return PartialAssignment(p)
        return None

    def __or__(self, other: ClopenSet) -> ClopenSet:
        return ClopenSet(_apply_top(lambda x, y: x or y, self._root, other._root))

    def __and__(self, other: ClopenSet) -> ClopenSet:
        return ClopenSet(_apply_top(lambda x, y: x and y, self._root, other._root))

    def __sub__(self, other: ClopenSet) -> ClopenSet:
        return ClopenSet(_apply_top(lambda x, y: x and not y, self._root, other._root))

    def __xor__(self, other: ClopenSet) -> ClopenSet:
        return ClopenSet(_apply_top(lambda x, y: x != y, self._root, other._root))

    def __invert__(self) -> ClopenSet:
        return ClopenSet(_negate(self._root))

    def __le__(self, other: ClopenSet) -> bool:
        return (self - other).is_empty()

    def __eq__(self, other) -> bool:
        return isinstance(other, ClopenSet) and self._root is other._root

    def __hash__(self) -> int:
        return hash(("ClopenSet", id(self._root)))

    def measure(self) -> Fraction:
        return _measure(self._root, {})

    def __repr__(self) -> str:
        cyl = ", ".join(str(c.as_dict()) for c in self.cylinders)
        return f"ClopenSet([{cyl}])"

    def to_json(self) -> list[dict[str, int]]:
        return [c.to_json() for c in self.cylinders]

    @classmethod
    def from_json(cls, obj: list) -> ClopenSet:
        return cls.from_cylinders(PartialAssignment.from_json(o) for o in obj)


def cylinder(phi: PartialAssignment | Mapping[int, int]) -> ClopenSet:
    if not isinstance(phi, PartialAssignment):
        phi = PartialAssignment.of(phi)
    return ClopenSet(_cube(phi))


def union(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a | b


def intersect(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return a & b


def complement(a: ClopenSet) -> ClopenSet:
    return ~a


def measure(a: ClopenSet) -> Fraction:
    return a.measure()


def support(a: ClopenSet, bound: int | None = None) -> frozenset[int]:
    """Minimal coordinate set the clopen set depends on.

    Every coordinate in the syntactic support is tested for irrelevance by
    comparing the two cofactors exactly.
    """
    bound = config.SUPPORT_BOUND if bound is None else bound
    syntactic = a.syntactic_support()
    if len(syntactic) > bound:
        raise SupportTooLarge(f"{len(syntactic)} coordinates exceed bound {bound}")
    return frozenset(c for c in syntactic if a.restrict(c, 0) != a.restrict(c, 1))


def product_measure_check(a: ClopenSet, b: ClopenSet) -> Fraction:
    """λ(a ∩ b) for sets on disjoint coordinates, asserting the product rule."""
    sa, sb = support(a), support(b)
    if sa & sb:
        raise OverlappingSupports(f"shared coordinates {sorted(sa & sb)}")
    joint = (a & b).measure()
    if joint != a.measure() * b.measure():
        raise AssertionError(f"product rule failed: {joint} != {a.measure()} * {b.measure()}")
    return joint


def brute_force_measure(a: ClopenSet, coords: Iterable[int]) -> Fraction:
    """Count satisfying assignments of ``coords`` (must cover the support)."""
    coords = sorted(set(coords))
    hits = 0
    for bits in product((0, 1), repeat=len(coords)):
        if a.contains(dict(zip(coords, bits))):
            hits += 1
    return Fraction(hits, 2 ** len(coords))
