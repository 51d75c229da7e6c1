"""Slaloms, the point space of finite slaloms with a height, and Boolean
combinations of the generators T_V and T_(S,n) modulo finite sets.

A slalom is stored as sorted ``(level, bitmask)`` pairs: bit j of the mask
for level k says j ∈ S(k).  Level 0 never occurs because S(0) must be a
proper subset of the one-point set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Sequence, Union

from . import config
from .errors import ClassMismatch, HeightTooLarge, InvalidSlalom, MalformedConjunct

MAX_ENUM_HEIGHT = 4


def _full(k: int) -> int:
    return (1 << (1 << k)) - 1


def _bits(mask: int) -> list[int]:
    out, j = [], 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class Slalom:
    masks: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prev = 0
        for k, m in self.masks:
            if k <= prev:
                raise InvalidSlalom(f"levels must be distinct, increasing and at least 1 (got {k})")
            if m <= 0 or m >= _full(k):
                raise InvalidSlalom(f"level {k} must be a nonempty proper subset of 2^{k}")
            prev = k

    @classmethod
    def of(cls, levels: Mapping[int, Iterable[int]]) -> Slalom:
        masks = {}
        for k, vals in levels.items():
            k = int(k)
            m = 0
            for j in vals:
                if not 0 <= j < 1 << k:
                    raise InvalidSlalom(f"value {j} outside 2^{k} at level {k}")
                m |= 1 << j
            if m:
                masks[k] = m
        return cls._from_dict(masks)

    @classmethod
    def _from_dict(cls, masks: Mapping[int, int]) -> Slalom:
        for k, m in masks.items():
            if k == 0 and m:
                raise InvalidSlalom("level 0 must be empty")
        return cls(tuple(sorted((k, m) for k, m in masks.items() if m)))

    def level(self, k: int) -> int:
        for lv, m in self.masks:
            if lv == k:
                return m
        return 0

    def values(self, k: int) -> list[int]:
        return _bits(self.level(k))

    @property
    def levels(self) -> dict[int, list[int]]:
        return {k: _bits(m) for k, m in self.masks}

    @property
    def height(self) -> int:
        """Least n with support below n."""
        return self.masks[-1][0] + 1 if self.masks else 0

    def restrict(self, n: int) -> Slalom:
        """S|n: the levels below n."""
        return Slalom(tuple(p for p in self.masks if p[0] < n))

    def above(self, n: int) -> Slalom:
        return Slalom(tuple(p for p in self.masks if p[0] >= n))

    def __le__(self, other: Slalom) -> bool:
        return all(m & ~other.level(k) == 0 for k, m in self.masks)

    def __bool__(self) -> bool:
        return bool(self.masks)

    def __len__(self) -> int:
        return sum(_popcount(m) for _, m in self.masks)

    def __repr__(self) -> str:
        return f"Slalom({self.levels})"

    def to_json(self) -> dict:
        return {"levels": {str(k): v for k, v in self.levels.items()}}

    @classmethod
    def from_json(cls, obj: Mapping) -> Slalom:
        if not isinstance(obj, Mapping) or "levels" not in obj:
            raise InvalidSlalom("slalom must be an object with 'levels'")
        return cls.of({int(k): v for k, v in obj["levels"].items()})


EMPTY = Slalom()


def union_masks(slaloms: Iterable[Slalom]) -> dict[int, int]:
    out: dict[int, int] = {}
    for s in slaloms:
        for k, m in s.masks:
            out[k] = out.get(k, 0) | m
    return out


def full_level(masks: Mapping[int, int]) -> int | None:
    """Least level covered completely, if any."""
    full = [k for k, m in masks.items() if m == _full(k)]
    return min(full) if full else None


def union(slaloms: Iterable[Slalom]) -> Slalom:
    masks = union_masks(slaloms)
    k = full_level(masks)
    if k is not None:
        raise InvalidSlalom(f"union covers all of 2^{k} at level {k}")
    return Slalom._from_dict(masks)


def weight(v: Slalom) -> Fraction:
    return sum((Fraction(_popcount(m), 1 << k) for k, m in v.masks), Fraction(0))


def tail_weight(v: Slalom, n: int) -> Fraction:
    """Σ_{k≥n} |V(k)|/2^k."""
    return weight(v.above(n))


# -- points ---------------------------------------------------------------------

@dataclass(frozen=True)
class OmegaPoint:
    n: int
    T: Slalom = EMPTY

    def __post_init__(self):
        if self.n < 0 or self.T.height > self.n:
            raise InvalidSlalom(f"point slalom must be supported below its height {self.n}")

    def to_json(self) -> dict:
        return {"S": self.T.to_json(), "n": self.n}


def _slaloms_below(n: int, start: int = 1, prefix: Mapping[int, int] | None = None) -> Iterator[Slalom]:
    """All slaloms supported below n, agreeing with ``prefix`` below ``start``."""
    base = dict(prefix or {})
    ranges = [range(_full(k)) for k in range(start, n)]
    for combo in product(*ranges):
        masks = dict(base)
        for k, m in zip(range(start, n), combo):
            if m:
                masks[k] = m
        yield Slalom._from_dict(masks)


def count_points(n: int) -> int:
    c = 1
    for k in range(1, n):
        c *= _full(k)
    return c


def enum_omega(H: int) -> list[OmegaPoint]:
    if H > MAX_ENUM_HEIGHT:
        raise HeightTooLarge(f"enumeration height {H} exceeds {MAX_ENUM_HEIGHT}")
    if H < 0:
        return []
    return [OmegaPoint(n, t) for n in range(H + 1) for t in _slaloms_below(n)]


# -- expressions ----------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class PosT:
    V: Slalom


@dataclass(frozen=True)
class Height:
    S: Slalom
    n: int

    def __post_init__(self):
        if self.n < 0 or self.S.height > self.n:
            raise InvalidSlalom(f"height atom needs S supported below {self.n}")


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Not:
    arg: object


GenExpr = Union[Const, PosT, Height, And, Or, Not]
TRUE, FALSE = Const(True), Const(False)


def conj(*args) -> And:
    return And(tuple(args))


def disj(*args) -> Or:
    return Or(tuple(args))


def expr_to_json(e: GenExpr):
    if isinstance(e, Const):
        return {"const": e.value}
    if isinstance(e, PosT):
        return {"posT": e.V.to_json()}
    if isinstance(e, Height):
        return {"height": {"S": e.S.to_json(), "n": e.n}}
    if isinstance(e, And):
        return {"and": [expr_to_json(a) for a in e.args]}
    if isinstance(e, Or):
        return {"or": [expr_to_json(a) for a in e.args]}
    if isinstance(e, Not):
        return {"not": expr_to_json(e.arg)}
    raise TypeError(f"not an expression: {e!r}")


def expr_from_json(obj) -> GenExpr:
    if not isinstance(obj, Mapping) or len(obj) != 1:
        raise InvalidSlalom("expression node must be an object with exactly one key")
    (tag, body), = obj.items()
    if tag == "const":
        return Const(bool(body))
    if tag == "posT":
        return PosT(Slalom.from_json(body))
    if tag == "height":
        return Height(Slalom.from_json(body["S"]), int(body["n"]))
    if tag in ("and", "or"):
        args = tuple(expr_from_json(a) for a in body)
        return And(args) if tag == "and" else Or(args)
    if tag == "not":
        return Not(expr_from_json(body))
    raise InvalidSlalom(f"unknown expression node {tag!r}")


def atoms(e: GenExpr) -> Iterator[GenExpr]:
    if isinstance(e, (PosT, Height, Const)):
        yield e
    elif isinstance(e, (And, Or)):
        for a in e.args:
            yield from atoms(a)
    else:
        yield from atoms(e.arg)


def member(e: GenExpr, p: OmegaPoint) -> bool:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, PosT):
        return e.V.restrict(p.n) <= p.T
    if isinstance(e, Height):
        return p.n >= e.n and p.T.restrict(e.n) == e.S
    if isinstance(e, And):
        return all(member(a, p) for a in e.args)
    if isinstance(e, Or):
        return any(member(a, p) for a in e.args)
    if isinstance(e, Not):
        return not member(e.arg, p)
    raise TypeError(f"not an expression: {e!r}")


# -- normal form ----------------------------------------------------------------

@dataclass(frozen=True)
class Conjunct:
    """(⋂ complements of T_{V_i}) ∩ T_V ∩ T_(S,n).

    ``finite`` marks conjuncts already known to be finite: a merged positive
    union that fills a level, or incompatible height atoms.
    """

    height: tuple[Slalom, int] | None = None
    positive: Slalom | None = None
    negatives: tuple[Slalom, ...] = ()
    finite: bool = False

    def as_expr(self) -> GenExpr:
        if self.finite:
            return FALSE
        parts: list[GenExpr] = []
        if self.height is not None:
            parts.append(Height(*self.height))
        if self.positive is not None:
            parts.append(PosT(self.positive))
        parts.extend(Not(PosT(v)) for v in self.negatives)
        return And(tuple(parts))

    def to_json(self) -> dict:
        return {
            "height": None if self.height is None
            else {"S": self.height[0].to_json(), "n": self.height[1]},
            "positive": None if self.positive is None else self.positive.to_json(),
            "negatives": [v.to_json() for v in self.negatives],
            "finite": self.finite,
        }


def _nnf(e: GenExpr, neg: bool = False):
    """Push negations to the atoms.  Literals are (sign, atom)."""
    if isinstance(e, Not):
        return _nnf(e.arg, not neg)
    if isinstance(e, Const):
        return Const(e.value != neg)
    if isinstance(e, (PosT, Height)):
        return (not neg, e)
    args = tuple(_nnf(a, neg) for a in e.args)
    is_and = isinstance(e, And) != neg
    return ("and" if is_and else "or", args)


def _dnf(node) -> list[list]:
    if isinstance(node, Const):
        return [[]] if node.value else []
    tag, body = node
    if isinstance(tag, bool):
        return [[node]]
    parts = [_dnf(a) for a in body]
    if tag == "or":
        return [c for p in parts for c in p]
    out: list[list] = [[]]
    for p in parts:
        out = [a + b for a in out for b in p]
        if len(out) > config.budget(config.NODE_BUDGET):
            raise HeightTooLarge("normal form exceeds the node budget")
    return out


def _key(v: Slalom):
    return v.masks


def _hkey(h):
    return h[0], h[1].masks


def _merge(literals: list) -> list[Conjunct]:
    pos = [a.V for s, a in literals if s and isinstance(a, PosT)]
    neg = sorted({a.V for s, a in literals if not s and isinstance(a, PosT)}, key=_key)
    hts = sorted({(a.n, a.S) for s, a in literals if s and isinstance(a, Height)}, key=_hkey)
    nhts = sorted({(a.n, a.S) for s, a in literals if not s and isinstance(a, Height)}, key=_hkey)

    masks = union_masks(pos)
    positive = Slalom._from_dict(masks) if pos and full_level(masks) is None else None
    dead = bool(pos) and positive is None

    height = None
    for n, s in hts:
        if height is not None and s.restrict(height[1]) != height[0]:
            dead = True
            break
        height = (s, n)
    if dead:
        return [Conjunct(height, positive, tuple(neg), finite=True)]

    base_s, base_n = height if height is not None else (EMPTY, 0)
    # negated heights at or below the positive height are decided by it
    live = []
    for n, s in nhts:
        if n <= base_n:
            if base_s.restrict(n) == s:
                return [Conjunct(height, positive, tuple(neg), finite=True)]
        else:
            live.append((n, s))
    if not live:
        return [Conjunct(height, positive, tuple(neg))]

    # otherwise split T_(S,n)ᶜ into the other prefixes at the top height
    top = max(n for n, _ in live)
    out = []
    if count_points(top) // max(count_points(base_n), 1) > config.budget(config.NODE_BUDGET):
        raise HeightTooLarge(f"negated height {top} expands beyond the node budget")
    for t in _slaloms_below(top, base_n, dict(base_s.masks)):
        if all(t.restrict(n) != s for n, s in live):
            out.append(Conjunct((t, top), positive, tuple(neg)))
    return out


def normal_form(e: GenExpr) -> list[Conjunct]:
    """DNF of ``e`` equal to it modulo a finite subset of the point space."""
    out: list[Conjunct] = []
    for lits in _dnf(_nnf(e)):
        out.extend(_merge(lits))
    return out


def decide_infinite(c: Conjunct) -> bool:
    """Whether the conjunct denotes an infinite set of points.

    Above every support, (T,m) is a member iff T|n = S, V ⊆ T and no V_i ⊆ T.
    The least candidate is V′ = S below n and V from n on, so the conjunct
    is infinite iff V|n ⊆ S and no negative fits inside V′.
    """
    if c.finite:
        return False
    s, n = c.height if c.height is not None else (EMPTY, 0)
    if s.height > n:
        raise MalformedConjunct(f"height prefix has support beyond {n}")
    v = c.positive if c.positive is not None else EMPTY
    if not v.restrict(n) <= s:
        return False
    prime = Slalom._from_dict({**dict(s.masks), **dict(v.above(n).masks)})
    return all(not vi <= prime for vi in c.negatives)


def is_infinite(e: GenExpr) -> bool:
    return any(decide_infinite(c) for c in normal_form(e))


# -- brute-force universe ---------------------------------------------------------

class OmegaTable:
    """The points of height ≤ H with expression membership as bitsets."""

    def __init__(self, H: int):
        self.H = H
        self.points = enum_omega(H)
        self.full = (1 << len(self.points)) - 1
        self._top = 0
        # per-level tables: bit i set when level k of point i contains / equals mask
        self._contains: dict[int, dict[int, int]] = {}
        for i, p in enumerate(self.points):
            if p.n == H:
                self._top |= 1 << i
        self._height_ge = [sum(1 << i for i, p in enumerate(self.points) if p.n >= n)
                           for n in range(H + 2)]
        self._level_of = {
            k: [p.T.level(k) for p in self.points] for k in range(1, H)
        }
        self._level_eq: dict[int, dict[int, int]] = {}
        for k, col in self._level_of.items():
            eq: dict[int, int] = {}
            for i, m in enumerate(col):
                eq[m] = eq.get(m, 0) | 1 << i
            self._level_eq[k] = eq
        self._below = {
            k: sum(1 << i for i, p in enumerate(self.points) if p.n <= k) for k in range(H + 1)
        }

    def _level_contains(self, k: int, mask: int) -> int:
        table = self._contains.setdefault(k, {})
        if mask not in table:
            col = self._level_of[k]
            table[mask] = sum(1 << i for i, m in enumerate(col) if mask & ~m == 0)
        return table[mask]

    def positive(self, v: Slalom) -> int:
        if v.height > self.H:
            raise HeightTooLarge(f"slalom support {v.height} exceeds table height {self.H}")
        bits = self.full
        for k, m in v.masks:
            # points of height ≤ k ignore level k
            bits &= self._level_contains(k, m) | self._below[k]
        return bits

    def height(self, s: Slalom, n: int) -> int:
        if n > self.H:
            raise HeightTooLarge(f"height atom {n} exceeds table height {self.H}")
        bits = self._height_ge[n]
        for k in range(1, n):
            bits &= self._level_eq[k].get(s.level(k), 0)
        return bits

    def evaluate(self, e: GenExpr) -> int:
        if isinstance(e, Const):
            return self.full if e.value else 0
        if isinstance(e, PosT):
            return self.positive(e.V)
        if isinstance(e, Height):
            return self.height(e.S, e.n)
        if isinstance(e, And):
            bits = self.full
            for a in e.args:
                bits &= self.evaluate(a)
            return bits
        if isinstance(e, Or):
            bits = 0
            for a in e.args:
                bits |= self.evaluate(a)
            return bits
        return self.full & ~self.evaluate(e.arg)

    def infinite(self, e: GenExpr) -> bool:
        """Exact when every atom lives below the table height.

        Then membership of (T,m) with m ≥ H only depends on T|H, so a member
        at the top height extends to members at every larger height.
        """
        return bool(self.evaluate(e) & self._top)

    def count_by_height(self, e: GenExpr) -> list[int]:
        bits = self.evaluate(e)
        counts = [0] * (self.H + 1)
        for i, p in enumerate(self.points):
            if bits >> i & 1:
                counts[p.n] += 1
        return counts


# -- classes and the measure witness ----------------------------------------------

def w_delta_class(w: Slalom, delta: Fraction) -> tuple[Slalom, int]:
    """Least n with Σ_{k≥n} |W(k)|/2^k < 1 − δ, and S = W|n.

    The tail includes level n itself: members of one class agree below n
    and are only weight-limited from n on.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie strictly between 0 and 1")
    n = 0
    while tail_weight(w, n) >= 1 - delta:
        n += 1
    return w.restrict(n), n


def in_class(w: Slalom, s: Slalom, n: int, delta: Fraction) -> bool:
    return w.restrict(n) == s and tail_weight(w, n) < 1 - Fraction(delta)


@dataclass(frozen=True)
class MeasurePair:
    exact: Fraction
    union_bound: Fraction


def a_w_measure(w: Slalom, n: int) -> MeasurePair:
    """Measure of {f : f(k) ∉ W(k) for k ≥ n} under the uniform product on f(k) < 2^k."""
    exact = Fraction(1)
    for k, m in w.above(n).masks:
        exact *= 1 - Fraction(_popcount(m), 1 << k)
    return MeasurePair(exact, 1 - tail_weight(w, n))


@dataclass(frozen=True)
class Cl2Witness:
    S: Slalom
    n: int
    indices: tuple[int, ...]
    f: dict[int, int] = field(compare=False)
    expected: Fraction = Fraction(0)

    def conjunct(self, vs: Sequence[Slalom]) -> Conjunct:
        return Conjunct((self.S, self.n), union(vs[i] for i in self.indices))


def common_class(vs: Sequence[Slalom], delta: Fraction) -> tuple[Slalom, int]:
    if not vs:
        raise ValueError("need at least one slalom")
    n = max(w_delta_class(v, delta)[1] for v in vs)
    s = vs[0].restrict(n)
    for i, v in enumerate(vs):
        if not in_class(v, s, n, delta):
            raise ClassMismatch(f"V_{i} is not in the class of V_0 at height {n}")
    return s, n


def cl2_witness(vs: Sequence[Slalom], delta: Fraction,
                cls: tuple[Slalom, int] | None = None) -> Cl2Witness:
    """A large index set I and an f avoiding ⋃_I V_i(k) for k ≥ n.

    f is fixed level by level so that the conditional expectation of
    #{i : f avoids V_i} never drops; it starts above δ·|Vs|.
    """
    delta = Fraction(delta)
    if cls is None:
        s, n = common_class(vs, delta)
    else:
        s, n = cls
        for i, v in enumerate(vs):
            if not in_class(v, s, n, delta):
                raise ClassMismatch(f"V_{i} is not in class ({s}, {n})")
    levels = sorted({k for v in vs for k, _ in v.above(n).masks})
    alive = [True] * len(vs)

    def survive(i: int, ks) -> Fraction:
        p = Fraction(1)
        for k in ks:
            p *= 1 - Fraction(_popcount(vs[i].level(k)), 1 << k)
        return p

    expected = sum(survive(i, levels) for i in range(len(vs)))
    start = expected
    f: dict[int, int] = {}
    for pos, k in enumerate(levels):
        rest = levels[pos + 1:]
        tails = [survive(i, rest) for i in range(len(vs))]
        best, best_val = 0, Fraction(-1)
        for j in range(1 << k):
            val = sum(tails[i] for i in range(len(vs))
                      if alive[i] and not vs[i].level(k) >> j & 1)
            if val > best_val:
                best, best_val = j, val
        f[k] = best
        for i in range(len(vs)):
            if vs[i].level(k) >> best & 1:
                alive[i] = False
    indices = tuple(i for i in range(len(vs)) if alive[i])
    return Cl2Witness(s, n, indices, f, start)


def compatible(vs: Sequence[Slalom], idx: Iterable[int], cls: tuple[Slalom, int]) -> bool:
    """Whether ⋂_idx T_{V_i} ∩ T_(S,n) is infinite."""
    masks = union_masks(vs[i] for i in idx)
    if full_level(masks) is not None:
        return False
    return decide_infinite(Conjunct(cls, Slalom._from_dict(masks)))


def atomization(vs: Sequence[Slalom], cls: tuple[Slalom, int]) -> tuple[list[tuple[int, ...]], list[list[int]]]:
    """Maximal index sets with infinite common part, and per-V membership.

    Any index set with infinite intersection lies in some maximal one, so
    these serve as the atoms of a finite family with the same intersection
    numbers as the classes modulo finite.
    """
    k = len(vs)
    if k > 16:
        raise HeightTooLarge("atomization is exhaustive over subsets; at most 16 slaloms")
    good = [frozenset(c) for r in range(k, 0, -1) for c in combinations(range(k), r)
            if compatible(vs, c, cls)]
    maximal: list[frozenset] = []
    for g in good:
        if not any(g < m for m in maximal):
            maximal.append(g)
    atoms_ = sorted(tuple(sorted(m)) for m in maximal)
    sets = [[a for a, m in enumerate(atoms_) if i in m] for i in range(k)]
    return atoms_, sets


def diagonal_escape(wns: Sequence[Slalom], H: int) -> dict[int, int]:
    """f with f(n) ∉ W_n(n), where the list holds W_1, W_2, …"""
    if H < len(wns):
        raise ValueError("H must be at least the list length")
    f = {0: 0}
    for n in range(1, H + 1):
        taken = wns[n - 1].level(n) if n <= len(wns) else 0
        f[n] = next(j for j in range(1 << n) if not taken >> j & 1)
    return f
