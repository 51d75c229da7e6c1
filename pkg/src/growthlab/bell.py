"""The branching tree N ⊆ ∏{0,…,n+1}, clopen sets of X with the factorial
product measure, height-H truncations of V_π and C_π, and the checks that
tie them together.

A clopen set is a reduced trie: ``True`` is the full cone, ``False`` the
empty one, and an internal node at depth d is a tuple of its d+2 children.
Full and empty children collapse, so equal sets have equal tries.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Iterable, Iterator, Sequence

from . import config
from .errors import DepthGuard, HypothesisFailed
from .rational import fmt, inv_factorial


@dataclass(frozen=True)
class BellNode:
    seq: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "seq", tuple(int(v) for v in self.seq))
        for i, v in enumerate(self.seq):
            if not 0 <= v <= i + 1:
                raise ValueError(f"node value {v} at index {i} outside 0..{i + 1}")

    def __len__(self) -> int:
        return len(self.seq)

    def extends(self, other: BellNode) -> bool:
        return self.seq[: len(other.seq)] == other.seq

    def child(self, p: int) -> BellNode:
        return BellNode(self.seq + (p,))

    def to_json(self) -> list[int]:
        return list(self.seq)


ROOT = BellNode()


def node(seq: Iterable[int] | BellNode) -> BellNode:
    return seq if isinstance(seq, BellNode) else BellNode(tuple(seq))


@dataclass(frozen=True)
class PiPrefix:
    rows: tuple[BellNode, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(node(r) for r in self.rows))
        if not self.rows:
            raise ValueError("a prefix needs at least the row π(0)")
        for i, r in enumerate(self.rows):
            if len(r) != i + 1:
                raise ValueError(f"row {i} must have length {i + 1}, got {len(r)}")

    @property
    def height(self) -> int:
        return len(self.rows) - 1

    def upto(self, H: int) -> PiPrefix:
        return PiPrefix(self.rows[: H + 1])

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows]}

    @classmethod
    def from_json(cls, obj) -> PiPrefix:
        return cls(tuple(node(r) for r in obj["rows"]))


def node_measure(s: BellNode | Sequence[int]) -> Fraction:
    return inv_factorial(len(node(s)) + 1)


def nodes_at(depth: int, prefix: BellNode = ROOT) -> Iterator[BellNode]:
    """All nodes of the given depth extending ``prefix``."""
    k = len(prefix)
    if depth < k:
        return
    count = factorial(depth + 1) // factorial(k + 1)
    guard = config.budget(config.NODE_BUDGET)
    if count > guard:
        raise DepthGuard(f"{count} nodes at depth {depth} exceed the node budget {guard}")
    for tail in product(*(range(i + 2) for i in range(k, depth))):
        yield BellNode(prefix.seq + tail)


# -- trie algebra -------------------------------------------------------------------

def _norm(children: tuple):
    if all(c is True for c in children):
        return True
    if all(c is False for c in children):
        return False
    return children


def _cone(seq: tuple[int, ...], depth: int = 0):
    if depth == len(seq):
        return True
    sub = _cone(seq, depth + 1)
    return tuple(sub if p == seq[depth] else False for p in range(depth + 2))


def _expand(a, depth: int) -> tuple:
    return (a,) * (depth + 2) if isinstance(a, bool) else a


@lru_cache(maxsize=1 << 16)
def _apply(op: str, a, b, depth: int):
    if op == "and":
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True:
            return a
    else:
        if a is True or b is True:
            return True
        if a is False:
            return b
        if b is False:
            return a
    if a == b:
        return a
    ea, eb = _expand(a, depth), _expand(b, depth)
    return _norm(tuple(_apply(op, x, y, depth + 1) for x, y in zip(ea, eb)))


@lru_cache(maxsize=1 << 16)
def _negate(a):
    if isinstance(a, bool):
        return not a
    return tuple(_negate(c) for c in a)


@lru_cache(maxsize=1 << 16)
def _measure(a, depth: int) -> Fraction:
    if a is True:
        return inv_factorial(depth + 1)
    if a is False:
        return Fraction(0)
    return sum((_measure(c, depth + 1) for c in a), Fraction(0))


def _leaves(a, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    if a is True:
        yield prefix
    elif a is not False:
        for p, c in enumerate(a):
            yield from _leaves(c, prefix + (p,))


class BellClopen:
    """A clopen subset of X given by its reduced trie."""

    __slots__ = ("_root",)

    def __init__(self, root=False):
        self._root = root

    @classmethod
    def full(cls) -> BellClopen:
        return cls(True)

    @classmethod
    def empty(cls) -> BellClopen:
        return cls(False)

    @classmethod
    def cone(cls, s: BellNode | Sequence[int]) -> BellClopen:
        return cls(_cone(node(s).seq))

    @classmethod
    def from_nodes(cls, nodes: Iterable) -> BellClopen:
        out = cls.empty()
        for s in nodes:
            out = out | cls.cone(s)
        return out

    @property
    def nodes(self) -> list[BellNode]:
        """Pairwise incomparable nodes whose cones partition the set."""
        return [BellNode(p) for p in _leaves(self._root, ())]

    def __or__(self, other: BellClopen) -> BellClopen:
        return BellClopen(_apply("or", self._root, other._root, 0))

    def __and__(self, other: BellClopen) -> BellClopen:
        return BellClopen(_apply("and", self._root, other._root, 0))

    def __invert__(self) -> BellClopen:
        return BellClopen(_negate(self._root))

    def __sub__(self, other: BellClopen) -> BellClopen:
        return self & ~other

    def __eq__(self, other) -> bool:
        return isinstance(other, BellClopen) and self._root == other._root

    def __hash__(self) -> int:
        return hash(self._root)

    def __le__(self, other: BellClopen) -> bool:
        return (self - other).is_empty()

    def is_empty(self) -> bool:
        return self._root is False

    def measure(self) -> Fraction:
        return _measure(self._root, 0)

    def contains_cone(self, t: BellNode) -> bool:
        """[t] ⊆ self."""
        a = self._root
        for v in t.seq:
            if isinstance(a, bool):
                return a
            a = a[v]
        return a is True

    def meets_cone(self, t: BellNode) -> bool:
        """[t] ∩ self ≠ ∅."""
        a = self._root
        for v in t.seq:
            if isinstance(a, bool):
                return a
            a = a[v]
        return a is not False

    def witness(self, depth: int = 0) -> BellNode | None:
        """A node of at least the given depth whose cone lies inside."""
        for leaf in _leaves(self._root, ()):
            return BellNode(leaf + tuple(0 for _ in range(len(leaf), depth)))
        return None

    def __repr__(self) -> str:
        return f"BellClopen({[n.seq for n in self.nodes]})"

    def to_json(self) -> list:
        return [n.to_json() for n in self.nodes]

    @classmethod
    def from_json(cls, obj) -> BellClopen:
        return cls.from_nodes(node(s) for s in obj)


def v_trunc(pi: PiPrefix, H: int | None = None) -> BellClopen:
    """⋃_{n≤H} [π(n)]."""
    rows = pi.rows if H is None else pi.rows[: H + 1]
    return BellClopen.from_nodes(rows)


def a_n(pis: Sequence[PiPrefix], n: int) -> BellClopen:
    """⋃_j ⋃_{i<n} [π_j(i)]."""
    return BellClopen.from_nodes(r for pi in pis for r in pi.rows[:n])


def tail_majorant(H: int) -> Fraction:
    """Upper bound on Σ_{l>H} 1/(l+2)!: consecutive terms shrink by at least 1/(H+4)."""
    return inv_factorial(H + 3) * Fraction(H + 4, H + 3)


def v_tail_bound(H: int, m: int) -> Fraction:
    """Bound on the measure the rows beyond H of m prefixes can add."""
    if H < 0 or m < 1:
        raise ValueError("need H ≥ 0 and m ≥ 1")
    return m * tail_majorant(H)


@dataclass(frozen=True)
class TaylorResult:
    holds: bool
    lhs_upper: Fraction
    lhs_lower: Fraction
    rhs: Fraction


def taylor_check(m: int, n: int) -> TaylorResult:
    """Certified comparison of m·Σ_{l≥n} 1/(l+1)! with 1/n!."""
    if m < 1 or n < 1:
        raise ValueError("need m ≥ 1 and n ≥ 1")
    rhs = inv_factorial(n)
    partial = Fraction(0)
    l = n
    while True:
        partial += inv_factorial(l + 1)
        # remaining terms are Σ_{l'>l} 1/(l'+1)! = Σ_{j>l-1} 1/(j+2)!
        upper = m * (partial + tail_majorant(l - 1))
        lower = m * partial
        if upper < rhs:
            return TaylorResult(True, upper, lower, rhs)
        if lower >= rhs:
            return TaylorResult(False, upper, lower, rhs)
        l += 1


# -- the two sides of the isomorphism condition ---------------------------------------

def _common_height(prefixes: Sequence[PiPrefix], H: int | None) -> int:
    heights = {p.height for p in prefixes}
    if H is None:
        if len(heights) > 1:
            raise ValueError(f"prefixes have different heights {sorted(heights)}")
        return heights.pop() if heights else 0
    if any(h < H for h in heights):
        raise ValueError(f"some prefix is shorter than height {H}")
    return H


@dataclass(frozen=True)
class VVerdict:
    empty: bool
    witness: BellNode | None

    def to_json(self) -> dict:
        return {"status": "empty" if self.empty else "witness",
                "witness": None if self.witness is None else self.witness.to_json()}


def v_side_set(s: BellNode, pos, neg, H: int) -> BellClopen:
    out = BellClopen.cone(s)
    for pi in pos:
        out = out & v_trunc(pi, H)
    for pi in neg:
        out = out - v_trunc(pi, H)
    return out


def decide_nonempty_V(s, pos: Sequence[PiPrefix], neg: Sequence[PiPrefix],
                      H: int | None = None) -> VVerdict:
    """[s] ∩ ⋂ V_{π′_i} ∩ ⋂ V_{π_j}ᶜ at height H, with a depth-(H+1) witness."""
    s = node(s)
    H = _common_height(list(pos) + list(neg), H)
    region = v_side_set(s, pos, neg, H)
    if region.is_empty():
        return VVerdict(True, None)
    return VVerdict(False, region.witness(max(H + 1, len(s))))


@dataclass(frozen=True)
class CVerdict:
    finite: bool
    branch: tuple[BellNode, ...] = ()

    def to_json(self) -> dict:
        return {"status": "finite" if self.finite else "infinite",
                "branch": [t.to_json() for t in self.branch]}


def _extends_row(t: tuple, rows: Iterable[BellNode]) -> bool:
    return any(t[: len(r)] == r.seq for r in rows)


def _compatible(t: tuple, rows: Iterable[BellNode]) -> bool:
    return any(t[: len(r)] == r.seq[: len(t)] for r in rows)


def decide_infinite_C(s, pos: Sequence[PiPrefix], neg: Sequence[PiPrefix],
                      H: int | None = None, extra: int = 2) -> CVerdict:
    """Whether C_s ∩ ⋂ C_{π′_i} ∩ ⋂ C_{π_j}ᶜ (rows up to H) is infinite.

    Once t has depth M ≥ H+1 every row is decided, so D is infinite iff it
    has a node of depth M; such a node is then grown one level at a time,
    avoiding the at most m forbidden children among the k+2 available.
    """
    s = node(s)
    H = _common_height(list(pos) + list(neg), H)
    M = max(H + 1, len(s))
    guard = config.budget(config.NODE_BUDGET)
    if factorial(M + 1) // factorial(len(s) + 1) > guard:
        raise DepthGuard(f"search to depth {M} exceeds the node budget {guard}")
    pos_rows = [pi.rows[: H + 1] for pi in pos]
    neg_rows = [r for pi in neg for r in pi.rows[: H + 1]]

    def search(t: tuple) -> tuple | None:
        if _extends_row(t, neg_rows):
            return None
        if not all(_compatible(t, rows) for rows in pos_rows):
            return None
        if len(t) == M:
            return t if all(_extends_row(t, rows) for rows in pos_rows) else None
        for p in range(len(t) + 2):
            hit = search(t + (p,))
            if hit is not None:
                return hit
        return None

    if len(s) > M:
        return CVerdict(True)
    found = search(s.seq)
    if found is None:
        return CVerdict(True)
    branch = [found]
    for k in range(M, M + extra):
        t = branch[-1]
        forbidden = {r.seq[k] for r in neg_rows if len(r) == k + 1 and r.seq[:k] == t}
        p = next(q for q in range(k + 2) if q not in forbidden)
        branch.append(t + (p,))
    return CVerdict(False, tuple(BellNode(b) for b in branch))


def sweep(s, pos: Sequence[PiPrefix], neg: Sequence[PiPrefix], H: int) -> BellNode | None:
    """First depth-max(H+1,|s|) node meeting every positive and avoiding every negative row."""
    s = node(s)
    L = max(H + 1, len(s))
    pos_rows = [pi.rows[: H + 1] for pi in pos]
    neg_rows = [r for pi in neg for r in pi.rows[: H + 1]]
    for t in nodes_at(L, s):
        if all(_extends_row(t.seq, rows) for rows in pos_rows) and not _extends_row(t.seq, neg_rows):
            return t
    return None


def iso_condition_check(pos: Sequence[PiPrefix], neg: Sequence[PiPrefix], H: int,
                        s=ROOT) -> dict:
    """Finite on the C side iff empty on the V side, each confirmed by a sweep."""
    s = node(s)
    v = decide_nonempty_V(s, pos, neg, H)
    c = decide_infinite_C(s, pos, neg, H)
    swept = sweep(s, pos, neg, H)
    region = v_side_set(s, pos, neg, H)
    v_ok = (swept is None) == v.empty and (v.witness is None or region.contains_cone(v.witness))
    c_ok = (swept is None) == c.finite
    if not c.finite:
        t = c.branch[0]
        c_ok = c_ok and sweep(t, pos, neg, H) is not None
    return {
        "H": H,
        "s": s.to_json(),
        "V": v.to_json(),
        "C": c.to_json(),
        "sweep": None if swept is None else swept.to_json(),
        "biconditional": c.finite == v.empty,
        "v_sweep_agrees": v_ok,
        "c_sweep_agrees": c_ok,
        "pass": c.finite == v.empty and v_ok and c_ok,
    }


# -- strict positivity ----------------------------------------------------------------

def malo_ladder(pis: Sequence[PiPrefix], upto: int | None = None) -> list[dict]:
    """λ(A_{l+1} ∖ A_l) against m/(l+2)! for each available l."""
    m = len(pis)
    H = min(p.height for p in pis) if upto is None else upto
    rows = []
    prev = a_n(pis, 0)
    for l in range(H + 1):
        cur = a_n(pis, l + 1)
        gain = (cur - prev).measure()
        bound = m * inv_factorial(l + 2)
        rows.append({"l": l, "measure": fmt(gain), "bound": fmt(bound), "pass": gain <= bound})
        prev = cur
    return rows


def strict_positivity_check(s, pis: Sequence[PiPrefix], n: int) -> dict:
    """Certify λ([s] ∩ ⋃ V_{π_j}) < λ([s]) from height-H truncations."""
    s = node(s)
    m = len(pis)
    if m < 1:
        raise ValueError("need at least one prefix")
    H = _common_height(pis, None)
    if not n > max(len(s), 3 * m):
        raise ValueError(f"need n > max(|s|, 3m) = {max(len(s), 3 * m)}")
    if n > H + 1:
        raise ValueError(f"n = {n} exceeds the available height {H} + 1")
    verdict = decide_nonempty_V(s, [], pis, H)
    if verdict.empty:
        raise HypothesisFailed("[s] is covered by the truncated V_π; nothing to certify")
    cone = BellClopen.cone(s)
    lam_s = cone.measure()
    covered = (cone & BellClopen.from_nodes(r for pi in pis for r in pi.rows)).measure()
    tail = v_tail_bound(H, m)
    gap = lam_s - covered - tail

    residual_n = (cone - a_n(pis, n)).measure()
    duzo_bound = inv_factorial(n + 1)
    taylor = taylor_check(m, n + 1)
    # beyond A_n the π's add at most m·Σ_{l≥n} 1/(l+2)!
    gap_n = residual_n - v_tail_bound(n - 1, m)
    ladder = malo_ladder(pis)
    ok = (gap > 0 and residual_n >= duzo_bound and taylor.holds and gap_n > 0
          and all(r["pass"] for r in ladder))
    return {
        "s": s.to_json(),
        "m": m,
        "n": n,
        "H": H,
        "witness": verdict.witness.to_json(),
        "measure_s": fmt(lam_s),
        "measure_covered": fmt(covered),
        "tail_bound": fmt(tail),
        "gap": fmt(gap),
        "duzo": {"measure": fmt(residual_n), "bound": fmt(duzo_bound), "pass": residual_n >= duzo_bound},
        "taylor": {"lhs_upper": fmt(taylor.lhs_upper), "rhs": fmt(taylor.rhs), "pass": taylor.holds},
        "gap_at_n": fmt(gap_n),
        "ladder": ladder,
        "pass": ok,
    }
