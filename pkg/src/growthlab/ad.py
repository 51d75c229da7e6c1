"""Finite fragments of the almost-disjoint-family construction.

Points t_n^α are finite bit prefixes and each B_α is a finite increasing
prefix.  Block i of α reads t_i^α on the coordinates m_j^α with j in the
i-th triangular window [i(i+1)/2, (i+1)(i+2)/2).  Nothing is ever read past
the available data: a missing bit or index raises InsufficientPrefix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .cantor import ClopenSet, PartialAssignment, cylinder, support
from .errors import EmptyCore, InsufficientPrefix, ScenarioError
from .rational import fmt

MAX_BLOCK = 8


def window(i: int) -> range:
    """Positions of B_α read by block i."""
    return range(i * (i + 1) // 2, (i + 1) * (i + 2) // 2)


@dataclass(frozen=True)
class Scenario:
    """Point prefixes and AD-family prefixes, keyed by label α.

    ``ad_bound`` certifies almost disjointness: distinct families may only
    share elements below it, including elements beyond the stored prefixes.
    """

    points: Mapping[str, tuple[str, ...]]
    family: Mapping[str, tuple[int, ...]]
    ad_bound: int

    def __post_init__(self):
        object.__setattr__(self, "points", {a: tuple(ts) for a, ts in self.points.items()})
        object.__setattr__(self, "family", {a: tuple(int(x) for x in b) for a, b in self.family.items()})
        for a, elems in self.family.items():
            if not elems:
                raise ScenarioError(f"family[{a}] is empty")
            if any(y <= x for x, y in zip(elems, elems[1:])) or elems[0] < 0:
                raise ScenarioError(f"family[{a}] must be strictly increasing naturals")
        for a, ts in self.points.items():
            for t in ts:
                if not t or set(t) - {"0", "1"}:
                    raise ScenarioError(f"points[{a}] holds a non-binary prefix {t!r}")
        labels = sorted(self.family)
        for i, a in enumerate(labels):
            for b in labels[i + 1:]:
                shared = set(self.family[a]) & set(self.family[b])
                late = sorted(x for x in shared if x >= self.ad_bound)
                if late:
                    raise ScenarioError(f"families {a},{b} share {late} at or above ad_bound")

    def available_level(self, alpha: str) -> int:
        """Largest n ≤ MAX_BLOCK such that blocks 0..n can all be built (-1 if none)."""
        n = -1
        while n < MAX_BLOCK:
            try:
                block(self, alpha, n + 1)
            except InsufficientPrefix:
                return n
            n += 1
        return n

    def to_json(self) -> dict:
        return {
            "points": {a: list(ts) for a, ts in self.points.items()},
            "family": {a: list(b) for a, b in self.family.items()},
            "ad_bound": self.ad_bound,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> Scenario:
        return cls(obj["points"], obj["family"], int(obj["ad_bound"]))


@dataclass(frozen=True)
class BlockFamily:
    alpha: str
    phis: tuple[PartialAssignment, ...]
    supports: tuple[frozenset[int], ...]


def block_coords(s: Scenario, alpha: str, i: int) -> tuple[int, ...]:
    elems = s.family.get(alpha)
    if elems is None:
        raise InsufficientPrefix(f"no family prefix for {alpha!r}")
    w = window(i)
    if len(elems) < w.stop:
        raise InsufficientPrefix(f"family[{alpha}] has {len(elems)} elements, block {i} needs {w.stop}")
    return tuple(elems[j] for j in w)


def block(s: Scenario, alpha: str, i: int) -> PartialAssignment:
    """φ_i^α: the point t_i^α restricted to the coordinates of block i."""
    coords = block_coords(s, alpha, i)
    pts = s.points.get(alpha, ())
    if len(pts) <= i:
        raise InsufficientPrefix(f"points[{alpha}] has no t_{i}")
    t = pts[i]
    if len(t) <= coords[-1]:
        raise InsufficientPrefix(f"t_{i}^{alpha} has {len(t)} bits, coordinate {coords[-1]} needed")
    return PartialAssignment.of({c: int(t[c]) for c in coords})


def build_blocks(s: Scenario, alpha: str, upto: int) -> BlockFamily:
    phis = tuple(block(s, alpha, i) for i in range(upto + 1))
    return BlockFamily(alpha, phis, tuple(support(cylinder(p)) for p in phis))


def u_trunc(s: Scenario, alpha: str, n: int) -> ClopenSet:
    """⋃_{i≤n} [φ_i^α]."""
    return ClopenSet.from_cylinders(block(s, alpha, i) for i in range(n + 1))


def f_trunc(s: Scenario, alpha: str, n: int) -> ClopenSet:
    return ~u_trunc(s, alpha, n)


def contains_check(s: Scenario, alpha: str, n: int,
                   override: PartialAssignment | None = None) -> dict:
    """Check that [φ_n^α] is a neighbourhood of t_n^α (φ_n agrees with t_n).

    ``override`` replaces the built block, for fault injection.
    """
    phi = block(s, alpha, n) if override is None else override
    t = s.points[alpha][n]
    for c, b in phi:
        if c >= len(t):
            raise InsufficientPrefix(f"t_{n}^{alpha} has no bit {c}")
        if int(t[c]) != b:
            return {"check": "contains", "alpha": alpha, "n": n, "pass": False, "coordinate": c}
    return {"check": "contains", "alpha": alpha, "n": n, "pass": True,
            "agreed": sorted(phi.dom)}


def _tail_certified(s: Scenario, alphas: Sequence[str], tau_dom: frozenset[int]) -> None:
    # Elements past a stored prefix exceed its last element; they avoid the
    # other families when they reach ad_bound, and avoid dom(tau) when they
    # pass its maximum.
    top = max(tau_dom, default=-1)
    several = len(alphas) > 1
    for a in alphas:
        last = s.family[a][-1]
        if (several and last + 1 < s.ad_bound) or last < top:
            raise InsufficientPrefix(
                f"family[{a}] ends at {last}; tail cannot be certified past ad_bound={s.ad_bound}"
                f" and dom(tau) max {top}")


def find_N(s: Scenario, alphas: Iterable[str], tau: PartialAssignment) -> int:
    """Least N with {I_N} ∪ {C_i^{α_j} : i > N} pairwise disjoint.

    I_N = dom(tau) ∪ ⋃_j ⋃_{i≤N} C_i^{α_j}.  Blocks beyond the stored
    prefixes are covered by the ad_bound certificate.
    """
    alphas = list(dict.fromkeys(alphas))
    tau_dom = tau.dom
    for a in alphas:
        if a not in s.family:
            raise InsufficientPrefix(f"no family prefix for {a!r}")
    _tail_certified(s, alphas, tau_dom)
    levels = {a: s.available_level(a) for a in alphas}
    top = min(levels.values(), default=0)
    for n in range(0, top + 1):
        core = set(tau_dom)
        for a in alphas:
            for i in range(n + 1):
                core.update(block_coords(s, a, i))
        # every stored element of α_j at a position past block N
        later = {a: set(s.family[a][window(n + 1).start:]) for a in alphas}
        if any(later[a] & core for a in alphas):
            continue
        if any(later[a] & later[b] for i, a in enumerate(alphas) for b in alphas[i + 1:]):
            continue
        return n
    raise InsufficientPrefix(f"no N up to {top} certifies disjointness for {alphas}")


def residual(s: Scenario, alphas: Iterable[str], tau: ClopenSet, n: int) -> ClopenSet:
    """tau ∖ ⋃_j ⋃_{i≤n} [φ_i^{α_j}]."""
    out = tau
    for a in alphas:
        out = out - u_trunc(s, a, n)
    return out


def positive_lower_bound(s: Scenario, alphas: Iterable[str],
                         tau: PartialAssignment | ClopenSet) -> tuple[int, Fraction]:
    """(N, λ(X_N)(1 - 2^-(N+1))^m): a lower bound on every deeper residual.

    A general clopen ``tau`` is split into its canonical cylinders and the
    per-cylinder bounds are summed; N is then the largest per-cylinder N.
    """
    alphas = list(dict.fromkeys(alphas))
    m = len(alphas)
    if isinstance(tau, PartialAssignment):
        pieces = [tau]
    else:
        pieces = list(tau.cylinders)
    big_n, total, nonempty = 0, Fraction(0), False
    for phi in pieces:
        n = find_N(s, alphas, phi)
        x_n = residual(s, alphas, cylinder(phi), n)
        if x_n.is_empty():
            continue
        nonempty = True
        big_n = max(big_n, n)
        total += x_n.measure() * (1 - Fraction(1, 2 ** (n + 1))) ** m
    if not nonempty:
        raise EmptyCore("residual X_N is empty: tau is covered by the truncated blocks")
    return big_n, total


# -- emptiness by stripping positive U's -------------------------------------------

@dataclass
class EmptinessVerdict:
    status: str  # "empty" | "nonempty" | "unknown"
    witness: PartialAssignment | None = None
    steps: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": None if self.witness is None else self.witness.to_json(),
            "steps": self.steps,
        }


def truncated_expression(C: ClopenSet, betas: Sequence[str], alphas: Sequence[str],
                         s: Scenario, depth: int) -> ClopenSet:
    """C ∩ ⋂ U_β ∩ ⋂ F_α with every U truncated at min(depth, available)."""
    out = C
    for b in betas:
        out = out & u_trunc(s, b, _level(s, b, depth))
    for a in alphas:
        out = out - u_trunc(s, a, _level(s, a, depth))
    return out


def _level(s: Scenario, alpha: str, depth: int) -> int:
    lvl = min(depth, s.available_level(alpha))
    if lvl < 0:
        raise InsufficientPrefix(f"no block of {alpha!r} is available")
    return lvl


def _coords_upto(s: Scenario, alpha: str, n: int) -> set[int]:
    out: set[int] = set()
    for i in range(n + 1):
        out.update(block_coords(s, alpha, i))
    return out


def emptiness_decide(C: ClopenSet, betas: Sequence[str], alphas: Sequence[str],
                     s: Scenario, depth: int) -> EmptinessVerdict:
    """Decide emptiness of the truncated C ∩ ⋂ U_β ∩ ⋂ F_α.

    Mirrors the induction on the number of positive U's: for the last β
    find a block K whose coordinates avoid everything else, drop U_β (the
    reduced expression is empty iff the original is), and finish with the
    exact covering check C ⊆ ⋃_j U_{α_j}.
    """
    betas = list(dict.fromkeys(betas))
    alphas = list(alphas)
    levels = {g: _level(s, g, depth) for g in set(betas) | set(alphas)}
    stripped: list[tuple[str, PartialAssignment]] = []
    steps: list[dict] = []
    while betas:
        beta = betas[-1]
        rest = set(C.syntactic_support())
        for g in betas[:-1] + alphas:
            rest |= _coords_upto(s, g, levels[g])
        chosen = None
        for k in range(levels[beta] + 1):
            if not set(block_coords(s, beta, k)) & rest:
                chosen = k
                break
        if chosen is None:
            steps.append({"strip": beta, "K": None})
            return EmptinessVerdict("unknown", None, steps)
        steps.append({"strip": beta, "K": chosen})
        stripped.append((beta, block(s, beta, chosen)))
        betas.pop()
    base = C
    for a in alphas:
        base = base - u_trunc(s, a, levels[a])
    steps.append({"base": "covering", "empty": base.is_empty()})
    if base.is_empty():
        return EmptinessVerdict("empty", None, steps)
    w = base.witness()
    for _, phi in reversed(stripped):
        w = w.merge(phi)
    return EmptinessVerdict("nonempty", w, steps)


def lower_bound_report(s: Scenario, alphas: Sequence[str], tau: PartialAssignment,
                       extra_levels: int = 3) -> dict:
    """Lower bound plus the exact residual measures at levels N..N+extra."""
    n, bound = positive_lower_bound(s, alphas, tau)
    rows = []
    for lvl in range(n, n + extra_levels + 1):
        if any(s.available_level(a) < lvl for a in alphas):
            break
        r = residual(s, alphas, cylinder(tau), lvl).measure()
        rows.append({"level": lvl, "residual": fmt(r), "pass": r > bound})
    return {"N": n, "bound": fmt(bound), "levels": rows,
            "pass": bool(rows) and all(r["pass"] for r in rows)}
