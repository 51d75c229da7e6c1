import random
from fractions import Fraction
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab import generators
from growthlab.ad import (
    Scenario,
    block,
    build_blocks,
    contains_check,
    emptiness_decide,
    find_N,
    positive_lower_bound,
    residual,
    truncated_expression,
    u_trunc,
    window,
)
from growthlab.cantor import ClopenSet, PartialAssignment, brute_force_measure, cylinder
from growthlab.errors import EmptyCore, InsufficientPrefix, ScenarioError

ONES = "1" * 40


def simple(points=None):
    fam = {"a": [3, 5, 9, 10, 14, 17, 20, 22, 25, 27]}
    pts = points or {"a": [ONES, "0" * 40, "01" * 20, ONES]}
    return Scenario(pts, fam, ad_bound=0)


def two_families():
    fam = {
        "a": [1, 4, 6, 8, 10, 12, 14, 16, 18, 20],
        "b": [2, 4, 7, 9, 11, 13, 15, 17, 19, 21],
    }
    pts = {k: ["0" * 30, "1" * 30, "01" * 15, "10" * 15] for k in fam}
    return Scenario(pts, fam, ad_bound=5)


class TestBlocks:
    def test_first_block(self):
        s = simple()
        assert block(s, "a", 0) == PartialAssignment.of({3: 1})

    def test_second_block_domain(self):
        assert block(simple(), "a", 1).dom == {5, 9}

    def test_third_block_triangular(self):
        phi = block(simple(), "a", 2)
        assert phi.dom == {10, 14, 17}
        assert len(phi) == 3

    def test_block_schedule_and_remark_depend(self):
        fam = build_blocks(simple(), "a", 3)
        doms = [p.dom for p in fam.phis]
        for i, d in enumerate(doms):
            assert len(d) == i + 1
            assert fam.supports[i] == d
            # C_i ⊆ B_α ∖ i
            assert all(x >= i for x in d)
        for i, d in enumerate(doms):
            for e in doms[i + 1:]:
                assert not d & e

    def test_missing_family_elements(self):
        with pytest.raises(InsufficientPrefix, match="block 4"):
            block(simple(), "a", 4)

    def test_missing_point(self):
        s = Scenario({"a": [ONES]}, {"a": [3, 5, 9]}, 0)
        with pytest.raises(InsufficientPrefix, match="t_1"):
            block(s, "a", 1)

    def test_short_point(self):
        s = Scenario({"a": ["1010", "1010"]}, {"a": [3, 5, 9]}, 0)
        assert block(s, "a", 0) == PartialAssignment.of({3: 0})
        with pytest.raises(InsufficientPrefix):
            block(s, "a", 1)

    def test_scenario_rejects_late_overlap(self):
        with pytest.raises(ScenarioError):
            Scenario({}, {"a": [1, 7], "b": [2, 7]}, ad_bound=5)

    def test_json_round_trip(self):
        s = two_families()
        assert Scenario.from_json(s.to_json()).family == s.family


class TestUTrunc:
    def test_single_block(self):
        assert u_trunc(simple(), "a", 0).measure() == Fraction(1, 2)

    def test_two_blocks_inclusion_exclusion(self):
        u = u_trunc(simple(), "a", 1)
        assert u.measure() == Fraction(1, 2) + Fraction(1, 4) - Fraction(1, 8)
        assert brute_force_measure(u, [3, 5, 9]) == Fraction(5, 8)

    def test_three_blocks_bounded(self):
        u = u_trunc(simple(), "a", 2)
        assert u.measure() == brute_force_measure(u, [3, 5, 9, 10, 14, 17])
        assert u.measure() <= Fraction(7, 8)

    def test_monotone(self):
        s = simple()
        prev = ClopenSet.empty()
        for n in range(4):
            cur = u_trunc(s, "a", n)
            assert prev <= cur
            assert cur.measure() < 1
            prev = cur


class TestContains:
    def test_well_formed(self):
        for n in range(4):
            assert contains_check(simple(), "a", n)["pass"]

    def test_fault_injection(self):
        bad = PartialAssignment.of({5: 1, 9: 0})
        rep = contains_check(simple(), "a", 1, override=bad)
        assert not rep["pass"]
        assert rep["coordinate"] == 5

    def test_beyond_prefix(self):
        with pytest.raises(InsufficientPrefix):
            contains_check(simple(), "a", 5)


class TestFindN:
    def test_two_families_sharing_four(self):
        s = two_families()
        tau = PartialAssignment.of({0: 1})
        # oracle: least N past which both prefixes list only elements above 4 and above dom(tau)
        expected = next(
            n for n in range(4)
            if all(x > 4 and x > 0 for a in "ab" for x in s.family[a][window(n + 1).start:])
        )
        assert find_N(s, ["a", "b"], tau) == expected == 1

    def test_single_family_empty_tau(self):
        assert find_N(simple(), ["a"], PartialAssignment()) == 0

    def test_short_prefix(self):
        s = Scenario({"a": [ONES], "b": [ONES]}, {"a": [1], "b": [2]}, ad_bound=5)
        with pytest.raises(InsufficientPrefix):
            find_N(s, ["a", "b"], PartialAssignment())


class TestPositiveLowerBound:
    def test_single_family(self):
        n, bound = positive_lower_bound(simple(), ["a"], PartialAssignment())
        assert n == 0
        assert bound == Fraction(1, 2) * Fraction(1, 2)
        for lvl in range(4):
            assert residual(simple(), ["a"], ClopenSet.full(), lvl).measure() >= bound

    def test_two_families(self):
        s = two_families()
        tau = PartialAssignment.of({0: 1})
        n, bound = positive_lower_bound(s, ["a", "b"], tau)
        x_n = residual(s, ["a", "b"], cylinder(tau), n)
        assert n == 1
        assert bound == x_n.measure() * Fraction(3, 4) ** 2
        deep = residual(s, ["a", "b"], cylinder(tau), n + 2)
        assert deep.measure() > bound

    def test_empty_core(self):
        s = simple()
        with pytest.raises(EmptyCore):
            positive_lower_bound(s, ["a"], PartialAssignment.of({3: 1}))

    def test_general_clopen_tau(self):
        s = two_families()
        tau = ClopenSet.from_cylinders([{0: 1}, {0: 0, 3: 1}])
        n, bound = positive_lower_bound(s, ["a", "b"], tau)
        assert residual(s, ["a", "b"], tau, n + 2).measure() > bound


def product_formula(s, alphas, tau, big_n, n):
    """Residual measure predicted by independence of the later blocks."""
    x = residual(s, alphas, cylinder(tau), big_n).measure()
    for _ in alphas:
        for i in range(big_n + 1, n + 1):
            x *= 1 - Fraction(1, 2 ** (i + 1))
    return x


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_lower_bound_and_product_rule(seed, m):
    rng = random.Random(seed)
    s = generators.scenario(rng, m, blocks=6)
    alphas = list(s.family)
    t = generators.tau(rng, range(s.ad_bound + 4))
    try:
        big_n, bound = positive_lower_bound(s, alphas, t)
    except (EmptyCore, InsufficientPrefix):
        return
    for n in range(big_n, min(s.available_level(a) for a in alphas) + 1):
        r = residual(s, alphas, cylinder(t), n).measure()
        assert r > bound
        assert r == product_formula(s, alphas, t, big_n, n)


class TestEmptiness:
    def test_single_positive_block(self):
        s = two_families()
        c = cylinder(block(s, "b", 0))
        v = emptiness_decide(c, ["b"], [], s, depth=3)
        assert v.status == "nonempty"
        assert cylinder(v.witness) <= truncated_expression(c, ["b"], [], s, 3)

    def test_covering_base_case(self):
        s = simple()
        c = cylinder({3: 1}) | cylinder({3: 0, 5: 0, 9: 0})
        assert c <= cylinder(block(s, "a", 0)) | cylinder(block(s, "a", 1))
        v = emptiness_decide(c, [], ["a"], s, depth=1)
        assert v.status == "empty"
        assert brute_force_measure(truncated_expression(c, [], ["a"], s, 1), [3, 5, 9]) == 0

    def test_unknown_when_no_block_is_free(self):
        s = simple()
        coords = sorted({c for i in range(4) for c in block(s, "a", i).dom})
        c = ClopenSet.from_cylinders([{x: 0} for x in coords])
        v = emptiness_decide(c, ["a"], [], s, depth=3)
        assert v.status == "unknown"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_emptiness_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    s = generators.scenario(rng, 3, blocks=3, ad_bound=4)
    labels = list(s.family)
    rng.shuffle(labels)
    k = rng.randint(0, 3)
    betas, alphas = labels[:k], labels[k:]
    depth = rng.randint(0, 2)
    c = generators.clopen_set(rng, range(6), max_cylinders=3)
    v = emptiness_decide(c, betas, alphas, s, depth)
    expr = truncated_expression(c, betas, alphas, s, depth)
    coords = sorted(expr.syntactic_support())
    if len(coords) <= 14:
        truth = brute_force_measure(expr, coords) == 0
    else:
        truth = expr.is_empty()
    if v.status == "unknown":
        return
    assert (v.status == "empty") == truth
    if v.status == "nonempty":
        assert cylinder(v.witness) <= expr
