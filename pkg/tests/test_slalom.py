import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab import generators
from growthlab.errors import ClassMismatch, HeightTooLarge, InvalidSlalom, MalformedConjunct
from growthlab.slalom import (
    EMPTY,
    Conjunct,
    Height,
    Not,
    OmegaPoint,
    OmegaTable,
    PosT,
    Slalom,
    a_w_measure,
    atomization,
    cl2_witness,
    conj,
    decide_infinite,
    diagonal_escape,
    enum_omega,
    expr_from_json,
    expr_to_json,
    is_infinite,
    member,
    normal_form,
    union,
    w_delta_class,
    weight,
)

H4 = OmegaTable(4)


def sl(**levels):
    return Slalom.of({int(k[1:]): v for k, v in levels.items()})


class TestSlalom:
    def test_weights(self):
        assert weight(sl(l1=[0])) == Fraction(1, 2)
        assert weight(sl(l1=[0], l2=[1, 2])) == 1
        assert weight(EMPTY) == 0

    def test_full_level_rejected(self):
        with pytest.raises(InvalidSlalom):
            sl(l1=[0, 1])

    def test_level_zero_rejected(self):
        with pytest.raises(InvalidSlalom):
            sl(l0=[0])

    def test_json(self):
        v = sl(l1=[0], l3=[2, 5])
        assert v.to_json() == {"levels": {"1": [0], "3": [2, 5]}}
        assert Slalom.from_json(v.to_json()) == v

    def test_union_overflow(self):
        with pytest.raises(InvalidSlalom):
            union([sl(l1=[0]), sl(l1=[1])])


class TestEnum:
    def test_counts(self):
        assert len(enum_omega(1)) == 2
        assert len(enum_omega(2)) == 5
        assert len(enum_omega(3)) == 5 + 45
        assert len(enum_omega(4)) == 50 + 45 * 255

    def test_guard(self):
        with pytest.raises(HeightTooLarge):
            enum_omega(5)

    def test_points_are_slaloms_below_height(self):
        for p in enum_omega(3):
            assert p.T.height <= p.n


class TestMember:
    def test_empty_positive(self):
        assert all(member(PosT(EMPTY), p) for p in enum_omega(2))

    def test_restriction_below_height(self):
        assert member(PosT(sl(l1=[0])), OmegaPoint(1, EMPTY))
        assert not member(PosT(sl(l1=[0])), OmegaPoint(2, EMPTY))

    def test_height_too_low(self):
        assert not member(Height(EMPTY, 2), OmegaPoint(1, EMPTY))

    def test_table_agrees_with_member(self):
        rng = random.Random(3)
        pts = enum_omega(4)
        for _ in range(25):
            e = generators.expression(rng)
            bits = H4.evaluate(e)
            for i in rng.sample(range(len(pts)), 300):
                assert bool(bits >> i & 1) == member(e, pts[i])


class TestNormalForm:
    def test_disjoint_positives_merge(self):
        a, b = sl(l1=[0]), sl(l2=[3])
        (c,) = normal_form(conj(PosT(a), PosT(b)))
        assert c.positive == sl(l1=[0], l2=[3]) and not c.finite

    def test_covering_union_marked_finite(self):
        (c,) = normal_form(conj(PosT(sl(l1=[0])), PosT(sl(l1=[1]))))
        assert c.finite
        assert not decide_infinite(c)

    def test_incompatible_heights(self):
        e = conj(Height(EMPTY, 2), Height(sl(l1=[1]), 3))
        (c,) = normal_form(e)
        assert c.finite
        assert H4.count_by_height(e) == [0, 0, 0, 0, 0]

    def test_negated_height_splits(self):
        cs = normal_form(Not(Height(sl(l1=[0]), 2)))
        assert {c.height[0] for c in cs} == {EMPTY, sl(l1=[1])}

    def test_json_round_trip(self):
        rng = random.Random(5)
        for _ in range(20):
            e = generators.expression(rng)
            assert expr_from_json(expr_to_json(e)) == e


class TestDecide:
    def test_positive_only(self):
        assert decide_infinite(Conjunct(positive=sl(l2=[1])))

    def test_empty_minus_empty(self):
        assert not decide_infinite(Conjunct(positive=EMPTY, negatives=(EMPTY,)))

    def test_distinct_levels_two(self):
        c = Conjunct(positive=sl(l2=[0]), negatives=(sl(l2=[1]),))
        assert decide_infinite(c)
        e = c.as_expr()
        assert sum(OmegaTable(3).count_by_height(e)) < sum(H4.count_by_height(e))

    def test_malformed(self):
        with pytest.raises(MalformedConjunct):
            decide_infinite(Conjunct(height=(sl(l3=[0]), 2)))

    def test_positive_must_fit_prefix(self):
        c = Conjunct(height=(EMPTY, 2), positive=sl(l1=[0]))
        assert not decide_infinite(c)
        assert H4.count_by_height(c.as_expr())[2:] == [0, 0, 0]


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_decide_matches_enumeration(seed):
    e = generators.expression(random.Random(seed))
    assert is_infinite(e) == H4.infinite(e)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_normal_form_equal_at_top_height(seed):
    e = generators.expression(random.Random(seed))
    nf = 0
    for c in normal_form(e):
        nf |= H4.evaluate(c.as_expr())
    top = H4._top
    assert nf & top == H4.evaluate(e) & top


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_positive_intersection_finiteness(seed):
    rng = random.Random(seed)
    fam = [generators.slalom(rng, density=0.7) for _ in range(rng.randint(1, 4))]
    e = conj(*(PosT(v) for v in fam))
    counts = H4.count_by_height(e)
    masks = {}
    for v in fam:
        for k, m in v.masks:
            masks[k] = masks.get(k, 0) | m
    full = [k for k, m in masks.items() if m == (1 << (1 << k)) - 1]
    if full:
        assert not is_infinite(e)
        assert all(c == 0 for c in counts[min(full) + 1:])
    else:
        assert is_infinite(e)
        # cumulative counts over enum_omega(H) grow with H
        assert sum(counts[:4]) < sum(counts)


class TestClass:
    def test_least_n(self):
        assert w_delta_class(sl(l1=[0]), Fraction(1, 4)) == (EMPTY, 0)

    def test_empty(self):
        assert w_delta_class(EMPTY, Fraction(1, 2)) == (EMPTY, 0)

    def test_tail_includes_level_n(self):
        w = sl(l1=[0], l2=[1, 2])
        # tails from 0,1,2,3: 1, 1, 1/2, 0
        assert w_delta_class(w, Fraction(3, 4)) == (w, 3)

    def test_free_level_counterexample_excluded(self):
        # two slaloms that would share a class if level n were unconstrained
        v1, v2 = sl(l1=[0]), sl(l1=[1])
        for d in (Fraction(1, 2), Fraction(3, 4)):
            (s1, n1), (s2, n2) = w_delta_class(v1, d), w_delta_class(v2, d)
            assert (s1, n1) != (s2, n2)


def brute_measure(w, n):
    levels = [k for k, _ in w.above(n).masks]
    if not levels:
        return Fraction(1)
    total = good = 0
    for f in product(*(range(1 << k) for k in levels)):
        total += 1
        good += all(not w.level(k) >> x & 1 for k, x in zip(levels, f))
    return Fraction(good, total)


class TestMeasure:
    def test_two_levels(self):
        m = a_w_measure(sl(l1=[0], l2=[0]), 0)
        assert m.exact == Fraction(3, 8) == brute_measure(sl(l1=[0], l2=[0]), 0)
        assert m.union_bound == Fraction(1, 4)

    def test_beyond_support(self):
        assert a_w_measure(sl(l1=[0]), 5).exact == 1

    def test_single_pair(self):
        for i in range(1, 6):
            assert a_w_measure(Slalom.of({i: [0]}), 1).exact == 1 - Fraction(1, 2**i)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**9), st.integers(0, 3))
    def test_exact_against_brute_force(self, seed, n):
        w = generators.slalom(random.Random(seed), hi=5, density=0.6)
        m = a_w_measure(w, n)
        assert m.exact == brute_measure(w, n)
        assert m.exact >= m.union_bound


class TestCl2:
    def test_duplicates(self):
        v = sl(l2=[1])
        wit = cl2_witness([v, v], Fraction(1, 2))
        assert wit.indices == (0, 1)

    def test_disjoint_levels(self):
        vs = [sl(l2=[1]), sl(l3=[4])]
        wit = cl2_witness(vs, Fraction(1, 2))
        assert wit.indices == (0, 1)
        assert decide_infinite(wit.conjunct(vs))

    def test_class_mismatch(self):
        with pytest.raises(ClassMismatch):
            cl2_witness([sl(l1=[0]), sl(l1=[1])], Fraction(1, 4), cls=(sl(l1=[0]), 2))

    def test_conflicting_pair(self):
        vs = [sl(l1=[0]), sl(l1=[1])]
        wit = cl2_witness(vs, Fraction(1, 4))
        assert len(wit.indices) == 1
        atoms, sets = atomization(vs, (wit.S, wit.n))
        assert atoms == [(0,), (1,)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]))
def test_cl2_witness_properties(seed, delta):
    rng = random.Random(seed)
    cls, vs = generators.slalom_class(rng, delta, rng.randint(1, 6))
    wit = cl2_witness(vs, delta, cls)
    assert len(wit.indices) >= delta * len(vs)
    assert wit.expected > delta * len(vs)
    assert decide_infinite(wit.conjunct(vs))
    for i in wit.indices:
        assert all(not vs[i].level(k) >> x & 1 for k, x in wit.f.items())
    for v in vs:
        assert a_w_measure(v, cls[1]).exact > delta


class TestDiagonal:
    def test_single(self):
        assert diagonal_escape([sl(l1=[0])], 1)[1] == 1

    def test_empty_list(self):
        assert diagonal_escape([], 3) == {0: 0, 1: 0, 2: 0, 3: 0}

    def test_forced(self):
        ws = [Slalom.of({n: range(1, 2**n)}) for n in range(1, 5)]
        assert all(v == 0 for v in diagonal_escape(ws, 4).values())

    def test_height_short(self):
        with pytest.raises(ValueError):
            diagonal_escape([EMPTY, EMPTY], 1)
