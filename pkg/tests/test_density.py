from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab.cantor import ClopenSet, cylinder
from growthlab.density import (
    ChainGenerator,
    PeriodicSet,
    StagedSet,
    buck_union,
    density,
    psi0,
    staged_count,
    transfer_check,
)
from growthlab.errors import MonotonicityViolation

from .strategies import clopen_sets

EVENS = PeriodicSet.make(2, [0])


def periodic_sets(max_mod=12):
    @st.composite
    def build(draw):
        m = draw(st.integers(1, max_mod))
        res = draw(st.sets(st.integers(0, m - 1)))
        added = draw(st.sets(st.integers(0, 40), max_size=3))
        removed = draw(st.sets(st.integers(0, 40), max_size=3))
        return PeriodicSet.make(m, res, added, removed)

    return build()


def brute_count(s, n):
    return sum(1 for k in range(n) if k in s)


class TestDensity:
    def test_evens(self):
        assert density(EVENS) == Fraction(1, 2)

    def test_finite_delta_ignored(self):
        assert density(PeriodicSet.make(4, [1, 2], added=[0])) == Fraction(1, 2)

    def test_omega(self):
        assert density(PeriodicSet.omega()) == 1

    def test_modulus_reduced(self):
        assert PeriodicSet.make(8, [0, 2, 4, 6]) == EVENS

    def test_json_round_trip(self):
        p = PeriodicSet.make(4, [1, 2], added=[0], removed=[5])
        assert p.to_json() == {"mod": 4, "residues": [1, 2], "added": [0], "removed": [5]}
        assert PeriodicSet.from_json(p.to_json()) == p


class TestPsi0:
    def test_zero_goes_to_evens(self):
        assert psi0(cylinder({0: 0})) == EVENS

    def test_full_to_omega(self):
        assert psi0(ClopenSet.full()) == PeriodicSet.omega()

    def test_01_is_two_mod_four(self):
        img = psi0(cylinder({0: 0, 1: 1}))
        assert img == PeriodicSet.make(4, [2])
        # the exact homomorphism law pins this: [0] = [00] ∪ [01]
        split = psi0(cylinder({0: 0, 1: 0})) | img
        assert all((k in split) == (k % 2 == 0) for k in range(64))
        assert all((k in img) == (k % 4 == 2) for k in range(64))

    def test_sparse_coordinates(self):
        img = psi0(cylinder({3: 1}))
        assert img.modulus == 16
        assert all((k in img) == bool(k >> 3 & 1) for k in range(64))


@settings(max_examples=80)
@given(clopen_sets(range(6)), clopen_sets(range(6)))
def test_psi0_exact_homomorphism(a, b):
    report = transfer_check(a, b)
    assert report["pass"], report


@settings(max_examples=40)
@given(clopen_sets(range(6)))
def test_density_by_counting_full_periods(a):
    img = psi0(a)
    n = 64 * 3
    assert Fraction(brute_count(img, n), n) == a.measure()


@given(periodic_sets(), periodic_sets())
def test_periodic_boolean_ops_pointwise(p, q):
    for op, f in [
        (p | q, lambda x, y: x or y),
        (p & q, lambda x, y: x and y),
        (p - q, lambda x, y: x and not y),
    ]:
        assert all((k in op) == f(k in p, k in q) for k in range(120))
    assert all((k in ~p) != (k in p) for k in range(120))
    assert p.density() + q.density() == (p | q).density() + (p & q).density()


@given(periodic_sets(), st.integers(1, 200))
def test_count_below_matches_enumeration(p, n):
    assert p.count_below(n) == brute_count(p, n)
    assert abs(p.count_below(n) - n * p.density()) <= p.slack


class TestStagedCount:
    def test_evens(self):
        got = staged_count(StagedSet.of(EVENS), 10)
        assert got.count == 5
        assert got.estimate == Fraction(1, 2)
        assert got.error_bound >= 0

    def test_wrapped_residue(self):
        got = staged_count(StagedSet.of(PeriodicSet.make(4, [1])), 6)
        assert got.count == 2
        assert got.estimate == Fraction(1, 3)

    def test_truncated_flag_and_wider_bound(self):
        chain = ChainGenerator(_halving_chain(), supremum=Fraction(1))
        s = buck_union(chain, 3)
        assert s.truncated
        n = s.starts[-1] * 5
        got = staged_count(s, n)
        assert got.truncated
        # tail density is 7/8 forever, the declared supremum is 1
        assert got.error_bound >= Fraction(1, 8)
        assert abs(got.estimate - s.density) <= got.error_bound

    def test_json(self):
        s = StagedSet.of(EVENS)
        assert StagedSet.from_json(s.to_json()) == s


def _halving_chain():
    k = 1
    while True:
        m = 2**k
        yield PeriodicSet.make(m, range(m - 1))
        k += 1


class TestBuckUnion:
    def test_constant_chain(self):
        s = buck_union(ChainGenerator([EVENS] * 5, supremum=Fraction(1, 2)), 5)
        assert s.density == Fraction(1, 2)
        assert not s.truncated
        assert all((k in s) == (k % 2 == 0) for k in range(s.starts[-1] + 50))

    def test_growing_chain_reaches_supremum(self):
        s = buck_union(ChainGenerator(_halving_chain(), supremum=Fraction(1)), 8)
        assert s.density == 1
        n = s.starts[5]
        count = s.count_below(n)
        assert Fraction(count, n) > 1 - Fraction(1, 16)

    def test_stage_differences_below_switch(self):
        stages = list(_take(_halving_chain(), 4))
        s = buck_union(ChainGenerator(iter(stages)), 4)
        horizon = s.starts[-1] + 64
        for (p, start) in s.stages:
            missing = [k for k in range(horizon) if k in p and k not in s]
            assert all(k < start for k in missing)

    def test_error_bound_sound(self):
        s = buck_union(ChainGenerator(_halving_chain(), supremum=Fraction(1)), 4)
        for n in list(range(1, 400)) + [s.starts[-1] + d for d in (0, 1, 17, 999)]:
            got = staged_count(s, n)
            assert got.count == brute_count(s, n)
            assert abs(got.estimate - s.density) <= got.error_bound

    def test_guarantee_after_each_switch(self):
        s = buck_union(ChainGenerator(_halving_chain(), supremum=Fraction(1)), 7)
        for k in range(1, 7):
            d_prev = s.stages[k - 1][0].density()
            target = Fraction(1, 2**k) + (s.density - d_prev)
            for n in (s.starts[k], s.starts[k] + 1, 2 * s.starts[k] + 3):
                assert s.error_bound(n) <= target

    def test_monotonicity_violation(self):
        chain = ChainGenerator([EVENS, PeriodicSet.make(2, [1])])
        with pytest.raises(MonotonicityViolation):
            buck_union(chain, 5)

    def test_finite_chain_density_is_last(self):
        s = buck_union(ChainGenerator([EVENS, PeriodicSet.omega()]), 10)
        assert s.density == 1
        assert not s.truncated


def _take(it, n):
    for _, x in zip(range(n), it):
        yield x
