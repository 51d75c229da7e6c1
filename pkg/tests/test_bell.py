import random
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthlab import generators
from growthlab.bell import (
    ROOT,
    BellClopen,
    BellNode,
    PiPrefix,
    a_n,
    decide_infinite_C,
    decide_nonempty_V,
    iso_condition_check,
    malo_ladder,
    node,
    node_measure,
    nodes_at,
    strict_positivity_check,
    sweep,
    tail_majorant,
    taylor_check,
    v_tail_bound,
    v_trunc,
)
from growthlab.errors import DepthGuard, HypothesisFailed


def pi(*rows):
    return PiPrefix(tuple(node(r) for r in rows))


def staircase(H):
    """Rows (1), (0,2), (0,0,3), ...: pairwise disjoint cones."""
    return pi(*[(0,) * i + (i + 1,) for i in range(H + 1)])


def brute_members(nodes, depth):
    """Depth-``depth`` nodes lying under some listed node."""
    return {t.seq for t in nodes_at(depth) if any(t.seq[: len(s)] == tuple(s) for s in nodes)}


class TestNodes:
    def test_validation(self):
        with pytest.raises(ValueError):
            BellNode((2,))
        assert BellNode((1, 2, 0)).seq == (1, 2, 0)

    @pytest.mark.parametrize("seq,expected", [((0, 1), Fraction(1, 6)), ((), Fraction(1)),
                                              ((0, 1, 2), Fraction(1, 24))])
    def test_measure(self, seq, expected):
        assert node_measure(seq) == expected

    def test_children_partition(self):
        s = node((0, 1, 2))
        kids = [s.child(p) for p in range(5)]
        assert sum(node_measure(k) for k in kids) == node_measure(s) == 5 * Fraction(1, 120)

    @pytest.mark.parametrize("d", range(7))
    def test_depth_mass(self, d):
        ns = list(nodes_at(d))
        assert len(ns) == factorial(d + 1)
        assert sum(node_measure(t) for t in ns) == 1

    def test_nodes_at_guard(self, monkeypatch):
        monkeypatch.setenv("GROWTHLAB_BUDGET", "100")
        with pytest.raises(DepthGuard):
            list(nodes_at(6))


class TestClopen:
    def test_absorption(self):
        a = BellClopen.from_nodes([(0,), (0, 0)])
        assert a == BellClopen.cone((0,)) and a.nodes == [node((0,))]

    def test_complement(self):
        a = BellClopen.cone((1, 2))
        assert (~a).measure() == 1 - Fraction(1, 6)
        assert (a | ~a) == BellClopen.full() and (a & ~a).is_empty()

    def test_json(self):
        a = BellClopen.from_nodes([(0, 1), (1,)])
        assert BellClopen.from_json(a.to_json()) == a

    def test_witness(self):
        a = BellClopen.cone((1, 0))
        w = a.witness(4)
        assert len(w) == 4 and a.contains_cone(w)
        assert BellClopen.empty().witness(3) is None


@st.composite
def node_lists(draw, max_depth=4, max_size=4):
    out = []
    for _ in range(draw(st.integers(0, max_size))):
        d = draw(st.integers(0, max_depth))
        out.append(tuple(draw(st.integers(0, i + 1)) for i in range(d)))
    return out


@settings(max_examples=150, deadline=None)
@given(node_lists(), node_lists())
def test_trie_matches_brute_force(xs, ys):
    a, b = BellClopen.from_nodes(xs), BellClopen.from_nodes(ys)
    A, B = brute_members(xs, 5), brute_members(ys, 5)
    everything = {t.seq for t in nodes_at(5)}
    assert a.measure() == Fraction(len(A), factorial(6))
    assert brute_members([n.seq for n in (a | b).nodes], 5) == A | B
    assert brute_members([n.seq for n in (a & b).nodes], 5) == A & B
    assert brute_members([n.seq for n in (~a).nodes], 5) == everything - A
    # canonical nodes are pairwise incomparable
    leaves = [n.seq for n in a.nodes]
    assert not any(p != q and q[: len(p)] == p for p in leaves for q in leaves)


class TestVTrunc:
    def test_single_row(self):
        assert v_trunc(pi((0,))).measure() == Fraction(1, 2)

    def test_nested_rows(self):
        assert v_trunc(pi((0,), (0, 0))).measure() == Fraction(1, 2)

    def test_disjoint_rows(self):
        assert v_trunc(pi((0,), (1, 0))).measure() == Fraction(2, 3)

    def test_truncation_height(self):
        p = pi((0,), (1, 0), (1, 1, 3))
        assert v_trunc(p, 1) == v_trunc(pi((0,), (1, 0)))

    def test_rows_must_match_height(self):
        with pytest.raises(ValueError):
            pi((0,), (1,))


class TestTail:
    def test_majorant_covers_tail(self):
        partial = sum(Fraction(1, factorial(l + 2)) for l in range(1, 31))
        assert v_tail_bound(0, 1) >= partial
        # the geometric factor with ratio 1/4 would undercut the true tail
        assert Fraction(1, 6) * Fraction(5, 4) < partial

    @given(st.integers(0, 25))
    def test_majorant_dominates_partial_sums(self, H):
        partial = sum(Fraction(1, factorial(l + 2)) for l in range(H + 1, H + 40))
        assert partial <= tail_majorant(H)

    def test_linear_in_m(self):
        assert v_tail_bound(4, 3) == 3 * v_tail_bound(4, 1)

    def test_large_height(self):
        assert v_tail_bound(20, 1) < Fraction(1, 10**18)


class TestTaylor:
    def test_m1_n4(self):
        r = taylor_check(1, 4)
        assert r.holds and r.rhs == Fraction(1, 24) and r.lhs_upper < r.rhs

    def test_m5_n16(self):
        assert taylor_check(5, 16).holds

    def test_m10_n2_fails(self):
        r = taylor_check(10, 2)
        assert not r.holds and r.lhs_lower >= r.rhs

    def test_guaranteed_range(self):
        assert all(taylor_check(m, n).holds for m in range(1, 6) for n in range(3 * m + 1, 61))


class TestDeciders:
    P = pi((1,), (1, 0), (1, 0, 2))
    Q = pi((0,), (0, 2), (0, 2, 1))

    def test_no_constraints(self):
        v = decide_nonempty_V(ROOT, [], [], 2)
        assert not v.empty and len(v.witness) == 3
        c = decide_infinite_C(ROOT, [], [], 2)
        assert not c.finite

    def test_same_prefix_both_sides(self):
        assert decide_nonempty_V(ROOT, [self.P], [self.P]).empty
        assert decide_infinite_C(ROOT, [self.P], [self.P]).finite
        assert iso_condition_check([self.P], [self.P], 2)["pass"]

    def test_single_negative_leaves_room(self):
        disjoint = staircase(2)
        v = decide_nonempty_V(ROOT, [], [disjoint])
        assert v_trunc(disjoint).measure() == Fraction(17, 24)
        assert not v.empty and not v_trunc(disjoint).meets_cone(v.witness)
        rep = iso_condition_check([], [disjoint], 2)
        assert rep["pass"] and rep["C"]["status"] == "infinite"

    def test_negatives_covering_depth_one(self):
        zero, one = pi((0,)), pi((1,))
        assert decide_infinite_C(ROOT, [], [zero, one], 0).finite
        assert decide_nonempty_V(ROOT, [], [zero, one], 0).empty

    def test_positive_branch_extends_first_row(self):
        c = decide_infinite_C(ROOT, [self.P], [])
        assert not c.finite
        assert all(t.seq[:1] == (1,) for t in c.branch)
        assert [len(t) for t in c.branch] == [3, 4, 5]

    def test_sweep_agrees(self):
        assert sweep(ROOT, [self.P], [self.Q], 2) is not None
        assert sweep(ROOT, [self.P], [self.P], 2) is None

    def test_depth_guard(self, monkeypatch):
        monkeypatch.setenv("GROWTHLAB_BUDGET", "1000")
        with pytest.raises(DepthGuard):
            decide_infinite_C(ROOT, [], [staircase(8)])

    def test_heights_must_agree(self):
        with pytest.raises(ValueError):
            decide_nonempty_V(ROOT, [self.P], [pi((0,))])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2),
       st.integers(0, 10**6))
def test_iso_biconditional(H, npos, nneg, sdepth, seed):
    rng = random.Random(seed)
    s = generators.bell_node(rng, sdepth)
    pos = [generators.pi_prefix(rng, H, s) for _ in range(npos)]
    neg = [generators.pi_prefix(rng, H, s) for _ in range(nneg)]
    rep = iso_condition_check(pos, neg, H, s)
    assert rep["pass"], rep


class TestPositivity:
    def test_sparse_prefix_root(self):
        rep = strict_positivity_check(ROOT, [staircase(9)], 4)
        assert rep["pass"] and Fraction(rep["gap"]) > 0
        covered = sum(Fraction(1, factorial(i + 2)) for i in range(10))
        assert Fraction(rep["measure_covered"]) == covered

    def test_duzo_bound(self):
        rep = strict_positivity_check(ROOT, [staircase(9)], 5)
        assert Fraction(rep["duzo"]["measure"]) >= Fraction(1, factorial(6))

    def test_covered_cone_fails_hypothesis(self):
        a = pi((0,), *[(0,) * i + (1,) for i in range(1, 7)])
        b = pi((1,), *[(1,) + (0,) * (i - 1) + (1,) for i in range(1, 7)])
        with pytest.raises(HypothesisFailed):
            strict_positivity_check(ROOT, [a, b], 7)

    def test_n_range(self):
        with pytest.raises(ValueError):
            strict_positivity_check(ROOT, [staircase(9)], 3)
        with pytest.raises(ValueError):
            strict_positivity_check(ROOT, [staircase(5)], 8)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 3), st.integers(2, 6), st.integers(0, 10**6))
def test_malo_ladder(m, H, seed):
    rng = random.Random(seed)
    pis = [generators.pi_prefix(rng, H) for _ in range(m)]
    rows = malo_ladder(pis)
    assert all(r["pass"] for r in rows)
    for r in rows:
        gain = (a_n(pis, r["l"] + 1) - a_n(pis, r["l"])).measure()
        assert Fraction(r["measure"]) == gain <= m * Fraction(1, factorial(r["l"] + 2))


def test_pi_prefix_json():
    p = staircase(3)
    assert PiPrefix.from_json(p.to_json()) == p
    assert p.to_json() == {"rows": [[1], [0, 2], [0, 0, 3], [0, 0, 0, 4]]}
