import random
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import equal_thirds, random_valuation
from envyfree import oracle
from envyfree.cake import (
    Piece,
    PiecewiseConstantValuation,
    agent_weights,
    cake_instance_from_json,
    cake_instance_to_json,
    edge_weight,
    evaluate,
    lexicographic_cut,
    lone_divider,
    mark_equal_partition,
    symmetric_divide,
)
from envyfree.errors import InputError

F = Fraction
HALF_HEAVY = PiecewiseConstantValuation((F(0), F(1, 2), F(1)), (F(2), F(0)))


def assert_partition(alloc, cake=None):
    cake = Piece.whole() if cake is None else cake
    ivs = sorted(iv for p in alloc.pieces for iv in p.intervals)
    for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
        assert b1 <= a2
    assert Piece.union(alloc.pieces) == cake


def assert_proportional(vals, alloc):
    n = len(vals)
    for v, p in zip(vals, alloc.pieces):
        assert n * v.value(p) >= v.value(Piece.whole())


class TestPiece:
    def test_merges_adjacent(self):
        assert Piece(((F(0), F(1, 2)), (F(1, 2), F(1)))).intervals == ((F(0), F(1)),)

    def test_drops_empty_and_sorts(self):
        p = Piece(((F(1, 2), F(3, 4)), (F(0), F(0)), (F(0), F(1, 4))))
        assert p.intervals == ((F(0), F(1, 4)), (F(1, 2), F(3, 4)))

    def test_rejects_overlap(self):
        with pytest.raises(InputError):
            Piece(((F(0), F(1, 2)), (F(1, 4), F(1))))

    def test_clip_across_gap(self):
        p = Piece(((F(0), F(1, 4)), (F(1, 2), F(1))))
        assert p.clip(F(1, 8), F(3, 4)).intervals == ((F(1, 8), F(1, 4)), (F(1, 2), F(3, 4)))

    def test_json_roundtrip(self):
        p = Piece(((F(1, 3), F(1, 2)),))
        assert Piece.from_json(p.to_json()) == p


class TestEvaluate:
    def test_uniform_whole(self):
        assert evaluate(PiecewiseConstantValuation.uniform(), Piece.whole()) == 1

    def test_empty_piece(self):
        assert evaluate(HALF_HEAVY, Piece(())) == 0

    def test_partial_overlap(self):
        assert evaluate(HALF_HEAVY, Piece(((F(1, 4), F(3, 4)),))) == F(1, 2)

    @given(st.randoms(use_true_random=False), st.integers(1, 20), st.integers(1, 20))
    @settings(max_examples=100, deadline=None)
    def test_additive(self, r, a, b):
        v = random_valuation(r)
        lo, hi = sorted((F(a, 21), F(b, 21)))
        left, right = Piece(((F(0), lo),)), Piece(((lo, F(1)),))
        assert v.value(left) + v.value(right) == v.value(Piece.whole())
        mid = Piece(((lo, hi),))
        assert v.value(mid) == v.value(Piece(((F(0), hi),))) - v.value(Piece(((F(0), lo),)))

    def test_validation(self):
        with pytest.raises(InputError):
            PiecewiseConstantValuation((F(0), F(1, 2)), (F(1),))
        with pytest.raises(InputError):
            PiecewiseConstantValuation((F(0), F(1)), (F(-1),))
        with pytest.raises(InputError):
            PiecewiseConstantValuation((F(0), F(1)), (F(1), F(1)))


class TestMarks:
    def test_uniform_thirds(self):
        assert mark_equal_partition(PiecewiseConstantValuation.uniform(), Piece.whole(), 3) == [F(1, 3), F(2, 3)]

    def test_half_heavy(self):
        assert mark_equal_partition(HALF_HEAVY, Piece.whole(), 2) == [F(1, 4)]

    def test_single_part(self):
        assert mark_equal_partition(HALF_HEAVY, Piece.whole(), 1) == []

    def test_leftmost_on_plateau(self):
        v = PiecewiseConstantValuation((F(0), F(1, 4), F(3, 4), F(1)), (F(2), F(0), F(2)))
        assert mark_equal_partition(v, Piece.whole(), 2) == [F(1, 4)]

    def test_across_gap(self):
        cake = Piece(((F(0), F(1, 4)), (F(3, 4), F(1))))
        assert mark_equal_partition(PiecewiseConstantValuation.uniform(), cake, 2) == [F(1, 4)]

    def test_worthless_cake(self):
        with pytest.raises(InputError):
            mark_equal_partition(HALF_HEAVY, Piece(((F(1, 2), F(1)),)), 2)

    @given(st.randoms(use_true_random=False), st.integers(1, 6))
    @settings(max_examples=100, deadline=None)
    def test_parts_equal(self, r, n):
        v = random_valuation(r)
        marks = mark_equal_partition(v, Piece.whole(), n)
        bounds = [F(0), *marks, F(1)]
        parts = {v.value(Piece(((a, b),))) for a, b in zip(bounds, bounds[1:])}
        assert parts == {v.value(Piece.whole()) / n}


class TestLoneDivider:
    def test_single_agent(self):
        alloc = lone_divider([HALF_HEAVY])
        assert alloc.pieces == (Piece.whole(),)

    def test_identical_uniform(self):
        vals = [PiecewiseConstantValuation.uniform()] * 3
        assert lone_divider(vals).values(vals) == [F(1, 3)] * 3

    def test_random(self):
        rng = random.Random(1)
        for _ in range(200):
            vals = [random_valuation(rng, rng.randint(1, 5)) for _ in range(rng.randint(2, 8))]
            alloc = lone_divider(vals)
            assert_partition(alloc)
            assert_proportional(vals, alloc)

    def test_rejects_worthless_agent(self):
        zero = PiecewiseConstantValuation((F(0), F(1)), (F(0),))
        with pytest.raises(InputError):
            lone_divider([HALF_HEAVY, zero])


class TestSymmetric:
    def test_lexicographic_cut(self):
        vals = [equal_thirds(["3/10", "7/10"]), equal_thirds(["2/5", "3/5"]), equal_thirds(["1/5", "3/5"])]
        marks, agent = lexicographic_cut(vals, [0, 1, 2], Piece.whole())
        assert marks == (F(1, 5), F(3, 5)) and agent == 2

    def test_edge_weight(self):
        assert edge_weight(5, 1, 2) == 2**7

    def test_agent_weights_injective_on_sets(self):
        w = agent_weights([(0, 1), (2,), (0, 1), (0, 1, 2)])
        assert w[0] == w[2] and len({w[0], w[1], w[3]}) == 3

    def test_random(self):
        rng = random.Random(2)
        for _ in range(200):
            vals = [random_valuation(rng, rng.randint(1, 5)) for _ in range(rng.randint(2, 6))]
            alloc = symmetric_divide(vals)
            assert_partition(alloc)
            assert_proportional(vals, alloc)

    def test_permutation_invariance(self):
        rng = random.Random(3)
        for _ in range(4):
            vals = [random_valuation(rng, rng.randint(1, 4)) for _ in range(4)]
            base = symmetric_divide(vals).values(vals)
            for perm in permutations(range(4)):
                permuted = [vals[i] for i in perm]
                got = symmetric_divide(permuted).values(permuted)
                assert [got[perm.index(i)] for i in range(4)] == base

    def test_identical_agents_use_reserved_pieces(self):
        vals = [PiecewiseConstantValuation.uniform()] * 4
        assert symmetric_divide(vals).values(vals) == [F(1, 4)] * 4

    def test_arbitrary_reserved_assignment(self):
        # handing out the reserved pieces in another order changes no value
        rng = random.Random(4)
        for _ in range(40):
            vals = [random_valuation(rng, rng.randint(1, 4)) for _ in range(rng.randint(2, 5))]
            base = symmetric_divide(vals).values(vals)
            for seed in range(3):
                alloc = symmetric_divide(vals, rng=random.Random(seed))
                assert alloc.values(vals) == base
                assert_partition(alloc)


def test_verifier_agrees():
    rng = random.Random(5)
    for _ in range(30):
        vals = [random_valuation(rng) for _ in range(rng.randint(2, 5))]
        for alloc in (lone_divider(vals), symmetric_divide(vals)):
            pieces = [list(p.intervals) for p in alloc.pieces]
            assert oracle.verify_cake_proportional(vals, pieces).ok


def test_json_roundtrip():
    vals = [HALF_HEAVY, PiecewiseConstantValuation.uniform()]
    assert cake_instance_from_json(cake_instance_to_json(vals)) == vals


def test_json_rejects_float():
    with pytest.raises(InputError):
        cake_instance_from_json({"agents": [{"breakpoints": [0, 1], "densities": [0.5]}]})
