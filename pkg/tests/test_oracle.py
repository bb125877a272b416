from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import graphs, odd_path
from envyfree import oracle
from envyfree.cake import PiecewiseConstantValuation
from envyfree.efm import max_cardinality_efm, max_weight_efm
from envyfree.errors import InputError
from envyfree.graph import BipartiteGraph, Matching, WeightedBipartiteGraph
from envyfree.mms import Variant

F = Fraction


class TestEnumerate:
    def test_single_edge(self):
        assert set(oracle.enumerate_efms(BipartiteGraph.complete(1, 1))) == {frozenset(), frozenset({(0, 0)})}

    def test_odd_path(self):
        assert oracle.enumerate_efms(BipartiteGraph.from_edges(2, 1, [(0, 0), (1, 0)])) == [frozenset()]

    def test_complete_two_by_two(self):
        g = BipartiteGraph.complete(2, 2)
        assert len(oracle.enumerate_matchings(g)) == 7
        assert set(oracle.enumerate_efms(g)) == {
            frozenset(),
            frozenset({(0, 0), (1, 1)}),
            frozenset({(0, 1), (1, 0)}),
        }

    def test_bound(self):
        with pytest.raises(InputError):
            oracle.enumerate_efms(BipartiteGraph.complete(8, 7))

    def test_bound_from_environment(self, monkeypatch):
        monkeypatch.setenv("ENVYFREE_ORACLE_MAX_VERTICES", "3")
        with pytest.raises(InputError):
            oracle.enumerate_efms(BipartiteGraph.complete(2, 2))

    def test_no_duplicates(self):
        ms = oracle.enumerate_matchings(BipartiteGraph.complete(3, 3))
        assert len(ms) == len(set(ms)) == 34

    @given(graphs(5, 5))
    @settings(max_examples=150, deadline=None)
    def test_max_size_matches_solver(self, g):
        assert max(len(e) for e in oracle.enumerate_efms(g)) == len(max_cardinality_efm(g))

    @given(graphs(4, 4))
    @settings(max_examples=100, deadline=None)
    def test_max_weight_matches_solver(self, g):
        wg = WeightedBipartiteGraph(g, {e: F(e[0] * 3 + e[1] + 1, 2) for e in g.edges()})
        _, hi = oracle.brute_extreme_weight(wg.weights, oracle.enumerate_efms(g))
        assert wg.weight_of(max_weight_efm(wg)) == hi


class TestBruteMms:
    def test_seven_units(self):
        assert oracle.brute_mms([1] * 7, 2, 7) == 2
        assert oracle.brute_mms([1] * 7, 1, 4) == 1

    def test_l_equals_d(self):
        assert oracle.brute_mms([F(1, 2), 3, 4], 3, 3) == F(15, 2)

    def test_bound(self):
        with pytest.raises(InputError):
            oracle.brute_mms([1] * 13, 1, 2)


class TestVerify:
    def test_equal_split_zero_margin(self):
        vals = [PiecewiseConstantValuation.uniform()] * 2
        pieces = [[(F(0), F(1, 2))], [(F(1, 2), F(1))]]
        report = oracle.verify_allocation("cake_proportional", valuations=vals, pieces=pieces)
        assert report.ok and all(c.margin == 0 for c in report.checks)

    def test_gap_detected(self):
        vals = [PiecewiseConstantValuation.uniform()] * 2
        pieces = [[(F(0), F(1, 2))], [(F(3, 5), F(1))]]
        report = oracle.verify_cake_proportional(vals, pieces)
        assert not report.ok and report.problems

    def test_overlap_detected(self):
        vals = [PiecewiseConstantValuation.uniform()] * 2
        pieces = [[(F(0), F(3, 5))], [(F(1, 2), F(1))]]
        assert oracle.verify_cake_proportional(vals, pieces).problems

    def test_disproportionate(self):
        vals = [PiecewiseConstantValuation.uniform()] * 2
        pieces = [[(F(0), F(1, 3))], [(F(1, 3), F(1))]]
        report = oracle.verify_cake_proportional(vals, pieces)
        assert not report.ok and report.checks[0].margin == F(-1, 3)

    def test_empty_matching_relaxed(self):
        g = BipartiteGraph.complete(3, 2)
        report = oracle.verify_allocation("relaxed_efm", graph=g, matching=[], alpha=0, c=0)
        assert report.ok

    def test_envy_free_is_zero_additive(self):
        g = BipartiteGraph.from_edges(3, 3, [(0, 0), (1, 0), (1, 1), (2, 2)])
        assert oracle.verify_relaxed_efm(g, [(2, 2)], c=0).ok
        assert not oracle.verify_relaxed_efm(g, [(0, 0)], c=0).ok
        assert oracle.verify_relaxed_efm(g, [(0, 0)], c=1).ok

    def test_alpha_fraction(self):
        # x1 sees one of its two neighbours taken
        g = BipartiteGraph.from_edges(2, 2, [(0, 0), (1, 0), (1, 1)])
        assert oracle.verify_relaxed_efm(g, [(0, 0)], alpha=F(1, 2)).ok
        assert not oracle.verify_relaxed_efm(g, [(0, 0)], alpha=F(1, 3)).ok

    def test_relaxed_needs_a_parameter(self):
        with pytest.raises(InputError):
            oracle.verify_relaxed_efm(BipartiteGraph.complete(1, 1), [])

    def test_mms_partition_problem(self):
        report = oracle.verify_mms([[1, 1], [1, 1]], [[0], [0]], Variant.parse("2n-2"))
        assert not report.ok

    def test_mms_pass(self):
        report = oracle.verify_allocation(
            "mms", values=[[1, 1], [1, 1]], bundles=[[0], [1]], variant=Variant.parse("2n-2")
        )
        assert report.ok and [c.threshold for c in report.checks] == [1, 1]

    def test_unknown_kind(self):
        with pytest.raises(InputError):
            oracle.verify_allocation("envy", graph=None)

    def test_report_json(self):
        g = BipartiteGraph.complete(1, 1)
        data = oracle.verify_relaxed_efm(g, [], c=0).to_json()
        assert data["ok"] is True and data["kind"] == "relaxed_efm"
