import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import graphs, odd_path
from envyfree import oracle
from envyfree.errors import InputError
from envyfree.graph import (
    BipartiteGraph,
    Matching,
    WeightedBipartiteGraph,
    graph_from_json,
    graph_to_json,
    is_envy_free,
    is_y_path_saturated,
    neighbors,
    validate_matching,
)
from envyfree.matching import max_cardinality_matching


def M(*pairs):
    return Matching(frozenset(pairs))


class TestConstruction:
    def test_rejects_out_of_range_y(self):
        with pytest.raises(InputError):
            BipartiteGraph(1, 1, ((1,),))

    def test_rejects_unsorted_row(self):
        with pytest.raises(InputError):
            BipartiteGraph(1, 3, ((2, 0),))

    def test_rejects_duplicate_neighbour(self):
        with pytest.raises(InputError):
            BipartiteGraph(1, 3, ((1, 1),))

    def test_row_count_must_match(self):
        with pytest.raises(InputError):
            BipartiteGraph(2, 1, ((0,),))

    def test_isolated_vertices_allowed(self):
        g = BipartiteGraph.from_edges(3, 4, [(1, 2)])
        assert g.adjacency == ((), (2,), ())
        assert g.y_adjacency == ((), (), (1,), ())

    def test_matching_rejects_shared_vertex(self):
        with pytest.raises(InputError):
            M((0, 0), (1, 0))

    def test_validate_matching_rejects_non_edge(self):
        g = BipartiteGraph.from_edges(2, 2, [(0, 0)])
        with pytest.raises(InputError):
            validate_matching(g, M((1, 1)))

    def test_weights_must_cover_edges(self):
        g = BipartiteGraph.from_edges(2, 2, [(0, 0), (1, 1)])
        with pytest.raises(InputError):
            WeightedBipartiteGraph(g, {(0, 0): Fraction(1)})

    def test_negative_weight_rejected(self):
        g = BipartiteGraph.from_edges(1, 1, [(0, 0)])
        with pytest.raises(InputError):
            WeightedBipartiteGraph(g, {(0, 0): Fraction(-1)})


class TestNeighbors:
    def test_shared_neighbour(self):
        g = BipartiteGraph.from_edges(2, 1, [(0, 0), (1, 0)])
        assert neighbors(g, {0, 1}) == {0}

    def test_empty_subset(self):
        assert neighbors(BipartiteGraph.complete(3, 3), set()) == frozenset()

    def test_full_row(self):
        assert neighbors(BipartiteGraph.complete(3, 3), {1}) == {0, 1, 2}

    def test_out_of_range(self):
        with pytest.raises(InputError):
            neighbors(BipartiteGraph.complete(2, 2), {2})


class TestEnvyFree:
    def test_empty_matching_is_envy_free(self):
        assert is_envy_free(BipartiteGraph.complete(3, 2), Matching())

    def test_path_with_envy(self):
        g = BipartiteGraph.from_edges(2, 1, [(0, 0), (1, 0)])
        assert not is_envy_free(g, M((0, 0)))

    def test_perfect_matching(self):
        assert is_envy_free(BipartiteGraph.complete(2, 2), M((0, 0), (1, 1)))

    @given(graphs(4, 4))
    @settings(max_examples=150, deadline=None)
    def test_agrees_with_definition(self, g):
        for m in oracle.enumerate_matchings(g):
            assert is_envy_free(g, Matching(m)) == oracle.envy_free_by_definition(g, m)

    def test_exhaustive_3x3(self):
        pairs = [(x, y) for x in range(3) for y in range(3)]
        for mask in range(1 << 9):
            g = BipartiteGraph.from_edges(3, 3, [p for i, p in enumerate(pairs) if mask >> i & 1])
            for m in oracle.enumerate_matchings(g):
                assert is_envy_free(g, Matching(m)) == oracle.envy_free_by_definition(g, m)

    @given(graphs(5, 5))
    @settings(max_examples=100, deadline=None)
    def test_x_saturating_matching_is_envy_free(self, g):
        m = max_cardinality_matching(g)
        if len(m) == g.x_count:
            assert is_envy_free(g, m)


class TestYPathSaturated:
    def test_odd_path(self):
        assert is_y_path_saturated(BipartiteGraph.from_edges(2, 1, [(0, 0), (1, 0)]))

    def test_single_edge(self):
        assert not is_y_path_saturated(BipartiteGraph.complete(1, 1))

    def test_empty_graph(self):
        assert is_y_path_saturated(BipartiteGraph(0, 0, ()))

    @pytest.mark.parametrize("k", range(1, 6))
    def test_longer_odd_paths(self, k):
        assert is_y_path_saturated(odd_path(k))

    @given(graphs(4, 4))
    @settings(max_examples=150, deadline=None)
    def test_implies_only_empty_efm(self, g):
        if is_y_path_saturated(g):
            assert oracle.enumerate_efms(g) == [frozenset()]


class TestJson:
    def test_roundtrip_weighted(self):
        data = {"x_count": 2, "y_count": 2, "edges": [[0, 1], [1, 0]], "weights": [[0, 1, "1/3"], [1, 0, 2]]}
        g = graph_from_json(data)
        assert isinstance(g, WeightedBipartiteGraph)
        assert g.weights[(0, 1)] == Fraction(1, 3)
        assert graph_from_json(json.loads(json.dumps(graph_to_json(g)))) == g

    def test_float_weight_rejected(self):
        with pytest.raises(InputError):
            graph_from_json({"x_count": 1, "y_count": 1, "edges": [[0, 0]], "weights": [[0, 0, 0.5]]})

    def test_duplicate_edge_rejected(self):
        with pytest.raises(InputError):
            graph_from_json({"x_count": 1, "y_count": 1, "edges": [[0, 0], [0, 0]]})

    def test_missing_count(self):
        with pytest.raises(InputError):
            graph_from_json({"y_count": 1, "edges": []})
