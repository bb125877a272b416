import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from envyfree.cake import PiecewiseConstantValuation
from envyfree.graph import BipartiteGraph, WeightedBipartiteGraph


def random_graph(rng: random.Random, nx: int, ny: int, p: float = 0.4) -> BipartiteGraph:
    edges = [(x, y) for x in range(nx) for y in range(ny) if rng.random() < p]
    return BipartiteGraph.from_edges(nx, ny, edges)


def random_weighted(rng: random.Random, nx: int, ny: int, p: float = 0.4, top: int = 6) -> WeightedBipartiteGraph:
    g = random_graph(rng, nx, ny, p)
    return WeightedBipartiteGraph(g, {e: Fraction(rng.randint(0, top), rng.randint(1, 3)) for e in g.edges()})


def random_valuation(rng: random.Random, segments: int = 4, grid: int = 24) -> PiecewiseConstantValuation:
    cuts = sorted({Fraction(rng.randint(1, grid - 1), grid) for _ in range(segments - 1)})
    bps = (Fraction(0), *cuts, Fraction(1))
    dens = [Fraction(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(len(bps) - 1)]
    if not any(dens):
        dens[0] = Fraction(1)
    return PiecewiseConstantValuation(bps, tuple(dens))


def equal_thirds(marks) -> PiecewiseConstantValuation:
    """Valuation whose equal-thirds marks are exactly ``marks``."""
    bps = (Fraction(0), *map(Fraction, marks), Fraction(1))
    return PiecewiseConstantValuation(bps, tuple(1 / (b - a) for a, b in zip(bps, bps[1:])))


def odd_path(k: int) -> BipartiteGraph:
    """Path x0-y0-x1-y1-...-yk-1-xk: 2k+1 vertices, X the larger side."""
    edges = [(i, i) for i in range(k)] + [(i + 1, i) for i in range(k)]
    return BipartiteGraph.from_edges(k + 1, k, edges)


@st.composite
def graphs(draw, max_x=5, max_y=5):
    nx = draw(st.integers(0, max_x))
    ny = draw(st.integers(0, max_y))
    pairs = [(x, y) for x in range(nx) for y in range(ny)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return BipartiteGraph.from_edges(nx, ny, chosen)


@st.composite
def weighted_graphs(draw, max_x=5, max_y=5):
    g = draw(graphs(max_x, max_y))
    ws = {e: Fraction(draw(st.integers(0, 8)), draw(st.integers(1, 3))) for e in g.edges()}
    return WeightedBipartiteGraph(g, ws)


@pytest.fixture
def rng():
    return random.Random(20240601)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
