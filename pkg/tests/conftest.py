"""Shared fixtures, strategies, and deterministic instance generators."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from treecut import Graph, VertexWeights


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_connected_graph(seed: int, max_n: int = 12, max_cap: int = 8,
                           min_n: int = 2, extra_factor: float = 1.0) -> Graph:
    """Spanning tree plus random extra edges; connected by construction."""
    rng = philox(seed)
    n = int(rng.integers(min_n, max_n + 1))
    edges = []
    for v in range(1, n):
        u = int(rng.integers(v))
        edges.append((u, v, int(rng.integers(1, max_cap + 1))))
    for _ in range(int(rng.integers(0, max(1, int(n * extra_factor)) + 1))):
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u != v:
            edges.append((min(u, v), max(u, v), int(rng.integers(1, max_cap + 1))))
    return Graph.from_edges(n, edges)


def two_cliques_bridge(size: int, cap: int = 1, bridge_cap: int = 1) -> Graph:
    edges = []
    for base in (0, size):
        for i in range(size):
            for j in range(i + 1, size):
                edges.append((base + i, base + j, cap))
    edges.append((size - 1, size, bridge_cap))
    return Graph.from_edges(2 * size, edges)


@pytest.fixture
def double_k4() -> Graph:
    return two_cliques_bridge(4)


@pytest.fixture
def double_k8() -> Graph:
    return two_cliques_bridge(8)


@pytest.fixture
def k8() -> Graph:
    return Graph.from_edges(8, [(i, j, 1) for i in range(8) for j in range(i + 1, 8)])


@pytest.fixture
def path3() -> Graph:
    return Graph.from_edges(3, [(0, 1, 1), (1, 2, 1)])


@st.composite
def connected_graphs(draw, max_n: int = 10, max_cap: int = 6):
    n = draw(st.integers(2, max_n))
    edges = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.append((u, v, draw(st.integers(1, max_cap))))
    extras = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1),
                                     st.integers(1, max_cap)), max_size=2 * n))
    for u, v, c in extras:
        if u != v:
            edges.append((min(u, v), max(u, v), c))
    return Graph.from_edges(n, edges)


@st.composite
def weighted_graphs(draw, max_n: int = 10, max_cap: int = 6, max_w: int = 6):
    graph = draw(connected_graphs(max_n=max_n, max_cap=max_cap))
    weights = VertexWeights({
        v: draw(st.integers(0, max_w)) for v in range(graph.n)})
    return graph, weights
