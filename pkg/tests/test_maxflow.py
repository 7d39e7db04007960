import math

import numpy as np
import pytest

from oracles import brute_force_min_cut
from repshift.maxflow import FlowGraph, min_cut


def random_graph(g, n, density=0.4, integer=False):
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v and g.random() < density:
                c = int(g.integers(1, 10)) if integer else float(g.uniform(0, 5))
                edges.append((u, v, c))
    return edges


def cut_value(edges, side):
    return sum(c for u, v, c in edges if side[u] and not side[v])


def test_single_edge():
    assert min_cut(2, [(0, 1, 3.5)], 0, 1)[0] == 3.5


def test_no_path():
    value, side = min_cut(3, [(0, 1, 2.0), (2, 1, 4.0)], 0, 2)
    assert value == 0.0 and side == [True, True, False]


def test_diamond():
    edges = [(0, 1, 3), (0, 2, 2), (1, 2, 1), (1, 3, 2), (2, 3, 3)]
    value, side = min_cut(4, edges, 0, 3)
    assert value == 5
    assert cut_value(edges, side) == 5


@pytest.mark.parametrize("seed", range(40))
def test_matches_brute_force(seed):
    g = np.random.default_rng(seed)
    n = int(g.integers(2, 13))
    edges = random_graph(g, n, density=float(g.uniform(0.1, 0.7)), integer=bool(seed % 2))
    s, t = 0, n - 1
    value, side = min_cut(n, edges, s, t)
    expected = brute_force_min_cut(n, edges, s, t)
    assert value == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert side[s] and not side[t]
    assert cut_value(edges, side) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_bidirectional_edges():
    g = FlowGraph(3)
    g.add_edge(0, 1, 2.0, 5.0)
    g.add_edge(1, 2, 4.0, 1.0)
    assert g.max_flow(0, 2) == 2.0


def test_infinite_capacity_not_cut():
    edges = [(0, 1, math.inf), (1, 2, 3.0), (0, 2, 1.0)]
    value, side = min_cut(3, edges, 0, 2)
    assert value == 4.0 and side == [True, True, False]


def test_unbounded_flow_raises():
    with pytest.raises(ValueError, match="unbounded"):
        min_cut(3, [(0, 1, math.inf), (1, 2, math.inf)], 0, 2)
