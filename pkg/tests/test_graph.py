import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wlinkpred import (EdgeListError, WeightedGraph, average_degree, degree, load_edge_list,
                       local_clustering, network_clustering, read_manifest, remove_edges,
                       strength, write_edge_list)
from wlinkpred.graph import clustering_vector

from _oracles import clustering_by_triangles, random_graph


# -- ingestion -------------------------------------------------------------

def test_load_simple(path_graph):
    g = path_graph
    assert (g.n_nodes, g.n_edges) == (3, 2)
    assert g.labels == ("a", "b", "c")
    assert sorted(g.edges()[2].tolist()) == [0.5, 0.5]


def test_load_empty():
    g = load_edge_list(io.StringIO(""))
    assert (g.n_nodes, g.n_edges) == (0, 0)


def test_load_bytes_comments_and_commas():
    g = load_edge_list(b"# header\n\nx,y,2\ny  z\n")
    assert g.n_edges == 2
    assert g.weight(g.node_id("x"), g.node_id("y")) == 2.0
    assert g.weight(g.node_id("z"), g.node_id("y")) == 1.0


@pytest.mark.parametrize("text, lineno, fragment", [
    ("a b 0.5\na b 0.7\n", 2, "duplicate"),
    ("a b 0.5\nb a 0.7\n", 2, "duplicate"),
    ("a a 1\n", 1, "self-loop"),
    ("a b 1\nc d 0\n", 2, "positive"),
    ("a b -1\n", 1, "positive"),
    ("a b nan\n", 1, "positive"),
    ("a b x\n", 1, "bad weight"),
    ("a\n", 1, "fields"),
    ("a b 1 2\n", 1, "fields"),
])
def test_load_errors(text, lineno, fragment):
    with pytest.raises(EdgeListError, match=fragment) as ei:
        load_edge_list(text)
    assert ei.value.lineno == lineno


def test_from_edges_validation():
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 5)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 1, 0.0)])


def test_immutable(path_graph):
    with pytest.raises(ValueError):
        path_graph.weights[0] = 3.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 30), st.floats(0.05, 0.6))
def test_roundtrip_and_invariants(seed, n, p):
    g = random_graph(np.random.default_rng(seed), n, p)
    buf = io.StringIO()
    write_edge_list(g, buf)
    h = load_edge_list(io.StringIO(buf.getvalue()))

    def multiset(x):
        return sorted((*sorted((x.labels[u], x.labels[v])), w) for u, v, w in zip(*x.edges()))
    assert multiset(g) == multiset(h)
    # CSR consistency: each edge appears in both lists with the same weight
    for u in range(g.n_nodes):
        for v, w in zip(g.neighbors(u).tolist(), g.neighbor_weights(u).tolist()):
            assert g.weight(v, u) == w
    assert sum(degree(g, v) for v in range(n)) == 2 * g.n_edges
    assert math.isclose(sum(strength(g, v) for v in range(n)), 2 * g.edges()[2].sum(),
                        rel_tol=1e-12, abs_tol=1e-12)


def test_manifest(tmp_path):
    (tmp_path / "m.ini").write_text("[toy]\npath = toy.txt\nweights_need_transform = yes\n"
                                    "[other]\npath = /abs/x.txt\n")
    m = read_manifest(tmp_path / "m.ini")
    assert m[0].name == "toy" and m[0].weights_need_transform
    assert m[0].path == str(tmp_path / "toy.txt")
    assert m[1].path == "/abs/x.txt" and not m[1].weights_need_transform


# -- statistics ------------------------------------------------------------

def test_degree_strength(star4, triangle):
    assert degree(star4, 0) == 4
    assert all(degree(triangle, v) == 2 for v in range(3))
    g = WeightedGraph.from_edges(5, [(0, 1, 1.2), (0, 2, 0.3), (0, 3, 2.5)])
    assert degree(g, 4) == 0
    assert strength(g, 4) == 0.0
    assert strength(g, 0) == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(KeyError):
        degree(g, 5)
    with pytest.raises(KeyError):
        strength(g, -1)


def test_strength_path(path_graph):
    assert strength(path_graph, 1) == 1.0


def test_average_degree():
    assert average_degree(WeightedGraph.from_edges(2, [(0, 1)])) == 1.0
    with pytest.raises(ValueError):
        average_degree(WeightedGraph.from_edges(0, []))


@pytest.mark.parametrize("n, m, expected, tol", [(2821, 13880, 9.84, 0.01), (281, 2402, 17.1, 0.1)])
def test_average_degree_reference_networks(n, m, expected, tol):
    # sizes of the hsaPPI and C. elegans networks; only |V| and |E| matter
    edges = itertools.islice(itertools.combinations(range(n), 2), m)
    g = WeightedGraph.from_edges(n, edges)
    assert abs(average_degree(g) - expected) <= tol


def test_clustering_edge_cases(triangle, star4, path_graph):
    assert local_clustering(triangle, 0) == 1.0
    assert local_clustering(star4, 0) == 0.0
    assert local_clustering(star4, 1) is None
    w = 0.7
    tw = WeightedGraph.from_edges(3, [(0, 1, w), (1, 2, w), (0, 2, w)])
    assert local_clustering(tw, 1, weighted=True) == pytest.approx(1.0, abs=1e-15)
    assert network_clustering(triangle) == 1.0
    assert network_clustering(tw, weighted=True) == pytest.approx(1.0, abs=1e-15)
    assert network_clustering(path_graph) == 0.0
    with pytest.raises(ValueError):
        network_clustering(WeightedGraph.from_edges(2, [(0, 1)]))
    with pytest.raises(KeyError):
        local_clustering(triangle, 3)


@pytest.mark.parametrize("seed", range(8))
def test_clustering_matches_triangle_oracle(seed):
    g = random_graph(np.random.default_rng(seed), 40, 0.15)
    for weighted in (False, True):
        ref = clustering_by_triangles(g, weighted)
        vec = clustering_vector(g, weighted)
        for v, r in ref.items():
            if r is None:
                assert math.isnan(vec[v]) and local_clustering(g, v, weighted) is None
            else:
                assert abs(vec[v] - r) <= 1e-12
                assert abs(local_clustering(g, v, weighted) - r) <= 1e-12
                assert 0.0 <= vec[v] <= 1.0 + 1e-15


@pytest.mark.parametrize("seed", range(5))
def test_clustering_scale_invariance(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 50, 0.12)
    c = float(rng.uniform(0.1, 10))
    h = g.with_weights(lambda w: w * c)
    for weighted in (False, True):
        a, b = clustering_vector(g, weighted), clustering_vector(h, weighted)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_clustering_uniform_weights_agree(seed):
    g = random_graph(np.random.default_rng(seed), 50, 0.12).with_weights(lambda w: np.full_like(w, 2.5))
    np.testing.assert_allclose(clustering_vector(g, False), clustering_vector(g, True), atol=1e-12)


def test_remove_edges(path_graph, triangle):
    h = remove_edges(path_graph, [(0, 1), (2, 1)])
    assert (h.n_nodes, h.n_edges) == (3, 0)
    assert path_graph.n_edges == 2
    assert remove_edges(triangle, []) == triangle
    p = remove_edges(triangle, [(0, 2)])
    assert p.n_edges == 2 and not p.has_edge(0, 2) and p.has_edge(0, 1)
    with pytest.raises(ValueError):
        remove_edges(path_graph, [(0, 2)])
