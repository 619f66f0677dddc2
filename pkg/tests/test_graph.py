import random

import pytest

from atk.graph import Graph
from helpers import complete_graph, cycle_graph, gnp_graph, path_graph


def test_rejects_self_loops_and_foreign_endpoints():
    with pytest.raises(ValueError):
        Graph([1, 2], [(1, 1)])
    with pytest.raises(ValueError):
        Graph([1, 2], [(1, 3)])


def test_parallel_edges_collapse():
    g = Graph([1, 2], [(1, 2), (2, 1)])
    assert g.m == 1


def test_induced_subgraph_on_triangle_edge():
    g = complete_graph(3)  # vertices 1,2,3
    sub = g.induced_subgraph({1, 2})
    assert sub.vertex_set == {1, 2}
    assert list(sub.edges()) == [(1, 2)]


def test_induced_subgraph_empty_and_nonadjacent():
    g = path_graph(4)  # 1-2-3-4
    assert g.induced_subgraph(()).n == 0
    pair = g.induced_subgraph({1, 4})
    assert pair.m == 0 and pair.n == 2


def test_induced_subgraph_unknown_vertex():
    with pytest.raises(ValueError):
        path_graph(3).induced_subgraph({1, 9})


def test_remove_vertices_matches_induced_complement():
    rng = random.Random(11)
    for _ in range(50):
        g = gnp_graph(rng, rng.randint(1, 12), 0.4)
        x = frozenset(v for v in g.vertices if rng.random() < 0.4)
        assert g.remove_vertices(x) == g.induced_subgraph(g.vertex_set - x)


def test_remove_vertices_examples():
    k3 = complete_graph(3)
    assert list(k3.remove_vertices({1}).edges()) == [(2, 3)]
    assert k3.remove_vertices(()) == k3
    p3 = path_graph(3)
    assert p3.remove_vertices({2}).m == 0


def test_delete_edges_within():
    k3 = complete_graph(3)
    g = k3.delete_edges_within({1, 2})
    assert sorted(g.edges()) == [(1, 3), (2, 3)]
    assert k3.delete_edges_within({2}) == k3
    k4 = complete_graph(4)
    assert k4.delete_edges_within(k4.vertex_set).m == 0


def test_identify_vertices_examples():
    c4 = cycle_graph(4)  # 1-2-3-4-1
    g = c4.identify_vertices({1, 3}, 9)
    assert g.vertex_set == {2, 4, 9}
    assert sorted(g.edges()) == [(2, 9), (4, 9)]
    k3 = complete_graph(3)
    lone = k3.identify_vertices({1, 2, 3}, 0)
    assert lone.vertex_set == {0} and lone.m == 0
    p3 = path_graph(3)
    merged = p3.identify_vertices({1, 3}, 7)
    assert sorted(merged.edges()) == [(2, 7)]


def test_identify_vertices_errors():
    g = path_graph(3)
    with pytest.raises(ValueError):
        g.identify_vertices((), 9)
    with pytest.raises(ValueError):
        g.identify_vertices({1}, 2)  # collides with survivor


def test_identify_never_grows_edges():
    rng = random.Random(5)
    for _ in range(60):
        g = gnp_graph(rng, rng.randint(2, 12), 0.4)
        size = rng.randint(1, g.n)
        x = frozenset(rng.sample(g.vertices, size))
        h = g.identify_vertices(x, max(g.vertices) + 1)
        assert h.m <= g.m
        assert not any(u == v for u, v in h.edges())


def test_connected_components_examples():
    two_edges = Graph([1, 2, 3, 4], [(1, 2), (3, 4)])
    assert two_edges.connected_components() == [frozenset({1, 2}), frozenset({3, 4})]
    assert cycle_graph(5).connected_components() == [frozenset(range(1, 6))]
    assert Graph().connected_components() == []


def test_components_form_a_partition():
    rng = random.Random(7)
    for _ in range(40):
        g = gnp_graph(rng, rng.randint(1, 14), 0.15)
        comps = g.connected_components()
        union = set()
        for comp in comps:
            assert not (union & comp)
            union |= comp
            assert g.induced_subgraph(comp).is_connected()
        assert union == g.vertex_set
        for u, v in g.edges():
            assert any(u in c and v in c for c in comps)


def test_surgeries_do_not_mutate():
    g = complete_graph(4)
    g.remove_vertices({1})
    g.delete_edges_within({1, 2})
    g.identify_vertices({1, 2}, 99)
    assert g == complete_graph(4)
