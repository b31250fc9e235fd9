from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qatopo.graph import (
    Graph,
    GraphError,
    UndefinedMetricError,
    add_edge,
    connected_components,
    degree_stats,
    dumps_edgelist,
    loads_edgelist,
    modularity,
    modularity_partition,
    new_graph,
    read_edgelist,
    regularity,
    topology_metrics,
    write_edgelist,
)


@st.composite
def graphs(draw, max_nodes=12):
    n = draw(st.integers(0, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), max_size=40)) if pairs else []
    return Graph.from_edges(n, edges)


def two_triangles():
    return Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


# -- structure -------------------------------------------------------------------


def test_new_graph_examples():
    assert new_graph(0).node_count == 0 and new_graph(0).edge_count == 0
    assert new_graph(5).degrees() == [0] * 5
    assert add_edge(add_edge(add_edge(new_graph(3), 0, 1), 1, 2), 0, 2) == Graph.complete(3)
    assert Graph.complete(3).edge_count == 3


def test_add_edge_idempotent():
    g = new_graph(2)
    add_edge(g, 0, 1)
    assert g.edge_count == 1
    add_edge(g, 1, 0)
    add_edge(g, 0, 1)
    assert g.edge_count == 1


@pytest.mark.parametrize("u,v", [(0, 0), (2, 2)])
def test_self_loop_rejected(u, v):
    with pytest.raises(GraphError, match="self-loop"):
        add_edge(new_graph(3), u, v)


@pytest.mark.parametrize("u,v", [(0, 3), (-1, 0), (5, 1)])
def test_out_of_range_rejected(u, v):
    with pytest.raises(GraphError):
        add_edge(new_graph(3), u, v)


@given(graphs())
def test_adjacency_invariants(g):
    total = 0
    for v in range(g.node_count):
        nbrs = g.neighbors(v)
        assert v not in nbrs
        assert all(a < b for a, b in zip(nbrs, nbrs[1:]))
        for u in nbrs:
            assert v in g.neighbors(u)
        total += len(nbrs)
    assert total % 2 == 0 and total // 2 == g.edge_count
    assert len(list(g.edges())) == g.edge_count


@given(graphs())
def test_incremental_and_bulk_construction_agree(g):
    h = new_graph(g.node_count)
    for u, v in reversed(list(g.edges())):
        h.add_edge(v, u)
    assert h == g
    indptr, indices = h.csr()
    assert list(indices) == [v for u in range(g.node_count) for v in g.neighbors(u)]
    assert indptr[-1] == 2 * g.edge_count


# -- degree statistics -----------------------------------------------------------


def test_degree_stats_examples():
    k4 = degree_stats(Graph.complete(4))
    assert (k4.min_degree, k4.max_degree, k4.mean_degree, k4.degree_stddev) == (3, 3, 3, 0.0)
    p3 = degree_stats(Graph.from_edges(3, [(0, 1), (1, 2)]))
    assert (p3.min_degree, p3.max_degree, p3.mean_degree) == (1, 2, Fraction(4, 3))
    with pytest.raises(UndefinedMetricError):
        degree_stats(new_graph(0))


def test_regularity_examples():
    assert regularity(star(4)) == pytest.approx(0.25, abs=1e-12)
    assert regularity(Graph.complete(2)) == 1.0
    assert regularity(two_triangles()) == 1.0
    with pytest.raises(UndefinedMetricError):
        regularity(new_graph(3))
    with pytest.raises(UndefinedMetricError):
        regularity(new_graph(0))


@given(graphs())
def test_regularity_in_unit_interval(g):
    if g.edge_count == 0:
        return
    r = regularity(g)
    assert 0.0 <= r <= 1.0
    assert (r == 1.0) == (len(set(g.degrees())) == 1)


# -- components ------------------------------------------------------------------


def test_components_examples():
    assert connected_components(two_triangles()) == [[0, 1, 2], [3, 4, 5]]
    assert connected_components(Graph.complete(7)) == [list(range(7))]
    assert connected_components(new_graph(4)) == [[0], [1], [2], [3]]


@given(graphs())
def test_components_partition_nodes(g):
    comps = connected_components(g)
    assert sorted(v for c in comps for v in c) == list(range(g.node_count))
    for c in comps:
        assert g.subgraph_is_connected(c)
    where = {v: i for i, c in enumerate(comps) for v in c}
    assert all(where[u] == where[v] for u, v in g.edges())


# -- modularity ------------------------------------------------------------------


def test_modularity_examples():
    assert modularity(Graph.complete(5), [0] * 5) == 0.0
    assert modularity(two_triangles(), [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5, abs=1e-12)
    assert modularity(Graph.complete(2), [0, 0]) == 0.0
    with pytest.raises(UndefinedMetricError):
        modularity(new_graph(3), [0, 1, 2])
    with pytest.raises(UndefinedMetricError):
        modularity_partition(new_graph(3))


def test_greedy_finds_two_triangles():
    partition, q = modularity_partition(two_triangles())
    assert partition == [0, 0, 0, 3, 3, 3]
    assert q == pytest.approx(0.5, abs=1e-12)


def _best_partition_q(g):
    """Exhaustive maximum modularity over all set partitions (tiny graphs only)."""
    n = g.node_count
    best = -1.0
    for labels in product(range(n), repeat=n):
        # canonical labellings only: label i first appears after labels < i
        seen = -1
        ok = True
        for lab in labels:
            if lab > seen + 1:
                ok = False
                break
            seen = max(seen, lab)
        if ok:
            best = max(best, modularity(g, labels))
    return best


@settings(max_examples=60, deadline=None)
@given(graphs(max_nodes=6))
def test_greedy_partition_consistent_and_bounded(g):
    if g.edge_count == 0:
        return
    partition, q = modularity_partition(g)
    assert q == pytest.approx(modularity(g, partition), abs=1e-9)
    assert q <= _best_partition_q(g) + 1e-9
    # community ids are the smallest member
    for v, c in enumerate(partition):
        assert partition[c] == c and c <= v


def test_metrics_of_zephyr_2_1():
    from qatopo.topology import ZephyrParams, zephyr_graph

    m = topology_metrics(zephyr_graph(ZephyrParams(2, 1)))
    assert (m.node_count, m.edge_count) == (40, 114)
    assert m.average_degree == pytest.approx(5.7)
    assert degree_stats(zephyr_graph(ZephyrParams(2, 1))).mean_degree == Fraction(57, 10)
    assert -0.5 <= m.modularity <= 1.0


# -- edge-list format ------------------------------------------------------------


def test_edgelist_layout():
    text = dumps_edgelist(Graph.from_edges(4, [(2, 1), (0, 3), (1, 0)]))
    assert text == "graph 4 3\n0 1\n0 3\n1 2\n"


@given(graphs())
def test_edgelist_round_trip(g):
    assert loads_edgelist(dumps_edgelist(g)) == g


def test_edgelist_file_round_trip(tmp_path):
    g = two_triangles()
    path = tmp_path / "g.txt"
    write_edgelist(g, path)
    assert path.read_bytes() == dumps_edgelist(g).encode()
    assert read_edgelist(path) == g


@pytest.mark.parametrize(
    "text,line",
    [
        ("", None),
        ("grph 2 1\n0 1\n", "line 1"),
        ("graph 2 1\n0\n", "line 2"),
        ("graph 3 2\n0 1\n1 x\n", "line 3"),
        ("graph 2 2\n0 1\n", None),
        ("graph 2 1\n0 5\n", None),
    ],
)
def test_edgelist_errors(text, line):
    with pytest.raises(GraphError) as info:
        loads_edgelist(text)
    if line:
        assert line in str(info.value)
