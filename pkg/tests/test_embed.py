from __future__ import annotations

from itertools import combinations
from math import sqrt

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplex_steiner.embed import (
    Graph,
    GraphError,
    NotACoverError,
    TriangleError,
    UNIT_SCALE,
    conjecture3_scan,
    contract_map,
    contract_pair,
    cover_to_partition,
    cycle_graph,
    embed_graph,
    graphs_with_edges,
    make_reduction_instance,
    partition_to_cover,
    random_triangle_free,
    star_graph,
)


def test_parse_and_reject():
    g = Graph.from_text("# triangle\n0 1\n1 2\n\n2 0\n")
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    with pytest.raises(GraphError):
        Graph.from_text("0 0\n")
    with pytest.raises(GraphError):
        Graph.from_text("0 1\n1 0\n")
    with pytest.raises(GraphError):
        Graph.from_text("0 1 2\n")


def test_graph_counts_match_known_sequence():
    # graphs with m edges and no isolated vertices, up to isomorphism
    assert [len(graphs_with_edges(m)) for m in range(1, 7)] == [1, 2, 5, 11, 26, 68]


@pytest.mark.parametrize("m", [4, 5])
def test_enumeration_is_pairwise_non_isomorphic(m):
    gs = [g.to_networkx().subgraph({v for e in g.edges for v in e}) for g in graphs_with_edges(m)]
    for a, b in combinations(gs, 2):
        assert not nx.is_isomorphic(a, b)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 9), st.floats(0.2, 0.9), st.integers(0, 2**31))
def test_unit_scale_distances(n, p, seed):
    g = Graph.from_edges(nx.gnp_random_graph(n, p, seed=seed).edges(), n_vertices=n)
    X = embed_graph(g, UNIT_SCALE).points
    for (a, ea), (b, eb) in combinations(enumerate(g.edges), 2):
        expected = 1.0 if set(ea) & set(eb) else sqrt(2)
        assert np.linalg.norm(X[a] - X[b]) == pytest.approx(expected, abs=1e-15)


def test_star_is_regular_simplex():
    X = embed_graph(star_graph(4)).points
    D = np.linalg.norm(X[:, None] - X[None], axis=2)
    np.testing.assert_allclose(D[~np.eye(4, dtype=bool)], sqrt(2))


def test_bad_scale():
    with pytest.raises(GraphError):
        embed_graph(star_graph(3), 0.5)


def _graph_with_disjoint_pair(rng):
    while True:
        n = int(rng.integers(4, 11))
        g = Graph.from_edges(nx.gnp_random_graph(n, float(rng.uniform(0.15, 0.6)), seed=int(rng.integers(2**31))).edges(),
                             n_vertices=n)
        if g.m >= 2 and g.disjoint_closed_pair() is not None:
            return g


def _random_tree_edges(n_nodes, rng):
    if n_nodes == 2:
        return [(0, 1)]
    pruefer = rng.integers(0, n_nodes, size=n_nodes - 2)
    return list(nx.from_prufer_sequence(pruefer.tolist()).edges())


def test_contraction_never_lengthens_trees():
    rng = np.random.default_rng(7)
    strict_cases = 0
    for _ in range(1000):
        g = _graph_with_disjoint_pair(rng)
        i, j = g.disjoint_closed_pair()
        conf = embed_graph(g)
        k = int(rng.integers(0, g.m + 1))
        S = rng.dirichlet(np.ones(g.m), size=k) @ conf.points if k else np.zeros((0, g.n_vertices))
        nodes = np.vstack([conf.points, S])
        edges = _random_tree_edges(len(nodes), rng)
        res = contract_pair(conf, i, j, S)
        mapped = np.vstack([res.points, res.tree_points])
        before = np.linalg.norm(nodes[[a for a, _ in edges]] - nodes[[b for _, b in edges]], axis=1)
        after = np.linalg.norm(mapped[[a for a, _ in edges]] - mapped[[b for _, b in edges]], axis=1)
        assert after.sum() <= before.sum() + 1e-12
        assert np.all(after <= before + 1e-12)
        # strict on every terminal-Steiner edge whose Steiner end has s_i, s_j > 0
        for e, (a, b) in enumerate(edges):
            term, stein = (a, b) if a < g.m <= b else (b, a) if b < g.m <= a else (None, None)
            if term is None:
                continue
            s = nodes[stein]
            assert min(nodes[term][i], nodes[term][j]) == 0
            if s[i] > 1e-6 and s[j] > 1e-6:
                assert after[e] < before[e]
                assert after.sum() < before.sum()
                strict_cases += 1
    assert strict_cases > 100


def test_contraction_maps_edges_to_contracted_graph():
    g = Graph.from_edges([(0, 1), (2, 3), (3, 4)])
    res = contract_pair(embed_graph(g), 0, 3)
    assert sorted(res.graph.edges) == [(0, 1), (0, 2), (0, 4)]
    np.testing.assert_array_equal(res.points, embed_graph(res.graph).points[[0, 1, 2]])
    with pytest.raises(GraphError):
        contract_pair(embed_graph(g), 2, 4)


def test_contract_map_definition():
    x = np.array([[0.2, 0.7, 0.1], [0.9, 0.3, 0.5]])
    np.testing.assert_array_equal(contract_map(x, 0, 1), [[0.7, 0.0, 0.1], [0.9, 0.0, 0.5]])


def test_scan_m3_tie_with_triangle():
    rep = conjecture3_scan(3, solve_pruned=True)
    assert rep.star_cost == pytest.approx(sqrt(6), abs=1e-9)
    assert [g.edges for g in rep.ties] == [((0, 1), (0, 2), (1, 2))]
    assert rep.star_is_min
    pruned = [r for r in rep.rows if r.pruned_by is not None]
    for r in pruned:
        i, j = r.pruned_by
        assert not r.graph.closed_neighborhood(i) & r.graph.closed_neighborhood(j)


def test_scan_m4_star_strictly_best():
    rep = conjecture3_scan(4, solve_pruned=True)
    assert rep.star_is_min and not rep.ties
    assert rep.star_cost == pytest.approx(3.4494897428, abs=1e-9)


def test_scan_cap():
    with pytest.raises(GraphError):
        conjecture3_scan(7)


def test_reduction_rejects_triangle():
    with pytest.raises(TriangleError) as exc:
        make_reduction_instance(cycle_graph(3))
    assert exc.value.triple == (0, 1, 2)


def test_reduction_star_is_unit_simplex():
    inst = make_reduction_instance(star_graph(4))
    X = inst.config.points
    D = np.linalg.norm(X[:, None] - X[None], axis=2)
    np.testing.assert_allclose(D[~np.eye(4, dtype=bool)], 1.0)
    assert inst.metadata()["certificate"] == "triangle-free"


def _random_cover(g, rng):
    cover = {v for v in range(g.n_vertices) if rng.random() < 0.3}
    for u, v in g.edges:
        if u not in cover and v not in cover:
            cover.add(u if rng.random() < 0.5 else v)
    return cover


def test_round_trip_and_injected_violations():
    rng = np.random.default_rng(11)
    injected = 0
    done = 0
    while done < 100:
        g = random_triangle_free(int(rng.integers(3, 13)), float(rng.uniform(0.2, 0.7)), rng)
        if g.m == 0:
            continue
        done += 1
        inst = make_reduction_instance(g)
        cover = _random_cover(g, rng)
        parts = cover_to_partition(inst, cover)
        X = inst.config.points
        for part in parts:
            for a, b in combinations(part, 2):
                assert np.linalg.norm(X[a] - X[b]) == pytest.approx(1.0)
        check = partition_to_cover(inst, parts)
        assert check.ok and len(check.cover) <= len(cover) and len(check.cover) <= len(parts)
        assert all(u in check.cover or v in check.cover for u, v in g.edges)
        # merge two parts holding disjoint edges
        for p, q in combinations(range(len(parts)), 2):
            pair = next(((a, b) for a in parts[p] for b in parts[q]
                         if not set(g.edges[a]) & set(g.edges[b])), None)
            if pair is None:
                continue
            bad = [x for r, x in enumerate(parts) if r not in (p, q)] + [parts[p] + parts[q]]
            res = partition_to_cover(inst, bad)
            assert not res.ok
            assert res.violation.part == len(bad) - 1
            assert res.violation.distance == pytest.approx(sqrt(2))
            injected += 1
            break
    assert injected > 50


def test_cover_errors():
    inst = make_reduction_instance(cycle_graph(4))
    with pytest.raises(NotACoverError) as exc:
        cover_to_partition(inst, {0})
    assert exc.value.edge == (1, 2)
    with pytest.raises(GraphError):
        partition_to_cover(inst, [[0, 1]])
    assert partition_to_cover(inst, [[0], [1], [2], [3]]).ok
