from __future__ import annotations

from itertools import combinations
from math import prod

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplex_steiner.topology import (
    Topology,
    TopologyError,
    caterpillar,
    conjectured_topology,
    enumerate_full_topologies,
    full_binary,
    good_tree,
    is_good,
    is_semi_regular,
    semi_regular_violation,
    star,
    terminal_wiener,
)


def double_factorial(k: int) -> int:
    return prod(range(k, 0, -2)) if k > 0 else 1


def nx_tree(t: Topology) -> nx.Graph:
    g = nx.Graph()
    g.add_edges_from(t.edges)
    return g


def wiener_oracle(t: Topology) -> int:
    g = nx_tree(t)
    return sum(nx.shortest_path_length(g, u, v) for u, v in combinations(range(t.n_terminals), 2))


@pytest.mark.parametrize("n", range(3, 9))
def test_enumeration_count_and_validity(n):
    tops = enumerate_full_topologies(n)
    assert len(tops) == double_factorial(2 * n - 5)
    assert len({t.canonical for t in tops}) == len(tops)
    for t in tops[:50]:
        assert t.is_full
        assert nx.is_tree(nx_tree(t))


def test_enumeration_cap():
    with pytest.raises(TopologyError):
        enumerate_full_topologies(10)


def test_rejects_cycles_and_bad_ids():
    with pytest.raises(TopologyError):
        Topology(3, 1, ((0, 3), (1, 3), (2, 3), (0, 1)))
    with pytest.raises(TopologyError):
        Topology(3, 1, ((0, 3), (1, 3), (2, 4)))


@pytest.mark.parametrize("n", [3, 5, 7])
def test_text_round_trip(n):
    t = conjectured_topology(n)
    text = t.to_text()
    assert "T0" in text and "n_terminals" in text
    assert Topology.from_text(text) == t


@pytest.mark.parametrize("n", range(3, 9))
def test_wiener_matches_shortest_paths(n):
    for t in enumerate_full_topologies(n)[:200]:
        assert terminal_wiener(t) == wiener_oracle(t)


def test_wiener_small_values():
    assert terminal_wiener(star(3)) == 6
    assert terminal_wiener(conjectured_topology(4)) == 16
    assert terminal_wiener(conjectured_topology(5)) == 32


def semi_regular_oracle(t: Topology) -> bool:
    g = nx_tree(t)
    steiner = list(t.steiner_nodes)

    def branch_counts(u, v):
        h = g.copy()
        toward = nx.shortest_path(g, u, v)[1]
        h.remove_node(u)
        out = []
        for w in g[u]:
            if w == toward:
                continue
            comp = nx.node_connected_component(h, w)
            out.append(sum(1 for x in comp if x < t.n_terminals))
        return out

    for u, v in combinations(steiner, 2):
        cu, cv = branch_counts(u, v), branch_counts(v, u)
        if not (min(cu) >= max(cv) or min(cv) >= max(cu)):
            return False
    return True


@pytest.mark.parametrize("n", range(4, 8))
def test_semi_regular_matches_oracle_and_wiener_minimizers(n):
    tops = enumerate_full_topologies(n)
    gamma = [terminal_wiener(t) for t in tops]
    best = min(gamma)
    minimizers = [t for t, g in zip(tops, gamma) if g == best]
    conj = conjectured_topology(n)
    assert all(t.isomorphic(conj) for t in minimizers)
    for t in tops[:150]:
        assert is_semi_regular(t) == semi_regular_oracle(t)
    assert {t.canonical for t in tops if is_semi_regular(t)} == {t.canonical for t in minimizers}


def test_caterpillar_violation_witness():
    viol = semi_regular_violation(caterpillar(8))
    assert viol is not None
    u, v, cu, cv = viol
    assert not (min(cu) >= max(cv) or min(cv) >= max(cu))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 200))
def test_good_tree_properties(leaves):
    gt = good_tree(leaves)
    h = (leaves - 1).bit_length()
    assert gt.n_leaves == leaves
    assert gt.height == h == gt.root.height
    assert gt.root.min_depth >= h - 2
    assert is_good(gt.root, h)


def test_good_tree_small_shapes():
    assert good_tree(4).root == full_binary(2)
    assert good_tree(8).root == full_binary(3)
    assert not is_good(full_binary(2), 3)


@pytest.mark.parametrize("d", range(3, 13))
def test_conjectured_topology_is_full(d):
    t = conjectured_topology(d)
    assert t.n_terminals == d and t.is_full
    if d <= 9:
        assert is_semi_regular(t)
