"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (shown even
under output capture) and then asserts, so the pytest verdict and the
printed line agree.
"""
from __future__ import annotations

import time
from math import sqrt

import numpy as np
import pytest

from simplex_steiner.construct import RATIO_LIMIT, iterate_double, ratio_sequence, simplex_base_tree
from simplex_steiner.embed import (
    conjecture3_scan,
    contract_pair,
    cover_to_partition,
    embed_graph,
    make_reduction_instance,
    partition_to_cover,
    random_triangle_free,
)
from simplex_steiner.solver import mst_cost, optimal_steiner_tree, regular_simplex, relatively_minimal
from simplex_steiner.topology import (
    conjectured_topology,
    enumerate_full_topologies,
    is_semi_regular,
    terminal_wiener,
)
from simplex_steiner.verify import (
    check_angles,
    check_coordinate_bounds,
    check_edge_bound,
    check_leaf_condition,
    check_orphan_bound,
    check_steiner_structure,
)

from conftest import simplex_optimum
from test_embed import _graph_with_disjoint_pair, _random_cover, _random_tree_edges


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def test_criterion_1_exact_ratios(report):
    rows, ok = [], True
    for d, target, tol in ((3, sqrt(3) / 2, 1e-9), (4, 0.8130524, 1e-6)):
        t0 = time.perf_counter()
        res = optimal_steiner_tree(regular_simplex(d))
        elapsed = time.perf_counter() - t0
        ratio = res.cost / mst_cost(regular_simplex(d))
        good = abs(ratio - target) <= tol and elapsed < 1.0
        ok &= good
        rows.append(f"d={d} ratio={ratio:.9g} err={abs(ratio - target):.1e} (tol {tol:g}) {elapsed:.2f}s")
    report(1, ok, "; ".join(rows))
    assert ok


def test_criterion_2_topology_conjecture_d3_to_d8(report):
    t0 = time.perf_counter()
    bad = [d for d in range(3, 9) if not simplex_optimum(d).best.topology.isomorphic(conjectured_topology(d))]
    elapsed = time.perf_counter() - t0
    report(2, not bad, f"best topology ~ conjectured for d=3..8; mismatches {bad}; {elapsed:.1f}s (cached solves count once)")
    assert not bad


def test_criterion_3_doubling_equals_solving(report):
    t0 = time.perf_counter()
    worst_rel, worst_angle = 0.0, 0.0
    for d in (3, 4):
        base = simplex_base_tree(d)
        for k in (1, 2):
            cand = iterate_double(base, k)
            solved = relatively_minimal(np.eye(d * 2**k), cand.tree.topology)
            worst_rel = max(worst_rel, abs(cand.cost - solved.cost) / solved.cost)
            worst_angle = max(worst_angle, max(abs(a - 120.0) for a in cand.min_angles.values()))
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-8 and worst_angle <= 1e-7 and elapsed < 10
    report(3, ok, f"max rel cost diff {worst_rel:.1e} (tol 1e-8), max |angle-120| {worst_angle:.1e} deg (tol 1e-7), {elapsed:.2f}s")
    assert ok


def test_criterion_4_ratio_recursion_and_limit(report):
    rows, ok = [], True
    for l0, d in ((sqrt(3) / 2, 3), (0.8130524, 4)):
        t0 = time.perf_counter()
        seq = ratio_sequence(l0, d, 10)
        elapsed = time.perf_counter() - t0
        v = np.array(seq.values)
        decreasing = bool(np.all(np.diff(v) < 0))
        above = bool(np.all(v > 0.6698352))
        gap = v[-1] - RATIO_LIMIT
        good = decreasing and above and gap <= 1e-4 and elapsed < 1e-3
        ok &= good
        rows.append(f"d={d}: decreasing={decreasing} above={above} gap_k10={gap:.3e} (tol 1e-4) {elapsed * 1e3:.3f}ms")
    report(4, ok, "; ".join(rows))
    assert ok


def test_criterion_5_terminal_wiener_extremality(report):
    t0 = time.perf_counter()
    failures = []
    n9_time = 0.0
    for n in range(4, 10):
        tn = time.perf_counter()
        tops = enumerate_full_topologies(n)
        gamma = np.array([terminal_wiener(t) for t in tops])
        conj = conjectured_topology(n)
        minimizers = [tops[i] for i in np.flatnonzero(gamma == gamma.min())]
        if not all(t.isomorphic(conj) for t in minimizers):
            failures.append((n, "minimizer not isomorphic"))
        if terminal_wiener(conj) != gamma.min():
            failures.append((n, "conjectured not minimal"))
        if not is_semi_regular(conj):
            failures.append((n, "conjectured not semi-regular"))
        semi = {t.canonical for t in tops if is_semi_regular(t)}
        if semi != {t.canonical for t in minimizers}:
            failures.append((n, "semi-regular set differs from minimizers"))
        if n == 9:
            n9_time = time.perf_counter() - tn
    ok = not failures and n9_time < 120
    report(5, ok, f"n=4..9 unique minimizer shape = conjectured, semi-regular iff minimal; failures {failures}; "
                  f"n=9 {n9_time:.1f}s, total {time.perf_counter() - t0:.1f}s")
    assert ok


def test_criterion_6_structural_checks(report):
    t0 = time.perf_counter()
    failures = []
    for d in range(3, 9):
        tree = simplex_optimum(d).best
        checks = [
            check_angles(tree),
            check_steiner_structure(tree),
            check_coordinate_bounds(tree),
            check_leaf_condition(tree.terminals, tree),
            check_orphan_bound(tree),
        ]
        edge = check_edge_bound(tree)
        if d >= 4:
            checks.append(edge)
        failures += [(d, c.name) for c in checks if not c.passed]
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    report(6, ok, f"all six checks on solved optima d=3..8; failures {failures}; {elapsed:.1f}s")
    assert ok


def test_criterion_7_conjecture3_scan(report):
    t0 = time.perf_counter()
    rows, ok = [], True
    for m in range(3, 7):
        rep = conjecture3_scan(m, solve_pruned=True)
        ok &= rep.star_is_min
        rows.append(f"m={m}: star {rep.star_cost:.9g}, graphs {len(rep.rows)}, ties {len(rep.ties)}, beaten {len(rep.violations)}")
    ties3 = conjecture3_scan(3).ties
    ok &= [g.edges for g in ties3] == [((0, 1), (0, 2), (1, 2))]
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 1800
    report(7, ok, "; ".join(rows) + f"; m=3 tie with triangle; {elapsed:.1f}s")
    assert ok


def test_criterion_8_contraction_property(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(62)
    increases, strict_checked, strict_failed = 0, 0, 0
    for _ in range(1000):
        g = _graph_with_disjoint_pair(rng)
        i, j = g.disjoint_closed_pair()
        conf = embed_graph(g)
        k = int(rng.integers(1, g.m + 1))
        S = rng.dirichlet(np.ones(g.m), size=k) @ conf.points
        nodes = np.vstack([conf.points, S])
        edges = np.array(_random_tree_edges(len(nodes), rng))
        res = contract_pair(conf, i, j, S)
        mapped = np.vstack([res.points, res.tree_points])
        before = np.linalg.norm(nodes[edges[:, 0]] - nodes[edges[:, 1]], axis=1).sum()
        after = np.linalg.norm(mapped[edges[:, 0]] - mapped[edges[:, 1]], axis=1).sum()
        increases += after > before + 1e-12
        applies = any(
            (min(a, b) < g.m <= max(a, b)) and np.all(nodes[max(a, b)][[i, j]] > 1e-6) for a, b in edges
        )
        if applies:
            strict_checked += 1
            strict_failed += not after < before
    elapsed = time.perf_counter() - t0
    ok = increases == 0 and strict_failed == 0 and elapsed < 60
    report(8, ok, f"1000 graphs: increases {increases}, strict cases {strict_checked} (failed {strict_failed}); {elapsed:.1f}s")
    assert ok


def test_criterion_9_reduction_round_trip(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(93)
    graphs = larger = injected = detected = 0
    while graphs < 100:
        g = random_triangle_free(int(rng.integers(3, 13)), float(rng.uniform(0.2, 0.7)), rng)
        if g.m == 0:
            continue
        graphs += 1
        inst = make_reduction_instance(g)
        cover = _random_cover(g, rng)
        parts = cover_to_partition(inst, cover)
        check = partition_to_cover(inst, parts)
        if not check.ok or len(check.cover) > len(cover) or any(u not in check.cover and v not in check.cover
                                                               for u, v in g.edges):
            larger += 1
        for p in range(len(parts)):
            for q in range(p + 1, len(parts)):
                if any(not set(g.edges[a]) & set(g.edges[b]) for a in parts[p] for b in parts[q]):
                    injected += 1
                    bad = [x for r, x in enumerate(parts) if r not in (p, q)] + [parts[p] + parts[q]]
                    detected += not partition_to_cover(inst, bad).ok
    elapsed = time.perf_counter() - t0
    ok = larger == 0 and injected > 0 and detected == injected and elapsed < 60
    report(9, ok, f"100 graphs: bad round trips {larger}; injected violations {injected}, detected {detected}; {elapsed:.1f}s")
    assert ok
