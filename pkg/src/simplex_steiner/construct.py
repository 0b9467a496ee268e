"""Explicit Steiner trees for regular simplices.

All simplices use the standard basis as terminals, so the regular
d-simplex has side sqrt(2). Doubling maps terminal ``i`` (0-based) to the
new terminals ``2i`` and ``2i + 1``, i.e. it appends one bit to binary
labels.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from math import sqrt
from typing import Optional

import numpy as np

from .geometry import fermat_point, split
from .solver import SteinerTree, mst_cost, regular_simplex, relatively_minimal
from .topology import Topology, conjectured_topology, star
from .verify import ANGLE_TOL_DEG, check_candidate, min_included_angles

RATIO_LIMIT = sqrt(3.0) / (sqrt(2.0) * (2.0 * sqrt(2.0) - 1.0))
FERMAT_MARGIN = 1.0 / sqrt(6.0)


class ConstructionError(RuntimeError):
    pass


@dataclass
class CandidateTree:
    tree: SteinerTree
    min_angles: dict[int, float]
    steiner_degrees: dict[int, int]
    # One dict per doubling step: old terminal index -> |c_i - s'_i|.
    margins: list[dict[int, float]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return check_candidate(self.tree).passed

    @property
    def cost(self) -> float:
        return self.tree.cost

    @property
    def ratio(self) -> float:
        return self.tree.cost / mst_cost(self.tree.terminals)


def _candidate(tree: SteinerTree, margins=None) -> CandidateTree:
    top = tree.topology
    return CandidateTree(
        tree,
        min_included_angles(tree),
        {s: top.degree(s) for s in top.steiner_nodes},
        list(margins or []),
    )


def _require_simplex_tree(t: SteinerTree) -> int:
    d = t.topology.n_terminals
    if d < 3:
        raise ConstructionError("doubling needs d >= 3")
    if not t.topology.is_full:
        raise ConstructionError("doubling needs a full topology")
    if t.terminals.shape != (d, d) or not np.allclose(t.terminals, np.eye(d), atol=1e-12, rtol=0):
        raise ConstructionError("terminals must be the standard basis of R^d")
    return d


def double(t: SteinerTree) -> CandidateTree:
    """Candidate tree on the regular 2d-simplex from a full tree on the d-simplex.

    Steiner points are split, Steiner-Steiner edges kept, and each old
    terminal e_i is replaced by the Fermat point x_i of (e_2i, e_2i+1, s'_i)
    wired to both new terminals and to s'_i.
    """
    d = _require_simplex_tree(t)
    top = t.topology
    k_old = top.n_steiner
    n_new = 2 * d
    P_new = np.eye(n_new)

    def split_id(s: int) -> int:
        return n_new + (s - d)

    def fermat_id(i: int) -> int:
        return n_new + k_old + i

    positions = [P_new]
    positions.append(np.array([split(t.positions[s]) for s in top.steiner_nodes]).reshape(k_old, n_new))
    edges = [
        (split_id(u), split_id(v))
        for u, v in top.edges
        if not top.is_terminal(u) and not top.is_terminal(v)
    ]
    margins = {}
    new_points = []
    for i in range(d):
        (s_i,) = top.adjacency[i]
        s_split = split(t.positions[s_i])
        a, b = P_new[2 * i], P_new[2 * i + 1]
        margin = float(np.linalg.norm((a + b) / 2.0 - s_split))
        margins[i] = margin
        res = fermat_point(a, b, s_split)
        if not margin > FERMAT_MARGIN or not res.is_interior:
            raise ConstructionError(
                f"no interior Fermat point for terminal {i} (|c_i - s'_i| = {margin:.12g} <= 1/sqrt6)"
            )
        new_points.append(res.point)
        edges += [(2 * i, fermat_id(i)), (2 * i + 1, fermat_id(i)), (fermat_id(i), split_id(s_i))]
    positions.append(np.array(new_points))
    topology = Topology(n_new, k_old + d, tuple(edges))
    labels = None
    if t.labels is not None:
        labels = tuple(
            [t.labels[i] + bit for i in range(d) for bit in "01"]
            + [t.labels[s] for s in top.steiner_nodes]
            + [t.labels[i] for i in range(d)]
        )
    tree = SteinerTree.from_positions(topology, np.vstack(positions), labels=labels)
    return _candidate(tree, [margins])


def iterate_double(t: SteinerTree, k: int) -> CandidateTree:
    """Apply :func:`double` ``k`` times; ``k = 0`` validates and wraps the input."""
    if k < 0:
        raise ValueError("k must be non-negative")
    _require_simplex_tree(t)
    current = _candidate(t)
    margins: list[dict[int, float]] = []
    for _ in range(k):
        current = double(current.tree)
        margins += current.margins
    current.margins = margins
    return current


def simplex_base_tree(d: int) -> SteinerTree:
    """Starting tree for doubling: closed forms for d = 3, 4, solved otherwise."""
    if d == 3:
        X = np.vstack([np.eye(3), np.full(3, 1.0 / 3.0)])
        return SteinerTree.from_positions(star(3), X)
    if d == 4:
        return pow2_simplex_tree(2).tree
    if d < 3:
        raise ConstructionError("base trees need d >= 3")
    return relatively_minimal(regular_simplex(d), conjectured_topology(d))


def _pow2_topology(k: int) -> tuple[Topology, list[str]]:
    d = 2**k
    steiner_labels = [format(i, f"0{j}b") for j in range(1, k) for i in range(2**j)]
    sid = {lab: d + idx for idx, lab in enumerate(steiner_labels)}
    edges = [(sid["0"], sid["1"])]
    for lab in steiner_labels:
        if len(lab) < k - 1:
            edges += [(sid[lab], sid[lab + "0"]), (sid[lab], sid[lab + "1"])]
        else:
            edges += [(sid[lab], int(lab + "0", 2)), (sid[lab], int(lab + "1", 2))]
    labels = [format(i, f"0{k}b") for i in range(d)] + steiner_labels
    return Topology(d, d - 2, tuple(edges)), labels


def pow2_simplex_tree(k: int) -> CandidateTree:
    """Closed-form candidate tree on the regular 2^k-simplex (two full binary halves).

    The all-zero labels are computed from the split recursion; every other
    Steiner point is the all-zero point of the same depth with coordinates
    permuted by XOR-ing terminal labels with its own label, which amounts to
    swapping children along the way down.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    d = 2**k
    a = 0.5 - 1.0 / (2.0 * sqrt(6.0))
    b = 1.0 / (2.0 * sqrt(6.0))
    s0 = np.array([a, a, b, b])
    for _ in range(k - 2):
        s0 = split(s0)
    zeros = {1: s0}  # depth j -> s^k_{0...0}
    shift = 0.5 - 1.0 / (2.0 * sqrt(2.0))
    for j in range(2, k):
        v = np.zeros(d)
        v[: 2 ** (k - j)] = shift / 2.0 ** (k - j - 1)
        zeros[j] = zeros[j - 1] / sqrt(2.0) + v
    topology, labels = _pow2_topology(k)
    idx = np.arange(d)
    X = [np.eye(d)]
    for lab in labels[d:]:
        j = len(lab)
        mask = int(lab, 2) << (k - j)
        X.append(zeros[j][idx ^ mask][None, :])
    tree = SteinerTree.from_positions(topology, np.vstack(X), labels=tuple(labels))
    return _candidate(tree)


# -- ratio recursion ---------------------------------------------------------


@dataclass
class RatioSequence:
    d0: int
    values: list[float]
    limit: float = RATIO_LIMIT

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "terminals", "ratio", "gap"])
        for k, v in enumerate(self.values):
            w.writerow([k, self.d0 * 2**k, f"{v:.9g}", f"{v - self.limit:.9g}"])
        return buf.getvalue()


def ratio_step(l: float, n_terminals: int) -> float:
    """Steiner ratio after one doubling of a tree on ``n_terminals`` basis vectors."""
    m = n_terminals
    return (l * (m - 1) - m / sqrt(6.0) + 2 * m * sqrt(2.0 / 3.0)) / ((2 * m - 1) * sqrt(2.0))


def ratio_sequence(l0: float, d: int, K: int) -> RatioSequence:
    if d < 3:
        raise ValueError("d must be at least 3")
    if not 0 < l0 <= 1:
        raise ValueError("l0 must lie in (0, 1]")
    if K < 0:
        raise ValueError("K must be non-negative")
    if l0 <= RATIO_LIMIT:
        warnings.warn(
            f"l0 = {l0} does not exceed the limit {RATIO_LIMIT:.9f}; monotone convergence is not guaranteed",
            stacklevel=2,
        )
    values = [float(l0)]
    for k in range(K):
        values.append(ratio_step(values[-1], d * 2**k))
    return RatioSequence(d, values)
