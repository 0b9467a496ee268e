"""Combinatorial Steiner topologies.

Nodes are integers: terminals are ``0 .. n_terminals-1`` and Steiner nodes
follow them. Names ``T<i>`` / ``S<j>`` are only used for display and the
text format.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional

DEFAULT_ENUM_CAP = 9


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    n_terminals: int
    n_steiner: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n_terminals < 2:
            raise TopologyError("need at least two terminals")
        if self.n_steiner < 0:
            raise TopologyError("negative Steiner count")
        n = self.n_nodes
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise TopologyError(f"bad edge ({u}, {v})")
            norm.append((min(u, v), max(u, v)))
        norm.sort()
        if len(set(norm)) != len(norm):
            raise TopologyError("repeated edge")
        object.__setattr__(self, "edges", tuple(norm))
        if len(norm) != n - 1 or not self._connected():
            raise TopologyError("edges do not form a tree on all nodes")

    @property
    def n_nodes(self) -> int:
        return self.n_terminals + self.n_steiner

    def is_terminal(self, v: int) -> bool:
        return v < self.n_terminals

    def name(self, v: int) -> str:
        return f"T{v}" if v < self.n_terminals else f"S{v - self.n_terminals}"

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def _connected(self) -> bool:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_nodes

    @property
    def steiner_nodes(self) -> range:
        return range(self.n_terminals, self.n_nodes)

    @property
    def is_full(self) -> bool:
        return (
            self.n_steiner == self.n_terminals - 2
            and all(self.degree(v) == 1 for v in range(self.n_terminals))
            and all(self.degree(s) == 3 for s in self.steiner_nodes)
        )

    # -- canonical forms -------------------------------------------------

    def _encode(self, root: int, labeled: bool) -> str:
        adj = self.adjacency
        # iterative post-order to stay clear of the recursion limit
        order, parent = [], {root: -1}
        stack = [root]
        while stack:
            v = stack.pop()
            order.append(v)
            for w in adj[v]:
                if w != parent[v]:
                    parent[w] = v
                    stack.append(w)
        enc: dict[int, str] = {}
        for v in reversed(order):
            kids = sorted(enc[w] for w in adj[v] if w != parent[v])
            if self.is_terminal(v):
                head = f"T{v}" if labeled else "t"
            else:
                head = "s"
            enc[v] = head + ("(" + ",".join(kids) + ")" if kids else "")
        return enc[root]

    @cached_property
    def canonical(self) -> str:
        """Encoding invariant under Steiner relabelling; terminals keep labels."""
        return self._encode(0, labeled=True)

    @cached_property
    def shape(self) -> str:
        """Encoding invariant under any relabelling (unlabelled isomorphism)."""
        return min(self._encode(c, labeled=False) for c in tree_centers(self))

    def isomorphic(self, other: "Topology") -> bool:
        return self.shape == other.shape

    # -- serialisation ---------------------------------------------------

    def to_text(self) -> str:
        lines = [f"n_terminals {self.n_terminals}", f"n_steiner {self.n_steiner}"]
        lines += [f"{self.name(u)} {self.name(v)}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Topology":
        n = k = None
        pairs = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            a, b = line.split()
            if a == "n_terminals":
                n = int(b)
            elif a == "n_steiner":
                k = int(b)
            else:
                pairs.append((a, b))
        if n is None or k is None:
            raise TopologyError("missing n_terminals / n_steiner header")

        def node(name: str) -> int:
            kind, idx = name[0], int(name[1:])
            if kind == "T" and idx < n:
                return idx
            if kind == "S" and idx < k:
                return n + idx
            raise TopologyError(f"unknown node {name!r}")

        return cls(n, k, tuple((node(a), node(b)) for a, b in pairs))


def tree_centers(t: Topology) -> list[int]:
    degree = [t.degree(v) for v in range(t.n_nodes)]
    layer = [v for v in range(t.n_nodes) if degree[v] <= 1]
    remaining = t.n_nodes
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for w in t.adjacency[v]:
                degree[w] -= 1
                if degree[w] == 1:
                    nxt.append(w)
        layer = nxt
    return sorted(layer)


def star(n: int = 3) -> Topology:
    """One Steiner node joined to ``n`` terminals."""
    return Topology(n, 1, tuple((i, n) for i in range(n)))


def caterpillar(n: int) -> Topology:
    """Full topology whose Steiner nodes form a path (leaf counts 2,1,...,1,2)."""
    if n < 3:
        raise TopologyError("caterpillar needs n >= 3")
    k = n - 2
    s = [n + i for i in range(k)]
    edges = [(s[i], s[i + 1]) for i in range(k - 1)]
    edges += [(0, s[0]), (1, s[0])]
    for i in range(1, k - 1):
        edges.append((i + 1, s[i]))
    edges += [(n - 2, s[-1]), (n - 1, s[-1])] if k > 1 else [(2, s[0])]
    return Topology(n, k, tuple(edges))


def enumerate_full_topologies(n: int, cap: int = DEFAULT_ENUM_CAP) -> list[Topology]:
    """Every full Steiner topology on ``n`` labelled terminals, once each.

    Terminal ``k`` is inserted by subdividing each edge of every topology on
    the first ``k`` terminals; this reaches each full topology exactly once,
    (2n-5)!! in total. Results are still deduplicated by canonical form.
    """
    if n < 3:
        raise TopologyError("full topologies need at least 3 terminals")
    if n > cap:
        raise TopologyError(f"n={n} exceeds enumeration cap {cap}")
    # Steiner ids are n + j while building so terminal ids never shift.
    partial = [[(0, n), (1, n), (2, n)]]
    for k in range(3, n):
        s = n + k - 2
        grown = []
        for edges in partial:
            for idx, (u, v) in enumerate(edges):
                grown.append(edges[:idx] + [(u, s), (v, s), (k, s)] + edges[idx + 1:])
        partial = grown
    seen: set[str] = set()
    out = []
    for edges in partial:
        t = Topology(n, n - 2, tuple(edges))
        if t.canonical not in seen:
            seen.add(t.canonical)
            out.append(t)
    return out


# -- rooted binary trees ---------------------------------------------------


@dataclass(frozen=True)
class RootedTree:
    children: tuple["RootedTree", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @cached_property
    def n_leaves(self) -> int:
        return 1 if self.is_leaf else sum(c.n_leaves for c in self.children)

    @cached_property
    def height(self) -> int:
        return 0 if self.is_leaf else 1 + max(c.height for c in self.children)

    @cached_property
    def min_depth(self) -> int:
        return 0 if self.is_leaf else 1 + min(c.min_depth for c in self.children)

    @cached_property
    def shape(self) -> str:
        if self.is_leaf:
            return "L"
        return "(" + ",".join(sorted(c.shape for c in self.children)) + ")"

    def is_full_binary(self, height: Optional[int] = None) -> bool:
        if self.is_leaf:
            return height in (None, 0)
        if len(self.children) != 2:
            return False
        h = self.height if height is None else height
        return self.height == h and self.min_depth == h


def full_binary(height: int) -> RootedTree:
    t = RootedTree()
    for _ in range(height):
        t = RootedTree((t, t))
    return t


def is_good(t: RootedTree, height: int) -> bool:
    """Recursive good-binary-tree test at the given height."""
    if height == 0:
        return t.is_leaf
    if t.is_leaf or len(t.children) > 2:
        return False
    good_used = False
    for c in t.children:
        if c.is_full_binary(height - 1) or (height >= 2 and c.is_full_binary(height - 2)):
            continue
        if not good_used and is_good(c, height - 1):
            good_used = True
            continue
        return False
    return t.height == height


@dataclass(frozen=True)
class GoodTree:
    root: RootedTree
    height: int

    @property
    def n_leaves(self) -> int:
        return self.root.n_leaves


def _ceil_log2(x: int) -> int:
    return (x - 1).bit_length()


def _good_root(leaves: int) -> RootedTree:
    if leaves == 1:
        return RootedTree()
    if leaves == 2:
        return full_binary(1)
    k = _ceil_log2(leaves) - 1  # 2^k < leaves <= 2^(k+1)
    if leaves <= 2**k + 2 ** (k - 1):
        return RootedTree((full_binary(k - 1), _good_root(leaves - 2 ** (k - 1))))
    return RootedTree((full_binary(k), _good_root(leaves - 2**k)))


def good_tree(leaves: int) -> GoodTree:
    """The unique good binary tree with ``leaves`` leaves and height ceil(log2 leaves)."""
    if leaves < 2:
        raise TopologyError("a good tree needs at least 2 leaves")
    return GoodTree(_good_root(leaves), _ceil_log2(leaves))


def _rooted_to_topology(left: RootedTree, right: RootedTree) -> Topology:
    """Join two rooted trees by an edge between their roots.

    Leaves become terminals in left-to-right order; internal nodes become
    Steiner nodes in preorder.
    """
    leaves: list[RootedTree] = []
    internal: list[RootedTree] = []
    ids: dict[int, int] = {}
    parent_edges: list[tuple[int, int]] = []

    def walk(node: RootedTree, parent_key: Optional[int]) -> int:
        key = len(ids)
        ids[key] = -1
        if node.is_leaf:
            leaves.append(key)  # type: ignore[arg-type]
        else:
            internal.append(key)  # type: ignore[arg-type]
        if parent_key is not None:
            parent_edges.append((parent_key, key))
        for c in node.children:
            walk(c, key)
        return key

    a = walk(left, None)
    b = walk(right, None)
    n = len(leaves)
    remap = {key: i for i, key in enumerate(leaves)}
    remap.update({key: n + j for j, key in enumerate(internal)})
    edges = [(remap[u], remap[v]) for u, v in parent_edges] + [(remap[a], remap[b])]
    return Topology(n, len(internal), tuple(edges))


def conjectured_topology(d: int) -> Topology:
    """Good tree on ``d`` leaves with the root removed and its two children joined."""
    if d < 3:
        raise TopologyError("conjectured topology needs d >= 3")
    left, right = good_tree(d).root.children
    return _rooted_to_topology(left, right)


# -- indices ---------------------------------------------------------------


def _terminal_hop_sum(t: Topology) -> int:
    adj = t.adjacency
    total = 0
    for src in range(t.n_terminals):
        dist = {src: 0}
        q = deque([src])
        while q:
            v = q.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        total += sum(dist[j] for j in range(src + 1, t.n_terminals))
    return total


def _side_counts(t: Topology) -> dict[tuple[int, int], int]:
    """Terminals on the ``b`` side of each directed edge ``(a, b)``."""
    adj = t.adjacency
    order, parent = [], {0: -1}
    stack = [0]
    while stack:
        v = stack.pop()
        order.append(v)
        for w in adj[v]:
            if w != parent[v]:
                parent[w] = v
                stack.append(w)
    below = {}
    for v in reversed(order):
        below[v] = int(t.is_terminal(v)) + sum(below[w] for w in adj[v] if w != parent[v])
    total = below[0]
    counts = {}
    for v in order[1:]:
        p = parent[v]
        counts[(p, v)] = below[v]
        counts[(v, p)] = total - below[v]
    return counts


def terminal_wiener(t: Topology) -> int:
    """Sum of hop distances over terminal pairs.

    Computed both from all-pairs BFS and from the edge-cut identity
    sum over edges of (terminals on one side) x (terminals on the other).
    """
    pairwise = _terminal_hop_sum(t)
    counts = _side_counts(t)
    by_cut = sum(counts[(u, v)] * counts[(v, u)] for u, v in t.edges)
    if pairwise != by_cut:
        raise RuntimeError(f"terminal Wiener mismatch: {pairwise} vs {by_cut}")
    return pairwise


def _path_next(t: Topology, u: int, v: int) -> tuple[int, int]:
    """Neighbours of ``u`` and ``v`` that lie on the u-v path."""
    adj = t.adjacency
    parent = {u: -1}
    q = deque([u])
    while q:
        x = q.popleft()
        if x == v:
            break
        for w in adj[x]:
            if w not in parent:
                parent[w] = x
                q.append(w)
    prev_of_v = parent[v]
    x = v
    while parent[x] != u:
        x = parent[x]
    return x, prev_of_v


def semi_regular_violation(t: Topology) -> Optional[tuple[int, int, tuple[int, int], tuple[int, int]]]:
    """First Steiner pair breaking semi-regularity, with both subtree terminal counts."""
    counts = _side_counts(t)
    steiner = list(t.steiner_nodes)
    for i, u in enumerate(steiner):
        for v in steiner[i + 1:]:
            nu, nv = _path_next(t, u, v)
            cu = tuple(sorted(counts[(u, w)] for w in t.adjacency[u] if w != nu))
            cv = tuple(sorted(counts[(v, w)] for w in t.adjacency[v] if w != nv))
            if not (min(cv) >= max(cu) or min(cu) >= max(cv)):
                return u, v, cu, cv
    return None


def is_semi_regular(t: Topology) -> bool:
    if not t.is_full:
        raise TopologyError("semi-regularity is defined for full topologies")
    return semi_regular_violation(t) is None


# -- binary labelling ------------------------------------------------------


@dataclass(frozen=True)
class LabeledBinaryTree:
    label: str
    left: Optional["LabeledBinaryTree"] = None
    right: Optional["LabeledBinaryTree"] = None

    def nodes(self) -> Iterator["LabeledBinaryTree"]:
        yield self
        for c in (self.left, self.right):
            if c is not None:
                yield from c.nodes()

    def leaf_labels(self) -> list[str]:
        return [n.label for n in self.nodes() if n.left is None]


def label_full_binary(t: RootedTree, g: str = "") -> LabeledBinaryTree:
    """Label the root ``g``; a left child appends '0', a right child '1'."""
    if t.is_leaf:
        return LabeledBinaryTree(g)
    if len(t.children) != 2:
        raise TopologyError("labelling needs a full binary tree")
    left, right = t.children
    return LabeledBinaryTree(g, label_full_binary(left, g + "0"), label_full_binary(right, g + "1"))


def topologies_by_shape(topologies: Iterable[Topology]) -> dict[str, list[Topology]]:
    groups: dict[str, list[Topology]] = {}
    for t in topologies:
        groups.setdefault(t.shape, []).append(t)
    return groups
