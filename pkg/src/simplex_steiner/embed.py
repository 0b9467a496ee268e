"""Edge embeddings of graphs and the vertex-cover reduction harness.

Edge (i, j) of a graph on n vertices is sent to scale * (e_i + e_j) in R^n.
With scale 1 the star on m edges becomes a regular m-simplex of side
sqrt(2); with scale 1/sqrt(2) adjacent edges sit at distance 1 and disjoint
ones at sqrt(2), which is the unit simplicial complex used by the reduction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import inf, isclose, sqrt
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np

from .solver import TIE_TOL, mst_cost, optimal_steiner_tree

UNIT_SCALE = 1.0 / sqrt(2.0)
RAW_SCALE = 1.0
DEFAULT_SCAN_CAP = 6


class GraphError(ValueError):
    pass


class TriangleError(GraphError):
    def __init__(self, triple: tuple[int, int, int]):
        super().__init__(f"graph contains the triangle {triple}")
        self.triple = triple


class NotACoverError(GraphError):
    def __init__(self, edge: tuple[int, int]):
        super().__init__(f"edge {edge} is not covered")
        self.edge = edge


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise GraphError(f"edge ({u}, {v}) outside 0..{self.n_vertices - 1}")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise GraphError("multi-edge")
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n_vertices: Optional[int] = None) -> "Graph":
        edges = [tuple(e) for e in edges]
        n = max((max(e) for e in edges), default=-1) + 1 if n_vertices is None else n_vertices
        return cls(n, tuple(edges))  # type: ignore[arg-type]

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        """Edge list, one ``u v`` pair per line, 0-indexed; '#' starts a comment."""
        edges = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"bad edge line {raw!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return cls.from_edges(edges)

    def to_text(self) -> str:
        return "".join(f"{u} {v}\n" for u, v in self.edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def closed_neighborhood(self, v: int) -> set[int]:
        return self.neighbors(v) | {v}

    def triangle(self) -> Optional[tuple[int, int, int]]:
        adj = {v: self.neighbors(v) for v in range(self.n_vertices)}
        for u, v in self.edges:
            common = adj[u] & adj[v]
            if common:
                return tuple(sorted((u, v, min(common))))  # type: ignore[return-value]
        return None

    def disjoint_closed_pair(self) -> Optional[tuple[int, int]]:
        """First vertex pair (among non-isolated vertices) with disjoint closed neighbourhoods."""
        active = sorted({v for e in self.edges for v in e})
        closed = {v: self.closed_neighborhood(v) for v in active}
        for i, j in combinations(active, 2):
            if not closed[i] & closed[j]:
                return i, j
        return None

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_vertices))
        g.add_edges_from(self.edges)
        return g

    def diameter(self) -> float:
        g = self.to_networkx().subgraph({v for e in self.edges for v in e})
        if g.number_of_nodes() == 0:
            return 0.0
        return float(nx.diameter(g)) if nx.is_connected(g) else inf


def star_graph(m: int) -> Graph:
    return Graph(m + 1, tuple((0, i) for i in range(1, m + 1)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


# -- embedding -----------------------------------------------------------------


@dataclass
class EmbeddedConfig:
    points: np.ndarray
    scale: float
    source: Graph

    def to_json(self, metadata: Optional[dict] = None) -> str:
        doc = {"dim": int(self.points.shape[1]), "points": self.points.tolist()}
        if metadata is not None:
            doc["metadata"] = metadata
        return json.dumps(doc, indent=2)


def _check_scale(scale: float) -> float:
    for s in (RAW_SCALE, UNIT_SCALE):
        if isclose(scale, s, rel_tol=1e-12):
            return s
    raise GraphError("scale must be 1 or 1/sqrt(2)")


def embed_graph(g: Graph, scale: float = RAW_SCALE) -> EmbeddedConfig:
    """One point scale * (e_i + e_j) per edge, in edge order."""
    scale = _check_scale(scale)
    X = np.zeros((g.m, g.n_vertices))
    for r, (i, j) in enumerate(g.edges):
        X[r, i] = X[r, j] = scale
    return EmbeddedConfig(X, scale, g)


# -- contraction of a disjoint-neighbourhood pair ---------------------------------


def contract_map(X: np.ndarray, i: int, j: int) -> np.ndarray:
    """x_i <- max(x_i, x_j), then x_j <- 0, applied to each row."""
    Y = np.array(X, dtype=float, copy=True)
    Y[..., i] = np.maximum(Y[..., i], Y[..., j])
    Y[..., j] = 0.0
    return Y


@dataclass
class Contraction:
    graph: Graph
    points: np.ndarray
    tree_points: Optional[np.ndarray]
    edge_map: dict[tuple[int, int], tuple[int, int]]


def contract_pair(config: EmbeddedConfig, i: int, j: int, tree_points: Optional[np.ndarray] = None) -> Contraction:
    """Merge vertex j into vertex i on the embedded points (and any tree points)."""
    g = config.source
    if config.source.closed_neighborhood(i) & config.source.closed_neighborhood(j):
        raise GraphError(f"vertices {i} and {j} have overlapping closed neighbourhoods")
    edge_map = {}
    for u, v in g.edges:
        if j in (u, v):
            k = u if v == j else v
            edge_map[(u, v)] = (min(i, k), max(i, k))
        else:
            edge_map[(u, v)] = (u, v)
    contracted = Graph(g.n_vertices, tuple(edge_map[e] for e in g.edges))
    return Contraction(
        contracted,
        contract_map(config.points, i, j),
        None if tree_points is None else contract_map(tree_points, i, j),
        edge_map,
    )


# -- graph enumeration -------------------------------------------------------------


def _key(g: nx.Graph) -> str:
    return nx.weisfeiler_lehman_graph_hash(g, iterations=3)


def graphs_with_edges(m: int) -> list[Graph]:
    """All graphs with ``m`` edges and no isolated vertex, one per isomorphism class.

    Built by adding one edge at a time (between old vertices, old and new,
    or two new vertices); classes are bucketed by Weisfeiler-Lehman hash
    and separated with an exact isomorphism test.
    """
    if m < 1:
        raise GraphError("m must be positive")
    layer = [nx.Graph([(0, 1)])]
    for _ in range(m - 1):
        buckets: dict[str, list[nx.Graph]] = {}
        for g in layer:
            n = g.number_of_nodes()
            candidates = [(u, v) for u, v in combinations(range(n), 2) if not g.has_edge(u, v)]
            candidates += [(u, n) for u in range(n)] + [(n, n + 1)]
            for u, v in candidates:
                h = g.copy()
                h.add_edge(u, v)
                bucket = buckets.setdefault(_key(h), [])
                if not any(nx.is_isomorphic(h, other) for other in bucket):
                    bucket.append(h)
        layer = [g for key in sorted(buckets) for g in buckets[key]]
    out = [Graph.from_edges(g.edges()) for g in layer]
    return sorted(out, key=lambda g: (g.n_vertices, g.edges))


# -- star scan --------------------------------------------------------------------------


@dataclass
class ScanRow:
    graph: Graph
    is_star: bool
    pruned_by: Optional[tuple[int, int]]
    diameter: float
    cost: Optional[float] = None

    @property
    def diameter_filter(self) -> bool:
        return self.diameter <= 2


@dataclass
class ScanReport:
    m: int
    rows: list[ScanRow]
    star_cost: float
    mst: float
    ties: list[Graph] = field(default_factory=list)
    violations: list[Graph] = field(default_factory=list)

    @property
    def star_is_min(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        lines = ["edges,n_vertices,star,pruned_by,diameter,cost,ratio"]
        for r in self.rows:
            edges = " ".join(f"{u}-{v}" for u, v in r.graph.edges)
            pruned = "" if r.pruned_by is None else f"{r.pruned_by[0]}-{r.pruned_by[1]}"
            cost = "" if r.cost is None else f"{r.cost:.9g}"
            ratio = "" if r.cost is None else f"{r.cost / self.mst:.9g}"
            lines.append(f"{edges},{r.graph.n_vertices},{int(r.is_star)},{pruned},{r.diameter:g},{cost},{ratio}")
        return "\n".join(lines) + "\n"


def _is_star(g: Graph) -> bool:
    return g.m >= 1 and any(len(g.neighbors(v)) == g.m for v in range(g.n_vertices))


def optimal_embedding_cost(g: Graph, workers: Optional[int] = None) -> float:
    """Exact Steiner tree cost of the scale-1 embedding of ``g``."""
    X = embed_graph(g).points
    if g.m == 1:
        return 0.0
    if g.m == 2:
        return float(np.linalg.norm(X[0] - X[1]))
    # The m points span at most m - 1 dimensions; solve in that affine frame.
    centred = X - X.mean(axis=0)
    _, sv, vt = np.linalg.svd(centred, full_matrices=False)
    rank = int(np.sum(sv > 1e-12 * max(sv.max(), 1.0)))
    reduced = centred @ vt[:rank].T if rank else centred[:, :1]
    return optimal_steiner_tree(reduced, workers=workers).cost


def conjecture3_scan(
    m: int, cap: int = DEFAULT_SCAN_CAP, solve_pruned: bool = False, workers: Optional[int] = None
) -> ScanReport:
    """Compare the star's embedding against every m-edge graph.

    Graphs with two vertices of disjoint closed neighbourhoods are pruned
    (contracting such a pair never lengthens a tree and gives another
    m-edge graph) unless ``solve_pruned`` is set. The diameter <= 2 filter
    is reported alongside but is not used for pruning.
    """
    if m < 3:
        raise GraphError("scan needs m >= 3")
    if m > cap:
        raise GraphError(f"m={m} exceeds the scan cap {cap}")
    rows = []
    for g in graphs_with_edges(m):
        pair = g.disjoint_closed_pair()
        row = ScanRow(g, _is_star(g), pair, g.diameter())
        if pair is None or solve_pruned:
            row.cost = optimal_embedding_cost(g, workers=workers)
        rows.append(row)
    star = next(r for r in rows if r.is_star)
    assert star.cost is not None
    tol = TIE_TOL * max(1.0, star.cost)
    solved = [r for r in rows if r.cost is not None and not r.is_star]
    ties = [r.graph for r in solved if abs(r.cost - star.cost) <= tol]  # type: ignore[operator]
    violations = [r.graph for r in solved if r.cost < star.cost - tol]  # type: ignore[operator]
    return ScanReport(m, rows, star.cost, mst_cost(embed_graph(star.graph).points), ties, violations)


# -- reduction instances --------------------------------------------------------------------


@dataclass
class ReductionInstance:
    config: EmbeddedConfig
    m: int
    graph: Graph
    certificate: str = "triangle-free"

    def metadata(self) -> dict:
        return {
            "source_edges": [list(e) for e in self.graph.edges],
            "n_vertices": self.graph.n_vertices,
            "m": self.m,
            "scale": self.config.scale,
            "certificate": self.certificate,
        }

    def to_json(self) -> str:
        return self.config.to_json(self.metadata())


def make_reduction_instance(g: Graph) -> ReductionInstance:
    tri = g.triangle()
    if tri is not None:
        raise TriangleError(tri)
    return ReductionInstance(embed_graph(g, UNIT_SCALE), g.m, g)


@dataclass
class Violation:
    part: int
    edges: tuple[tuple[int, int], ...]
    distance: Optional[float]
    reason: str


@dataclass
class PartitionCheck:
    cover: Optional[list[int]] = None
    violation: Optional[Violation] = None

    @property
    def ok(self) -> bool:
        return self.violation is None


def _check_partition(instance: ReductionInstance, partition: Sequence[Iterable[int]]) -> list[list[int]]:
    parts = [sorted(int(x) for x in p) for p in partition]
    flat = [x for p in parts for x in p]
    if any(not p for p in parts):
        raise GraphError("partition has an empty part")
    if len(flat) != len(set(flat)) or set(flat) != set(range(instance.m)):
        raise GraphError("partition must cover every point index exactly once")
    return parts


def partition_to_cover(instance: ReductionInstance, partition: Sequence[Iterable[int]]) -> PartitionCheck:
    """Vertex cover induced by a partition of the points into unit simplices.

    Every pair of points in a part must be at distance 1 (their edges share
    a vertex); in a triangle-free graph all edges of a part then share one
    common vertex, and these vertices form a cover.
    """
    parts = _check_partition(instance, partition)
    X = instance.config.points
    edges = instance.graph.edges
    cover = set()
    for idx, part in enumerate(parts):
        for a, b in combinations(part, 2):
            dist = float(np.linalg.norm(X[a] - X[b]))
            if not set(edges[a]) & set(edges[b]):
                return PartitionCheck(violation=Violation(
                    idx, (edges[a], edges[b]), dist,
                    f"disjoint edges sit at distance {dist:.9g} != 1, not a unit simplex"))
        common = set(edges[part[0]])
        for a in part[1:]:
            common &= set(edges[a])
        if not common:
            return PartitionCheck(violation=Violation(
                idx, tuple(edges[a] for a in part[:3]), None, "pairwise-adjacent edges with no common vertex"))
        cover.add(min(common))
    return PartitionCheck(cover=sorted(cover))


def cover_to_partition(instance: ReductionInstance, cover: Iterable[int]) -> list[list[int]]:
    """Assign each edge to its lowest-index covering vertex; one part per used vertex."""
    cover = set(cover)
    groups: dict[int, list[int]] = {}
    for idx, (u, v) in enumerate(instance.graph.edges):
        hits = [w for w in (u, v) if w in cover]
        if not hits:
            raise NotACoverError((u, v))
        groups.setdefault(min(hits), []).append(idx)
    return [groups[v] for v in sorted(groups)]


def random_triangle_free(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Random graph on ``n`` vertices keeping each candidate edge unless it closes a triangle."""
    adj: dict[int, set[int]] = {v: set() for v in range(n)}
    edges = []
    for u, v in combinations(range(n), 2):
        if rng.random() < p and not adj[u] & adj[v]:
            adj[u].add(v)
            adj[v].add(u)
            edges.append((u, v))
    return Graph(n, tuple(edges))
