"""Relatively minimal trees for a fixed topology and exhaustive exact search.

``relatively_minimal`` runs cyclic Fermat sweeps: every Steiner node is
moved to the Fermat point of its three current neighbours, which never
increases the length. Sweeps can stall when adjacent Steiner nodes
collapse onto one another, so a smoothed majorise-minimise pass (edge
lengths replaced by sqrt(l^2 + eps^2), eps shrinking to 1e-8) followed by
an exact pass on the tree with collapsed edges contracted is used to
escape such points before sweeping again.

``optimal_steiner_tree`` screens every full topology with the same
smoothed pass vectorised over topologies, then polishes the near-best
ones with ``relatively_minimal``.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .geometry import DimensionError, fermat_of
from .topology import DEFAULT_ENUM_CAP, Topology, TopologyError, enumerate_full_topologies

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 100_000
COLLAPSE_TOL = 1e-9
TIE_TOL = 1e-9
JITTER = 1e-6
# Below ~1e-9 the weighted systems are too ill-conditioned to help.
EPS_SCHEDULE = tuple(10.0**-e for e in range(3, 9))
# Topologies whose screened cost is within this relative gap of the best are polished.
POLISH_GAP = 1e-4
WORKERS_ENV = "SIMPLEX_STEINER_WORKERS"


class SolverError(ValueError):
    pass


@dataclass
class SteinerTree:
    topology: Topology
    positions: np.ndarray
    cost: float
    converged: bool = True
    residual: float = 0.0
    collapsed: tuple[tuple[int, int], ...] = ()
    history: list[float] = field(default_factory=list, repr=False)
    # Optional display names per node (binary labels in constructions).
    labels: Optional[tuple[str, ...]] = None

    @classmethod
    def from_positions(cls, topology: Topology, positions, **kw) -> "SteinerTree":
        X = np.array(positions, dtype=float)
        if X.ndim != 2 or X.shape[0] != topology.n_nodes:
            raise DimensionError("need one position row per topology node")
        return cls(topology, X, tree_cost(topology, X), **kw)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def terminals(self) -> np.ndarray:
        return self.positions[: self.topology.n_terminals]

    def edge_length(self, u: int, v: int) -> float:
        return float(np.linalg.norm(self.positions[u] - self.positions[v]))

    def edge_lengths(self) -> dict[tuple[int, int], float]:
        return {e: self.edge_length(*e) for e in self.topology.edges}

    def name(self, v: int) -> str:
        if self.labels is not None:
            return self.labels[v]
        return self.topology.name(v)

    def recompute_cost(self) -> float:
        return tree_cost(self.topology, self.positions)


def tree_cost(topology: Topology, X: np.ndarray) -> float:
    e = np.asarray(topology.edges)
    return float(np.linalg.norm(X[e[:, 0]] - X[e[:, 1]], axis=1).sum())


def _as_terminal_array(terminals) -> np.ndarray:
    P = np.array(terminals, dtype=float)
    if P.ndim != 2:
        raise DimensionError("terminals must be a list of equal-dimension points")
    if not np.all(np.isfinite(P)):
        raise ValueError("terminal coordinates must be finite")
    return P


def initial_positions(P: np.ndarray, n_steiner: int) -> np.ndarray:
    """Centroid plus a deterministic 1e-6 jitter seeded by the node index."""
    centroid = P.mean(axis=0)
    rows = []
    for j in range(n_steiner):
        v = np.random.default_rng(j).standard_normal(P.shape[1])
        rows.append(centroid + JITTER * v / np.linalg.norm(v))
    return np.array(rows).reshape(n_steiner, P.shape[1])


# -- smoothed majorise-minimise, vectorised over topologies ------------------


class _Batch:
    """Edge incidence of several topologies sharing (n_terminals, n_steiner)."""

    def __init__(self, topologies: Sequence[Topology]):
        self.n = topologies[0].n_terminals
        self.k = topologies[0].n_steiner
        self.B = len(topologies)
        E = np.array([t.edges for t in topologies], dtype=np.int64)  # (B, m, 2)
        self.u, self.v = E[..., 0], E[..., 1]
        n, k = self.n, self.k
        b = np.repeat(np.arange(self.B), E.shape[1]).reshape(self.u.shape)
        u_st, v_st = self.u >= n, self.v >= n
        ss = u_st & v_st
        ts = ~u_st & v_st  # edges are sorted so a terminal is always ``u``
        if np.any(~u_st & ~v_st):
            raise TopologyError("terminal-terminal edges are not supported in batch mode")
        self.ss, self.ts = ss, ts
        a, c = self.u - n, self.v - n
        base = b * k * k
        # diagonal, then off-diagonal contributions to the k x k system
        self.diag_u = (base + a * k + a)[ss]
        self.diag_v = base + c * k + c
        self.off1 = (base + a * k + c)[ss]
        self.off2 = (base + c * k + a)[ss]
        self.rhs_idx = (b * k * n + c * n + self.u)[ts]

    def solve_step(self, Y: np.ndarray, P: np.ndarray, eps: float) -> np.ndarray:
        B, k, n = self.B, self.k, self.n
        diff = Y[np.arange(B)[:, None], self.u] - Y[np.arange(B)[:, None], self.v]
        w = 1.0 / np.sqrt(np.einsum("bed,bed->be", diff, diff) + eps * eps)
        size = B * k * k
        A = np.bincount(self.diag_v.ravel(), w.ravel(), size)
        A += np.bincount(self.diag_u, w[self.ss], size)
        A -= np.bincount(self.off1, w[self.ss], size)
        A -= np.bincount(self.off2, w[self.ss], size)
        W = np.bincount(self.rhs_idx, w[self.ts], B * k * n).reshape(B, k, n)
        X = np.linalg.solve(A.reshape(B, k, k), W @ P)
        return X

    def costs(self, Y: np.ndarray) -> np.ndarray:
        B = self.B
        diff = Y[np.arange(B)[:, None], self.u] - Y[np.arange(B)[:, None], self.v]
        return np.linalg.norm(diff, axis=2).sum(axis=1)


def smoothed_descent(
    P: np.ndarray,
    topologies: Sequence[Topology],
    X0: Optional[np.ndarray] = None,
    eps_schedule: Sequence[float] = EPS_SCHEDULE,
    max_iter: int = 500,
) -> np.ndarray:
    """Steiner positions (B, k, d) after eps-continuation MM on every topology."""
    batch = _Batch(topologies)
    n, k, d = batch.n, batch.k, P.shape[1]
    X = np.broadcast_to(initial_positions(P, k), (batch.B, k, d)).copy() if X0 is None else np.array(X0)
    scale = float(np.ptp(P, axis=0).max()) or 1.0
    for eps in eps_schedule:
        eps *= scale
        active = np.arange(batch.B)
        for _ in range(max_iter):
            if active.size == 0:
                break
            sub = batch if active.size == batch.B else _subset(batch, active)
            Y = np.concatenate([np.broadcast_to(P, (active.size, n, d)), X[active]], axis=1)
            Xn = sub.solve_step(Y, P, eps)
            move = np.abs(Xn - X[active]).max(axis=(1, 2))
            X[active] = Xn
            active = active[move > 1e-3 * eps]
    return X


def _subset(batch: _Batch, idx: np.ndarray) -> _Batch:
    sub = object.__new__(_Batch)
    sub.n, sub.k, sub.B = batch.n, batch.k, idx.size
    sub.u, sub.v = batch.u[idx], batch.v[idx]
    sub.ss, sub.ts = batch.ss[idx], batch.ts[idx]
    k, n = batch.k, batch.n
    b = np.repeat(np.arange(idx.size), batch.u.shape[1]).reshape(sub.u.shape)
    a, c = sub.u - n, sub.v - n
    base = b * k * k
    sub.diag_u = (base + a * k + a)[sub.ss]
    sub.diag_v = base + c * k + c
    sub.off1 = (base + a * k + c)[sub.ss]
    sub.off2 = (base + c * k + a)[sub.ss]
    sub.rhs_idx = (b * k * n + c * n + sub.u)[sub.ts]
    return sub


# -- Fermat sweeps -----------------------------------------------------------


def _sweep(Y: np.ndarray, t: Topology) -> float:
    """One in-place cyclic pass; returns the largest displacement."""
    moved = 0.0
    adj = t.adjacency
    for s in t.steiner_nodes:
        nb = adj[s]
        if len(nb) != 3:
            raise TopologyError(f"Steiner node {t.name(s)} has degree {len(nb)}")
        new = fermat_of(Y[nb[0]], Y[nb[1]], Y[nb[2]])
        moved = max(moved, float(np.abs(new - Y[s]).max()))
        Y[s] = new
    return moved


def _collapsed_edges(t: Topology, Y: np.ndarray, tol: float) -> tuple[tuple[int, int], ...]:
    return tuple(
        (u, v)
        for u, v in t.edges
        if not t.is_terminal(u) or not t.is_terminal(v)
        if np.linalg.norm(Y[u] - Y[v]) < tol
    )


def _clusters(t: Topology, Y: np.ndarray, tol: float) -> list[int]:
    """Union-find representative per node after merging edges shorter than ``tol``.

    Terminals are preferred as representatives so a cluster holding one
    stays pinned to it.
    """
    rep = list(range(t.n_nodes))

    def find(x: int) -> int:
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for u, v in t.edges:
        if np.linalg.norm(Y[u] - Y[v]) < tol:
            ru, rv = find(u), find(v)
            if ru == rv:
                continue
            if t.is_terminal(ru) and t.is_terminal(rv):
                continue  # two terminals are never merged
            if t.is_terminal(rv) or (not t.is_terminal(ru) and rv < ru):
                ru, rv = rv, ru
            rep[rv] = ru
    return [find(v) for v in range(t.n_nodes)]


def _contracted_mm(P: np.ndarray, t: Topology, Y: np.ndarray, tol: float, max_iter: int = 2000) -> np.ndarray:
    """Unsmoothed MM on the tree with edges shorter than ``tol`` contracted."""
    root = _clusters(t, Y, tol)
    free = sorted({r for r in root if not t.is_terminal(r)})
    if not free:
        return np.array([Y[r] for r in root])
    slot = {r: i for i, r in enumerate(free)}
    f, n = len(free), t.n_terminals
    # Node index space for the reduced problem: terminals 0..n-1, clusters n..n+f-1.
    idx = lambda r: r if t.is_terminal(r) else n + slot[r]
    pairs = np.array([(idx(root[u]), idx(root[v])) for u, v in t.edges if root[u] != root[v]])
    a, b = pairs[:, 0], pairs[:, 1]
    Z = np.vstack([P, [Y[r] for r in free]])
    for _ in range(max_iter):
        w = 1.0 / np.maximum(np.linalg.norm(Z[a] - Z[b], axis=1), 1e-300)
        # weighted graph Laplacian restricted to the free rows
        L = np.zeros((n + f, n + f))
        np.add.at(L, (a, a), w)
        np.add.at(L, (b, b), w)
        np.add.at(L, (a, b), -w)
        np.add.at(L, (b, a), -w)
        Zf = np.linalg.solve(L[n:, n:], -L[n:, :n] @ P)
        move = np.abs(Zf - Z[n:]).max()
        Z[n:] = Zf
        if move <= 1e-15 * (1.0 + np.abs(Zf).max()):
            break
    return np.array([Z[idx(r)] for r in root])


def _escape(P: np.ndarray, t: Topology, Y: np.ndarray, scale: float) -> np.ndarray:
    Xs = smoothed_descent(P, [t], Y[None, t.n_terminals:])[0]
    best = np.vstack([P, Xs])
    Yc = best
    for _ in range(3):
        Yc = _contracted_mm(P, t, Yc, 1e-6 * scale)
        if tree_cost(t, Yc) > tree_cost(t, best):
            break
        best = Yc
    return best


def relatively_minimal(
    terminals,
    t: Topology,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = MAX_SWEEPS,
    init: Optional[np.ndarray] = None,
) -> SteinerTree:
    """Minimum-length tree with topology ``t`` and the terminals held fixed."""
    P = _as_terminal_array(terminals)
    if P.shape[0] != t.n_terminals:
        raise TopologyError(f"{P.shape[0]} terminals for a topology with {t.n_terminals}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = float(np.ptp(P, axis=0).max()) or 1.0
    X = initial_positions(P, t.n_steiner) if init is None else np.array(init, dtype=float)
    Y = np.vstack([P, X])
    cost = tree_cost(t, Y)
    history = [cost]
    converged = False
    residual = np.inf
    escapes = 0
    sweeps = 0
    while sweeps < max_sweeps:
        moved = _sweep(Y, t)
        sweeps += 1
        new_cost = tree_cost(t, Y)
        residual = (cost - new_cost) / max(cost, 1e-300)
        cost = new_cost
        history.append(cost)
        if residual < tol and moved <= 1e-14 * scale:
            converged = True
        elif residual < tol and sweeps % 64 == 0 and moved <= 1e-10 * scale:
            # sub-ulp cost changes while positions still creep
            converged = True
        if not converged:
            continue
        short = _collapsed_edges(t, Y, 1e-6 * scale)
        if not short or escapes >= 1:
            break
        # A near-collapse may be a sweep stall; try the smoothed pass.
        escapes += 1
        Ys = _escape(P, t, Y, scale)
        trial = tree_cost(t, Ys)
        if trial < cost * (1 - 1e-15):
            Y, cost = Ys, trial
            history.append(cost)
            converged = False
        else:
            break
    return SteinerTree(
        t,
        Y,
        tree_cost(t, Y),
        converged=converged,
        residual=float(max(residual, 0.0)),
        collapsed=_collapsed_edges(t, Y, COLLAPSE_TOL * scale),
        history=history,
    )


# -- exhaustive search --------------------------------------------------------


@dataclass
class SolveReport:
    best: SteinerTree
    topologies: list[Topology]
    all_costs: dict[int, float]
    ties: list[int]
    best_id: int

    @property
    def cost(self) -> float:
        return self.best.cost


def _polish(args) -> SteinerTree:
    P, t, X0, tol = args
    return relatively_minimal(P, t, tol=tol, init=X0)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def optimal_steiner_tree(
    terminals,
    cap: int = DEFAULT_ENUM_CAP,
    tol: float = DEFAULT_TOL,
    workers: Optional[int] = None,
    chunk: int = 4096,
) -> SolveReport:
    """Exact Steiner minimal tree by solving every full topology."""
    P = _as_terminal_array(terminals)
    n = P.shape[0]
    if n < 3:
        raise SolverError("exact search needs at least 3 terminals")
    if n > cap:
        raise SolverError(f"{n} terminals exceeds the exact-search cap {cap}")
    topologies = enumerate_full_topologies(n, cap=cap)
    positions = np.concatenate(
        [smoothed_descent(P, topologies[i : i + chunk]) for i in range(0, len(topologies), chunk)]
    )
    k = n - 2
    screened = np.array(
        [tree_cost(t, np.vstack([P, positions[i]])) for i, t in enumerate(topologies)]
    )
    cut = screened.min() * (1 + POLISH_GAP)
    candidates = [i for i in np.argsort(screened, kind="stable") if screened[i] <= cut]
    jobs = [(P, topologies[i], positions[i].reshape(k, -1), tol) for i in candidates]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            polished = list(pool.map(_polish, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        polished = [_polish(j) for j in jobs]
    all_costs = {i: float(c) for i, c in enumerate(screened)}
    trees = {}
    for i, tree in zip(candidates, polished):
        all_costs[int(i)] = min(all_costs[int(i)], tree.cost)
        trees[int(i)] = tree
    best_cost = min(all_costs.values())
    ties = sorted(
        (i for i, c in all_costs.items() if c <= best_cost + TIE_TOL * max(1.0, best_cost)),
        key=lambda i: topologies[i].canonical,
    )
    best_id = ties[0]
    best = trees.get(best_id)
    if best is None:  # cannot happen: the best screened topology is always polished
        best = relatively_minimal(P, topologies[best_id], tol=tol)
    return SolveReport(best, topologies, all_costs, ties, best_id)


def mst_cost(points) -> float:
    P = _as_terminal_array(points)
    if P.shape[0] < 2:
        raise SolverError("MST needs at least two points")
    D = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
    return float(minimum_spanning_tree(D).sum())


def steiner_ratio(points, **kw) -> float:
    return optimal_steiner_tree(points, **kw).cost / mst_cost(points)


def regular_simplex(d: int) -> np.ndarray:
    """The regular d-simplex as the standard basis of R^d (side sqrt 2)."""
    if d < 1:
        raise ValueError("d must be positive")
    return np.eye(d)
