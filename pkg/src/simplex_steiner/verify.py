"""Checkers for the necessary conditions on optimal Steiner trees.

Each check returns a :class:`CheckResult`. A check only reports ``fail``
together with at least one concrete witness (node, measured value, bound).
Every tolerance is an explicit keyword argument; nothing else is fuzzed.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .geometry import _angle_between, in_convex_hull
from .solver import SteinerTree

ANGLE_TOL_DEG = 1e-7
LENGTH_TOL = 1e-9
COPLANAR_TOL = 1e-8
FACE_TOL = 1e-7
EDGE_BOUND_FACTOR = np.sqrt(6.0) / 2.0 - 1.0
ORPHAN_BOUND = 1.0 / np.sqrt(3.0)

PASS, FAIL, NA = "pass", "fail", "n/a"


@dataclass
class CheckResult:
    name: str
    status: str
    witnesses: list[dict] = field(default_factory=list)
    tolerances: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.status == FAIL and not self.witnesses:
            raise ValueError(f"{self.name}: a failing check needs a witness")

    @property
    def passed(self) -> bool:
        return self.status == PASS


def _result(name: str, witnesses: list[dict], tolerances: dict, notes=None) -> CheckResult:
    return CheckResult(name, FAIL if witnesses else PASS, witnesses, tolerances, list(notes or []))


@dataclass
class VerificationReport:
    checks: dict[str, CheckResult] = field(default_factory=dict)

    def add(self, result: CheckResult) -> None:
        self.checks[result.name] = result

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks.values())

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": {k: asdict(v) for k, v in self.checks.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=float)

    def to_text(self) -> str:
        lines = []
        for c in self.checks.values():
            line = f"{c.name:<24} {c.status}"
            if c.witnesses:
                line += f"  ({len(c.witnesses)} witness{'es' if len(c.witnesses) > 1 else ''}; first: {c.witnesses[0]})"
            elif c.notes:
                line += f"  [{c.notes[0]}]"
            lines.append(line)
        return "\n".join(lines)


# -- helpers ---------------------------------------------------------------


def _clusters(t: SteinerTree, tol: float) -> list[int]:
    """Representative per node after merging edges shorter than ``tol``."""
    rep = list(range(t.topology.n_nodes))

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for u, v in t.topology.edges:
        if t.edge_length(u, v) < tol:
            ru, rv = find(u), find(v)
            if ru != rv:
                rep[max(ru, rv)] = min(ru, rv)
    return [find(v) for v in range(t.topology.n_nodes)]


def _cluster_neighbors(t: SteinerTree, tol: float) -> dict[int, set[int]]:
    root = _clusters(t, tol)
    nbrs: dict[int, set[int]] = {r: set() for r in set(root)}
    for u, v in t.topology.edges:
        if root[u] != root[v]:
            nbrs[root[u]].add(root[v])
            nbrs[root[v]].add(root[u])
    return nbrs


def min_included_angles(t: SteinerTree, length_tol: float = LENGTH_TOL) -> dict[int, float]:
    """Smallest included angle (degrees) at each node of the collapsed tree."""
    X = t.positions
    out = {}
    for v, nb in _cluster_neighbors(t, length_tol).items():
        if len(nb) < 2:
            continue
        out[v] = min(
            float(np.degrees(_angle_between(X[a] - X[v], X[b] - X[v])))
            for a, b in combinations(sorted(nb), 2)
        )
    return out


def _is_basis_simplex(t: SteinerTree, tol: float = 1e-12) -> bool:
    P = t.terminals
    return P.shape[0] == P.shape[1] and np.allclose(P, np.eye(P.shape[0]), atol=tol, rtol=0)


# -- checks ----------------------------------------------------------------


def check_angles(t: SteinerTree, tol_deg: float = ANGLE_TOL_DEG, length_tol: float = LENGTH_TOL) -> CheckResult:
    """Every pair of edges at a common node includes at least 120 degrees."""
    X = t.positions
    witnesses = []
    for v, nb in _cluster_neighbors(t, length_tol).items():
        for a, b in combinations(sorted(nb), 2):
            ang = float(np.degrees(_angle_between(X[a] - X[v], X[b] - X[v])))
            if ang < 120.0 - tol_deg:
                witnesses.append(
                    {"node": t.name(v), "edges": [t.name(a), t.name(b)], "angle": ang, "bound": 120.0}
                )
    return _result("angles", witnesses, {"angle_deg": tol_deg, "length": length_tol})


def check_steiner_structure(t: SteinerTree, coplanar_tol: float = COPLANAR_TOL) -> CheckResult:
    """Steiner nodes have degree 3 and coplanar incident edges."""
    witnesses = []
    X = t.positions
    for s in t.topology.steiner_nodes:
        nb = t.topology.adjacency[s]
        if len(nb) != 3:
            witnesses.append({"node": t.name(s), "degree": len(nb), "bound": 3})
            continue
        dirs = [X[w] - X[s] for w in nb]
        dirs = [u / np.linalg.norm(u) for u in dirs if np.linalg.norm(u) > 0]
        if len(dirs) < 3:
            continue
        sv = np.linalg.svd(np.array(dirs), compute_uv=False)
        if sv[2] > coplanar_tol:
            witnesses.append({"node": t.name(s), "third_singular_value": float(sv[2]), "bound": coplanar_tol})
    return _result("steiner_structure", witnesses, {"coplanar": coplanar_tol})


def check_coordinate_bounds(t: SteinerTree, margin: float = LENGTH_TOL) -> CheckResult:
    """Steiner coordinates lie strictly inside the terminal coordinate ranges."""
    P = t.terminals
    lo, hi = P.min(axis=0), P.max(axis=0)
    notes = [f"coordinate {i} constant over terminals; skipped" for i in np.flatnonzero(hi - lo <= margin)]
    live = hi - lo > margin
    witnesses = []
    for s in t.topology.steiner_nodes:
        x = t.positions[s]
        if np.min(np.linalg.norm(P - x, axis=1)) < margin:
            notes.append(f"{t.name(s)} coincides with a terminal; skipped")
            continue
        bad = live & ~((x > lo + margin) & (x < hi - margin))
        for i in np.flatnonzero(bad):
            witnesses.append(
                {"node": t.name(s), "coordinate": int(i), "value": float(x[i]), "range": [float(lo[i]), float(hi[i])]}
            )
    return _result("coordinate_bounds", witnesses, {"margin": margin}, notes)


def check_edge_bound(t: SteinerTree, tol: float = LENGTH_TOL) -> CheckResult:
    """Steiner-Steiner edges are at least (sqrt6/2 - 1) times the shortest outward edge."""
    top = t.topology
    ss = [(u, v) for u, v in top.edges if not top.is_terminal(u) and not top.is_terminal(v)]
    tols = {"length": tol, "factor": float(EDGE_BOUND_FACTOR)}
    if not ss:
        return CheckResult("edge_bound", NA, tolerances=tols, notes=["no Steiner-Steiner edge"])
    if t.dim < 3:
        return CheckResult("edge_bound", NA, tolerances=tols, notes=["dimension below 3"])
    witnesses = []
    for u, v in ss:
        outward = [t.edge_length(u, w) for w in top.adjacency[u] if w != v]
        outward += [t.edge_length(v, w) for w in top.adjacency[v] if w != u]
        L0 = min(outward)
        length = t.edge_length(u, v)
        bound = EDGE_BOUND_FACTOR * L0
        if length < bound - tol:
            witnesses.append(
                {"edge": [t.name(u), t.name(v)], "length": length, "L0": L0, "bound": float(bound)}
            )
    return _result("edge_bound", witnesses, tols)


def check_leaf_condition(points, t: SteinerTree, tol: float = LENGTH_TOL) -> CheckResult:
    """Coordinatewise extremal terminals are leaves (after collapsing zero-length edges)."""
    P = np.asarray(points, dtype=float)
    lo, hi = P.min(axis=0), P.max(axis=0)
    extremal = [
        i for i, p in enumerate(P) if np.all((np.abs(p - lo) <= tol) | (np.abs(p - hi) <= tol))
    ]
    if not extremal:
        return CheckResult("leaf_condition", NA, tolerances={"length": tol},
                           notes=["no coordinatewise extremal terminal"])
    root = _clusters(t, tol)
    nbrs = _cluster_neighbors(t, tol)
    witnesses = []
    for i in extremal:
        # terminal i of ``points`` is node i of the tree
        deg = len(nbrs[root[i]])
        if deg != 1:
            witnesses.append({"terminal": t.name(i), "degree": deg, "bound": 1})
    return _result("leaf_condition", witnesses, {"length": tol})


def check_orphan_bound(t: SteinerTree, tol: float = LENGTH_TOL) -> CheckResult:
    """On the basis-vector simplex every terminal edge is longer than 1/sqrt(3)."""
    tols = {"length": tol, "bound": float(ORPHAN_BOUND)}
    if not _is_basis_simplex(t):
        return CheckResult("orphan_bound", NA, tolerances=tols, notes=["terminals are not the standard basis"])
    top = t.topology
    witnesses = []
    for u, v in top.edges:
        if top.is_terminal(u) and not top.is_terminal(v):
            length = t.edge_length(u, v)
            if not length > ORPHAN_BOUND - tol:
                witnesses.append({"edge": [t.name(u), t.name(v)], "length": length, "bound": float(ORPHAN_BOUND)})
    return _result("orphan_bound", witnesses, tols)


def check_hull_containment(t: SteinerTree, tol: float = LENGTH_TOL) -> CheckResult:
    """Every Steiner point lies in the convex hull of the terminals."""
    P = t.terminals
    witnesses = [
        {"node": t.name(s), "bound": "conv(terminals)"}
        for s in t.topology.steiner_nodes
        if not in_convex_hull(t.positions[s], P, tol)
    ]
    return _result("hull_containment", witnesses, {"residual": tol})


def face_intersections(t: SteinerTree, tol: float = FACE_TOL) -> CheckResult:
    """Diagnostic for basis simplices: rays extending the other two edges of the
    Steiner point next to e_i leave the simplex through the face x_i = 0."""
    if not _is_basis_simplex(t):
        return CheckResult("face_intersections", NA, tolerances={"coordinate": tol},
                           notes=["terminals are not the standard basis"])
    top, X = t.topology, t.positions
    witnesses = []
    for i in range(top.n_terminals):
        for s in top.adjacency[i]:
            if top.is_terminal(s):
                continue
            for w in top.adjacency[s]:
                if w == i:
                    continue
                direction = X[w] - X[s]
                if not np.any(direction):
                    continue
                neg = direction < 0
                if not np.any(neg):
                    continue
                step = np.min(-X[s][neg] / direction[neg])
                exit_point = X[s] + step * direction
                if abs(exit_point[i]) > tol:
                    witnesses.append(
                        {"terminal": t.name(i), "steiner": t.name(s), "through": t.name(w),
                         "exit_coordinate": float(exit_point[i]), "bound": 0.0}
                    )
    return _result("face_intersections", witnesses, {"coordinate": tol})


def check_candidate(
    t: SteinerTree, tol_deg: float = ANGLE_TOL_DEG, coplanar_tol: float = COPLANAR_TOL
) -> VerificationReport:
    report = VerificationReport()
    report.add(check_angles(t, tol_deg))
    report.add(check_steiner_structure(t, coplanar_tol))
    return report


def verify_tree(t: SteinerTree, points: Optional[np.ndarray] = None) -> VerificationReport:
    """All applicable checks with default tolerances."""
    points = t.terminals if points is None else np.asarray(points, dtype=float)
    report = check_candidate(t)
    for res in (
        check_coordinate_bounds(t),
        check_edge_bound(t),
        check_leaf_condition(points, t),
        check_orphan_bound(t),
        check_hull_containment(t),
        face_intersections(t),
    ):
        report.add(res)
    return report
