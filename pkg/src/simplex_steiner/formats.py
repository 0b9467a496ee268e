"""JSON formats for point sets and trees."""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .solver import SteinerTree
from .topology import Topology


class FormatError(ValueError):
    pass


def points_to_dict(points: np.ndarray, metadata: dict | None = None) -> dict:
    P = np.asarray(points, dtype=float)
    doc: dict[str, Any] = {"dim": int(P.shape[1]), "points": P.tolist()}
    if metadata is not None:
        doc["metadata"] = metadata
    return doc


def points_from_dict(doc: Any) -> np.ndarray:
    if not isinstance(doc, dict) or "points" not in doc:
        raise FormatError("point set needs a 'points' array")
    try:
        P = np.array(doc["points"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad point coordinates: {exc}") from None
    if P.ndim != 2 or P.shape[0] == 0:
        raise FormatError("'points' must be a non-empty list of equal-length lists")
    if "dim" in doc and int(doc["dim"]) != P.shape[1]:
        raise FormatError(f"'dim' is {doc['dim']} but points have {P.shape[1]} coordinates")
    if not np.all(np.isfinite(P)):
        raise FormatError("coordinates must be finite")
    return P


def load_points(text: str) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return points_from_dict(doc)


def tree_to_dict(t: SteinerTree) -> dict:
    top = t.topology
    nodes = []
    for v in range(top.n_nodes):
        node: dict[str, Any] = {"name": top.name(v), "position": t.positions[v].tolist()}
        if t.labels is not None:
            node["label"] = t.labels[v]
        nodes.append(node)
    return {
        "dim": t.dim,
        "n_terminals": top.n_terminals,
        "n_steiner": top.n_steiner,
        "nodes": nodes,
        "edges": [[top.name(u), top.name(v)] for u, v in top.edges],
        "cost": t.cost,
        "converged": bool(t.converged),
        "residual": float(t.residual),
    }


def _node_id(name: str, n_terminals: int) -> int:
    kind, idx = name[:1], name[1:]
    if kind not in ("T", "S") or not idx.isdigit():
        raise FormatError(f"bad node name {name!r}")
    return int(idx) + (0 if kind == "T" else n_terminals)


def tree_from_dict(doc: Any) -> SteinerTree:
    try:
        n = int(doc["n_terminals"])
        k = int(doc["n_steiner"])
        nodes = doc["nodes"]
        edges = tuple((_node_id(u, n), _node_id(v, n)) for u, v in doc["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed tree document: {exc}") from None
    if len(nodes) != n + k:
        raise FormatError("node count does not match n_terminals + n_steiner")
    positions = np.zeros((n + k, len(nodes[0]["position"])))
    labels = []
    for node in nodes:
        v = _node_id(node["name"], n)
        if not 0 <= v < n + k:
            raise FormatError(f"node {node['name']} out of range")
        positions[v] = node["position"]
        labels.append((v, node.get("label")))
    label_map = dict(labels)
    has_labels = all(label_map.get(v) is not None for v in range(n + k))
    try:
        topology = Topology(n, k, edges)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return SteinerTree.from_positions(
        topology,
        positions,
        converged=bool(doc.get("converged", True)),
        residual=float(doc.get("residual", 0.0)),
        labels=tuple(label_map[v] for v in range(n + k)) if has_labels else None,
    )


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load_tree(text: str) -> SteinerTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from None
    return tree_from_dict(doc)
