"""Command-line front end: ``simplex-steiner <command> ...``.

Exit codes: 0 success, 1 validation failure (a witness is printed),
2 usage or I/O error. Human-readable numbers use 9 significant digits;
JSON output keeps full precision.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import formats
from .construct import (
    ConstructionError,
    iterate_double,
    pow2_simplex_tree,
    ratio_sequence,
    simplex_base_tree,
)
from .embed import (
    RAW_SCALE,
    UNIT_SCALE,
    Graph,
    GraphError,
    TriangleError,
    conjecture3_scan,
    embed_graph,
    make_reduction_instance,
)
from .solver import (
    DEFAULT_TOL,
    SolverError,
    default_workers,
    mst_cost,
    optimal_steiner_tree,
    relatively_minimal,
)
from .topology import (
    DEFAULT_ENUM_CAP,
    Topology,
    TopologyError,
    conjectured_topology,
    enumerate_full_topologies,
    good_tree,
    is_semi_regular,
    semi_regular_violation,
    terminal_wiener,
    topologies_by_shape,
)
from .verify import check_candidate, verify_tree

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: dict[str, Optional[str]] = field(default_factory=dict)
    output: Optional[str] = None
    report: Optional[str] = None
    tol: float = DEFAULT_TOL
    cap: int = DEFAULT_ENUM_CAP
    workers: int = 1

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        workers = getattr(args, "workers", None)
        return cls(
            command=args.command,
            inputs={k: getattr(args, k, None) for k in ("points", "topology", "tree", "graph", "base_file")},
            output=getattr(args, "output", None),
            report=getattr(args, "report", None),
            tol=getattr(args, "tol", None) or DEFAULT_TOL,
            cap=getattr(args, "cap", None) or DEFAULT_ENUM_CAP,
            workers=default_workers() if workers is None else workers,
        )


def g9(x: float) -> str:
    return f"{x:.9g}"


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _emit_tree(cfg: RunConfig, tree, report) -> None:
    if cfg.output:
        _write(cfg.output, formats.dumps(formats.tree_to_dict(tree)))
    if cfg.report:
        _write(cfg.report, report.to_json() + "\n")


def _summary(tree, report) -> str:
    ratio = tree.cost / mst_cost(tree.terminals)
    lines = [
        f"terminals  {tree.topology.n_terminals}",
        f"steiner    {tree.topology.n_steiner}",
        f"cost       {g9(tree.cost)}",
        f"mst        {g9(mst_cost(tree.terminals))}",
        f"ratio      {g9(ratio)}",
        f"converged  {tree.converged}",
        report.to_text(),
    ]
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------


def cmd_solve(args, cfg: RunConfig) -> int:
    P = formats.load_points(_read(args.points))
    if args.topology and args.exact:
        raise UsageError("--topology and --exact are mutually exclusive")
    if args.topology:
        top = Topology.from_text(_read(args.topology))
        if top.n_terminals != P.shape[0]:
            raise UsageError("topology terminal count does not match the point set")
        tree = relatively_minimal(P, top, tol=cfg.tol)
        extra = ""
    else:
        res = optimal_steiner_tree(P, cap=cfg.cap, tol=cfg.tol, workers=cfg.workers)
        tree = res.best
        extra = f"topologies {len(res.topologies)}\nties       {len(res.ties)}\n"
    report = verify_tree(tree)
    _emit_tree(cfg, tree, report)
    sys.stdout.write(extra + _summary(tree, report))
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_construct(args, cfg: RunConfig) -> int:
    if args.pow2 is not None:
        if args.base is not None or args.base_file or args.doublings:
            raise UsageError("--pow2 cannot be combined with a base or --doublings")
        steps = [f"closed form for the 2^{args.pow2}-simplex"]
        cand = pow2_simplex_tree(args.pow2)
    else:
        if (args.base is None) == (args.base_file is None):
            raise UsageError("give exactly one of --base, --base-file or --pow2")
        if args.base is not None:
            base = simplex_base_tree(args.base)
        else:
            base = formats.load_tree(_read(args.base_file))
        k = args.doublings or 0
        d = base.topology.n_terminals
        steps = [f"base d={d}"] + [f"doubling {i + 1} -> d={d * 2 ** (i + 1)}" for i in range(k)]
        try:
            cand = iterate_double(base, k)
        except ConstructionError as exc:
            sys.stderr.write(f"construction failed: {exc}\n")
            return EXIT_INVALID
    tree = cand.tree
    report = verify_tree(tree)
    _emit_tree(cfg, tree, report)
    out = [f"step       {s}" for s in steps]
    for i, m in enumerate(cand.margins):
        out.append(f"margin {i + 1}   {g9(min(m.values()))}")
    sys.stdout.write("\n".join(out) + "\n" + _summary(tree, report))
    return EXIT_OK if check_candidate(tree).passed and report.passed else EXIT_INVALID


def _default_l0(d: int) -> float:
    tree = simplex_base_tree(d)
    return tree.cost / mst_cost(tree.terminals)


def cmd_ratio(args, cfg: RunConfig) -> int:
    if args.d < 3:
        raise UsageError("--d must be at least 3")
    if args.k < 0:
        raise UsageError("--k must be non-negative")
    l0 = args.l0 if args.l0 is not None else _default_l0(args.d)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            seq = ratio_sequence(l0, args.d, args.k)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")
    _write(cfg.output, seq.to_csv())
    return EXIT_OK


def cmd_embed(args, cfg: RunConfig) -> int:
    if args.scan is not None:
        if args.reduce:
            raise UsageError("--scan and --reduce are mutually exclusive")
        try:
            rep = conjecture3_scan(args.scan, solve_pruned=args.solve_pruned, workers=cfg.workers)
        except GraphError as exc:
            raise UsageError(str(exc)) from None
        _write(cfg.output, rep.to_csv())
        sys.stderr.write(f"star cost {g9(rep.star_cost)}; ties: {[list(g.edges) for g in rep.ties]}\n")
        if rep.violations:
            sys.stderr.write(f"graphs beating the star: {[list(g.edges) for g in rep.violations]}\n")
            return EXIT_INVALID
        return EXIT_OK
    if args.graph is None:
        raise UsageError("a graph file is required unless --scan is given")
    try:
        g = Graph.from_text(_read(args.graph))
    except (GraphError, ValueError) as exc:
        raise UsageError(f"bad graph file: {exc}") from None
    if args.reduce:
        try:
            inst = make_reduction_instance(g)
        except TriangleError as exc:
            sys.stderr.write(f"not triangle-free: triangle {exc.triple}\n")
            return EXIT_INVALID
        _write(cfg.output, inst.to_json() + "\n")
        return EXIT_OK
    scale = UNIT_SCALE if args.scale == "unit" else RAW_SCALE
    conf = embed_graph(g, scale)
    _write(cfg.output, conf.to_json({"source_edges": [list(e) for e in g.edges], "scale": scale}) + "\n")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    tree = formats.load_tree(_read(args.tree))
    report = verify_tree(tree)
    if args.json:
        _write(cfg.output, report.to_json() + "\n")
    else:
        _write(cfg.output, report.to_text() + "\n")
    return EXIT_OK if report.passed else EXIT_INVALID


def cmd_topology(args, cfg: RunConfig) -> int:
    if args.action == "good-tree":
        gt = good_tree(args.n)
        _write(cfg.output, f"leaves {gt.n_leaves}\nheight {gt.height}\nshape {gt.root.shape}\n")
    elif args.action == "conjectured":
        _write(cfg.output, conjectured_topology(args.n).to_text())
    elif args.action == "enumerate":
        tops = enumerate_full_topologies(args.n, cap=cfg.cap)
        shapes = topologies_by_shape(tops)
        lines = [f"topologies {len(tops)}", f"shapes {len(shapes)}"]
        lines += [f"{len(v)} {k}" for k, v in sorted(shapes.items())]
        _write(cfg.output, "\n".join(lines) + "\n")
    elif args.action == "wiener":
        if args.file:
            top = Topology.from_text(_read(args.file))
        else:
            top = conjectured_topology(args.n)
        viol = semi_regular_violation(top) if top.is_full else None
        lines = [f"wiener {terminal_wiener(top)}"]
        if top.is_full:
            lines.append(f"semi_regular {is_semi_regular(top)}")
            if viol is not None:
                u, v, cu, cv = viol
                lines.append(f"violation {top.name(u)} {top.name(v)} {cu} {cv}")
        _write(cfg.output, "\n".join(lines) + "\n")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simplex-steiner", description="Steiner trees on regular simplices.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, output_help="write the main output here instead of stdout"):
        sp.add_argument("-o", "--output", help=output_help)
        sp.add_argument("--workers", type=int, default=None, help="worker processes (default: $SIMPLEX_STEINER_WORKERS or 1)")

    s = sub.add_parser("solve", help="Steiner tree of a point set")
    s.add_argument("points", help="JSON point set {\"dim\": d, \"points\": [...]}")
    s.add_argument("--topology", help="solve this fixed topology (text format)")
    s.add_argument("--exact", action="store_true", help="search all full topologies (default)")
    s.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.add_argument("--report", help="write the verification report as JSON")
    common(s, "write the tree as JSON")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("construct", help="doubling and closed-form simplex trees")
    c.add_argument("--base", type=int, help="start from the tree on the regular d-simplex")
    c.add_argument("--base-file", help="start from a tree JSON on the basis simplex")
    c.add_argument("--doublings", type=int, default=0)
    c.add_argument("--pow2", type=int, help="closed-form tree on the 2^k-simplex")
    c.add_argument("--report", help="write the verification report as JSON")
    common(c, "write the tree as JSON")
    c.set_defaults(func=cmd_construct)

    r = sub.add_parser("ratio", help="ratio sequence under repeated doubling (CSV)")
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--l0", type=float, help="starting ratio (default: ratio of the base tree)")
    common(r)
    r.set_defaults(func=cmd_ratio)

    e = sub.add_parser("embed", help="edge embeddings, reduction instances and the star scan")
    e.add_argument("graph", nargs="?", help="edge list, one 'u v' pair per line, 0-indexed")
    e.add_argument("--scale", choices=("unit", "raw"), default="raw")
    mode = e.add_mutually_exclusive_group()
    mode.add_argument("--reduce", action="store_true", help="emit a vertex-cover reduction instance")
    mode.add_argument("--scan", type=int, metavar="M", help="compare the star against all M-edge graphs (CSV)")
    e.add_argument("--solve-pruned", action="store_true", help="in --scan, also solve pruned graphs")
    common(e)
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("verify", help="run the structural checks on a tree JSON")
    v.add_argument("tree")
    v.add_argument("--json", action="store_true")
    common(v)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("topology", help="topology utilities")
    t.add_argument("action", choices=("good-tree", "conjectured", "enumerate", "wiener"))
    t.add_argument("--n", type=int, help="leaves / terminals")
    t.add_argument("--file", help="topology text file (wiener)")
    t.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)
    common(t)
    t.set_defaults(func=cmd_topology)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cfg = RunConfig.from_args(args)
    if args.command == "topology" and args.n is None and not (args.action == "wiener" and args.file):
        sys.stderr.write("error: --n is required\n")
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except (UsageError, formats.FormatError, SolverError, TopologyError, GraphError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        sys.stderr.write(f"error: invalid JSON: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
