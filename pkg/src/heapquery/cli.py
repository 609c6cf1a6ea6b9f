"""Command-line driver.

Subcommands:

* ``run <program>``: evaluate a program to its ``/* POINT */`` marker and
  print the resulting heap snapshot as canonical JSON.
* ``query <snapshot> -q TEXT [flags] [ARGS...]``: run one query; positional
  ARGS feed ``$``/``@``/``[]`` markers in order.
* ``export <snapshot> -o DIR [flags]``: write nodes.csv and
  relationships.csv for the extracted subgraph.
* ``repl <snapshot>``: interactive loop; writes accumulate in the in-memory
  graph for the session.

Exit codes: 0 success, 1 input/IO errors, 2 query-pipeline errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from .api import QueryContext, query_bounded, query_unbounded
from .cypher_frontend import expand_positional, lint, parse, validate
from .errors import HeapQueryError, PipelineError, QueryValidationError
from .heap_model import run_to_point
from .property_graph import UID_KEY, PropertyGraph
from .query_engine import ABSENT, NodeRef, RelRef, ResultTable, execute
from .snapshot_io import export_csv, graph_to_snapshot, load_snapshot, save_snapshot
from .subgraph import ExtractionConfig, extract


def _split_classes(value: str) -> frozenset:
    return frozenset(part for part in value.split(",") if part)


def _coerce_arg(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    parts = text.split(",")
    if len(parts) > 1:
        try:
            return [int(p) for p in parts]
        except ValueError:
            pass
    return text


def _render_cell(graph: PropertyGraph, value) -> str:
    if value is ABSENT:
        return "null"
    if isinstance(value, NodeRef):
        node = graph.node(value.id)
        uid = node.properties.get(UID_KEY)
        return f"#{uid if uid is not None else '-'}:{node.label}"
    if isinstance(value, RelRef):
        rel = graph.relationship(value.id)
        return f"-[:{rel.label}]-"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _print_table(table: ResultTable, graph: PropertyGraph, out) -> None:
    print("\t".join(table.columns), file=out)
    for row in table.rows:
        print("\t".join(_render_cell(graph, v) for v in row), file=out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heapquery", description="Query object heaps as property graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a program to its POINT marker and print the snapshot")
    p_run.add_argument("program", help="program file")

    def extraction_flags(p):
        p.add_argument("--root", action="append", type=int, default=None, help="restrict to objects reachable from this uid (repeatable)")
        p.add_argument("--whitelist", type=_split_classes, default=frozenset(), help="comma-separated class names to always include")
        p.add_argument("--blacklist", type=_split_classes, default=frozenset(), help="comma-separated class names to exclude")
        p.add_argument("--gc", action="store_true", help="drop objects unreachable from the snapshot roots first")

    p_query = sub.add_parser("query", help="run one query against a snapshot")
    p_query.add_argument("snapshot", help="snapshot JSON file")
    p_query.add_argument("-q", "--query", required=True, dest="text", help="query text with optional positional markers")
    extraction_flags(p_query)
    p_query.add_argument("--time", action="store_true", help="print per-stage milliseconds to stderr")
    p_query.add_argument("args", nargs="*", help="positional arguments for $/@/[] markers")

    p_export = sub.add_parser("export", help="export the extracted subgraph as CSV")
    p_export.add_argument("snapshot", help="snapshot JSON file")
    p_export.add_argument("-o", "--output", required=True, help="output directory")
    extraction_flags(p_export)

    p_repl = sub.add_parser("repl", help="interactive query loop over a snapshot")
    p_repl.add_argument("snapshot", help="snapshot JSON file")
    extraction_flags(p_repl)

    return parser


def _load_snapshot_file(path: str):
    with open(path, "rb") as f:
        return load_snapshot(f.read())


def _config_from_args(args) -> ExtractionConfig:
    return ExtractionConfig(
        whitelist=args.whitelist,
        blacklist=args.blacklist,
        force_collect=args.gc,
    )


def cmd_run(args) -> int:
    try:
        with open(args.program, "r", encoding="utf-8") as f:
            text = f.read()
        graph = run_to_point(text)
        snapshot = graph_to_snapshot(graph)
    except (OSError, HeapQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(save_snapshot(snapshot).decode("utf-8") + "\n")
    return 0


def cmd_query(args) -> int:
    try:
        snapshot = _load_snapshot_file(args.snapshot)
    except (OSError, HeapQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    ctx = QueryContext(snapshot, _config_from_args(args))
    values = [_coerce_arg(a) for a in args.args]
    timings: dict | None = {} if args.time else None
    try:
        if args.root:
            rs = query_bounded(ctx, args.root, args.text, *values, timings=timings)
        else:
            rs = query_unbounded(ctx, args.text, *values, timings=timings)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _warn_lint(args.text, values)
    if timings is not None:
        stages = " ".join(f"{name}={ms:.3f}" for name, ms in timings.items())
        print(f"time_ms {stages}", file=sys.stderr)
    _print_table(rs.table, rs._graph, sys.stdout)
    return 0


def _warn_lint(fmt: str, values) -> None:
    try:
        expansion = expand_positional(fmt, values)
        for text in expansion.queries()[:1]:
            for warning in lint(parse(text)):
                print(f"warning: {warning}", file=sys.stderr)
    except HeapQueryError:
        pass


def cmd_export(args) -> int:
    try:
        snapshot = _load_snapshot_file(args.snapshot)
    except (OSError, HeapQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config = ExtractionConfig(
        whitelist=args.whitelist,
        blacklist=args.blacklist,
        root=args.root or None,
        force_collect=args.gc,
    )
    try:
        graph = extract(snapshot, config)
    except HeapQueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bundle = export_csv(graph)
    try:
        os.makedirs(args.output, exist_ok=True)
        for name, data in (("nodes.csv", bundle.nodes), ("relationships.csv", bundle.relationships)):
            fd, tmp = tempfile.mkstemp(dir=args.output, prefix=f".{name}.")
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, os.path.join(args.output, name))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_repl(args) -> int:
    try:
        snapshot = _load_snapshot_file(args.snapshot)
    except (OSError, HeapQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        graph = extract(snapshot, _config_from_args(args))
    except HeapQueryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    while True:
        try:
            line = input("> ")
        except EOFError:
            print("", file=sys.stderr)
            return 0
        line = line.strip()
        if not line:
            continue
        if line in (":quit", ":q", ":exit"):
            return 0
        try:
            query = parse(line)
            diagnostics = validate(query)
            if diagnostics:
                raise QueryValidationError(diagnostics)
            for warning in lint(query):
                print(f"warning: {warning}", file=sys.stderr)
            table, graph = execute(query, graph)
        except HeapQueryError as exc:
            print(f"error: {exc}", file=sys.stderr)
            continue
        _print_table(table, graph, sys.stdout)


def main(argv=None) -> int:
    # Marker ARGS may trail the flags; argparse cannot interleave a greedy
    # positional with options, so leftovers are collected explicitly.
    args, extra = _build_parser().parse_known_args(argv)
    bad = [e for e in extra if e.startswith("--")]
    if bad:
        print(f"error: unrecognized flags {bad}", file=sys.stderr)
        return 1
    if args.command == "query":
        args.args = list(args.args) + extra
    elif extra:
        print(f"error: unexpected arguments {extra}", file=sys.stderr)
        return 1
    handler = {"run": cmd_run, "query": cmd_query, "export": cmd_export, "repl": cmd_repl}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
