"""Public query facade over a heap snapshot.

A QueryContext owns a snapshot plus default extraction settings.  Each call
runs the full pipeline: expand positional arguments, extract the (sub)graph,
parse, validate, execute, and wrap rows in a ResultSet.  Bounded queries
restrict extraction to objects reachable from the supplied root(s);
unbounded queries see every object in the snapshot, including unreachable
ones unless force-collect is enabled.

Not thread safe: callers serialize access to a context.  Every pipeline
failure is re-raised as PipelineError naming the failing stage.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .cypher_frontend import expand_positional, parse, validate
from .errors import (
    CastError,
    CursorError,
    PipelineError,
    QueryValidationError,
    ShapeError,
    UnknownColumnError,
)
from .property_graph import UID_KEY, PropertyGraph
from .query_engine import ABSENT, NodeRef, RelRef, ResultTable, execute, execute_batch
from .subgraph import ExtractionConfig, HeapObject, HeapSnapshot, extract


class ResultSet:
    """Cursor-style access to a result table, in the java.sql mold.

    ``next()`` advances to the following row and reports whether one exists;
    accessors are valid only after it returned True.  Node-valued cells are
    returned as their ``$uid`` by ``get`` and as graph nodes by ``get_node``.
    """

    def __init__(self, table: ResultTable, graph: PropertyGraph, snapshot: HeapSnapshot | None = None):
        self._table = table
        self._graph = graph
        self._snapshot = snapshot
        self._row = 0  # 1-based once positioned

    @property
    def table(self) -> ResultTable:
        return self._table

    def columns(self) -> list[str]:
        return list(self._table.columns)

    def row_count(self) -> int:
        return self._table.row_count

    def next(self) -> bool:
        if self._row >= self._table.row_count:
            self._row = self._table.row_count + 1
            return False
        self._row += 1
        return True

    def row(self) -> int:
        """Current row number, 0 before the first ``next()``."""
        return 0 if self._row > self._table.row_count else self._row

    def _current(self):
        if self._row < 1 or self._row > self._table.row_count:
            raise CursorError("cursor is not positioned on a row")
        return self._table.rows[self._row - 1]

    def _column_index(self, column) -> int:
        if isinstance(column, int):
            if 0 <= column < len(self._table.columns):
                return column
            raise UnknownColumnError(column)
        try:
            return self._table.columns.index(column)
        except ValueError:
            raise UnknownColumnError(column) from None

    def get(self, column):
        """Cell of the current row; nodes are exposed as their ``$uid``."""
        value = self._current()[self._column_index(column)]
        if value is ABSENT:
            return None
        if isinstance(value, NodeRef):
            uid = self._graph.node(value.id).properties.get(UID_KEY)
            if uid is None:
                raise CastError(f"node in column {column!r} has no {UID_KEY}; use get_node()")
            return uid
        if isinstance(value, RelRef):
            return self._graph.relationship(value.id).id
        return value

    def get_node(self, column):
        value = self._current()[self._column_index(column)]
        if not isinstance(value, NodeRef):
            raise CastError(f"column {column!r} does not hold a node")
        return self._graph.node(value.id)


@dataclass
class QueryContext:
    """A snapshot plus default extraction settings.

    ``cache_extractions`` memoizes extracted subgraphs per (root, config)
    key.  It is off by default and meant for read-only workloads: write
    queries mutate the cached graph.
    """

    snapshot: HeapSnapshot
    defaults: ExtractionConfig = field(default_factory=ExtractionConfig)
    cache_extractions: bool = False

    def __post_init__(self):
        self.snapshot.validate()
        self._cache: dict = {}

    def uid_of(self, object_id: int) -> int:
        """Unique id of a snapshot object (identity mapping)."""
        if not self.snapshot.has_object(object_id):
            raise UnknownColumnError(object_id)
        return object_id

    def _extract(self, config: ExtractionConfig) -> PropertyGraph:
        if not self.cache_extractions:
            return extract(self.snapshot, config)
        roots = config.root_ids()
        key = (
            tuple(roots) if roots is not None else None,
            frozenset(config.whitelist),
            frozenset(config.blacklist),
            config.force_collect,
        )
        if key not in self._cache:
            self._cache[key] = extract(self.snapshot, config)
        return self._cache[key]


def _stage(timings: dict | None, name: str, started: float):
    if timings is not None:
        timings[name] = timings.get(name, 0.0) + (time.perf_counter() - started) * 1000.0


def _run_pipeline(ctx: QueryContext, root, fmt: str, args, timings: dict | None = None) -> ResultSet:
    t0 = time.perf_counter()
    try:
        expansion = expand_positional(fmt, args)
    except Exception as exc:
        raise PipelineError("expand", exc) from exc
    _stage(timings, "expand", t0)

    t0 = time.perf_counter()
    try:
        config = replace(ctx.defaults, root=root)
        graph = ctx._extract(config)
    except Exception as exc:
        raise PipelineError("extract", exc) from exc
    _stage(timings, "extract", t0)

    t0 = time.perf_counter()
    try:
        queries = [parse(text) for text in expansion.queries()]
    except Exception as exc:
        raise PipelineError("parse", exc) from exc
    _stage(timings, "parse", t0)

    t0 = time.perf_counter()
    try:
        for query in queries:
            diagnostics = validate(query)
            if diagnostics:
                raise QueryValidationError(diagnostics)
    except Exception as exc:
        raise PipelineError("validate", exc) from exc
    _stage(timings, "validate", t0)

    t0 = time.perf_counter()
    try:
        if expansion.is_batch:
            table, graph = execute_batch(queries, graph)
        else:
            table, graph = execute(queries[0], graph)
    except Exception as exc:
        raise PipelineError("execute", exc) from exc
    _stage(timings, "execute", t0)
    return ResultSet(table, graph, ctx.snapshot)


def query_bounded(ctx: QueryContext, root, fmt: str, *args, timings: dict | None = None) -> ResultSet:
    """Run a query against the subgraph reachable from ``root`` (id or list of ids)."""
    return _run_pipeline(ctx, root, fmt, args, timings)


def query_unbounded(ctx: QueryContext, fmt: str, *args, timings: dict | None = None) -> ResultSet:
    """Run a query against every object in the snapshot.

    Without force-collect in the context defaults, unreachable objects are
    visible to the query.
    """
    return _run_pipeline(ctx, None, fmt, args, timings)


def _single_cell(rs: ResultSet):
    table = rs.table
    if table.row_count != 1 or len(table.columns) != 1:
        raise PipelineError("result", ShapeError(table.row_count, len(table.columns)))
    rs.next()
    return table.rows[0][0], rs


def _scalar_query(ctx: QueryContext, root, fmt: str, args):
    if root is None:
        rs = query_unbounded(ctx, fmt, *args)
    else:
        rs = query_bounded(ctx, root, fmt, *args)
    return _single_cell(rs)


def query_boolean(ctx: QueryContext, fmt: str, *args, root=None) -> bool:
    value, _ = _scalar_query(ctx, root, fmt, args)
    if not isinstance(value, bool):
        raise PipelineError("result", CastError(f"expected a boolean, got {value!r}"))
    return value


def query_long(ctx: QueryContext, fmt: str, *args, root=None) -> int:
    value, _ = _scalar_query(ctx, root, fmt, args)
    if isinstance(value, bool) or not isinstance(value, int):
        raise PipelineError("result", CastError(f"expected an integer, got {value!r}"))
    return value


def query_string(ctx: QueryContext, fmt: str, *args, root=None) -> str:
    value, _ = _scalar_query(ctx, root, fmt, args)
    if not isinstance(value, str):
        raise PipelineError("result", CastError(f"expected a string, got {value!r}"))
    return value


def query_object(ctx: QueryContext, fmt: str, *args, root=None) -> tuple[int, HeapObject]:
    """Single-object query: returns (uid, snapshot object)."""
    value, rs = _scalar_query(ctx, root, fmt, args)
    if not isinstance(value, NodeRef):
        raise PipelineError("result", CastError(f"expected a node, got {value!r}"))
    node = rs._graph.node(value.id)
    uid = node.properties.get(UID_KEY)
    if uid is None or not ctx.snapshot.has_object(uid):
        raise PipelineError("result", CastError("node does not correspond to a snapshot object"))
    return uid, ctx.snapshot.object(uid)
