"""Evaluation of validated query ASTs against a PropertyGraph.

Matching semantics:

* Patterns in one clause are matched left to right, threading bindings; a
  relationship may not be reused within a single path match.
* Variable-length segments enumerate relationship-distinct paths depth
  first.  They express reachability: when the segment's target variable is
  not already bound, paths of one or more hops that lead back to the
  segment's start node are discarded.  Closed walks are matched only when
  the target is pinned to the start (e.g. ``(m)-[:f*1..]->(m)``), and
  zero-length paths (``*0..``) always stay on the start node.
* OPTIONAL MATCH yields one row with the clause's new variables absent when
  nothing matches.
* Comparisons and boolean operators use three-valued logic; WHERE keeps a
  row only when its expression is strictly true.
* ``equals(a, b)`` is true for the same node, or for nodes with the same
  label and the same user-visible property map (the ``$uid`` identity key
  is ignored); on primitives it is type-sensitive value equality.
* CREATE instantiates its pattern once per row; MERGE binds every match of
  its whole pattern, or atomically creates the whole pattern when absent.

Row order is deterministic: candidates are enumerated by ascending node and
relationship id in clause order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .cypher_ast import (
    And,
    Comparison,
    Count,
    CreateClause,
    EqualsCall,
    Literal,
    MatchClause,
    MergeClause,
    NodePattern,
    Not,
    Or,
    PathPattern,
    PropertyAccess,
    Query,
    ReturnClause,
    Variable,
    WhereClause,
    expression_text,
)
from .errors import ExecutionError, TypeMismatchError
from .property_graph import (
    PropertyGraph,
    canon_properties,
    ensure_user_label,
    value_tag,
    values_equal,
)


class _Absent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "absent"


ABSENT = _Absent()


@dataclass(frozen=True)
class NodeRef:
    id: int


@dataclass(frozen=True)
class RelRef:
    id: int


def cell_tag(value) -> tuple:
    """Hashable canonical form of a result cell (for DISTINCT and bags)."""
    if value is ABSENT:
        return ("absent",)
    if isinstance(value, NodeRef):
        return ("node", value.id)
    if isinstance(value, RelRef):
        return ("rel", value.id)
    return value_tag(value)


@dataclass
class ResultTable:
    columns: list
    rows: list

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        return self.columns.index(name)

    def as_bag(self) -> Counter:
        return Counter(tuple(cell_tag(v) for v in row) for row in self.rows)


# --- pattern matching ---------------------------------------------------------


def _node_matches(graph: PropertyGraph, node_id: int, pattern: NodePattern) -> bool:
    node = graph.node(node_id)
    if pattern.label is not None and node.label != pattern.label:
        return False
    for key, literal in pattern.properties:
        if key not in node.properties or not values_equal(node.properties[key], literal.value):
            return False
    return True


def _start_candidates(graph: PropertyGraph, pattern: NodePattern, binding: dict):
    if pattern.var is not None and pattern.var in binding:
        value = binding[pattern.var]
        if value is ABSENT:
            return []
        if not isinstance(value, NodeRef):
            raise ExecutionError(f"variable {pattern.var!r} is not a node")
        return [value.id] if _node_matches(graph, value.id, pattern) else []
    return [n.id for n in graph.nodes() if _node_matches(graph, n.id, pattern)]


def _match_path(graph: PropertyGraph, path: PathPattern, binding: dict) -> list[dict]:
    results: list[dict] = []
    step_cache: dict[tuple, list] = {}

    def steps(node_id: int, seg: int):
        key = (node_id, seg)
        if key not in step_cache:
            rel = path.rels[seg]
            types = set(rel.types) if rel.types else None
            step_cache[key] = graph.neighbors(node_id, rel.direction, types)
        return step_cache[key]

    def bind_node(binding: dict, pattern: NodePattern, node_id: int) -> dict | None:
        if pattern.var is None:
            return binding
        if pattern.var in binding:
            bound = binding[pattern.var]
            if not isinstance(bound, NodeRef) or bound.id != node_id:
                return None
            return binding
        new = dict(binding)
        new[pattern.var] = NodeRef(node_id)
        return new

    def target_check(binding: dict, pattern: NodePattern, node_id: int) -> dict | None:
        if not _node_matches(graph, node_id, pattern):
            return None
        return bind_node(binding, pattern, node_id)

    def extend(seg: int, current: int, binding: dict, used: set):
        if seg == len(path.rels):
            results.append(binding)
            return
        rel_pattern = path.rels[seg]
        target = path.nodes[seg + 1]
        pinned = target.var is not None and target.var in binding
        if not rel_pattern.hops.variable_length:
            for rel, other in steps(current, seg):
                if rel.id in used:
                    continue
                nxt = target_check(binding, target, other.id)
                if nxt is None:
                    continue
                if rel_pattern.var is not None:
                    if rel_pattern.var in nxt:
                        bound = nxt[rel_pattern.var]
                        if not isinstance(bound, RelRef) or bound.id != rel.id:
                            continue
                    else:
                        nxt = dict(nxt)
                        nxt[rel_pattern.var] = RelRef(rel.id)
                used.add(rel.id)
                extend(seg + 1, other.id, nxt, used)
                used.discard(rel.id)
        else:
            lo, hi = rel_pattern.hops.bounds()

            def walk(node_id: int, depth: int):
                if depth >= lo:
                    if depth == 0 or pinned or node_id != current:
                        nxt = target_check(binding, target, node_id)
                        if nxt is not None:
                            extend(seg + 1, node_id, nxt, used)
                if hi is not None and depth == hi:
                    return
                for rel, other in steps(node_id, seg):
                    if rel.id not in used:
                        used.add(rel.id)
                        walk(other.id, depth + 1)
                        used.discard(rel.id)

            walk(current, 0)

    first = path.nodes[0]
    for node_id in _start_candidates(graph, first, binding):
        start_binding = bind_node(binding, first, node_id)
        if start_binding is not None:
            extend(0, node_id, start_binding, set())
    return results


def _pattern_variables(patterns) -> list[str]:
    seen = []
    for path in patterns:
        for node in path.nodes:
            if node.var is not None and node.var not in seen:
                seen.append(node.var)
        for rel in path.rels:
            if rel.var is not None and rel.var not in seen:
                seen.append(rel.var)
    return seen


def match_pattern(graph: PropertyGraph, patterns, seed: dict | None = None, optional: bool = False) -> list[dict]:
    """All extensions of ``seed`` satisfying every pattern, in match order."""
    seed = dict(seed or {})
    acc = [seed]
    for path in patterns:
        path_vars = set(_pattern_variables([path]))
        nxt: list[dict] = []
        if acc and all(path_vars.isdisjoint(binding) for binding in acc):
            # independent of the current rows: match once, then cross-join
            base = _match_path(graph, path, {})
            for binding in acc:
                for extension in base:
                    merged = dict(binding)
                    merged.update(extension)
                    nxt.append(merged)
        else:
            for binding in acc:
                nxt.extend(_match_path(graph, path, binding))
        acc = nxt
        if not acc:
            break
    if acc:
        return acc
    if optional:
        row = dict(seed)
        for var in _pattern_variables(patterns):
            if var not in row:
                row[var] = ABSENT
        return [row]
    return []


# --- expressions -----------------------------------------------------------------


def _compare_eq(left, right) -> bool:
    if isinstance(left, NodeRef) or isinstance(right, NodeRef):
        return isinstance(left, NodeRef) and isinstance(right, NodeRef) and left.id == right.id
    if isinstance(left, RelRef) or isinstance(right, RelRef):
        return isinstance(left, RelRef) and isinstance(right, RelRef) and left.id == right.id
    return values_equal(left, right)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _compare_order(op: str, left, right) -> bool:
    if _is_number(left) and _is_number(right):
        pass
    elif isinstance(left, str) and isinstance(right, str):
        pass
    else:
        raise TypeMismatchError(f"cannot order {left!r} {op} {right!r}")
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    return left >= right


def _structural_equals(graph: PropertyGraph, left, right):
    if left is ABSENT or right is ABSENT:
        return ABSENT
    if isinstance(left, NodeRef) and isinstance(right, NodeRef):
        if left.id == right.id:
            return True
        a = graph.node(left.id)
        b = graph.node(right.id)
        return a.label == b.label and (
            canon_properties(a.properties, ignore_uid=True) == canon_properties(b.properties, ignore_uid=True)
        )
    if isinstance(left, (NodeRef, RelRef)) or isinstance(right, (NodeRef, RelRef)):
        return False
    return values_equal(left, right)


def eval_expression(binding: dict, expr, graph: PropertyGraph):
    """Evaluate an expression under a row binding; may yield ABSENT."""
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Variable):
        if expr.name not in binding:
            raise ExecutionError(f"unbound variable {expr.name!r}")
        return binding[expr.name]
    if isinstance(expr, PropertyAccess):
        if expr.var not in binding:
            raise ExecutionError(f"unbound variable {expr.var!r}")
        value = binding[expr.var]
        if value is ABSENT:
            return ABSENT
        if isinstance(value, NodeRef):
            return graph.node(value.id).properties.get(expr.key, ABSENT)
        if isinstance(value, RelRef):
            return graph.relationship(value.id).properties.get(expr.key, ABSENT)
        raise TypeMismatchError(f"{expr.var!r} has no properties")
    if isinstance(expr, Comparison):
        left = eval_expression(binding, expr.left, graph)
        right = eval_expression(binding, expr.right, graph)
        if left is ABSENT or right is ABSENT:
            return ABSENT
        if expr.op == "=":
            return _compare_eq(left, right)
        if expr.op == "<>":
            return not _compare_eq(left, right)
        return _compare_order(expr.op, left, right)
    if isinstance(expr, EqualsCall):
        left = eval_expression(binding, expr.left, graph)
        right = eval_expression(binding, expr.right, graph)
        return _structural_equals(graph, left, right)
    if isinstance(expr, And):
        left = eval_expression(binding, expr.left, graph)
        right = eval_expression(binding, expr.right, graph)
        return _kleene_and(left, right)
    if isinstance(expr, Or):
        left = eval_expression(binding, expr.left, graph)
        right = eval_expression(binding, expr.right, graph)
        return _kleene_or(left, right)
    if isinstance(expr, Not):
        value = eval_expression(binding, expr.operand, graph)
        if value is ABSENT:
            return ABSENT
        _require_bool(value, "NOT")
        return not value
    if isinstance(expr, Count):
        raise ExecutionError("count(...) outside RETURN")
    raise ExecutionError(f"cannot evaluate {expr!r}")


def _require_bool(value, where: str):
    if not isinstance(value, bool):
        raise TypeMismatchError(f"{where} needs a boolean, got {value!r}")


def _kleene_and(left, right):
    for v in (left, right):
        if v is not ABSENT:
            _require_bool(v, "AND")
    if left is False or right is False:
        return False
    if left is ABSENT or right is ABSENT:
        return ABSENT
    return True


def _kleene_or(left, right):
    for v in (left, right):
        if v is not ABSENT:
            _require_bool(v, "OR")
    if left is True or right is True:
        return True
    if left is ABSENT or right is ABSENT:
        return ABSENT
    return False


# --- clause execution ----------------------------------------------------------


def _match_clause(graph: PropertyGraph, clause: MatchClause, rows: list[dict]) -> list[dict]:
    out: list[dict] = []
    clause_vars = set(_pattern_variables(clause.patterns))
    if rows and all(clause_vars.isdisjoint(row) for row in rows):
        # no variable joins the incoming rows: match once, cross-join
        base = match_pattern(graph, clause.patterns, {}, optional=False)
        if base:
            for row in rows:
                for extension in base:
                    merged = dict(row)
                    merged.update(extension)
                    out.append(merged)
        elif clause.optional:
            for row in rows:
                merged = dict(row)
                for var in clause_vars:
                    merged[var] = ABSENT
                out.append(merged)
        return out
    for row in rows:
        out.extend(match_pattern(graph, clause.patterns, row, clause.optional))
    return out


def _where_clause(graph: PropertyGraph, clause: WhereClause, rows: list[dict]) -> list[dict]:
    kept = []
    for row in rows:
        value = eval_expression(row, clause.expr, graph)
        if value is True:
            kept.append(row)
        elif value is not ABSENT:
            _require_bool(value, "WHERE")
    return kept


def _resolve_write_node(graph: PropertyGraph, binding: dict, pattern: NodePattern) -> tuple[int, dict]:
    if pattern.var is not None and pattern.var in binding:
        value = binding[pattern.var]
        if value is ABSENT:
            raise ExecutionError(f"cannot write through absent variable {pattern.var!r}")
        if not isinstance(value, NodeRef):
            raise ExecutionError(f"variable {pattern.var!r} is not a node")
        return value.id, binding
    ensure_user_label(pattern.label)
    props = {key: literal.value for key, literal in pattern.properties}
    node_id = graph.add_node(pattern.label, props)
    if pattern.var is not None:
        binding = dict(binding)
        binding[pattern.var] = NodeRef(node_id)
    return node_id, binding


def _create_path(graph: PropertyGraph, binding: dict, path: PathPattern) -> dict:
    node_ids = []
    for pattern in path.nodes:
        node_id, binding = _resolve_write_node(graph, binding, pattern)
        node_ids.append(node_id)
    for i, rel in enumerate(path.rels):
        start, end = node_ids[i], node_ids[i + 1]
        if rel.direction == "in":
            start, end = end, start
        rel_id = graph.add_relationship(rel.types[0], start, end)
        if rel.var is not None:
            binding = dict(binding)
            binding[rel.var] = RelRef(rel_id)
    return binding


def _create_clause(graph: PropertyGraph, clause: CreateClause, rows: list[dict]) -> list[dict]:
    out = []
    for row in rows:
        for path in clause.patterns:
            row = _create_path(graph, row, path)
        out.append(row)
    return out


def _merge_clause(graph: PropertyGraph, clause: MergeClause, rows: list[dict]) -> list[dict]:
    out = []
    for row in rows:
        matches = _match_path(graph, clause.pattern, row)
        if matches:
            out.extend(matches)
        else:
            out.append(_create_path(graph, row, clause.pattern))
    return out


# --- RETURN projection -----------------------------------------------------------


def _contains_count(expr) -> bool:
    if isinstance(expr, Count):
        return True
    if isinstance(expr, (And, Or, Comparison, EqualsCall)):
        return _contains_count(expr.left) or _contains_count(expr.right)
    if isinstance(expr, Not):
        return _contains_count(expr.operand)
    return False


def _references_rows(expr) -> bool:
    """True when the expression reads row variables outside of count(...)."""
    if isinstance(expr, (Variable, PropertyAccess)):
        return True
    if isinstance(expr, Count):
        return False
    if isinstance(expr, (And, Or, Comparison, EqualsCall)):
        return _references_rows(expr.left) or _references_rows(expr.right)
    if isinstance(expr, Not):
        return _references_rows(expr.operand)
    return False


def _eval_aggregate(expr, rows: list[dict], graph: PropertyGraph):
    if isinstance(expr, Count):
        if expr.expr is None:
            return len(rows)
        values = []
        for row in rows:
            value = eval_expression(row, expr.expr, graph)
            if value is not ABSENT:
                values.append(value)
        if expr.distinct:
            return len({cell_tag(v) for v in values})
        return len(values)
    if isinstance(expr, (Variable, PropertyAccess)):
        tags = set()
        value = ABSENT
        for row in rows:
            value = eval_expression(row, expr, graph)
            tags.add(cell_tag(value))
        if len(tags) > 1:
            raise ExecutionError(
                f"{expression_text(expr)} is not constant across rows; grouped aggregation is not supported"
            )
        return value
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Comparison):
        left = _eval_aggregate(expr.left, rows, graph)
        right = _eval_aggregate(expr.right, rows, graph)
        if left is ABSENT or right is ABSENT:
            return ABSENT
        if expr.op == "=":
            return _compare_eq(left, right)
        if expr.op == "<>":
            return not _compare_eq(left, right)
        return _compare_order(expr.op, left, right)
    if isinstance(expr, EqualsCall):
        return _structural_equals(
            graph,
            _eval_aggregate(expr.left, rows, graph),
            _eval_aggregate(expr.right, rows, graph),
        )
    if isinstance(expr, And):
        return _kleene_and(_eval_aggregate(expr.left, rows, graph), _eval_aggregate(expr.right, rows, graph))
    if isinstance(expr, Or):
        return _kleene_or(_eval_aggregate(expr.left, rows, graph), _eval_aggregate(expr.right, rows, graph))
    if isinstance(expr, Not):
        value = _eval_aggregate(expr.operand, rows, graph)
        if value is ABSENT:
            return ABSENT
        _require_bool(value, "NOT")
        return not value
    raise ExecutionError(f"cannot aggregate {expr!r}")


def _return_clause(graph: PropertyGraph, clause: ReturnClause, rows: list[dict]) -> ResultTable:
    columns = [item.alias or expression_text(item.expr) for item in clause.items]
    aggregated = any(_contains_count(item.expr) for item in clause.items)
    if aggregated:
        if not rows and any(_references_rows(item.expr) for item in clause.items):
            return ResultTable(columns, [])
        row = tuple(_eval_aggregate(item.expr, rows, graph) for item in clause.items)
        table_rows = [row]
    else:
        table_rows = [
            tuple(eval_expression(row, item.expr, graph) for item in clause.items) for row in rows
        ]
    if clause.distinct:
        seen = set()
        deduped = []
        for row in table_rows:
            key = tuple(cell_tag(v) for v in row)
            if key not in seen:
                seen.add(key)
                deduped.append(row)
        table_rows = deduped
    return ResultTable(columns, table_rows)


# --- entry points ------------------------------------------------------------------


def execute(query: Query, graph: PropertyGraph) -> tuple[ResultTable, PropertyGraph]:
    """Run a validated query; returns the result table and the graph.

    Writes are applied in clause order with no rollback: a failing clause
    leaves earlier writes in place.  Callers needing atomicity should copy
    the graph first.
    """
    rows: list[dict] = [{}]
    table: ResultTable | None = None
    for clause in query.clauses:
        if isinstance(clause, CreateClause):
            rows = _create_clause(graph, clause, rows)
        elif isinstance(clause, MergeClause):
            rows = _merge_clause(graph, clause, rows)
        elif isinstance(clause, MatchClause):
            rows = _match_clause(graph, clause, rows)
        elif isinstance(clause, WhereClause):
            rows = _where_clause(graph, clause, rows)
        elif isinstance(clause, ReturnClause):
            table = _return_clause(graph, clause, rows)
        else:
            raise ExecutionError(f"cannot execute clause {clause!r}")
    if table is None:
        raise ExecutionError("query has no RETURN clause")
    return table, graph


def execute_batch(queries, graph: PropertyGraph) -> tuple[ResultTable, PropertyGraph]:
    """Run expanded batch queries in order, bag-unioning their rows."""
    columns: list | None = None
    rows: list = []
    for query in queries:
        table, graph = execute(query, graph)
        if columns is None:
            columns = table.columns
        elif columns != table.columns:
            raise ExecutionError(f"batch queries disagree on columns: {columns} vs {table.columns}")
        rows.extend(table.rows)
    return ResultTable(columns or [], rows), graph
