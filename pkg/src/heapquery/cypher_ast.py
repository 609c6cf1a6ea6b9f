"""AST for the supported openCypher subset, plus the canonical printer.

The printer produces text the parser accepts, and parsing canonical text
yields the identical AST (round-trip stability, property-tested).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# --- expressions ---------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: object  # int | float | bool | str


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class PropertyAccess:
    var: str
    key: str


@dataclass(frozen=True)
class Count:
    expr: object | None  # None means count(*)
    distinct: bool = False


@dataclass(frozen=True)
class EqualsCall:
    left: object
    right: object


@dataclass(frozen=True)
class Comparison:
    op: str  # = <> < <= > >=
    left: object
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    operand: object


Expression = Literal | Variable | PropertyAccess | Count | EqualsCall | Comparison | And | Or | Not


# --- patterns --------------------------------------------------------------------


@dataclass(frozen=True)
class Hops:
    """Hop specification of a relationship pattern.

    kind: one (no star), exact (*n), range (*lo..hi, hi may be None),
    unbounded (bare *, meaning 1 or more).
    """

    kind: str
    lo: int | None = None
    hi: int | None = None

    def bounds(self) -> tuple[int, int | None]:
        if self.kind == "one":
            return 1, 1
        if self.kind == "exact":
            return self.lo, self.lo
        if self.kind == "range":
            return self.lo, self.hi
        return 1, None

    @property
    def variable_length(self) -> bool:
        return self.kind != "one"


HOPS_ONE = Hops("one")


@dataclass(frozen=True)
class NodePattern:
    var: str | None = None
    label: str | None = None
    properties: tuple = ()  # ordered (key, Literal) pairs


@dataclass(frozen=True)
class RelPattern:
    var: str | None = None
    types: tuple = ()  # empty = any type
    direction: str = "out"  # out | in | both
    hops: Hops = HOPS_ONE


@dataclass(frozen=True)
class PathPattern:
    nodes: tuple  # n+1 NodePatterns
    rels: tuple = ()  # n RelPatterns


# --- clauses ---------------------------------------------------------------------


@dataclass(frozen=True)
class CreateClause:
    patterns: tuple


@dataclass(frozen=True)
class MergeClause:
    pattern: PathPattern


@dataclass(frozen=True)
class MatchClause:
    patterns: tuple
    optional: bool = False


@dataclass(frozen=True)
class WhereClause:
    expr: object


@dataclass(frozen=True)
class ReturnItem:
    expr: object
    alias: str | None = None


@dataclass(frozen=True)
class ReturnClause:
    items: tuple
    distinct: bool = False


Clause = CreateClause | MergeClause | MatchClause | WhereClause | ReturnClause


@dataclass(frozen=True)
class Query:
    clauses: tuple


# --- canonical text ----------------------------------------------------------------

_PLAIN_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_WORDS = frozenset(
    w.upper()
    for w in (
        "create merge match optional where return distinct as and or not true false null count equals"
    ).split()
)


def quote_ident(name: str) -> str:
    if _PLAIN_IDENT.match(name) and name.upper() not in _WORDS:
        return name
    return "`" + name.replace("`", "``") + "`"


def _literal_text(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    raise TypeError(f"not a literal value: {value!r}")


def expression_text(expr) -> str:
    return _expr_text(expr, 0)


# precedence: OR(1) < AND(2) < NOT(3) < comparison(4) < atom(5)
def _expr_text(expr, parent_level: int) -> str:
    if isinstance(expr, Or):
        text = f"{_expr_text(expr.left, 1)} OR {_expr_text(expr.right, 2)}"
        level = 1
    elif isinstance(expr, And):
        text = f"{_expr_text(expr.left, 2)} AND {_expr_text(expr.right, 3)}"
        level = 2
    elif isinstance(expr, Not):
        text = f"NOT {_expr_text(expr.operand, 3)}"
        level = 3
    elif isinstance(expr, Comparison):
        text = f"{_expr_text(expr.left, 5)} {expr.op} {_expr_text(expr.right, 5)}"
        level = 4
    elif isinstance(expr, Count):
        if expr.expr is None:
            text = "count(*)"
        elif expr.distinct:
            text = f"count(DISTINCT {_expr_text(expr.expr, 0)})"
        else:
            text = f"count({_expr_text(expr.expr, 0)})"
        level = 5
    elif isinstance(expr, EqualsCall):
        text = f"equals({_expr_text(expr.left, 0)}, {_expr_text(expr.right, 0)})"
        level = 5
    elif isinstance(expr, PropertyAccess):
        text = f"{quote_ident(expr.var)}.{quote_ident(expr.key)}"
        level = 5
    elif isinstance(expr, Variable):
        text = quote_ident(expr.name)
        level = 5
    elif isinstance(expr, Literal):
        text = _literal_text(expr.value)
        level = 5
    else:
        raise TypeError(f"not an expression: {expr!r}")
    if level < parent_level:
        return f"({text})"
    return text


def _props_text(properties: tuple) -> str:
    inner = ", ".join(f"{quote_ident(k)}: {_literal_text(v.value)}" for k, v in properties)
    return "{" + inner + "}"


def _node_text(node: NodePattern) -> str:
    parts = []
    if node.var:
        parts.append(quote_ident(node.var))
    if node.label:
        parts.append(":" + quote_ident(node.label))
    body = "".join(parts)
    if node.properties:
        body = (body + " " if body else "") + _props_text(node.properties)
    return f"({body})"


def _hops_text(hops: Hops) -> str:
    if hops.kind == "one":
        return ""
    if hops.kind == "exact":
        return f"*{hops.lo}"
    if hops.kind == "unbounded":
        return "*"
    hi = "" if hops.hi is None else str(hops.hi)
    return f"*{hops.lo}..{hi}"


def _rel_text(rel: RelPattern) -> str:
    body = ""
    if rel.var:
        body += quote_ident(rel.var)
    if rel.types:
        body += ":" + "|".join(quote_ident(t) for t in rel.types)
    body += _hops_text(rel.hops)
    core = f"[{body}]" if body else "[]"
    if rel.direction == "out":
        return f"-{core}->"
    if rel.direction == "in":
        return f"<-{core}-"
    return f"-{core}-"


def _path_text(path: PathPattern) -> str:
    out = [_node_text(path.nodes[0])]
    for rel, node in zip(path.rels, path.nodes[1:]):
        out.append(_rel_text(rel))
        out.append(_node_text(node))
    return "".join(out)


def query_text(query: Query) -> str:
    """Canonical single-line text of a query AST."""
    parts = []
    for clause in query.clauses:
        if isinstance(clause, CreateClause):
            parts.append("CREATE " + ", ".join(_path_text(p) for p in clause.patterns))
        elif isinstance(clause, MergeClause):
            parts.append("MERGE " + _path_text(clause.pattern))
        elif isinstance(clause, MatchClause):
            kw = "OPTIONAL MATCH" if clause.optional else "MATCH"
            parts.append(kw + " " + ", ".join(_path_text(p) for p in clause.patterns))
        elif isinstance(clause, WhereClause):
            parts.append("WHERE " + expression_text(clause.expr))
        elif isinstance(clause, ReturnClause):
            kw = "RETURN DISTINCT" if clause.distinct else "RETURN"
            items = []
            for item in clause.items:
                text = expression_text(item.expr)
                if item.alias:
                    text += " AS " + quote_ident(item.alias)
                items.append(text)
            parts.append(kw + " " + ", ".join(items))
        else:
            raise TypeError(f"not a clause: {clause!r}")
    return " ".join(parts)
