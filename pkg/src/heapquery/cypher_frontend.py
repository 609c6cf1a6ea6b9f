"""Lexer, parser and validator for the openCypher subset, and the
positional-argument expander that runs before parsing.

Supported: CREATE, MERGE, MATCH, OPTIONAL MATCH, WHERE, RETURN [DISTINCT],
node/relationship patterns with label alternation and hop specifications,
comparisons, AND/OR/NOT, count(...), equals(...), literals and AS aliases.
Recognized openCypher constructs outside the subset raise
UnsupportedFeatureError naming the construct.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cypher_ast import (
    And,
    Comparison,
    Count,
    CreateClause,
    EqualsCall,
    Hops,
    HOPS_ONE,
    Literal,
    MatchClause,
    MergeClause,
    NodePattern,
    Not,
    Or,
    PathPattern,
    PropertyAccess,
    Query,
    RelPattern,
    ReturnClause,
    ReturnItem,
    Variable,
    WhereClause,
)
from .errors import ExpansionError, QuerySyntaxError, UnsupportedFeatureError
from .property_graph import UID_KEY

# openCypher keywords we recognize but do not support.
UNSUPPORTED_KEYWORDS = frozenset(
    """
    WITH UNWIND SET DELETE DETACH REMOVE ORDER SKIP LIMIT UNION CALL FOREACH
    CASE EXISTS LOAD USING START YIELD XOR IN IS CONTAINS STARTS ENDS
    """.split()
)

_CLAUSE_KEYWORDS = frozenset({"CREATE", "MERGE", "MATCH", "OPTIONAL", "WHERE", "RETURN"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")
  | (?P<backtick>`(?:[^`]|``)*`)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|<>|<-|->|\.\.|[()\[\]{},:.|*=<>-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # float/int/string/ident/backtick/op/eof
    text: str
    line: int
    column: int

    def keyword(self) -> str | None:
        """Uppercase form when the token can act as a keyword."""
        if self.kind == "ident":
            return self.text.upper()
        return None


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok, line, m.start() - line_start + 1))
        if "\n" in tok:
            line += tok.count("\n")
            line_start = m.start() + tok.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, len(text) - line_start + 1))
    return tokens


def _unescape_string(text: str) -> str:
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _unescape_backtick(text: str) -> str:
    return text[1:-1].replace("``", "`")


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise QuerySyntaxError(message, tok.line, tok.column)

    def expect_op(self, op: str) -> Token:
        tok = self.advance()
        if tok.kind != "op" or tok.text != op:
            self.error(f"expected {op!r}, got {tok.text or 'end of query'!r}", tok)
        return tok

    def at_op(self, op: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == "op" and tok.text == op

    def at_keyword(self, word: str) -> bool:
        return self.peek().keyword() == word

    def take_keyword(self, word: str) -> bool:
        if self.at_keyword(word):
            self.advance()
            return True
        return False

    def name(self, what: str = "identifier") -> str:
        tok = self.advance()
        if tok.kind == "backtick":
            text = _unescape_backtick(tok.text)
            if not text:
                self.error(f"empty {what}", tok)
            return text
        if tok.kind == "ident":
            kw = tok.text.upper()
            if kw in UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeatureError(kw)
            if kw in _CLAUSE_KEYWORDS or kw in ("AND", "OR", "NOT", "TRUE", "FALSE", "NULL", "DISTINCT", "AS"):
                self.error(f"expected {what}, got keyword {tok.text!r}", tok)
            return tok.text
        self.error(f"expected {what}, got {tok.text or 'end of query'!r}", tok)

    # --- query ------------------------------------------------------------------

    def parse_query(self) -> Query:
        clauses = []
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            kw = tok.keyword()
            if kw in UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeatureError(kw)
            if kw == "CREATE":
                self.advance()
                clauses.append(CreateClause(tuple(self.parse_pattern_list())))
            elif kw == "MERGE":
                self.advance()
                clauses.append(MergeClause(self.parse_path()))
            elif kw == "OPTIONAL":
                self.advance()
                if not self.take_keyword("MATCH"):
                    self.error("expected MATCH after OPTIONAL")
                clauses.append(MatchClause(tuple(self.parse_pattern_list()), optional=True))
            elif kw == "MATCH":
                self.advance()
                clauses.append(MatchClause(tuple(self.parse_pattern_list())))
            elif kw == "WHERE":
                self.advance()
                clauses.append(WhereClause(self.parse_expression()))
            elif kw == "RETURN":
                self.advance()
                clauses.append(self.parse_return())
            else:
                self.error(f"expected a clause keyword, got {tok.text!r}", tok)
        if not clauses:
            self.error("empty query")
        return Query(tuple(clauses))

    def parse_return(self) -> ReturnClause:
        distinct = self.take_keyword("DISTINCT")
        items = [self.parse_return_item()]
        while self.at_op(","):
            self.advance()
            items.append(self.parse_return_item())
        return ReturnClause(tuple(items), distinct)

    def parse_return_item(self) -> ReturnItem:
        expr = self.parse_expression()
        alias = None
        if self.take_keyword("AS"):
            alias = self.name("alias")
        return ReturnItem(expr, alias)

    # --- patterns ------------------------------------------------------------------

    def parse_pattern_list(self) -> list[PathPattern]:
        paths = [self.parse_path()]
        while self.at_op(","):
            self.advance()
            paths.append(self.parse_path())
        return paths

    def parse_path(self) -> PathPattern:
        nodes = [self.parse_node_pattern()]
        rels = []
        while self.at_op("-") or self.at_op("<-"):
            rels.append(self.parse_rel_pattern())
            nodes.append(self.parse_node_pattern())
        return PathPattern(tuple(nodes), tuple(rels))

    def parse_node_pattern(self) -> NodePattern:
        self.expect_op("(")
        var = None
        label = None
        props: tuple = ()
        if self.peek().kind in ("ident", "backtick") and self.peek().keyword() not in UNSUPPORTED_KEYWORDS:
            var = self.name("variable")
        if self.at_op(":"):
            self.advance()
            label = self.name("label")
        if self.at_op("{"):
            props = self.parse_property_map()
        self.expect_op(")")
        return NodePattern(var, label, props)

    def parse_property_map(self) -> tuple:
        self.expect_op("{")
        entries = []
        while not self.at_op("}"):
            key = self.name("property key")
            self.expect_op(":")
            entries.append((key, self.parse_literal()))
            if self.at_op(","):
                self.advance()
            elif not self.at_op("}"):
                self.error("expected ',' or '}' in property map")
        self.expect_op("}")
        return tuple(entries)

    def parse_rel_pattern(self) -> RelPattern:
        if self.at_op("<-"):
            self.advance()
            direction = "in"
        else:
            self.expect_op("-")
            direction = None  # decided by the closing arrow

        var = None
        types: tuple = ()
        hops = HOPS_ONE
        if self.at_op("["):
            self.advance()
            if self.peek().kind in ("ident", "backtick") and not self.at_op(":"):
                var = self.name("relationship variable")
            if self.at_op(":"):
                self.advance()
                names = [self.name("relationship type")]
                while self.at_op("|"):
                    self.advance()
                    if self.at_op(":"):
                        self.advance()
                    names.append(self.name("relationship type"))
                types = tuple(names)
            if self.at_op("*"):
                hops = self.parse_hops()
            if self.at_op("{"):
                raise UnsupportedFeatureError("relationship property maps")
            self.expect_op("]")

        if direction == "in":
            self.expect_op("-")
            if self.at_op(">"):
                self.error("relationship pattern cannot point both ways")
            return RelPattern(var, types, "in", hops)
        if self.at_op("->"):
            self.advance()
            return RelPattern(var, types, "out", hops)
        self.expect_op("-")
        if self.at_op(">"):
            self.advance()
            return RelPattern(var, types, "out", hops)
        return RelPattern(var, types, "both", hops)

    def parse_hops(self) -> Hops:
        self.expect_op("*")
        lo = None
        hi = None
        if self.peek().kind == "int":
            lo = int(self.advance().text)
        if self.at_op(".."):
            self.advance()
            if self.peek().kind == "int":
                hi = int(self.advance().text)
            return Hops("range", lo if lo is not None else 1, hi)
        if lo is not None:
            return Hops("exact", lo, lo)
        return Hops("unbounded")

    # --- expressions -----------------------------------------------------------------

    def parse_expression(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.take_keyword("OR"):
            left = Or(left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.take_keyword("AND"):
            left = And(left, self.parse_not())
        return left

    def parse_not(self):
        if self.take_keyword("NOT"):
            return Not(self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self):
        left = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("=", "<>", "<", "<=", ">", ">="):
            self.advance()
            right = self.parse_atom()
            return Comparison(tok.text, left, right)
        return left

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            expr = self.parse_expression()
            self.expect_op(")")
            return expr
        kw = tok.keyword()
        if kw == "NULL":
            raise UnsupportedFeatureError("NULL literals")
        if kw == "TRUE":
            self.advance()
            return Literal(True)
        if kw == "FALSE":
            self.advance()
            return Literal(False)
        if tok.kind in ("int", "float") or (tok.kind == "op" and tok.text == "-"):
            return self.parse_literal_expr()
        if tok.kind == "string":
            self.advance()
            return Literal(_unescape_string(tok.text))
        if tok.kind == "ident" and self.at_op("(", ahead=1):
            name = tok.text.upper()
            if name == "COUNT":
                self.advance()
                return self.parse_count()
            if name == "EQUALS":
                self.advance()
                self.expect_op("(")
                left = self.parse_expression()
                self.expect_op(",")
                right = self.parse_expression()
                self.expect_op(")")
                return EqualsCall(left, right)
            raise UnsupportedFeatureError(f"function {tok.text}()")
        if tok.kind in ("ident", "backtick"):
            var = self.name("variable")
            if self.at_op("."):
                self.advance()
                key = self.name("property key")
                return PropertyAccess(var, key)
            return Variable(var)
        self.error(f"expected an expression, got {tok.text or 'end of query'!r}", tok)

    def parse_count(self) -> Count:
        self.expect_op("(")
        if self.at_op("*"):
            self.advance()
            self.expect_op(")")
            return Count(None)
        distinct = self.take_keyword("DISTINCT")
        expr = self.parse_expression()
        self.expect_op(")")
        return Count(expr, distinct)

    def parse_literal_expr(self) -> Literal:
        negative = False
        if self.at_op("-"):
            self.advance()
            negative = True
        tok = self.advance()
        if tok.kind == "int":
            value: object = -int(tok.text) if negative else int(tok.text)
        elif tok.kind == "float":
            value = -float(tok.text) if negative else float(tok.text)
        else:
            self.error(f"expected a number, got {tok.text!r}", tok)
        return Literal(value)

    def parse_literal(self) -> Literal:
        tok = self.peek()
        kw = tok.keyword()
        if kw == "TRUE":
            self.advance()
            return Literal(True)
        if kw == "FALSE":
            self.advance()
            return Literal(False)
        if kw == "NULL":
            raise UnsupportedFeatureError("NULL property values")
        if tok.kind == "string":
            self.advance()
            return Literal(_unescape_string(tok.text))
        return self.parse_literal_expr()


def parse(text: str) -> Query:
    """Parse query text into a Query AST (no validation)."""
    parser = _Parser(text)
    query = parser.parse_query()
    tok = parser.peek()
    if tok.kind != "eof":
        parser.error(f"unexpected trailing input {tok.text!r}", tok)
    return query


# --- validation -----------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    message: str

    def __str__(self) -> str:
        return self.message


def validate(query: Query) -> list[Diagnostic]:
    """Static checks over a parsed query; an empty list means valid."""
    out: list[Diagnostic] = []
    bound: dict[str, str] = {}  # variable -> node|rel

    def bind(var: str | None, kind: str):
        if var is None:
            return
        if bound.get(var, kind) != kind:
            out.append(Diagnostic(f"variable {var!r} is used both as a {bound[var]} and a {kind}"))
        bound.setdefault(var, kind)

    def check_expr(expr, *, aggregates_allowed: bool, in_aggregate: bool = False):
        if isinstance(expr, Variable):
            if expr.name not in bound:
                out.append(Diagnostic(f"unbound variable {expr.name!r}"))
        elif isinstance(expr, PropertyAccess):
            if expr.var not in bound:
                out.append(Diagnostic(f"unbound variable {expr.var!r}"))
        elif isinstance(expr, Count):
            if not aggregates_allowed:
                out.append(Diagnostic("count(...) is only allowed in RETURN items"))
            elif in_aggregate:
                out.append(Diagnostic("nested count(...) is not allowed"))
            if expr.expr is not None:
                check_expr(expr.expr, aggregates_allowed=aggregates_allowed, in_aggregate=True)
        elif isinstance(expr, EqualsCall):
            check_expr(expr.left, aggregates_allowed=aggregates_allowed, in_aggregate=in_aggregate)
            check_expr(expr.right, aggregates_allowed=aggregates_allowed, in_aggregate=in_aggregate)
        elif isinstance(expr, Comparison):
            check_expr(expr.left, aggregates_allowed=aggregates_allowed, in_aggregate=in_aggregate)
            check_expr(expr.right, aggregates_allowed=aggregates_allowed, in_aggregate=in_aggregate)
        elif isinstance(expr, (And, Or)):
            check_expr(expr.left, aggregates_allowed=aggregates_allowed, in_aggregate=in_aggregate)
            check_expr(expr.right, aggregates_allowed=aggregates_allowed, in_aggregate=in_aggregate)
        elif isinstance(expr, Not):
            check_expr(expr.operand, aggregates_allowed=aggregates_allowed, in_aggregate=in_aggregate)

    def check_write_pattern(path: PathPattern, clause_name: str):
        states = []
        for node in path.nodes:
            was_bound = node.var is not None and node.var in bound
            states.append(was_bound)
            if was_bound:
                if node.label or node.properties:
                    out.append(
                        Diagnostic(f"{clause_name} may not restate label/properties of bound variable {node.var!r}")
                    )
            else:
                if not node.label:
                    out.append(Diagnostic(f"{clause_name} requires a label on new node {node.var or '(anonymous)'}"))
                elif node.label in ("Local", "Class"):
                    out.append(Diagnostic(f"label {node.label!r} is reserved and cannot be {clause_name.lower()}d"))
            for key, _ in node.properties:
                if key == UID_KEY:
                    out.append(Diagnostic(f"property key {UID_KEY!r} is reserved and cannot be written"))
            bind(node.var, "node")
        if clause_name == "MERGE" and len(set(states)) > 1:
            out.append(Diagnostic("MERGE patterns must use either all-bound or all-unbound node variables"))
        for rel in path.rels:
            if rel.var is not None and rel.var in bound:
                out.append(Diagnostic(f"{clause_name} cannot reuse bound relationship variable {rel.var!r}"))
            if len(rel.types) != 1:
                out.append(Diagnostic(f"{clause_name} relationships need exactly one type"))
            if rel.direction == "both":
                out.append(Diagnostic(f"{clause_name} relationships must be directed"))
            if rel.hops.variable_length:
                out.append(Diagnostic(f"{clause_name} relationships cannot be variable-length"))
            bind(rel.var, "rel")

    def check_match_pattern(path: PathPattern):
        for node in path.nodes:
            bind(node.var, "node")
        for rel in path.rels:
            if rel.hops.variable_length:
                if rel.var is not None:
                    out.append(Diagnostic("variable-length relationships cannot be bound to a variable"))
                lo, hi = rel.hops.bounds()
                if rel.hops.kind == "exact" and lo < 1:
                    out.append(Diagnostic("exact hop count must be at least 1"))
                if lo is not None and lo < 0:
                    out.append(Diagnostic("hop bounds cannot be negative"))
                if hi is not None and lo is not None and hi < lo:
                    out.append(Diagnostic(f"hop range {lo}..{hi} is empty"))
            else:
                bind(rel.var, "rel")

    returns = [i for i, c in enumerate(query.clauses) if isinstance(c, ReturnClause)]
    if len(returns) != 1:
        out.append(Diagnostic("query must have exactly one RETURN clause"))
    elif returns[0] != len(query.clauses) - 1:
        out.append(Diagnostic("RETURN must be the last clause"))

    for i, clause in enumerate(query.clauses):
        if isinstance(clause, CreateClause):
            for path in clause.patterns:
                check_write_pattern(path, "CREATE")
        elif isinstance(clause, MergeClause):
            check_write_pattern(clause.pattern, "MERGE")
        elif isinstance(clause, MatchClause):
            for path in clause.patterns:
                check_match_pattern(path)
        elif isinstance(clause, WhereClause):
            prev = query.clauses[i - 1] if i > 0 else None
            if not isinstance(prev, MatchClause):
                out.append(Diagnostic("WHERE must immediately follow a MATCH clause"))
            check_expr(clause.expr, aggregates_allowed=False)
        elif isinstance(clause, ReturnClause):
            has_count = [bool(_find_counts(item.expr)) for item in clause.items]
            if any(has_count) and not all(has_count):
                out.append(Diagnostic("mixing aggregated and plain RETURN items is not supported"))
            for item in clause.items:
                check_expr(item.expr, aggregates_allowed=True)
    return out


def lint(query: Query) -> list[Diagnostic]:
    """Non-fatal warnings for valid queries.

    Created graph entities that a query does not return cannot be referenced
    afterwards by the caller, which is usually a mistake.
    """
    created: set[str] = set()
    for clause in query.clauses:
        if isinstance(clause, CreateClause):
            paths = clause.patterns
        elif isinstance(clause, MergeClause):
            paths = (clause.pattern,)
        else:
            continue
        for path in paths:
            for node in path.nodes:
                if node.var:
                    created.add(node.var)
            for rel in path.rels:
                if rel.var:
                    created.add(rel.var)
    if not created:
        return []
    returned: set[str] = set()
    for clause in query.clauses:
        if isinstance(clause, ReturnClause):
            for item in clause.items:
                returned |= _expr_variables(item.expr)
    if created & returned:
        return []
    return [Diagnostic("query creates entities but returns none of them; they cannot be referenced afterwards")]


def _expr_variables(expr) -> set[str]:
    if isinstance(expr, Variable):
        return {expr.name}
    if isinstance(expr, PropertyAccess):
        return {expr.var}
    if isinstance(expr, Count):
        return _expr_variables(expr.expr) if expr.expr is not None else set()
    if isinstance(expr, (And, Or, Comparison, EqualsCall)):
        return _expr_variables(expr.left) | _expr_variables(expr.right)
    if isinstance(expr, Not):
        return _expr_variables(expr.operand)
    return set()


def _find_counts(expr) -> list[Count]:
    found = []
    if isinstance(expr, Count):
        found.append(expr)
        if expr.expr is not None:
            found.extend(_find_counts(expr.expr))
    elif isinstance(expr, (And, Or)):
        found.extend(_find_counts(expr.left))
        found.extend(_find_counts(expr.right))
    elif isinstance(expr, Comparison):
        found.extend(_find_counts(expr.left))
        found.extend(_find_counts(expr.right))
    elif isinstance(expr, EqualsCall):
        found.extend(_find_counts(expr.left))
        found.extend(_find_counts(expr.right))
    elif isinstance(expr, Not):
        found.extend(_find_counts(expr.operand))
    return found


# --- positional arguments -----------------------------------------------------------


@dataclass(frozen=True)
class Expansion:
    """Result of positional-argument expansion.

    ``text`` is the expanded query when no ``[]`` marker is present;
    ``batch`` is the per-element expansion list otherwise.
    """

    text: str | None
    batch: tuple | None = None

    @property
    def is_batch(self) -> bool:
        return self.batch is not None

    def queries(self) -> list[str]:
        return list(self.batch) if self.is_batch else [self.text]


_MARKER_RE = re.compile(r"\$(\d+)|@(\d+)|\[\](\d+)")


def _argument(args, index: int, marker: str):
    if index < 1 or index > len(args):
        raise ExpansionError(f"positional argument {marker}{index} is out of range (got {len(args)} arguments)")
    return args[index - 1]


def expand_positional(fmt: str, args) -> Expansion:
    """Expand ``$k`` (unique id), ``@k`` (class name) and ``[]k`` (batch) markers.

    Markers inside string literals or backtick quotes are left alone, and
    text outside markers is preserved byte for byte.  At most one ``[]``
    marker is supported; it produces one query per collection element whose
    results are bag-unioned by the engine.
    """
    args = list(args)
    pieces: list[str] = []
    batch_site: int | None = None
    batch_values: list[int] | None = None
    i = 0
    n = len(fmt)
    while i < n:
        ch = fmt[i]
        if ch == "`":
            end = fmt.find("`", i + 1)
            if end == -1:
                pieces.append(fmt[i:])
                break
            pieces.append(fmt[i : end + 1])
            i = end + 1
            continue
        if ch in ("'", '"'):
            j = i + 1
            while j < n:
                if fmt[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if fmt[j] == ch:
                    break
                j += 1
            pieces.append(fmt[i : j + 1])
            i = j + 1
            continue
        m = _MARKER_RE.match(fmt, i)
        if not m:
            pieces.append(ch)
            i += 1
            continue
        if m.group(1) is not None:
            index = int(m.group(1))
            value = _argument(args, index, "$")
            if isinstance(value, bool) or not isinstance(value, int):
                raise ExpansionError(f"${index} needs a unique id (integer), got {value!r}")
            pieces.append(f"`{UID_KEY}`: {value}")
        elif m.group(2) is not None:
            index = int(m.group(2))
            value = _argument(args, index, "@")
            if not isinstance(value, str) or not value:
                raise ExpansionError(f"@{index} needs a class name (string), got {value!r}")
            pieces.append("`" + value.replace("`", "``") + "`")
        else:
            index = int(m.group(3))
            value = _argument(args, index, "[]")
            if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
                raise ExpansionError(f"[]{index} needs a collection of unique ids, got {value!r}")
            elements = list(value)
            for element in elements:
                if isinstance(element, bool) or not isinstance(element, int):
                    raise ExpansionError(f"[]{index} elements must be unique ids (integers), got {element!r}")
            if batch_site is not None:
                raise ExpansionError("only one [] marker is supported per query")
            batch_site = len(pieces)
            batch_values = elements
            pieces.append("")  # placeholder
        i = m.end()

    if batch_site is None:
        return Expansion("".join(pieces))
    texts = []
    for element in batch_values:
        pieces[batch_site] = f"`{UID_KEY}`: {element}"
        texts.append("".join(pieces))
    return Expansion(None, tuple(texts))
