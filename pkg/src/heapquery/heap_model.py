"""A miniature Java-like object language interpreted as graph rewriting.

Programs are class declarations plus a top-level command sequence in
assignment normal form: every command allocates (``C x = new C(...)``),
assigns a field (``x.f = y``) or invokes a method (``x.m(a, b)``), and every
body ends in a single ``return``.  The interpreter state is a PropertyGraph:

* each allocation adds an instance node labeled with the class name,
* primitive constructor arguments become properties of that node,
* reference fields become relationships labeled with the field name,
* every local variable gets a ``Local`` binder node plus a binding
  relationship named after the variable,
* every instance points at a deduplicated ``Class`` metadata node through an
  ``instanceof`` relationship.

A ``/* POINT */`` comment between top-level commands marks where
``run_to_point`` stops, which is how snapshot fixtures are produced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    ArityMismatchError,
    EvalError,
    NoSuchMethodError,
    ProgramSyntaxError,
    ReservedLabelError,
    UnboundVariableError,
    UnknownTypeError,
)
from .property_graph import (
    CLASS_LABEL,
    LOCAL_LABEL,
    RESERVED_LABELS,
    PropertyGraph,
)

PRIMITIVE_TYPES = frozenset({"int", "double", "boolean", "String"})

INSTANCEOF_LABEL = "instanceof"


# --- abstract syntax ---------------------------------------------------------


@dataclass(frozen=True)
class VarArg:
    name: str


@dataclass(frozen=True)
class NullArg:
    pass


@dataclass(frozen=True)
class LitArg:
    value: object


@dataclass(frozen=True)
class NewArg:
    """A nested allocation used directly as a constructor argument.

    It creates an instance node (and its fields) but no Local binder.
    """

    cls: str
    args: tuple


@dataclass(frozen=True)
class NodeRefArg:
    """Argument already resolved to a graph node (internal use)."""

    node_id: int


Arg = VarArg | NullArg | LitArg | NewArg | NodeRefArg


@dataclass(frozen=True)
class New:
    var: str
    cls: str
    args: tuple


@dataclass(frozen=True)
class FieldAssign:
    obj: str
    fieldname: str
    value: str


@dataclass(frozen=True)
class MethodInvoke:
    obj: str
    method: str
    args: tuple


Command = New | FieldAssign | MethodInvoke


@dataclass(frozen=True)
class Return:
    var: str | None


@dataclass(frozen=True)
class Seq:
    command: Command
    rest: "Expr"


Expr = Seq | Return


@dataclass(frozen=True)
class MethodDecl:
    name: str
    params: tuple          # of (name, type)
    return_type: str
    body: Expr


@dataclass(frozen=True)
class ClassDecl:
    name: str
    superclass: str | None
    fields: tuple          # of (name, type), own fields only
    ctor_params: tuple     # of (name, type)
    super_arg_count: int
    own_assignments: tuple  # of (field, param)
    methods: dict = field(default_factory=dict)


class ClassTable:
    """Class declarations closed under superclass references."""

    def __init__(self, classes: dict[str, ClassDecl]):
        self._classes = dict(classes)
        for decl in self._classes.values():
            if decl.superclass is not None and decl.superclass not in self._classes:
                raise UnknownTypeError(f"class {decl.name!r} extends unknown class {decl.superclass!r}")
        self._check_acyclic()

    def _check_acyclic(self):
        for name in self._classes:
            seen = set()
            cur = name
            while cur is not None:
                if cur in seen:
                    raise UnknownTypeError(f"cyclic superclass chain through {name!r}")
                seen.add(cur)
                cur = self._classes[cur].superclass

    def __contains__(self, name: str) -> bool:
        return name in self._classes

    def __getitem__(self, name: str) -> ClassDecl:
        try:
            return self._classes[name]
        except KeyError:
            raise UnknownTypeError(f"unknown class {name!r}") from None

    def names(self):
        return list(self._classes)


@dataclass
class Program:
    class_table: ClassTable
    main: Expr
    point: int | None = None  # index of the top-level command the marker precedes


# --- lookups -----------------------------------------------------------------


def fields_of(ct: ClassTable, cls: str) -> list[str]:
    """Field names of a class: superclass fields first, declaration order."""
    decl = ct[cls]
    names = fields_of(ct, decl.superclass) if decl.superclass else []
    names.extend(name for name, _ in decl.fields)
    return names


def mbody(ct: ClassTable, method: str, cls: str) -> tuple[tuple, Expr]:
    """Resolve a method body: the nearest declaration in the chain wins."""
    cur: str | None = cls
    while cur is not None:
        decl = ct[cur]
        if method in decl.methods:
            m = decl.methods[method]
            return m.params, m.body
        cur = decl.superclass
    raise NoSuchMethodError(cls, method)


def ctor_arity(ct: ClassTable, cls: str) -> int:
    return len(ct[cls].ctor_params)


# --- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<point>/\*\s*POINT\s*\*/)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<float>\d+\.\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<punct>[{}();,.=])
    """,
    re.VERBOSE | re.DOTALL,
)

_KEYWORDS = frozenset({"class", "extends", "new", "return", "null", "true", "false", "super", "this"})


@dataclass(frozen=True)
class _Token:
    kind: str  # point/float/int/string/ident/punct/eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            col = pos - line_start + 1
            raise ProgramSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok_text = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, tok_text, line, m.start() - line_start + 1))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + tok_text.rfind("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise ProgramSyntaxError(message, tok.line, tok.column)

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            self.error(f"expected {text!r}, got {tok.text!r}", tok)
        return tok

    def ident(self, what: str = "identifier") -> str:
        tok = self.next()
        if tok.kind != "ident" or tok.text in _KEYWORDS:
            self.error(f"expected {what}, got {tok.text!r}", tok)
        return tok.text

    def type_name(self) -> str:
        tok = self.next()
        if tok.kind != "ident" or (tok.text in _KEYWORDS and tok.text not in PRIMITIVE_TYPES):
            self.error(f"expected type name, got {tok.text!r}", tok)
        return tok.text

    # top level ---------------------------------------------------------------

    def parse_program(self) -> Program:
        classes: dict[str, ClassDecl] = {}
        while self.peek().text == "class":
            decl = self.parse_class()
            if decl.name in classes:
                self.error(f"class {decl.name!r} declared twice")
            classes[decl.name] = decl
        ct = ClassTable(classes)

        commands: list[Command] = []
        point: int | None = None
        ret: Return | None = None
        declared: set[str] = set()
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind == "point":
                self.next()
                if point is not None:
                    self.error("duplicate POINT marker", tok)
                point = len(commands)
                continue
            if tok.text == "return":
                ret = self.parse_return()
                break
            commands.append(self.parse_command(declared))
        if self.peek().kind == "point" and point is None:
            self.next()
            point = len(commands)
        tok = self.peek()
        if tok.kind != "eof":
            self.error(f"unexpected trailing input {tok.text!r}", tok)

        expr: Expr = ret if ret is not None else Return(None)
        for cmd in reversed(commands):
            expr = Seq(cmd, expr)
        program = Program(ct, expr, point)
        _check_types(program)
        return program

    def parse_class(self) -> ClassDecl:
        self.expect("class")
        name = self.ident("class name")
        if name in RESERVED_LABELS:
            raise ReservedLabelError(name)
        superclass = None
        if self.peek().text == "extends":
            self.next()
            superclass = self.ident("superclass name")
        self.expect("{")

        fields: list[tuple[str, str]] = []
        methods: dict[str, MethodDecl] = {}
        ctor = None
        while self.peek().text != "}":
            first = self.type_name()
            if first == name and self.peek().text == "(":
                if ctor is not None:
                    self.error(f"class {name!r} has two constructors")
                ctor = self.parse_constructor(name)
                continue
            second = self.ident("member name")
            if self.peek().text == ";":
                self.next()
                fields.append((second, first))
            elif self.peek().text == "(":
                method = self.parse_method(second, first)
                if method.name in methods:
                    self.error(f"method {method.name!r} declared twice in {name!r}")
                methods[method.name] = method
            else:
                self.error("expected ';' or '(' after member declaration")
        self.expect("}")

        if ctor is None:
            if fields or superclass is not None:
                self.error(f"class {name!r} needs a constructor")
            ctor = ((), 0, ())
        params, super_k, assignments = ctor
        own = [f for f, _ in fields]
        if [f for f, _ in assignments] != own:
            self.error(f"constructor of {name!r} must assign exactly its own fields in order: {own}")
        return ClassDecl(name, superclass, tuple(fields), params, super_k, assignments, methods)

    def parse_constructor(self, name):
        params = self.parse_params()
        self.expect("{")
        param_names = [p for p, _ in params]
        super_k = 0
        if self.peek().text == "super":
            self.next()
            self.expect("(")
            super_args = []
            while self.peek().text != ")":
                super_args.append(self.ident("parameter name"))
                if self.peek().text == ",":
                    self.next()
            self.expect(")")
            self.expect(";")
            super_k = len(super_args)
            if super_args != param_names[:super_k]:
                self.error(f"super(...) must forward the first {super_k} parameters in order")
        assignments = []
        while self.peek().text == "this":
            self.next()
            self.expect(".")
            fieldname = self.ident("field name")
            self.expect("=")
            param = self.ident("parameter name")
            self.expect(";")
            if param not in param_names:
                self.error(f"constructor of {name!r} assigns from unknown parameter {param!r}")
            assignments.append((fieldname, param))
        self.expect("}")
        return tuple(params), super_k, tuple(assignments)

    def parse_method(self, name: str, return_type: str) -> MethodDecl:
        params = self.parse_params()
        self.expect("{")
        declared = {p for p, _ in params} | {"this"}
        commands = []
        while self.peek().text != "return":
            commands.append(self.parse_command(declared))
        ret = self.parse_return()
        self.expect("}")
        body: Expr = ret
        for cmd in reversed(commands):
            body = Seq(cmd, body)
        return MethodDecl(name, tuple(params), return_type, body)

    def parse_params(self) -> tuple:
        self.expect("(")
        params = []
        seen = set()
        while self.peek().text != ")":
            ptype = self.type_name()
            pname = self.ident("parameter name")
            if pname in seen:
                self.error(f"duplicate parameter {pname!r}")
            seen.add(pname)
            params.append((pname, ptype))
            if self.peek().text == ",":
                self.next()
        self.expect(")")
        return tuple(params)

    # commands ------------------------------------------------------------------

    def parse_return(self) -> Return:
        self.expect("return")
        if self.peek().text == ";":
            self.next()
            return Return(None)
        tok = self.next()
        var = "this" if tok.text == "this" else None
        if var is None:
            if tok.kind != "ident" or tok.text in _KEYWORDS:
                self.error(f"expected variable after return, got {tok.text!r}", tok)
            var = tok.text
        self.expect(";")
        return Return(var)

    def parse_command(self, declared: set[str]) -> Command:
        tok = self.next()
        if tok.kind != "ident":
            self.error(f"expected a command, got {tok.text!r}", tok)
        nxt = self.peek()
        if nxt.kind == "ident" and nxt.text not in _KEYWORDS:
            # "<Type> <var> = new C(...);"
            var = self.ident("variable name")
            if var in declared:
                self.error(f"variable {var!r} shadows an earlier binding", nxt)
            declared.add(var)
            self.expect("=")
            self.expect("new")
            cls = self.ident("class name")
            args = self.parse_args()
            self.expect(";")
            return New(var, cls, args)
        name = tok.text
        if name in _KEYWORDS and name != "this":
            self.error(f"unexpected keyword {name!r}", tok)
        self.expect(".")
        member = self.ident("member name")
        if self.peek().text == "=":
            self.next()
            value = self.next()
            if value.kind != "ident" or (value.text in _KEYWORDS and value.text != "this"):
                self.error(f"field assignment expects a variable, got {value.text!r}", value)
            self.expect(";")
            return FieldAssign(name, member, value.text)
        self.expect("(")
        args = []
        while self.peek().text != ")":
            arg = self.next()
            if arg.kind != "ident" or (arg.text in _KEYWORDS and arg.text != "this"):
                self.error(f"method arguments must be variables, got {arg.text!r}", arg)
            args.append(arg.text)
            if self.peek().text == ",":
                self.next()
        self.expect(")")
        self.expect(";")
        return MethodInvoke(name, member, tuple(args))

    def parse_args(self) -> tuple:
        self.expect("(")
        args: list[Arg] = []
        while self.peek().text != ")":
            args.append(self.parse_arg())
            if self.peek().text == ",":
                self.next()
        self.expect(")")
        return tuple(args)

    def parse_arg(self) -> Arg:
        tok = self.next()
        if tok.text == "null":
            return NullArg()
        if tok.text == "true":
            return LitArg(True)
        if tok.text == "false":
            return LitArg(False)
        if tok.kind == "int":
            return LitArg(int(tok.text))
        if tok.kind == "float":
            return LitArg(float(tok.text))
        if tok.kind == "string":
            body = tok.text[1:-1]
            return LitArg(body.replace('\\"', '"').replace("\\\\", "\\"))
        if tok.text == "new":
            cls = self.ident("class name")
            return NewArg(cls, self.parse_args())
        if tok.kind == "ident" and (tok.text not in _KEYWORDS or tok.text == "this"):
            return VarArg(tok.text)
        self.error(f"bad constructor argument {tok.text!r}", tok)


def _check_types(program: Program):
    ct = program.class_table
    for name in ct.names():
        decl = ct[name]
        for _, ftype in decl.fields:
            if ftype not in PRIMITIVE_TYPES and ftype not in ct:
                raise UnknownTypeError(f"class {name!r} field of unknown type {ftype!r}")
        for _, ptype in decl.ctor_params:
            if ptype not in PRIMITIVE_TYPES and ptype not in ct:
                raise UnknownTypeError(f"class {name!r} constructor parameter of unknown type {ptype!r}")
        for method in decl.methods.values():
            for _, ptype in method.params:
                if ptype not in PRIMITIVE_TYPES and ptype not in ct:
                    raise UnknownTypeError(f"method {method.name!r} parameter of unknown type {ptype!r}")
            _check_expr_types(ct, method.body)
    _check_expr_types(ct, program.main)


def _check_expr_types(ct: ClassTable, expr: Expr):
    while isinstance(expr, Seq):
        cmd = expr.command
        if isinstance(cmd, New):
            _check_new_types(ct, cmd.cls, cmd.args)
        expr = expr.rest


def _check_new_types(ct: ClassTable, cls: str, args: tuple):
    if cls not in ct:
        raise UnknownTypeError(f"allocation of unknown class {cls!r}")
    for arg in args:
        if isinstance(arg, NewArg):
            _check_new_types(ct, arg.cls, arg.args)


def parse_program(text: str) -> Program:
    return _Parser(text).parse_program()


# --- evaluation ----------------------------------------------------------------


def _binding_rel(graph: PropertyGraph, name: str):
    """The binding relationship labeled ``name`` leaving a Local binder node."""
    for rel in graph.relationships():
        if rel.label == name and graph.node(rel.start).label == LOCAL_LABEL:
            return rel
    return None


def resolve_variable(graph: PropertyGraph, name: str) -> int:
    rel = _binding_rel(graph, name)
    if rel is None:
        raise UnboundVariableError(name)
    return rel.end


def _class_node(graph: PropertyGraph, cls: str) -> int:
    for node in graph.nodes_with_label(CLASS_LABEL):
        if node.properties.get("name") == cls:
            return node.id
    return graph.add_node(CLASS_LABEL, {"name": cls})


def mk_fields(graph: PropertyGraph, instance: int, cls: str, args: tuple, ct: ClassTable):
    """Field initializations for a constructor call.

    Splits the arguments across the superclass chain (the first ``k`` go to
    the superclass), resolves variable arguments through their binding
    relationships, and returns ``(edges, properties)`` where ``edges`` is a
    list of (field, start, end) relationship specs for reference fields and
    ``properties`` maps primitive fields to values.
    """
    decl = ct[cls]
    if len(args) != len(decl.ctor_params):
        raise ArityMismatchError(
            f"constructor of {cls!r} takes {len(decl.ctor_params)} argument(s), got {len(args)}"
        )
    edges: list[tuple[str, int, int]] = []
    props: dict[str, object] = {}
    k = decl.super_arg_count
    if decl.superclass is not None:
        sup_edges, sup_props = mk_fields(graph, instance, decl.superclass, args[:k], ct)
        edges.extend(sup_edges)
        props.update(sup_props)
    field_types = dict(decl.fields)
    param_index = {name: i for i, (name, _) in enumerate(decl.ctor_params)}
    for fieldname, param in decl.own_assignments:
        arg = args[param_index[param]]
        ftype = field_types[fieldname]
        if ftype in PRIMITIVE_TYPES:
            if isinstance(arg, LitArg):
                props[fieldname] = arg.value
            elif isinstance(arg, NullArg):
                pass
            else:
                raise EvalError(f"primitive field {fieldname!r} of {cls!r} needs a literal argument")
        else:
            if isinstance(arg, NullArg):
                continue
            if isinstance(arg, VarArg):
                target = resolve_variable(graph, arg.name)
            elif isinstance(arg, NodeRefArg):
                target = arg.node_id
            elif isinstance(arg, LitArg):
                raise EvalError(f"reference field {fieldname!r} of {cls!r} cannot take a literal")
            else:
                raise EvalError(f"unresolved nested allocation for field {fieldname!r}")
            edges.append((fieldname, instance, target))
    return edges, props


def _allocate(graph: PropertyGraph, cls: str, args: tuple, ct: ClassTable) -> int:
    """Create an instance node with fields and instanceof edge; no binder."""
    if cls not in ct:
        raise UnknownTypeError(f"allocation of unknown class {cls!r}")
    resolved = []
    for arg in args:
        if isinstance(arg, NewArg):
            resolved.append(NodeRefArg(_allocate(graph, arg.cls, arg.args, ct)))
        else:
            resolved.append(arg)
    instance = graph.add_node(cls)
    edges, props = mk_fields(graph, instance, cls, tuple(resolved), ct)
    node = graph.node(instance)
    node.properties.update(props)
    graph.add_relationship(INSTANCEOF_LABEL, instance, _class_node(graph, cls))
    for fieldname, start, end in edges:
        graph.add_relationship(fieldname, start, end)
    return instance


def step_command(graph: PropertyGraph, cmd: Command, ct: ClassTable) -> PropertyGraph:
    """Apply one command to the graph (mutating it) and return the graph."""
    if isinstance(cmd, FieldAssign):
        start = resolve_variable(graph, cmd.obj)
        end = resolve_variable(graph, cmd.value)
        graph.set_field_edge(cmd.fieldname, start, end)
        return graph
    if isinstance(cmd, MethodInvoke):
        recv = resolve_variable(graph, cmd.obj)
        cls = graph.node(recv).label
        params, body = mbody(ct, cmd.method, cls)
        if len(cmd.args) != len(params):
            raise ArityMismatchError(
                f"method {cmd.method!r} takes {len(params)} argument(s), got {len(cmd.args)}"
            )
        subst = {pname: arg for (pname, _), arg in zip(params, cmd.args)}
        subst["this"] = cmd.obj
        return eval_expr(graph, _substitute(body, subst), ct)
    if isinstance(cmd, New):
        if _binding_rel(graph, cmd.var) is not None:
            raise EvalError(f"variable {cmd.var!r} is already bound")
        instance = _allocate(graph, cmd.cls, cmd.args, ct)
        binder = graph.add_node(LOCAL_LABEL)
        graph.add_relationship(cmd.var, binder, instance)
        return graph
    raise EvalError(f"unknown command {cmd!r}")


def eval_expr(graph: PropertyGraph, expr: Expr, ct: ClassTable) -> PropertyGraph:
    """Big-step evaluation: returns leave the graph unchanged, sequences compose."""
    while isinstance(expr, Seq):
        graph = step_command(graph, expr.command, ct)
        expr = expr.rest
    return graph


def _substitute(expr: Expr, subst: dict[str, str]) -> Expr:
    def sub(name: str) -> str:
        return subst.get(name, name)

    def sub_arg(arg: Arg) -> Arg:
        if isinstance(arg, VarArg):
            return VarArg(sub(arg.name))
        if isinstance(arg, NewArg):
            return NewArg(arg.cls, tuple(sub_arg(a) for a in arg.args))
        return arg

    if isinstance(expr, Return):
        return Return(sub(expr.var) if expr.var else None)
    cmd = expr.command
    if isinstance(cmd, New):
        new_cmd: Command = New(cmd.var, cmd.cls, tuple(sub_arg(a) for a in cmd.args))
    elif isinstance(cmd, FieldAssign):
        new_cmd = FieldAssign(sub(cmd.obj), cmd.fieldname, sub(cmd.value))
    else:
        new_cmd = MethodInvoke(sub(cmd.obj), cmd.method, tuple(sub(a) for a in cmd.args))
    return Seq(new_cmd, _substitute(expr.rest, subst))


def run_program(program: Program) -> PropertyGraph:
    return eval_expr(PropertyGraph(), program.main, program.class_table)


def run_to_point(text: str) -> PropertyGraph:
    """Evaluate a program up to its ``/* POINT */`` marker.

    Without a marker the final graph is returned.
    """
    program = parse_program(text)
    graph = PropertyGraph()
    if program.point is None:
        return eval_expr(graph, program.main, program.class_table)
    expr = program.main
    for _ in range(program.point):
        if not isinstance(expr, Seq):
            break
        graph = step_command(graph, expr.command, program.class_table)
        expr = expr.rest
    return graph
