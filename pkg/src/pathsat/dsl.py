"""Parser and instrumentation for the `.tp` subject language.

A subject is a single function written in a small C-like language::

    fn linear_search(a: int[], d: int, z: int) {
        let f = 0;
        let i;
        for (i = 0; i < d; i = i + 1) {
            if (a[i] == z) { f = 1; } else { f = 0; }
        }
        return f;
    }

Every ``if``/``while``/``for`` is a decision.  :func:`assign_labels` names them
``a, b, ..., z, aa, ab, ...`` in source order; those labels are the tokens of
the branch traces produced by :mod:`pathsat.interp`.

Besides the scalar ``let`` form, ``let c[m][q];`` declares a zero-filled local
array (needed to transliterate subjects that write into a scratch matrix).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

KINDS = ("int", "int[]", "int[][]")
KIND_RANK = {"int": 0, "int[]": 1, "int[][]": 2}


class FrontendError(Exception):
    """Base class for errors raised while reading a subject."""


class ParseError(FrontendError):
    def __init__(self, message: str, line: int, column: int, expected: frozenset = frozenset()):
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        detail = f"{line}:{column}: {message}"
        if self.expected:
            detail += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(detail)


class SemanticError(FrontendError):
    def __init__(self, message: str, span: Optional["Span"] = None):
        self.span = span
        prefix = f"{span.line}:{span.column}: " if span else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Span:
    line: int
    column: int


# --------------------------------------------------------------------------- AST

def _span() -> Span:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: int
    span: Span = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Index:
    name: str
    indices: tuple
    span: Span = _span()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    # Parsed only so the checker can reject it with a precise message.
    name: str
    args: tuple
    span: Span = _span()


Expr = Union[Num, Var, Index, Unary, Binary, Call]


@dataclass(frozen=True)
class Let:
    name: str
    init: Optional[Expr] = None
    dims: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class Assign:
    target: Union[Var, Index]
    value: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Block:
    stmts: tuple
    span: Span = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Block
    orelse: Optional[Block] = None
    span: Span = _span()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: Block
    span: Span = _span()


@dataclass(frozen=True)
class For:
    init: Optional[Union[Let, Assign]]
    cond: Expr
    update: Optional[Union[Let, Assign]]
    body: Block
    span: Span = _span()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    span: Span = _span()


@dataclass(frozen=True)
class Param:
    name: str
    kind: str
    span: Span = _span()

    @property
    def rank(self) -> int:
        return KIND_RANK[self.kind]


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple
    body: Block
    span: Span = _span()

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)


DECISION_NODES = (If, While, For)


# ------------------------------------------------------------------------- lexer

KEYWORDS = {"fn", "let", "if", "else", "while", "for", "return", "int"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[-+*/%<>=!(){}\[\];,:])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    column: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.column)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            if source.startswith("/*", pos):
                raise ParseError("unterminated comment", line, col)
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "ident" and text in KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ------------------------------------------------------------------------ parser

_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def _describe(self, tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def error(self, expected) -> ParseError:
        tok = self.tok
        return ParseError(f"unexpected {self._describe(tok)}", tok.line, tok.column, frozenset(expected))

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            tok = self.tok
            self.pos += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise self.error({text})
        return tok

    def ident(self) -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error({"identifier"})
        self.pos += 1
        return tok

    def program(self) -> Program:
        start = self.expect("fn")
        name = self.ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.param())
            while self.accept(","):
                params.append(self.param())
        self.expect(")")
        body = self.block()
        if self.tok.kind != "eof":
            raise self.error({"end of input"})
        return Program(name, tuple(params), body, start.span)

    def param(self) -> Param:
        tok = self.ident()
        self.expect(":")
        self.expect("int")
        kind = "int"
        for _ in range(2):
            if self.accept("["):
                self.expect("]")
                kind += "[]"
            else:
                break
        return Param(tok.text, kind, tok.span)

    def block(self) -> Block:
        start = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error({"}"})
            stmts.append(self.statement())
        self.expect("}")
        return Block(tuple(stmts), start.span)

    def statement(self):
        tok = self.tok
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = self.block() if self.accept("else") else None
            return If(cond, then, orelse, tok.span)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.block(), tok.span)
        if self.accept("for"):
            self.expect("(")
            init = None if self.at(";") else self.simple()
            self.expect(";")
            cond = self.expr()
            self.expect(";")
            update = None if self.at(")") else self.simple()
            self.expect(")")
            return For(init, cond, update, self.block(), tok.span)
        if self.accept("return"):
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return Return(value, tok.span)
        if self.at("let") or tok.kind == "ident":
            stmt = self.simple()
            self.expect(";")
            return stmt
        raise self.error({"if", "while", "for", "return", "let", "identifier", "}"})

    def simple(self):
        tok = self.tok
        if self.accept("let"):
            name = self.ident().text
            dims = []
            while self.accept("["):
                dims.append(self.expr())
                self.expect("]")
            if len(dims) > 2:
                raise ParseError("arrays have at most two dimensions", tok.line, tok.column)
            init = None
            if not dims and self.accept("="):
                init = self.expr()
            return Let(name, init, tuple(dims), tok.span)
        target = self.postfix()
        if not isinstance(target, (Var, Index)):
            raise ParseError("invalid assignment target", tok.line, tok.column, frozenset({"identifier"}))
        self.expect("=")
        return Assign(target, self.expr(), tok.span)

    def expr(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        ops = _BINARY_LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op_tok = self.tok
            self.pos += 1
            right = self.expr(level + 1)
            left = Binary(op_tok.text, left, right, op_tok.span)
        return left

    def unary(self):
        tok = self.tok
        if tok.kind == "op" and tok.text in ("-", "!"):
            self.pos += 1
            return Unary(tok.text, self.unary(), tok.span)
        return self.postfix()

    def postfix(self):
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Num(int(tok.text), tok.span)
        if tok.kind == "ident":
            self.pos += 1
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return Call(tok.text, tuple(args), tok.span)
            indices = []
            while self.accept("["):
                indices.append(self.expr())
                self.expect("]")
            if indices:
                return Index(tok.text, tuple(indices), tok.span)
            return Var(tok.text, tok.span)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error({"integer", "identifier", "(", "-", "!"})


def parse(source: str) -> Program:
    """Parse and check a subject; raises ParseError or SemanticError."""
    program = _Parser(tokenize(source)).program()
    check(program)
    return program


def parse_expression(source: str) -> Expr:
    """Parse a standalone expression (used for schema cost formulas)."""
    p = _Parser(tokenize(source))
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error({"end of input"})
    return e


# ---------------------------------------------------------------------- checker

class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.names: dict[str, int] = {}

    def lookup(self, name: str) -> Optional[int]:
        scope = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


def check(program: Program) -> None:
    """Raise SemanticError unless every name is declared before use and
    every expression is used at its declared rank."""
    top = _Scope()
    for p in program.params:
        if p.name in top.names:
            raise SemanticError(f"duplicate parameter {p.name!r}", p.span)
        top.names[p.name] = p.rank
    _check_block(program.body, _Scope(top))


def _check_block(block: Block, scope: _Scope) -> None:
    for stmt in block.stmts:
        _check_stmt(stmt, scope)


def _check_stmt(stmt, scope: _Scope) -> None:
    if isinstance(stmt, Let):
        if stmt.name in scope.names:
            raise SemanticError(f"{stmt.name!r} redeclared in the same block", stmt.span)
        for d in stmt.dims:
            _check_scalar(d, scope)
        if stmt.init is not None:
            _check_scalar(stmt.init, scope)
        scope.names[stmt.name] = len(stmt.dims)
    elif isinstance(stmt, Assign):
        _check_scalar(stmt.target, scope)
        _check_scalar(stmt.value, scope)
    elif isinstance(stmt, If):
        _check_scalar(stmt.cond, scope, "condition")
        _check_block(stmt.then, _Scope(scope))
        if stmt.orelse is not None:
            _check_block(stmt.orelse, _Scope(scope))
    elif isinstance(stmt, While):
        _check_scalar(stmt.cond, scope, "condition")
        _check_block(stmt.body, _Scope(scope))
    elif isinstance(stmt, For):
        inner = _Scope(scope)
        if stmt.init is not None:
            _check_stmt(stmt.init, inner)
        _check_scalar(stmt.cond, inner, "condition")
        if stmt.update is not None:
            _check_stmt(stmt.update, inner)
        _check_block(stmt.body, _Scope(inner))
    elif isinstance(stmt, Return):
        if stmt.value is not None:
            _check_scalar(stmt.value, scope)
    else:  # pragma: no cover - parser only builds the kinds above
        raise SemanticError(f"unknown statement {stmt!r}")


def _check_scalar(e, scope: _Scope, what: str = "expression") -> None:
    if isinstance(e, Num):
        return
    if isinstance(e, Call):
        raise SemanticError(f"call expression {e.name}(...) is not supported", e.span)
    if isinstance(e, Var):
        rank = scope.lookup(e.name)
        if rank is None:
            raise SemanticError(f"undeclared variable {e.name!r}", e.span)
        if rank != 0:
            raise SemanticError(f"non-integer {what}: {e.name!r} is an array", e.span)
        return
    if isinstance(e, Index):
        rank = scope.lookup(e.name)
        if rank is None:
            raise SemanticError(f"undeclared variable {e.name!r}", e.span)
        if rank != len(e.indices):
            raise SemanticError(
                f"{e.name!r} has {rank} dimension(s) but is indexed with {len(e.indices)}", e.span)
        for i in e.indices:
            _check_scalar(i, scope)
        return
    if isinstance(e, Unary):
        _check_scalar(e.operand, scope, what)
        return
    if isinstance(e, Binary):
        _check_scalar(e.left, scope, what)
        _check_scalar(e.right, scope, what)
        return
    raise SemanticError(f"unknown expression {e!r}")


# ----------------------------------------------------------------------- labels

def label_for(index: int) -> str:
    """Bijective base-26 name: 0 -> a, 25 -> z, 26 -> aa, 27 -> ab, ..."""
    if index < 0:
        raise ValueError(index)
    chars = []
    n = index + 1
    while n:
        n, r = divmod(n - 1, 26)
        chars.append(chr(ord("a") + r))
    return "".join(reversed(chars))


def label_index(label: str) -> int:
    if not label or not all("a" <= c <= "z" for c in label):
        raise ValueError(f"not a decision label: {label!r}")
    n = 0
    for c in label:
        n = n * 26 + (ord(c) - ord("a") + 1)
    return n - 1


@dataclass(frozen=True)
class Decision:
    id: int
    label: str
    kind: str  # "loop" | "branch"
    nesting_depth: int
    innermost_loop: bool
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class DecisionTable:
    entries: tuple

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> Decision:
        return self.entries[i]

    @property
    def labels(self) -> list[str]:
        return [d.label for d in self.entries]

    def by_label(self, label: str) -> Decision:
        i = label_index(label)
        if i >= len(self.entries):
            raise KeyError(label)
        return self.entries[i]


def _children(stmt) -> Iterator:
    if isinstance(stmt, Block):
        yield from stmt.stmts
    elif isinstance(stmt, If):
        yield stmt.then
        if stmt.orelse is not None:
            yield stmt.orelse
    elif isinstance(stmt, (While, For)):
        yield stmt.body


def iter_decisions(program: Program) -> Iterator[tuple]:
    """Yield ``(node, nesting_depth)`` for every decision, in source order."""

    def walk(node, depth):
        if isinstance(node, DECISION_NODES):
            yield node, depth
            depth += 1
        for child in _children(node):
            yield from walk(child, depth)

    yield from walk(program.body, 0)


def _contains_loop(node) -> bool:
    for child in _children(node):
        if isinstance(child, (While, For)) or _contains_loop(child):
            return True
    return False


def assign_labels(program: Program) -> DecisionTable:
    entries = []
    for i, (node, depth) in enumerate(iter_decisions(program)):
        is_loop = isinstance(node, (While, For))
        entries.append(Decision(
            id=i,
            label=label_for(i),
            kind="loop" if is_loop else "branch",
            nesting_depth=depth,
            innermost_loop=is_loop and not _contains_loop(node),
            span=node.span,
        ))
    return DecisionTable(tuple(entries))


# ---------------------------------------------------------------------- unparse

def unparse_expr(e) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Index):
        return e.name + "".join(f"[{unparse_expr(i)}]" for i in e.indices)
    if isinstance(e, Unary):
        return f"({e.op}{unparse_expr(e.operand)})"
    if isinstance(e, Binary):
        return f"({unparse_expr(e.left)} {e.op} {unparse_expr(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(unparse_expr(a) for a in e.args)})"
    raise TypeError(e)


def _unparse_simple(s) -> str:
    if isinstance(s, Let):
        text = "let " + s.name + "".join(f"[{unparse_expr(d)}]" for d in s.dims)
        if s.init is not None:
            text += " = " + unparse_expr(s.init)
        return text
    return f"{unparse_expr(s.target)} = {unparse_expr(s.value)}"


def _unparse_block(block: Block, indent: int) -> list[str]:
    lines = []
    for stmt in block.stmts:
        lines.extend(_unparse_stmt(stmt, indent))
    return lines


def _unparse_stmt(stmt, indent: int) -> list[str]:
    pad = "    " * indent
    if isinstance(stmt, (Let, Assign)):
        return [pad + _unparse_simple(stmt) + ";"]
    if isinstance(stmt, Return):
        return [pad + ("return;" if stmt.value is None else f"return {unparse_expr(stmt.value)};")]
    if isinstance(stmt, If):
        lines = [pad + f"if ({unparse_expr(stmt.cond)}) {{"]
        lines += _unparse_block(stmt.then, indent + 1)
        if stmt.orelse is not None:
            lines.append(pad + "} else {")
            lines += _unparse_block(stmt.orelse, indent + 1)
        return lines + [pad + "}"]
    if isinstance(stmt, While):
        return ([pad + f"while ({unparse_expr(stmt.cond)}) {{"]
                + _unparse_block(stmt.body, indent + 1) + [pad + "}"])
    if isinstance(stmt, For):
        init = "" if stmt.init is None else _unparse_simple(stmt.init)
        update = "" if stmt.update is None else _unparse_simple(stmt.update)
        return ([pad + f"for ({init}; {unparse_expr(stmt.cond)}; {update}) {{"]
                + _unparse_block(stmt.body, indent + 1) + [pad + "}"])
    raise TypeError(stmt)


def unparse(program: Program) -> str:
    params = ", ".join(f"{p.name}: {p.kind}" for p in program.params)
    lines = [f"fn {program.name}({params}) {{"]
    lines += _unparse_block(program.body, 1)
    lines.append("}")
    return "\n".join(lines) + "\n"
