"""Recursive-descent parser for .bc programs and standalone conditions."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .lang import (
    And,
    ArrayRef,
    Assign,
    BinOp,
    Compare,
    Cond,
    Diagnostic,
    Expr,
    If,
    IntLit,
    Neg,
    Not,
    Or,
    ParamDecl,
    Pos,
    Program,
    Skip,
    SourceError,
    Stmt,
    VarRef,
    While,
)

KEYWORDS = {"fun", "requires", "if", "else", "while", "cap", "skip", "int"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\.\.|&&|\|\||==|!=|<=|>=|[-+*/%<>=!(){}\[\],;:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | keyword or operator text | "eof"
    text: str
    pos: Pos


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise SourceError(Diagnostic(f"unexpected character {source[i]!r}", Pos(line, col)))
        text = m.group(0)
        pos = Pos(line, col)
        if m.lastgroup == "int":
            tokens.append(Token("int", text, pos))
        elif m.lastgroup == "ident":
            kind = text if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, pos))
        elif m.lastgroup == "op":
            tokens.append(Token(text, text, pos))
        # advance line/col over the lexeme
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        i = m.end()
    tokens.append(Token("eof", "", Pos(line, col)))
    return tokens


class _ParseFail(Exception):
    """Internal backtracking signal; never escapes the parser."""


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # --- token plumbing ---

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.next()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind:
            expected = what or repr(kind)
            found = t.text or "end of input"
            raise SourceError(Diagnostic(f"expected {expected}, found {found!r}", t.pos))
        return self.next()

    # --- grammar ---

    def parse_program(self) -> Program:
        start = self.expect("fun").pos
        name = self.expect("ident", "function name").text
        self.expect("(")
        params: list[ParamDecl] = []
        if not self.at(")"):
            params.append(self.parse_param())
            while self.accept(","):
                params.append(self.parse_param())
        self.expect(")")
        requires = None
        if self.accept("requires"):
            requires = self.parse_cond()
            self.expect(";")
        body = self.parse_block()
        self.expect("eof", "end of input")
        prog = Program(name, tuple(params), requires, body, start)
        _check_names(prog)
        return prog

    def parse_param(self) -> ParamDecl:
        name_tok = self.expect("ident", "parameter name")
        self.expect(":")
        self.expect("int")
        self.expect("[")
        first = self.parse_signed_int()
        if self.accept(".."):
            hi = self.parse_signed_int()
            self.expect("]")
            return ParamDecl(name_tok.text, None, first, hi, name_tok.pos)
        self.expect("]")
        self.expect("[")
        lo = self.parse_signed_int()
        self.expect("..")
        hi = self.parse_signed_int()
        self.expect("]")
        return ParamDecl(name_tok.text, first, lo, hi, name_tok.pos)

    def parse_signed_int(self) -> int:
        neg = self.accept("-") is not None
        tok = self.expect("int", "integer")
        v = int(tok.text)
        return -v if neg else v

    def parse_block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            stmts.append(self.parse_stmt())
        self.expect("}")
        return tuple(stmts)

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if t.kind == "skip":
            self.next()
            self.expect(";")
            return Skip(t.pos)
        if t.kind == "if":
            return self.parse_if()
        if t.kind == "while":
            self.next()
            self.expect("(")
            cond = self.parse_cond()
            self.expect(")")
            cap = None
            if self.accept("cap"):
                cap_tok = self.expect("int", "loop cap")
                cap = int(cap_tok.text)
            body = self.parse_block()
            return While(cond, cap, body, t.pos)
        if t.kind == "ident":
            name = self.next()
            target: VarRef | ArrayRef
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                target = ArrayRef(name.text, idx, name.pos)
            else:
                target = VarRef(name.text, name.pos)
            self.expect("=", "'='")
            value = self.parse_expr()
            self.expect(";")
            return Assign(target, value, t.pos)
        raise SourceError(Diagnostic(f"expected statement, found {t.text or 'end of input'!r}", t.pos))

    def parse_if(self) -> If:
        t = self.expect("if")
        self.expect("(")
        cond = self.parse_cond()
        self.expect(")")
        then_body = self.parse_block()
        else_body: tuple[Stmt, ...] = ()
        if self.accept("else"):
            if self.at("if"):
                else_body = (self.parse_if(),)
            else:
                else_body = self.parse_block()
        return If(cond, then_body, else_body, t.pos)

    # conditions: or- over and- over unary

    def parse_cond(self) -> Cond:
        left = self.parse_and()
        while self.at("||"):
            op = self.next()
            right = self.parse_and()
            left = Or(left, right, op.pos)
        return left

    def parse_and(self) -> Cond:
        left = self.parse_cond_unary()
        while self.at("&&"):
            op = self.next()
            right = self.parse_cond_unary()
            left = And(left, right, op.pos)
        return left

    def parse_cond_unary(self) -> Cond:
        t = self.peek()
        if t.kind == "!":
            self.next()
            return Not(self.parse_cond_unary(), t.pos)
        # Ambiguity: "(" may open a parenthesised condition or an expression
        # that is the left side of a comparison. Try the comparison first and
        # backtrack to the condition reading if it does not parse.
        if t.kind == "(":
            mark = self.i
            try:
                return self.parse_comparison()
            except _ParseFail:
                self.i = mark
            self.next()  # "("
            inner = self.parse_cond()
            self.expect(")")
            return inner
        return self.parse_comparison()

    def parse_comparison(self) -> Compare:
        start = self.peek().pos
        left = self.parse_expr(backtrackable=True)
        t = self.peek()
        if t.kind == "=":
            raise SourceError(Diagnostic("assignment not allowed in condition", t.pos))
        if t.kind not in ("<", "<=", "==", "!=", ">", ">="):
            raise _ParseFail()
        self.next()
        right = self.parse_expr(backtrackable=True)
        return Compare(t.kind, left, right, start)

    # expressions

    def parse_expr(self, backtrackable: bool = False) -> Expr:
        left = self.parse_term(backtrackable)
        while self.peek().kind in ("+", "-"):
            op = self.next()
            right = self.parse_term(backtrackable)
            left = BinOp(op.kind, left, right, op.pos)
        return left

    def parse_term(self, backtrackable: bool = False) -> Expr:
        left = self.parse_unary(backtrackable)
        while self.peek().kind in ("*", "/", "%"):
            op = self.next()
            right = self.parse_unary(backtrackable)
            left = BinOp(op.kind, left, right, op.pos)
        return left

    def parse_unary(self, backtrackable: bool = False) -> Expr:
        t = self.peek()
        if t.kind == "-":
            self.next()
            return Neg(self.parse_unary(backtrackable), t.pos)
        return self.parse_primary(backtrackable)

    def parse_primary(self, backtrackable: bool = False) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.text), t.pos)
        if t.kind == "ident":
            self.next()
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                return ArrayRef(t.text, idx, t.pos)
            return VarRef(t.text, t.pos)
        if t.kind == "(":
            self.next()
            expr = self.parse_expr(backtrackable)
            if backtrackable and not self.at(")"):
                raise _ParseFail()
            self.expect(")")
            return expr
        if backtrackable:
            raise _ParseFail()
        raise SourceError(Diagnostic(f"expected expression, found {t.text or 'end of input'!r}", t.pos))


def _expr_reads(e: Expr) -> list[tuple[str, Pos, bool]]:
    """(name, position, is_array_access) for every identifier read in e."""
    out: list[tuple[str, Pos, bool]] = []
    if isinstance(e, VarRef):
        out.append((e.name, e.pos, False))
    elif isinstance(e, ArrayRef):
        out.append((e.name, e.pos, True))
        out.extend(_expr_reads(e.index))
    elif isinstance(e, Neg):
        out.extend(_expr_reads(e.operand))
    elif isinstance(e, BinOp):
        out.extend(_expr_reads(e.left))
        out.extend(_expr_reads(e.right))
    return out


def _cond_reads(c: Cond) -> list[tuple[str, Pos, bool]]:
    if isinstance(c, Compare):
        return _expr_reads(c.left) + _expr_reads(c.right)
    if isinstance(c, Not):
        return _cond_reads(c.operand)
    return _cond_reads(c.left) + _cond_reads(c.right)


def _check_names(prog: Program) -> None:
    """Duplicate parameters and reads of identifiers with no earlier definition."""
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for p in prog.params:
        if p.name in seen:
            diags.append(Diagnostic(f"duplicate parameter {p.name!r}", p.pos))
        seen.add(p.name)

    defined = set(seen)

    def flag_reads(reads: list[tuple[str, Pos, bool]]) -> None:
        for name, pos, _ in reads:
            if name not in defined:
                diags.append(Diagnostic(f"use of undeclared identifier {name!r}", pos))

    if prog.requires is not None:
        flag_reads(_cond_reads(prog.requires))

    def walk(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                if isinstance(s.target, ArrayRef):
                    flag_reads([(s.target.name, s.target.pos, True)])
                    flag_reads(_expr_reads(s.target.index))
                flag_reads(_expr_reads(s.value))
                defined.add(s.target.name)
            elif isinstance(s, If):
                flag_reads(_cond_reads(s.cond))
                walk(s.then_body)
                walk(s.else_body)
            elif isinstance(s, While):
                flag_reads(_cond_reads(s.cond))
                walk(s.body)

    walk(prog.body)
    if diags:
        raise SourceError(diags)


def parse_program(source: str) -> Program:
    return Parser(tokenize(source)).parse_program()


def parse_condition(source: str) -> Cond:
    """Parse a standalone condition (for --precondition strings)."""
    p = Parser(tokenize(source))
    cond = p.parse_cond()
    p.expect("eof", "end of condition")
    return cond
