"""AST, source positions, diagnostics and pretty-printer for the .bc language.

The language is deliberately small: one function per file, scalar and
fixed-length array parameters over bounded integer domains, assignments,
`if`/`else`, capped `while` loops and pure boolean conditions. Conditions
cannot contain assignments or calls, so branch conditions always translate
directly into constraints over the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    message: str
    pos: Pos
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.pos}: {self.severity}: {self.message}"


class SourceError(Exception):
    """Raised by the frontend; carries one or more error diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic] | Diagnostic):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


# --- expressions (integer-valued) ---


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos


@dataclass(frozen=True)
class VarRef:
    name: str
    pos: Pos


@dataclass(frozen=True)
class ArrayRef:
    name: str
    index: "Expr"
    pos: Pos


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / %
    left: "Expr"
    right: "Expr"
    pos: Pos


Expr = IntLit | VarRef | ArrayRef | Neg | BinOp


# --- conditions (boolean-valued, short-circuit) ---


@dataclass(frozen=True)
class Compare:
    op: str  # < <= == != > >=
    left: Expr
    right: Expr
    pos: Pos


@dataclass(frozen=True)
class Not:
    operand: "Cond"
    pos: Pos


@dataclass(frozen=True)
class And:
    left: "Cond"
    right: "Cond"
    pos: Pos


@dataclass(frozen=True)
class Or:
    left: "Cond"
    right: "Cond"
    pos: Pos


Cond = Compare | Not | And | Or


# --- statements ---


@dataclass(frozen=True)
class Assign:
    target: VarRef | ArrayRef
    value: Expr
    pos: Pos


@dataclass(frozen=True)
class If:
    cond: Cond
    then_body: tuple["Stmt", ...]
    else_body: tuple["Stmt", ...]
    pos: Pos


@dataclass(frozen=True)
class While:
    cond: Cond
    cap: int | None  # validated later; None = missing cap
    body: tuple["Stmt", ...]
    pos: Pos


@dataclass(frozen=True)
class Skip:
    pos: Pos


Stmt = Assign | If | While | Skip


@dataclass(frozen=True)
class ParamDecl:
    name: str
    length: int | None  # None for scalars, element count for arrays
    lo: int
    hi: int
    pos: Pos

    @property
    def is_array(self) -> bool:
        return self.length is not None


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple[ParamDecl, ...]
    requires: Cond | None
    body: tuple[Stmt, ...]
    pos: Pos = field(default=Pos(1, 1))


# --- pretty printer ---

_EXPR_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}


def print_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        s = str(e.value)
        return f"({s})" if e.value < 0 and parent_prec >= 3 else s
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, ArrayRef):
        return f"{e.name}[{print_expr(e.index)}]"
    if isinstance(e, Neg):
        inner = print_expr(e.operand, 3)
        s = f"-{inner}"
        return f"({s})" if parent_prec >= 3 else s
    if isinstance(e, BinOp):
        prec = _EXPR_PREC[e.op]
        # left-associative: right child needs parens at equal precedence
        left = print_expr(e.left, prec)
        right = print_expr(e.right, prec + 1)
        s = f"{left} {e.op} {right}"
        return f"({s})" if parent_prec > prec else s
    raise TypeError(f"not an expression: {e!r}")


_COND_PREC = {"or": 1, "and": 2}


def print_cond(c: Cond, parent_prec: int = 0) -> str:
    if isinstance(c, Compare):
        return f"{print_expr(c.left)} {c.op} {print_expr(c.right)}"
    if isinstance(c, Not):
        inner = c.operand
        if isinstance(inner, Compare):
            body = f"({print_cond(inner)})"
        else:
            body = print_cond(inner, 3)
        return f"!{body}"
    if isinstance(c, And):
        s = f"{print_cond(c.left, 2)} && {print_cond(c.right, 3)}"
        return f"({s})" if parent_prec > 2 else s
    if isinstance(c, Or):
        s = f"{print_cond(c.left, 1)} || {print_cond(c.right, 2)}"
        return f"({s})" if parent_prec > 1 else s
    raise TypeError(f"not a condition: {c!r}")


def _print_block(stmts: tuple[Stmt, ...], indent: int) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    for s in stmts:
        lines.extend(_print_stmt(s, indent))
    if not lines:
        return []
    return lines


def _print_stmt(s: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Assign):
        if isinstance(s.target, ArrayRef):
            tgt = f"{s.target.name}[{print_expr(s.target.index)}]"
        else:
            tgt = s.target.name
        return [f"{pad}{tgt} = {print_expr(s.value)};"]
    if isinstance(s, Skip):
        return [f"{pad}skip;"]
    if isinstance(s, If):
        lines = [f"{pad}if ({print_cond(s.cond)}) {{"]
        lines.extend(_print_block(s.then_body, indent + 1))
        if s.else_body:
            if len(s.else_body) == 1 and isinstance(s.else_body[0], If):
                # else-if chain
                chain = _print_stmt(s.else_body[0], indent)
                lines.append(f"{pad}}} else {chain[0].lstrip()}")
                lines.extend(chain[1:])
                return lines
            lines.append(f"{pad}}} else {{")
            lines.extend(_print_block(s.else_body, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(s, While):
        cap = f" cap {s.cap}" if s.cap is not None else ""
        lines = [f"{pad}while ({print_cond(s.cond)}){cap} {{"]
        lines.extend(_print_block(s.body, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"not a statement: {s!r}")


def print_param(p: ParamDecl) -> str:
    if p.is_array:
        return f"{p.name}: int[{p.length}][{p.lo}..{p.hi}]"
    return f"{p.name}: int[{p.lo}..{p.hi}]"


def print_program(p: Program) -> str:
    params = ", ".join(print_param(d) for d in p.params)
    head = f"fun {p.name}({params})"
    if p.requires is not None:
        head += f" requires {print_cond(p.requires)};"
    lines = [head + " {"]
    lines.extend(_print_block(p.body, 1))
    lines.append("}")
    return "\n".join(lines) + "\n"
