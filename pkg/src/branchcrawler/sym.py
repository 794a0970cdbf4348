"""Symbolic expressions over input variables, constraints, interval arithmetic.

Every value the interpreter tracks symbolically is a LinExpr: an integer
linear combination of terms plus a constant, where a term is either an input
variable or an opaque nonlinear atom (product, floor division, modulo, or an
array read through a symbolic index). Atoms hold LinExprs themselves, so
arbitrary integer expressions flatten into this form without auxiliary
variables, and every constraint mentions input variables only.

Division and modulo follow Python semantics (floor division, remainder takes
the divisor's sign). An atom that is undefined for a given assignment (zero
divisor, out-of-range index) makes the enclosing comparison evaluate false.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

Interval = tuple[int, int]


# --- terms ---


@dataclass(frozen=True)
class VarTerm:
    var: int
    key: str = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", f"v{self.var:06d}")


@dataclass(frozen=True)
class MulTerm:
    a: "LinExpr"
    b: "LinExpr"
    key: str = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", f"mul({self.a.key},{self.b.key})")


@dataclass(frozen=True)
class DivTerm:
    num: "LinExpr"
    den: "LinExpr"
    key: str = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", f"div({self.num.key},{self.den.key})")


@dataclass(frozen=True)
class ModTerm:
    num: "LinExpr"
    den: "LinExpr"
    key: str = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", f"mod({self.num.key},{self.den.key})")


@dataclass(frozen=True)
class SelectTerm:
    cells: tuple["LinExpr", ...]
    index: "LinExpr"
    name: str = field(compare=False, default="")  # array display name
    key: str = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        cells_key = ",".join(c.key for c in self.cells)
        object.__setattr__(self, "key", f"sel([{cells_key}],{self.index.key})")


Term = Union[VarTerm, MulTerm, DivTerm, ModTerm, SelectTerm]


@dataclass(frozen=True)
class LinExpr:
    terms: tuple[tuple[Term, int], ...]  # sorted by term key, no zero coefficients
    const: int
    key: str = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        parts = [f"{c}.{t.key}" for t, c in self.terms]
        object.__setattr__(self, "key", "+".join(parts) + f"#{self.const}")

    # construction

    @staticmethod
    def make(coeffs: dict[Term, int], const: int) -> "LinExpr":
        items = tuple(sorted(((t, c) for t, c in coeffs.items() if c != 0), key=lambda tc: tc[0].key))
        return LinExpr(items, const)

    @staticmethod
    def of_const(k: int) -> "LinExpr":
        return LinExpr((), k)

    @staticmethod
    def of_var(index: int) -> "LinExpr":
        return LinExpr(((VarTerm(index), 1),), 0)

    @property
    def is_const(self) -> bool:
        return not self.terms

    def __add__(self, other: "LinExpr") -> "LinExpr":
        coeffs: dict[Term, int] = dict(self.terms)
        for t, c in other.terms:
            coeffs[t] = coeffs.get(t, 0) + c
        return LinExpr.make(coeffs, self.const + other.const)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + other.scaled(-1)

    def __neg__(self) -> "LinExpr":
        return self.scaled(-1)

    def scaled(self, k: int) -> "LinExpr":
        if k == 0:
            return LinExpr.of_const(0)
        return LinExpr(tuple((t, c * k) for t, c in self.terms), self.const * k)

    def evaluate(self, values: Sequence[int]) -> int | None:
        """Exact value under a full input assignment; None when undefined."""
        total = self.const
        for t, c in self.terms:
            v = _eval_term(t, values)
            if v is None:
                return None
            total += c * v
        return total

    def render(self, names: Sequence[str]) -> str:
        if not self.terms:
            return str(self.const)
        parts: list[str] = []
        for t, c in self.terms:
            txt = _render_term(t, names)
            if c == 1:
                piece = txt
            elif c == -1:
                piece = f"-{txt}"
            else:
                piece = f"{c}*{txt}"
            if parts and not piece.startswith("-"):
                parts.append(f"+ {piece}")
            elif parts:
                parts.append(f"- {piece[1:]}")
            else:
                parts.append(piece)
        body = " ".join(parts)
        if self.const > 0:
            body += f" + {self.const}"
        elif self.const < 0:
            body += f" - {-self.const}"
        return body


def _eval_term(t: Term, values: Sequence[int]) -> int | None:
    if isinstance(t, VarTerm):
        return values[t.var]
    if isinstance(t, MulTerm):
        a, b = t.a.evaluate(values), t.b.evaluate(values)
        return None if a is None or b is None else a * b
    if isinstance(t, DivTerm):
        a, b = t.num.evaluate(values), t.den.evaluate(values)
        return None if a is None or b is None or b == 0 else a // b
    if isinstance(t, ModTerm):
        a, b = t.num.evaluate(values), t.den.evaluate(values)
        return None if a is None or b is None or b == 0 else a % b
    if isinstance(t, SelectTerm):
        i = t.index.evaluate(values)
        if i is None or not (0 <= i < len(t.cells)):
            return None
        return t.cells[i].evaluate(values)
    raise TypeError(f"not a term: {t!r}")


def _render_term(t: Term, names: Sequence[str]) -> str:
    if isinstance(t, VarTerm):
        return names[t.var]
    if isinstance(t, MulTerm):
        return f"({t.a.render(names)})*({t.b.render(names)})"
    if isinstance(t, DivTerm):
        return f"({t.num.render(names)})/({t.den.render(names)})"
    if isinstance(t, ModTerm):
        return f"({t.num.render(names)})%({t.den.render(names)})"
    if isinstance(t, SelectTerm):
        return f"{t.name or 'select'}[{t.index.render(names)}]"
    raise TypeError(f"not a term: {t!r}")


# --- smart constructors for nonlinear operations ---


def mul_expr(a: LinExpr, b: LinExpr) -> LinExpr:
    if a.is_const:
        return b.scaled(a.const)
    if b.is_const:
        return a.scaled(b.const)
    lo, hi = (a, b) if a.key <= b.key else (b, a)
    return LinExpr(((MulTerm(lo, hi), 1),), 0)


def div_expr(a: LinExpr, b: LinExpr) -> LinExpr:
    if a.is_const and b.is_const and b.const != 0:
        return LinExpr.of_const(a.const // b.const)
    return LinExpr(((DivTerm(a, b), 1),), 0)


def mod_expr(a: LinExpr, b: LinExpr) -> LinExpr:
    if a.is_const and b.is_const and b.const != 0:
        return LinExpr.of_const(a.const % b.const)
    return LinExpr(((ModTerm(a, b), 1),), 0)


def select_expr(cells: Sequence[LinExpr], index: LinExpr, name: str = "") -> LinExpr:
    if index.is_const and 0 <= index.const < len(cells):
        return cells[index.const]
    return LinExpr(((SelectTerm(tuple(cells), index, name), 1),), 0)


# --- constraints ---

_NEGATION = {"<": ">=", "<=": ">", "==": "!=", "!=": "==", ">": "<=", ">=": "<"}
_REL_HOLDS = {
    "<": lambda v: v < 0,
    "<=": lambda v: v <= 0,
    "==": lambda v: v == 0,
    "!=": lambda v: v != 0,
    ">": lambda v: v > 0,
    ">=": lambda v: v >= 0,
}


@dataclass(frozen=True)
class Constraint:
    """An atomic relation `gap REL 0` over input variables."""

    gap: LinExpr
    rel: str

    @staticmethod
    def compare(op: str, left: LinExpr, right: LinExpr, outcome: bool = True) -> "Constraint":
        c = Constraint(left - right, op)
        return c if outcome else c.negated()

    def negated(self) -> "Constraint":
        return Constraint(self.gap, _NEGATION[self.rel])

    def evaluate(self, values: Sequence[int]) -> bool:
        v = self.gap.evaluate(values)
        if v is None:
            return False
        return _REL_HOLDS[self.rel](v)

    def render(self, names: Sequence[str]) -> str:
        if self.gap.is_const:
            return f"{self.gap.const} {self.rel} 0"
        lhs = LinExpr(self.gap.terms, 0).render(names)
        return f"{lhs} {self.rel} {-self.gap.const}"


@dataclass(frozen=True)
class OrConstraint:
    """Disjunction of atomic constraints (precondition clauses only)."""

    disjuncts: tuple[Constraint, ...]

    def evaluate(self, values: Sequence[int]) -> bool:
        return any(d.evaluate(values) for d in self.disjuncts)

    def render(self, names: Sequence[str]) -> str:
        return " or ".join(f"({d.render(names)})" for d in self.disjuncts)


AnyConstraint = Union[Constraint, OrConstraint]


# --- interval arithmetic (sound hulls; exact on point intervals) ---


def iv_add(a: Interval, b: Interval) -> Interval:
    return (a[0] + b[0], a[1] + b[1])


def iv_scale(a: Interval, k: int) -> Interval:
    return (a[0] * k, a[1] * k) if k >= 0 else (a[1] * k, a[0] * k)


def iv_mul(a: Interval, b: Interval) -> Interval:
    ps = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(ps), max(ps))


def iv_intersect(a: Interval, b: Interval) -> Interval | None:
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return None if lo > hi else (lo, hi)


def iv_hull(a: Interval, b: Interval) -> Interval:
    return (min(a[0], b[0]), max(a[1], b[1]))


def iv_floordiv(a: Interval, b: Interval) -> Interval | None:
    """Hull of {x // y : x in a, y in b, y != 0}; None if no such y exists."""
    out: Interval | None = None
    bl, bh = b
    for seg in ((max(bl, 1), bh), (bl, min(bh, -1))):
        if seg[0] > seg[1]:
            continue
        cands = (a[0] // seg[0], a[0] // seg[1], a[1] // seg[0], a[1] // seg[1])
        part = (min(cands), max(cands))
        out = part if out is None else iv_hull(out, part)
    return out


def iv_mod(a: Interval, b: Interval) -> Interval | None:
    """Hull of {x % y : x in a, y in b, y != 0} under Python semantics."""
    if a[0] == a[1] and b[0] == b[1]:
        return None if b[0] == 0 else (a[0] % b[0], a[0] % b[0])
    out: Interval | None = None
    bl, bh = b
    if bh >= 1:
        ylo = max(bl, 1)
        if a[0] >= 0 and a[1] <= ylo - 1:
            part = a  # numerator already within [0, min divisor)
        else:
            part = (0, bh - 1)
        out = part
    if bl <= -1:
        yhi = min(bh, -1)
        if a[1] <= 0 and a[0] >= yhi + 1:
            part = a
        else:
            part = (bl + 1, 0)
        out = part if out is None else iv_hull(out, part)
    return out


# narrowing bounds implied by `gap REL 0`, as (lower, upper) with None = open
_REL_BOUNDS: dict[str, tuple[int | None, int | None]] = {
    "<": (None, -1),
    "<=": (None, 0),
    "==": (0, 0),
    ">": (1, None),
    ">=": (0, None),
}


def required_interval(rel: str, forward: Interval) -> Interval | None:
    """Intersect a forward-evaluated gap interval with the relation's bound.

    `!=` only trims an endpoint equal to zero (bounds consistency).
    """
    lo, hi = forward
    if rel == "!=":
        if lo == 0 == hi:
            return None
        if lo == 0:
            lo = 1 if hi >= 1 else lo
        if hi == 0:
            hi = -1 if lo <= -1 else hi
        return (lo, hi)
    rlo, rhi = _REL_BOUNDS[rel]
    if rlo is not None:
        lo = max(lo, rlo)
    if rhi is not None:
        hi = min(hi, rhi)
    return None if lo > hi else (lo, hi)
