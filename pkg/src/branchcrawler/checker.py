"""Validation of parsed programs.

Produces a CheckedProgram: the unit the generation engine consumes. Checks
structural invariants (domains, loop caps, array lengths), resolves the
effective precondition (inline `requires` vs. a CLI-supplied string), numbers
the atomic comparisons of the body in source order, and runs a conservative
taint analysis so array writes through input-dependent indices are rejected
up front instead of silently losing symbolic information at run time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

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

# Declared domains must fit a signed 32-bit range; runtime arithmetic may use
# the full engine width below before an overflow abort is raised.
DOMAIN_LIMIT = 2**31 - 1
VALUE_LIMIT = 2**62


@dataclass(frozen=True)
class InputVar:
    """One solver variable: a scalar parameter or a single array cell."""

    index: int
    name: str  # display name, e.g. "x" or "s[2]"
    lo: int
    hi: int


@dataclass
class CheckedProgram:
    program: Program
    precondition: Cond | None
    atoms: list[Compare]  # atom id -> comparison node, body only, source order
    atom_ids: dict[int, int]  # id(Compare node) -> atom id
    input_vars: list[InputVar]
    scalar_index: dict[str, int]  # scalar param name -> input var index
    array_base: dict[str, int]  # array param name -> index of cell 0
    array_len: dict[str, int]
    tainted: frozenset[str]
    warnings: list[Diagnostic] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.program.name

    @property
    def params(self) -> tuple[ParamDecl, ...]:
        return self.program.params

    def domain_size(self) -> int:
        """Number of concrete input vectors (for the brute-force oracle)."""
        n = 1
        for v in self.input_vars:
            n *= v.hi - v.lo + 1
        return n


def _expr_idents(e: Expr) -> set[str]:
    if isinstance(e, VarRef):
        return {e.name}
    if isinstance(e, ArrayRef):
        return {e.name} | _expr_idents(e.index)
    if isinstance(e, Neg):
        return _expr_idents(e.operand)
    if isinstance(e, BinOp):
        return _expr_idents(e.left) | _expr_idents(e.right)
    return set()


def _cond_idents(c: Cond) -> set[str]:
    if isinstance(c, Compare):
        return _expr_idents(c.left) | _expr_idents(c.right)
    if isinstance(c, Not):
        return _cond_idents(c.operand)
    return _cond_idents(c.left) | _cond_idents(c.right)


def _expr_tainted(e: Expr, tainted: set[str]) -> bool:
    if isinstance(e, VarRef):
        return e.name in tainted
    if isinstance(e, ArrayRef):
        # all arrays are inputs in v1: any cell read may carry input data
        return True
    if isinstance(e, Neg):
        return _expr_tainted(e.operand, tainted)
    if isinstance(e, BinOp):
        return _expr_tainted(e.left, tainted) or _expr_tainted(e.right, tainted)
    return False


def check_program(prog: Program, cli_precondition: Cond | None = None) -> CheckedProgram:
    """Validate a parsed program; raises SourceError on any violation."""
    diags: list[Diagnostic] = []
    warnings: list[Diagnostic] = []

    if not prog.params:
        diags.append(Diagnostic("program must declare at least one parameter", prog.pos))
    if not prog.body:
        diags.append(Diagnostic("program body must contain at least one statement", prog.pos))

    arrays: dict[str, ParamDecl] = {}
    scalars: dict[str, ParamDecl] = {}
    for p in prog.params:
        if p.lo > p.hi:
            diags.append(Diagnostic(f"empty domain [{p.lo}..{p.hi}] for parameter {p.name!r}", p.pos))
        if abs(p.lo) > DOMAIN_LIMIT or abs(p.hi) > DOMAIN_LIMIT:
            diags.append(Diagnostic(f"domain bounds of {p.name!r} exceed the engine width", p.pos))
        if p.is_array:
            if p.length is not None and p.length < 1:
                diags.append(Diagnostic(f"array {p.name!r} must have length >= 1", p.pos))
            arrays[p.name] = p
        else:
            scalars[p.name] = p

    # effective precondition: inline clause wins over the CLI string
    precondition = prog.requires
    if cli_precondition is not None:
        if prog.requires is not None:
            warnings.append(
                Diagnostic(
                    "both an inline requires clause and a --precondition were given; "
                    "using the inline clause",
                    prog.requires.pos if hasattr(prog.requires, "pos") else prog.pos,
                    severity="warning",
                )
            )
        else:
            precondition = cli_precondition
    if precondition is not None:
        param_names = {p.name for p in prog.params}
        for name in sorted(_cond_idents(precondition) - param_names):
            diags.append(
                Diagnostic(f"precondition references unknown parameter {name!r}", prog.pos)
            )

    # structural checks + taint fixpoint over assignments
    tainted: set[str] = set(scalars) | set(arrays)

    def scan_structure(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                if isinstance(s.target, ArrayRef):
                    if s.target.name not in arrays:
                        diags.append(
                            Diagnostic(f"{s.target.name!r} is not an array parameter", s.target.pos)
                        )
                elif s.target.name in arrays:
                    diags.append(
                        Diagnostic(f"array {s.target.name!r} cannot be assigned as a scalar", s.pos)
                    )
            elif isinstance(s, If):
                scan_structure(s.then_body)
                scan_structure(s.else_body)
            elif isinstance(s, While):
                if s.cap is None:
                    diags.append(Diagnostic("loop cap required", s.pos))
                elif s.cap < 1:
                    diags.append(Diagnostic("loop cap must be positive", s.pos))
                scan_structure(s.body)

    def scan_array_scalar_misuse(e: Expr) -> None:
        if isinstance(e, VarRef) and e.name in arrays:
            diags.append(Diagnostic(f"array {e.name!r} used without an index", e.pos))
        elif isinstance(e, ArrayRef):
            if e.name in scalars:
                diags.append(Diagnostic(f"scalar {e.name!r} indexed as an array", e.pos))
            scan_array_scalar_misuse(e.index)
        elif isinstance(e, Neg):
            scan_array_scalar_misuse(e.operand)
        elif isinstance(e, BinOp):
            scan_array_scalar_misuse(e.left)
            scan_array_scalar_misuse(e.right)

    def scan_cond_exprs(c: Cond) -> None:
        if isinstance(c, Compare):
            scan_array_scalar_misuse(c.left)
            scan_array_scalar_misuse(c.right)
        elif isinstance(c, Not):
            scan_cond_exprs(c.operand)
        else:
            scan_cond_exprs(c.left)
            scan_cond_exprs(c.right)

    def scan_exprs(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            if isinstance(s, Assign):
                if isinstance(s.target, ArrayRef):
                    scan_array_scalar_misuse(s.target.index)
                scan_array_scalar_misuse(s.value)
            elif isinstance(s, If):
                scan_cond_exprs(s.cond)
                scan_exprs(s.then_body)
                scan_exprs(s.else_body)
            elif isinstance(s, While):
                scan_cond_exprs(s.cond)
                scan_exprs(s.body)

    scan_structure(prog.body)
    scan_exprs(prog.body)
    if precondition is not None:
        scan_cond_exprs(precondition)

    def taint_pass(stmts: tuple[Stmt, ...]) -> bool:
        changed = False
        for s in stmts:
            if isinstance(s, Assign) and isinstance(s.target, VarRef):
                if s.target.name not in tainted and _expr_tainted(s.value, tainted):
                    tainted.add(s.target.name)
                    changed = True
            elif isinstance(s, If):
                changed |= taint_pass(s.then_body)
                changed |= taint_pass(s.else_body)
            elif isinstance(s, While):
                changed |= taint_pass(s.body)
        return changed

    while taint_pass(prog.body):
        pass

    def check_write_indices(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            if isinstance(s, Assign) and isinstance(s.target, ArrayRef):
                if _expr_tainted(s.target.index, tainted):
                    diags.append(
                        Diagnostic(
                            "array write index may depend on inputs (not supported)",
                            s.target.pos,
                        )
                    )
            elif isinstance(s, If):
                check_write_indices(s.then_body)
                check_write_indices(s.else_body)
            elif isinstance(s, While):
                check_write_indices(s.body)

    check_write_indices(prog.body)

    if diags:
        raise SourceError(diags)

    # number the body's atomic comparisons in source order
    atoms: list[Compare] = []
    atom_ids: dict[int, int] = {}

    def number_cond(c: Cond) -> None:
        if isinstance(c, Compare):
            atom_ids[id(c)] = len(atoms)
            atoms.append(c)
        elif isinstance(c, Not):
            number_cond(c.operand)
        else:
            number_cond(c.left)
            number_cond(c.right)

    def number_stmts(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            if isinstance(s, If):
                number_cond(s.cond)
                number_stmts(s.then_body)
                number_stmts(s.else_body)
            elif isinstance(s, While):
                number_cond(s.cond)
                number_stmts(s.body)

    number_stmts(prog.body)

    # input layout: scalars then cells, in declaration order
    input_vars: list[InputVar] = []
    scalar_index: dict[str, int] = {}
    array_base: dict[str, int] = {}
    array_len: dict[str, int] = {}
    for p in prog.params:
        if p.is_array:
            assert p.length is not None
            array_base[p.name] = len(input_vars)
            array_len[p.name] = p.length
            for k in range(p.length):
                input_vars.append(InputVar(len(input_vars), f"{p.name}[{k}]", p.lo, p.hi))
        else:
            scalar_index[p.name] = len(input_vars)
            input_vars.append(InputVar(len(input_vars), p.name, p.lo, p.hi))

    return CheckedProgram(
        program=prog,
        precondition=precondition,
        atoms=atoms,
        atom_ids=atom_ids,
        input_vars=input_vars,
        scalar_index=scalar_index,
        array_base=array_base,
        array_len=array_len,
        tainted=frozenset(tainted),
        warnings=warnings,
    )
