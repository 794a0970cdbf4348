"""Incremental constraint solver over bounded integer variables.

The state is a stack: pushing a constraint opens a level, records the
constraint, and runs bounds-consistency propagation to a fixpoint over all
live constraints; popping undoes the level's interval trail bit-exactly.
Model search (`solve`) is a separate, budgeted labeling pass: variables are
assigned in declaration order, values ascending from the interval's low end,
optionally rotated by a seed-derived offset so different seeds explore
different witnesses first. Each attempted value binding consumes one unit of
budget. Propagation is never counted as a solver call; it has its own
counter.

Nonlinear atoms (products, divisions, modulo, symbolic array reads) use
interval projections only, which are exact once the intervals collapse to
points, so a completed labeling is always a genuine model (additionally
re-verified by substitution before it is returned).
"""

from __future__ import annotations

from dataclasses import dataclass

from .sym import (
    AnyConstraint,
    Constraint,
    DivTerm,
    Interval,
    LinExpr,
    ModTerm,
    MulTerm,
    OrConstraint,
    SelectTerm,
    Term,
    VarTerm,
    iv_add,
    iv_floordiv,
    iv_hull,
    iv_intersect,
    iv_mod,
    iv_mul,
    iv_scale,
    required_interval,
)

_FAIL, _SAME, _CHANGED = 0, 1, 2

_MASK = (1 << 64) - 1


def _mix(*xs: int) -> int:
    h = 0x9E3779B97F4A7C15
    for x in xs:
        h = ((h ^ (x & _MASK)) * 0xBF58476D1CE4E5B9) & _MASK
        h ^= h >> 31
    return h


@dataclass(frozen=True)
class SymVar:
    index: int
    name: str
    lo: int
    hi: int


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # "sat" | "unsat" | "unknown"
    model: tuple[int, ...] | None = None
    budget_spent: int = 0

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


class SolverError(AssertionError):
    pass


class SolverState:
    def __init__(self, variables: list[SymVar], seed: int | None = None):
        for v in variables:
            if v.lo > v.hi:
                raise SolverError(f"empty domain for {v.name}")
        self.variables = list(variables)
        self.seed = seed
        self._lo = [v.lo for v in variables]
        self._hi = [v.hi for v in variables]
        self._trail: list[tuple[int, int, int]] = []
        self._levels: list[tuple[int, AnyConstraint]] = []
        self._base: list[AnyConstraint] = []
        self.consistent = True
        self.solve_calls = 0
        self.propagation_steps = 0

    # --- construction ---

    @classmethod
    def init(
        cls,
        variables: list[SymVar],
        precondition: list[AnyConstraint],
        seed: int | None = None,
    ) -> "SolverState | None":
        """Base state holding the precondition; None if propagation refutes it."""
        st = cls(variables, seed)
        st._base = list(precondition)
        if not st._propagate():
            return None
        return st

    def clone(self) -> "SolverState":
        other = SolverState.__new__(SolverState)
        other.variables = self.variables  # immutable entries
        other.seed = self.seed
        other._lo = list(self._lo)
        other._hi = list(self._hi)
        other._trail = list(self._trail)
        other._levels = list(self._levels)
        other._base = list(self._base)
        other.consistent = self.consistent
        other.solve_calls = self.solve_calls
        other.propagation_steps = self.propagation_steps
        return other

    # --- stack discipline ---

    @property
    def depth(self) -> int:
        return len(self._levels)

    def live_constraints(self) -> list[AnyConstraint]:
        return self._base + [c for _, c in self._levels]

    def interval(self, var: int) -> Interval:
        return (self._lo[var], self._hi[var])

    def push(self, constraint: AnyConstraint) -> bool:
        """Open a level with the constraint; False if propagation refutes it.

        The level stays on the stack either way; pop() restores the state.
        """
        if not self.consistent:
            raise SolverError("push on an inconsistent state")
        self._levels.append((len(self._trail), constraint))
        self.consistent = self._propagate()
        return self.consistent

    def pop(self) -> None:
        if not self._levels:
            raise SolverError("pop on the base level")
        mark, _ = self._levels.pop()
        self._undo_to(mark)
        self.consistent = True

    def _undo_to(self, mark: int) -> None:
        trail = self._trail
        while len(trail) > mark:
            var, lo, hi = trail.pop()
            self._lo[var] = lo
            self._hi[var] = hi

    def _set_interval(self, var: int, lo: int, hi: int) -> None:
        self._trail.append((var, self._lo[var], self._hi[var]))
        self._lo[var] = lo
        self._hi[var] = hi

    # --- propagation ---

    def _propagate(self) -> bool:
        live = self._base + [c for _, c in self._levels]
        changed = True
        while changed:
            changed = False
            for c in live:
                r = self._revise(c)
                if r == _FAIL:
                    return False
                if r == _CHANGED:
                    changed = True
        return True

    def _revise(self, c: AnyConstraint) -> int:
        self.propagation_steps += 1
        if isinstance(c, OrConstraint):
            viable: list[Constraint] = []
            for d in c.disjuncts:
                fwd = self._eval_expr(d.gap)
                if fwd is None:
                    continue
                if required_interval(d.rel, fwd) is not None:
                    viable.append(d)
            if not viable:
                return _FAIL
            if len(viable) == 1:
                return self._revise_atomic(viable[0])
            return _SAME
        return self._revise_atomic(c)

    def _revise_atomic(self, c: Constraint) -> int:
        fwd = self._eval_expr(c.gap)
        if fwd is None:
            return _FAIL
        req = required_interval(c.rel, fwd)
        if req is None:
            return _FAIL
        return self._narrow_expr(c.gap, req)

    def _eval_expr(self, e: LinExpr) -> Interval | None:
        total: Interval = (e.const, e.const)
        for t, coef in e.terms:
            iv = self._eval_term(t)
            if iv is None:
                return None
            total = iv_add(total, iv_scale(iv, coef))
        return total

    def _eval_term(self, t: Term) -> Interval | None:
        if isinstance(t, VarTerm):
            return (self._lo[t.var], self._hi[t.var])
        if isinstance(t, MulTerm):
            a, b = self._eval_expr(t.a), self._eval_expr(t.b)
            return None if a is None or b is None else iv_mul(a, b)
        if isinstance(t, DivTerm):
            a, b = self._eval_expr(t.num), self._eval_expr(t.den)
            return None if a is None or b is None else iv_floordiv(a, b)
        if isinstance(t, ModTerm):
            a, b = self._eval_expr(t.num), self._eval_expr(t.den)
            return None if a is None or b is None else iv_mod(a, b)
        if isinstance(t, SelectTerm):
            idx = self._eval_expr(t.index)
            if idx is None:
                return None
            rng = iv_intersect(idx, (0, len(t.cells) - 1))
            if rng is None:
                return None
            out: Interval | None = None
            for k in range(rng[0], rng[1] + 1):
                cell = self._eval_expr(t.cells[k])
                if cell is None:
                    continue
                out = cell if out is None else iv_hull(out, cell)
            return out
        raise TypeError(f"not a term: {t!r}")

    def _narrow_expr(self, e: LinExpr, target: Interval) -> int:
        ivs: list[Interval] = []
        for t, coef in e.terms:
            iv = self._eval_term(t)
            if iv is None:
                return _FAIL
            ivs.append(iv_scale(iv, coef))
        total: Interval = (e.const, e.const)
        for iv in ivs:
            total = iv_add(total, iv)
        if iv_intersect(total, target) is None:
            return _FAIL
        result = _SAME
        sum_lo = e.const + sum(iv[0] for iv in ivs)
        sum_hi = e.const + sum(iv[1] for iv in ivs)
        for i, (t, coef) in enumerate(e.terms):
            others_lo = sum_lo - ivs[i][0]
            others_hi = sum_hi - ivs[i][1]
            # coef * t must lie within [target_lo - others_hi, target_hi - others_lo]
            tlo = target[0] - others_hi
            thi = target[1] - others_lo
            if coef > 0:
                term_lo = -((-tlo) // coef)
                term_hi = thi // coef
            else:
                term_lo = -((-thi) // coef)
                term_hi = tlo // coef
            r = self._narrow_term(t, (term_lo, term_hi))
            if r == _FAIL:
                return _FAIL
            if r == _CHANGED:
                result = _CHANGED
        return result

    def _narrow_term(self, t: Term, target: Interval) -> int:
        cur = self._eval_term(t)
        if cur is None:
            return _FAIL
        new = iv_intersect(cur, target)
        if new is None:
            return _FAIL
        if isinstance(t, VarTerm):
            if new != cur:
                self._set_interval(t.var, new[0], new[1])
                return _CHANGED
            return _SAME
        if new == cur:
            return _SAME
        # atoms: weak inverse projections
        if isinstance(t, MulTerm):
            result = _SAME
            for side, other in ((t.a, t.b), (t.b, t.a)):
                siv = self._eval_expr(side)
                if siv is None:
                    return _FAIL
                if siv[0] == siv[1] and siv[0] != 0:
                    k = siv[0]
                    if k > 0:
                        bounds = (-((-new[0]) // k), new[1] // k)
                    else:
                        bounds = (-((-new[1]) // k), new[0] // k)
                    r = self._narrow_expr(other, bounds)
                    if r == _FAIL:
                        return _FAIL
                    if r == _CHANGED:
                        result = _CHANGED
            return result
        if isinstance(t, DivTerm):
            den = self._eval_expr(t.den)
            if den is None:
                return _FAIL
            if den[0] == den[1] and den[0] != 0:
                k = den[0]
                if k > 0:
                    bounds = (new[0] * k, new[1] * k + k - 1)
                else:
                    bounds = ((new[1] + 1) * k + 1, new[0] * k)
                return self._narrow_expr(t.num, bounds)
            return _SAME
        if isinstance(t, SelectTerm):
            idx = self._eval_expr(t.index)
            if idx is None:
                return _FAIL
            rng = iv_intersect(idx, (0, len(t.cells) - 1))
            if rng is None:
                return _FAIL
            ilo, ihi = rng
            # trim index endpoints whose cell cannot meet the target
            while ilo <= ihi:
                cell = self._eval_expr(t.cells[ilo])
                if cell is not None and iv_intersect(cell, new) is not None:
                    break
                ilo += 1
            while ihi >= ilo:
                cell = self._eval_expr(t.cells[ihi])
                if cell is not None and iv_intersect(cell, new) is not None:
                    break
                ihi -= 1
            if ilo > ihi:
                return _FAIL
            r = self._narrow_expr(t.index, (ilo, ihi))
            if r == _FAIL:
                return _FAIL
            result = r
            if ilo == ihi:
                r2 = self._narrow_expr(t.cells[ilo], new)
                if r2 == _FAIL:
                    return _FAIL
                if r2 == _CHANGED:
                    result = _CHANGED
            return result
        if isinstance(t, ModTerm):
            return _SAME
        raise TypeError(f"not a term: {t!r}")

    # --- model search ---

    def solve(self, budget: int) -> SolveOutcome:
        """Budgeted labeling; exactly one solver call regardless of outcome."""
        if not self.consistent:
            raise SolverError("solve on an inconsistent state")
        self.solve_calls += 1
        spent = [0]
        mark = len(self._trail)
        found = self._label(0, budget, spent)
        self._undo_to(mark)
        if found == "budget":
            return SolveOutcome("unknown", None, spent[0])
        if found is None:
            return SolveOutcome("unsat", None, spent[0])
        model = tuple(found)
        for c in self.live_constraints():
            if not c.evaluate(model):
                raise SolverError(f"model fails substitution check: {model} vs {c}")
        return SolveOutcome("sat", model, spent[0])

    def _label(self, vi: int, budget: int, spent: list[int]):
        n = len(self.variables)
        while vi < n and self._lo[vi] == self._hi[vi]:
            vi += 1
        if vi == n:
            return list(self._lo)
        lo, hi = self._lo[vi], self._hi[vi]
        size = hi - lo + 1
        off = 0 if not self.seed else _mix(self.seed, vi, lo, hi) % size
        for k in range(size):
            if spent[0] >= budget:
                return "budget"
            spent[0] += 1
            v = lo + (off + k) % size
            mark = len(self._trail)
            self._set_interval(vi, v, v)
            if self._propagate():
                r = self._label(vi + 1, budget, spent)
                if isinstance(r, list) or r == "budget":
                    return r
            self._undo_to(mark)
        return None
