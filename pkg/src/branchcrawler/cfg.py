"""Control-flow graph over atomic decisions.

Lowering decomposes compound conditions into one decision node per atomic
comparison, with short-circuit semantics: `a && b` becomes two chained
decisions whose false edges share the else target, `a || b` shares the then
target, and `!c` swaps the polarity targets. Statement code never branches,
so the graph only needs decision nodes plus a single exit node; every edge
points at the next decision reached (or at the exit).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .checker import CheckedProgram
from .lang import And, Compare, Cond, If, Not, Or, Stmt, While, print_cond

EXIT_NODE = -1


@dataclass(frozen=True, order=True)
class BranchId:
    decision: int
    polarity: bool

    @property
    def opposite(self) -> "BranchId":
        return BranchId(self.decision, not self.polarity)

    def __str__(self) -> str:
        return f"d{self.decision}:{'T' if self.polarity else 'F'}"


def parse_branch_id(text: str) -> BranchId:
    head, _, pol = text.partition(":")
    return BranchId(int(head[1:]), pol == "T")


class _Label:
    """Forward reference to a node, resolved once lowering finishes."""

    __slots__ = ("target",)

    def __init__(self) -> None:
        self.target: "int | _Label | None" = None

    def resolve(self) -> int:
        seen = []
        node: int | _Label = self
        while isinstance(node, _Label):
            assert node.target is not None, "unresolved CFG label"
            seen.append(node)
            node = node.target
        return node


@dataclass
class Decision:
    id: int
    atom_id: int
    atom: Compare
    on_true: int = EXIT_NODE
    on_false: int = EXIT_NODE


@dataclass
class Cfg:
    decisions: list[Decision]
    entry: int  # decision id or EXIT_NODE
    atom_to_decision: dict[int, int]  # atom id -> decision id

    @property
    def branch_count(self) -> int:
        return 2 * len(self.decisions)

    def branches(self) -> list[BranchId]:
        out = []
        for d in self.decisions:
            out.append(BranchId(d.id, True))
            out.append(BranchId(d.id, False))
        return out

    def target_node(self, branch: BranchId) -> int:
        d = self.decisions[branch.decision]
        return d.on_true if branch.polarity else d.on_false

    def successors(self, node: int) -> tuple[int, int] | tuple[()]:
        if node == EXIT_NODE:
            return ()
        d = self.decisions[node]
        return (d.on_true, d.on_false)


def build_cfg(checked: CheckedProgram) -> Cfg:
    decisions: list[Decision] = []
    atom_to_decision: dict[int, int] = {}

    def lower_cond(cond: Cond, on_true: "int | _Label", on_false: "int | _Label") -> _Label:
        entry = _Label()
        if isinstance(cond, Compare):
            d = Decision(len(decisions), checked.atom_ids[id(cond)], cond)
            decisions.append(d)
            atom_to_decision[d.atom_id] = d.id
            _pending.append((d, on_true, on_false))
            entry.target = d.id
        elif isinstance(cond, Not):
            entry.target = lower_cond(cond.operand, on_false, on_true)
        elif isinstance(cond, And):
            right_entry = _Label()
            entry.target = lower_cond(cond.left, right_entry, on_false)
            right_entry.target = lower_cond(cond.right, on_true, on_false)
        elif isinstance(cond, Or):
            right_entry = _Label()
            entry.target = lower_cond(cond.left, on_true, right_entry)
            right_entry.target = lower_cond(cond.right, on_true, on_false)
        else:
            raise TypeError(f"not a condition: {cond!r}")
        return entry

    def lower_block(stmts: tuple[Stmt, ...], next_node: "int | _Label") -> "int | _Label":
        for s in reversed(stmts):
            next_node = lower_stmt(s, next_node)
        return next_node

    def lower_stmt(s: Stmt, next_node: "int | _Label") -> "int | _Label":
        if isinstance(s, If):
            then_entry = lower_block(s.then_body, next_node)
            else_entry = lower_block(s.else_body, next_node)
            return lower_cond(s.cond, then_entry, else_entry)
        if isinstance(s, While):
            entry = _Label()
            body_entry = lower_block(s.body, entry)
            entry.target = lower_cond(s.cond, body_entry, next_node)
            return entry
        return next_node  # Assign / Skip: straight-line

    _pending: list[tuple[Decision, int | _Label, int | _Label]] = []
    entry_ref = lower_block(checked.program.body, EXIT_NODE)

    def resolve(node: "int | _Label") -> int:
        return node if isinstance(node, int) else node.resolve()

    for d, on_true, on_false in _pending:
        d.on_true = resolve(on_true)
        d.on_false = resolve(on_false)

    # lowering visits source-level statement blocks in reverse to thread the
    # continuation, so renumber decisions by atom id to keep ids in source order
    order = sorted(range(len(decisions)), key=lambda i: decisions[i].atom_id)
    remap = {decisions[old].id: new for new, old in enumerate(order)}

    def remap_node(n: int) -> int:
        return n if n == EXIT_NODE else remap[n]

    renumbered = []
    for new, old in enumerate(order):
        d = decisions[old]
        renumbered.append(
            Decision(new, d.atom_id, d.atom, remap_node(d.on_true), remap_node(d.on_false))
        )
    atom_to_decision = {aid: remap[did] for aid, did in atom_to_decision.items()}
    return Cfg(renumbered, remap_node(resolve(entry_ref)), atom_to_decision)


def reach_set(cfg: Cfg) -> dict[BranchId, frozenset[BranchId]]:
    """For each branch, every branch lying on some forward path from its target.

    Purely syntactic forward reachability: reaching a decision makes both of
    its branches reachable. Loop back-edges are followed like any other edge,
    so no feasibility or iteration-cap reasoning is involved.
    """
    node_cache: dict[int, frozenset[int]] = {}

    def decisions_from(node: int) -> frozenset[int]:
        if node in node_cache:
            return node_cache[node]
        seen: set[int] = set()
        stack = [node]
        while stack:
            n = stack.pop()
            if n == EXIT_NODE or n in seen:
                continue
            seen.add(n)
            stack.extend(cfg.successors(n))
        result = frozenset(seen)
        node_cache[node] = result
        return result

    out: dict[BranchId, frozenset[BranchId]] = {}
    for b in cfg.branches():
        reached = decisions_from(cfg.target_node(b))
        out[b] = frozenset(
            BranchId(d, pol) for d in reached for pol in (True, False)
        )
    return out


def can_lead_to_uncovered(
    branch: BranchId,
    covered: frozenset[BranchId] | set[BranchId],
    reach: dict[BranchId, frozenset[BranchId]],
) -> bool:
    """Lookahead connectivity test: the branch itself is uncovered, or some
    branch statically reachable from it is uncovered."""
    if branch not in covered:
        return True
    return any(b not in covered for b in reach[branch])


def to_dot(cfg: Cfg) -> str:
    lines = ["digraph cfg {", '  node [shape=box];', '  exit [shape=doublecircle, label="exit"];']
    for d in cfg.decisions:
        label = print_cond(d.atom).replace('"', '\\"')
        lines.append(f'  d{d.id} [label="d{d.id}: {label}"];')

    def name(n: int) -> str:
        return "exit" if n == EXIT_NODE else f"d{n}"

    entry = name(cfg.entry)
    lines.append(f"  start [shape=point];")
    lines.append(f"  start -> {entry};")
    for d in cfg.decisions:
        lines.append(f'  d{d.id} -> {name(d.on_true)} [label="T"];')
        lines.append(f'  d{d.id} -> {name(d.on_false)} [label="F"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def branch_table_csv(cfg: Cfg) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["branch", "decision", "source_line", "source_col", "polarity", "condition"])
    for d in cfg.decisions:
        for pol in (True, False):
            b = BranchId(d.id, pol)
            w.writerow(
                [str(b), d.id, d.atom.pos.line, d.atom.pos.col, "T" if pol else "F", print_cond(d.atom)]
            )
    return buf.getvalue()
