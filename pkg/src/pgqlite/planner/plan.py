"""Backend-neutral logical plan operators.

Every operator produces rows of graph-element ids, one column per bound
pattern variable. Property values are only fetched by ``Filter`` and
``Project``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from ..pgqparse.ast import Direction, Expr, PathMode
from ..pgqparse.printer import format_expr


@dataclass(frozen=True)
class ScanNodes:
    """All nodes carrying ``label`` (every node when ``label`` is None)."""

    variable: str
    label: str | None

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.variable,)


@dataclass(frozen=True)
class ScanEdges:
    """Edges of one label, oriented as written in the pattern.

    Columns are ``(left, edge, right)``: for a forward pattern ``left`` is the
    edge source, for a backward one it is the target, and an undirected
    pattern yields both orientations.
    """

    label: str | None
    direction: Direction
    left: str
    edge: str
    right: str

    @property
    def columns(self) -> tuple[str, ...]:
        if self.left == self.right:
            return (self.left, self.edge)
        return (self.left, self.edge, self.right)


@dataclass(frozen=True)
class Filter:
    input: "PlanNode"
    predicate: Expr

    @property
    def columns(self) -> tuple[str, ...]:
        return self.input.columns


@dataclass(frozen=True)
class HashJoin:
    """Inner equi-join on shared variable columns; no keys means a cross product."""

    left: "PlanNode"
    right: "PlanNode"
    keys: tuple[str, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        seen = set(self.left.columns)
        return self.left.columns + tuple(c for c in self.right.columns if c not in seen)


@dataclass(frozen=True)
class TraverseClosure:
    """One-or-more hops over ``label`` from ``source`` to ``target``.

    When ``target`` is already a column of the input the operator acts as a
    semi-join keeping rows whose pair is connected; otherwise it extends each
    row once per reachable target.
    """

    input: "PlanNode"
    source: str
    label: str
    direction: Direction
    target: str
    mode: PathMode
    min_hops: int = 1
    depth_limit: int = 2000

    @property
    def target_bound(self) -> bool:
        return self.target in self.input.columns

    @property
    def columns(self) -> tuple[str, ...]:
        if self.target_bound:
            return self.input.columns
        return self.input.columns + (self.target,)


@dataclass(frozen=True)
class RecursiveFixpoint:
    """Relational form of a closure: depth-limited semi-naive recursion over the edge relation."""

    input: "PlanNode"
    source: str
    label: str
    direction: Direction
    target: str
    depth_limit: int = 2000
    cycle_predicate: str = "current = start"

    @property
    def target_bound(self) -> bool:
        return self.target in self.input.columns

    @property
    def columns(self) -> tuple[str, ...]:
        if self.target_bound:
            return self.input.columns
        return self.input.columns + (self.target,)


@dataclass(frozen=True)
class OutputColumn:
    name: str
    variable: str
    key: str | None  # None: the element id itself (never exposed to users)


@dataclass(frozen=True)
class Project:
    input: "PlanNode"
    outputs: tuple[OutputColumn, ...]

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.outputs)


@dataclass(frozen=True)
class Distinct:
    input: "PlanNode"

    @property
    def columns(self) -> tuple[str, ...]:
        return self.input.columns


PlanNode = Union[ScanNodes, ScanEdges, Filter, HashJoin, TraverseClosure, RecursiveFixpoint, Project, Distinct]
CLOSURES = (TraverseClosure, RecursiveFixpoint)


def children(node: PlanNode) -> tuple[PlanNode, ...]:
    if isinstance(node, HashJoin):
        return (node.left, node.right)
    if isinstance(node, (ScanNodes, ScanEdges)):
        return ()
    return (node.input,)


def walk_plan(node: PlanNode) -> Iterator[PlanNode]:
    yield node
    for child in children(node):
        yield from walk_plan(child)


@dataclass(frozen=True)
class VariableInfo:
    name: str
    kind: str  # "node" or "edge"
    label: str | None


@dataclass(frozen=True)
class LogicalPlan:
    root: PlanNode
    variables: dict[str, VariableInfo] = field(hash=False)
    depth_limit: int = 2000

    @property
    def columns(self) -> tuple[str, ...]:
        return self.root.columns

    def operators(self) -> list[PlanNode]:
        return list(walk_plan(self.root))

    def count(self, kind: type) -> int:
        return sum(isinstance(op, kind) for op in walk_plan(self.root))

    def has_closure(self) -> bool:
        return any(isinstance(op, CLOSURES) for op in walk_plan(self.root))

    def join_key_pairs(self) -> int:
        return sum(len(op.keys) for op in walk_plan(self.root) if isinstance(op, HashJoin))


@dataclass(frozen=True)
class BackendChoice:
    backend: str  # "relational" or "graph"
    reason: str


BACKENDS = ("relational", "graph")


def choose_backend(plan: LogicalPlan, stats: dict[str, int] | None = None,
                   override: str | None = None) -> BackendChoice:
    """Closures go to the graph backend, pure join plans to the relational one."""
    if override is not None and override != "auto":
        if override not in BACKENDS:
            raise ValueError(f"unknown backend {override!r}")
        return BackendChoice(override, "user override")
    closures = sum(isinstance(op, CLOSURES) for op in walk_plan(plan.root))
    if closures:
        return BackendChoice("graph", f"{closures} closure operator(s): CSR traversal avoids recursive joins")
    joins = plan.count(HashJoin)
    return BackendChoice("relational", f"bounded plan with {joins} join(s): hash joins over edge relations")


def _describe(node: PlanNode) -> str:
    if isinstance(node, ScanNodes):
        return f"ScanNodes label={node.label or '*'} ({node.variable})"
    if isinstance(node, ScanEdges):
        arrow = {Direction.FORWARD: ("-", "->"), Direction.BACKWARD: ("<-", "-"),
                 Direction.UNDIRECTED: ("-", "-")}[node.direction]
        return (f"ScanEdges label={node.label or '*'} {node.direction.value} "
                f"({node.left}){arrow[0]}[{node.edge}]{arrow[1]}({node.right})")
    if isinstance(node, Filter):
        return f"Filter {format_expr(node.predicate)}"
    if isinstance(node, HashJoin):
        keys = ", ".join(node.keys) if node.keys else "none (cross product)"
        return f"HashJoin keys=({keys})"
    if isinstance(node, TraverseClosure):
        how = "semi-join" if node.target_bound else "extend"
        return (f"TraverseClosure ({node.source})-[:{node.label}]->*({node.target}) mode={node.mode.value} "
                f"min_hops={node.min_hops} depth_limit={node.depth_limit} {how}")
    if isinstance(node, RecursiveFixpoint):
        how = "semi-join" if node.target_bound else "extend"
        return (f"RecursiveFixpoint ({node.source})-[:{node.label}]->*({node.target}) "
                f"depth_limit={node.depth_limit} {how}")
    if isinstance(node, Project):
        cols = ", ".join(
            f"{o.variable}.{o.key} AS {o.name}" if o.key else f"{o.variable} AS {o.name}" for o in node.outputs
        )
        return f"Project [{cols}]"
    if isinstance(node, Distinct):
        return "Distinct"
    raise TypeError(node)


def explain(plan: LogicalPlan | PlanNode, choice: BackendChoice | None = None) -> str:
    """Indented operator tree, one operator per line, followed by the backend choice."""
    root = plan.root if isinstance(plan, LogicalPlan) else plan
    lines: list[str] = []

    def visit(node: PlanNode, depth: int) -> None:
        lines.append("  " * depth + _describe(node))
        for child in children(node):
            visit(child, depth + 1)

    visit(root, 0)
    if choice is not None:
        lines.append(f"backend: {choice.backend} ({choice.reason})")
    return "\n".join(lines)


def to_relational(plan: LogicalPlan) -> LogicalPlan:
    """Rewrite every TraverseClosure into a RecursiveFixpoint."""

    def rewrite(node: PlanNode) -> PlanNode:
        if isinstance(node, TraverseClosure):
            return RecursiveFixpoint(rewrite(node.input), node.source, node.label, node.direction,
                                     node.target, node.depth_limit)
        if isinstance(node, HashJoin):
            return HashJoin(rewrite(node.left), rewrite(node.right), node.keys)
        if isinstance(node, (ScanNodes, ScanEdges)):
            return node
        return type(node)(rewrite(node.input), *[getattr(node, f) for f in node.__dataclass_fields__ if f != "input"])

    return LogicalPlan(rewrite(plan.root), plan.variables, plan.depth_limit)
