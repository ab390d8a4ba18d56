"""Lowering of a parsed MATCH query to a logical plan.

The binding order is fixed: every single-hop edge in declaration order, then
every starred edge, then nodes that no edge binds. WHERE conjuncts are placed
right after the step that binds their last variable. ``transpile`` walks the
same step list, so both routes see identical join orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..errors import UnknownLabel, UnknownProperty, UnsupportedPattern
from ..graphcat.ddl import EdgeTableDef, PropertyGraphDef, VertexTableDef
from ..pgqparse.ast import (
    Direction,
    EdgePattern,
    Expr,
    NodePattern,
    PathMode,
    PropertyRef,
    QueryAst,
    conjuncts,
    referenced_vars,
    walk_expr,
)
from ..pgqparse.parser import check_scopes
from .plan import (
    Distinct,
    Filter,
    HashJoin,
    LogicalPlan,
    OutputColumn,
    PlanNode,
    Project,
    ScanEdges,
    ScanNodes,
    TraverseClosure,
    VariableInfo,
)

DEFAULT_DEPTH_LIMIT = 2000


@dataclass(frozen=True)
class EdgeStep:
    left: str
    edge: str
    right: str
    label: str | None
    direction: Direction


@dataclass(frozen=True)
class ClosureStep:
    source: str
    label: str
    direction: Direction  # direction of travel from ``source``
    target: str
    mode: PathMode


@dataclass(frozen=True)
class NodeStep:
    variable: str
    label: str | None


@dataclass(frozen=True)
class FilterStep:
    predicate: Expr


Step = Union[EdgeStep, ClosureStep, NodeStep, FilterStep]

_FLIP = {Direction.FORWARD: Direction.BACKWARD, Direction.BACKWARD: Direction.FORWARD,
         Direction.UNDIRECTED: Direction.UNDIRECTED}


@dataclass
class Binding:
    """Analysed query: named variables, their labels and the ordered steps."""

    ast: QueryAst
    gdef: PropertyGraphDef
    kinds: dict[str, str] = field(default_factory=dict)
    labels: dict[str, str | None] = field(default_factory=dict)  # effective label per variable
    steps: list[Step] = field(default_factory=list)
    outputs: list[OutputColumn] = field(default_factory=list)

    def vertex_def(self, var: str) -> VertexTableDef | None:
        label = self.labels.get(var)
        return None if label is None else self.gdef.vertex_by_label(label)

    def edge_def(self, var: str) -> EdgeTableDef | None:
        label = self.labels.get(var)
        return None if label is None else self.gdef.edge_by_label(label)


def _endpoint_labels(gdef: PropertyGraphDef, et: EdgeTableDef) -> tuple[str | None, str | None]:
    def label_of(table: str) -> str | None:
        try:
            return gdef.vertex_table(table).label_name
        except KeyError:
            return None

    return label_of(et.source.vertex_table), label_of(et.destination.vertex_table)


def analyse(ast: QueryAst, gdef: PropertyGraphDef) -> Binding:
    """Name anonymous elements, resolve labels and compute the binding order."""
    check_scopes(ast)
    b = Binding(ast, gdef)
    declared: dict[str, list[str]] = {}
    implied: dict[str, set[str]] = {}
    hops: list[tuple[str, EdgePattern, str, PathMode]] = []
    node_order: list[str] = []
    n_anon = e_anon = 0
    seen_edges: set[str] = set()

    def node_name(node: NodePattern) -> str:
        nonlocal n_anon
        if node.variable is not None:
            name = node.variable
        else:
            n_anon += 1
            name = f"_n{n_anon}"
        if name not in b.kinds:
            b.kinds[name] = "node"
            node_order.append(name)
        if node.label is not None:
            if gdef.vertex_by_label(node.label.name) is None:
                raise UnknownLabel(node.label.name)
            label = gdef.vertex_by_label(node.label.name).label_name  # type: ignore[union-attr]
            if label not in declared.setdefault(name, []):
                declared[name].append(label)
        return name

    for pat in ast.patterns:
        names = [node_name(n) for n in pat.nodes]
        for i, edge in enumerate(pat.edges):
            if edge.variable is not None:
                if edge.variable in seen_edges:
                    raise UnsupportedPattern(f"edge variable {edge.variable!r} bound more than once")
                seen_edges.add(edge.variable)
                ename = edge.variable
            else:
                e_anon += 1
                ename = f"_e{e_anon}"
            b.kinds[ename] = "edge"
            label = None
            if edge.label is not None:
                et = gdef.edge_by_label(edge.label.name)
                if et is None:
                    raise UnknownLabel(edge.label.name)
                label = et.label_name
                src_label, dst_label = _endpoint_labels(gdef, et)
                left, right = names[i], names[i + 1]
                if edge.direction is Direction.BACKWARD:
                    src_label, dst_label = dst_label, src_label
                if edge.direction is Direction.UNDIRECTED:
                    if src_label == dst_label and src_label is not None:
                        implied.setdefault(left, set()).add(src_label)
                        implied.setdefault(right, set()).add(src_label)
                else:
                    if src_label:
                        implied.setdefault(left, set()).add(src_label)
                    if dst_label:
                        implied.setdefault(right, set()).add(dst_label)
            elif edge.is_star:
                raise UnsupportedPattern("Kleene star over an unlabeled edge")
            if edge.is_star and edge.direction is Direction.UNDIRECTED:
                raise UnsupportedPattern("Kleene star over an undirected edge")
            b.labels[ename] = label
            named = EdgePattern(ename, edge.label, edge.direction, edge.quantifier)
            hops.append((names[i], named, names[i + 1], pat.mode))

    for name in node_order:
        labels = declared.get(name, [])
        imp = implied.get(name, set())
        b.labels[name] = labels[0] if labels else (next(iter(imp)) if len(imp) == 1 else None)

    # -- step ordering ---------------------------------------------------------
    bound: set[str] = set()
    pending = list(conjuncts(ast.where))
    checked: set[tuple[str, str]] = set()

    def flush_filters() -> None:
        nonlocal pending
        keep = []
        for pred in pending:
            if referenced_vars(pred) <= bound:
                b.steps.append(FilterStep(pred))
            else:
                keep.append(pred)
        pending = keep

    def label_checks(var: str) -> None:
        for label in declared.get(var, []):
            if label not in implied.get(var, set()) and (var, label) not in checked:
                checked.add((var, label))
                b.steps.append(NodeStep(var, label))

    def bind(*names: str) -> None:
        new = [n for n in names if n not in bound]
        bound.update(names)
        for n in new:
            label_checks(n)
        flush_filters()

    for left, edge, right, _ in hops:
        if edge.is_star:
            continue
        b.steps.append(EdgeStep(left, edge.variable, right, b.labels[edge.variable], edge.direction))  # type: ignore[arg-type]
        bound.add(edge.variable)  # type: ignore[arg-type]
        bind(left, right)
    for left, edge, right, mode in hops:
        if not edge.is_star:
            continue
        source, target, direction = left, right, edge.direction
        if source not in bound and target in bound:
            source, target, direction = target, source, _FLIP[direction]
        if source not in bound:
            scan_label = declared.get(source, [None])[0] or next(iter(implied.get(source, set())), None)
            b.steps.append(NodeStep(source, scan_label))
            if scan_label is not None:
                checked.add((source, scan_label))
            bind(source)
        b.steps.append(ClosureStep(source, b.labels[edge.variable], direction, target, mode))  # type: ignore[arg-type]
        bind(target)
    for name in node_order:
        if name not in bound:
            label = b.labels[name]
            b.steps.append(NodeStep(name, label))
            if label is not None:
                checked.add((name, label))
            bind(name)
    for pred in pending:  # only constant predicates can remain
        b.steps.insert(0, FilterStep(pred))

    _check_properties(b)
    b.outputs = _outputs(b, node_order)
    return b


def _check_properties(b: Binding) -> None:
    refs: list[PropertyRef] = []
    if b.ast.where is not None:
        refs += [n for n in walk_expr(b.ast.where) if isinstance(n, PropertyRef)]
    refs += [i.expr for i in b.ast.return_items if isinstance(i.expr, PropertyRef)]
    for ref in refs:
        kind = b.kinds[ref.var]
        elem = b.vertex_def(ref.var) if kind == "node" else b.edge_def(ref.var)
        if elem is None or elem.properties is None:
            continue  # unlabeled or unresolved definition: absent properties read as Null
        if ref.key.lower() not in {p.lower() for p in elem.properties}:
            raise UnknownProperty(f"{ref.var}.{ref.key}: label {elem.label_name} has no property {ref.key!r}")


def _key_outputs(b: Binding, var: str, name: str | None) -> list[OutputColumn]:
    vt = b.vertex_def(var)
    if vt is None or not vt.key:
        return [OutputColumn(name or var, var, None)]
    if len(vt.key) == 1:
        return [OutputColumn(name or f"{var}_{vt.key[0]}", var, vt.key[0])]
    base = name or var
    return [OutputColumn(f"{base}_{k}", var, k) for k in vt.key]


def _outputs(b: Binding, node_order: list[str]) -> list[OutputColumn]:
    ast = b.ast
    outs: list[OutputColumn] = []
    if not ast.return_items:
        for var in node_order:
            if not var.startswith("_"):
                outs += _key_outputs(b, var, None)
    else:
        for item in ast.return_items:
            if isinstance(item.expr, PropertyRef):
                outs.append(OutputColumn(item.output_name, item.expr.var, item.expr.key))
            elif b.kinds.get(item.expr.name) == "edge":
                raise UnsupportedPattern(f"returning edge variable {item.expr.name!r}")
            else:
                outs += _key_outputs(b, item.expr.name, item.alias or item.expr.name)
    if ast.select_columns is not None:
        by_name = {o.name.lower(): o for o in outs}
        picked = []
        for col in ast.select_columns:
            if col.lower() not in by_name:
                raise UnsupportedPattern(f"selected column {col!r} is not produced by RETURN")
            picked.append(by_name[col.lower()])
        outs = picked
    return outs


def lower(ast: QueryAst, gdef: PropertyGraphDef, depth_limit: int = DEFAULT_DEPTH_LIMIT) -> LogicalPlan:
    """Build the logical plan for ``ast`` against graph definition ``gdef``."""
    if depth_limit < 1:
        raise ValueError("depth_limit must be at least 1")
    b = analyse(ast, gdef)
    root: PlanNode | None = None

    def join(node: PlanNode) -> PlanNode:
        if root is None:
            return node
        keys = tuple(c for c in node.columns if c in root.columns)
        return HashJoin(root, node, keys)

    head_filters: list[Expr] = []
    for step in b.steps:
        if isinstance(step, EdgeStep):
            root = join(ScanEdges(step.label, step.direction, step.left, step.edge, step.right))
        elif isinstance(step, NodeStep):
            root = join(ScanNodes(step.variable, step.label))
        elif isinstance(step, ClosureStep):
            assert root is not None
            root = TraverseClosure(root, step.source, step.label, step.direction, step.target, step.mode,
                                   1, depth_limit)
        elif root is None:
            head_filters.append(step.predicate)
        else:
            root = Filter(root, step.predicate)
    if root is None:
        raise UnsupportedPattern("query binds no variables")
    for pred in head_filters:
        root = Filter(root, pred)
    root = Project(root, tuple(b.outputs))
    if ast.distinct:
        root = Distinct(root)
    variables = {name: VariableInfo(name, kind, b.labels.get(name)) for name, kind in b.kinds.items()}
    return LogicalPlan(root, variables, depth_limit)
