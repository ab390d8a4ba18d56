"""Plan evaluation for the relational and graph backends.

Both backends run over the same materialized graph and produce rows of
element ids until ``Project`` turns them into property values. They differ
in how joins against edge scans and closures are evaluated: the relational
backend hash-joins edge relations and runs a recursive fixpoint, the graph
backend expands CSR adjacency and runs BFS.
"""

from __future__ import annotations

from typing import Callable

from ..errors import ValueTypeError
from ..graphcat.graph import MaterializedGraph
from ..pgqparse.ast import (
    Arithmetic,
    BoolOp,
    Comparison,
    Direction,
    Expr,
    IsNull,
    Literal,
    Negate,
    Not,
    Paren,
    PathMode,
    PropertyRef,
    VarRef,
)
from ..planner.plan import (
    Distinct,
    Filter,
    HashJoin,
    LogicalPlan,
    PlanNode,
    Project,
    RecursiveFixpoint,
    ScanEdges,
    ScanNodes,
    TraverseClosure,
    to_relational,
)
from ..relstore import Database, Value, compare_values
from .kernels import any_shortest_cycle, iterate_fixpoint, join_key, ms_bfs
from .result import ResultTable

Row = tuple
Compiled = Callable[[Row], Value]


# -- expressions -------------------------------------------------------------------


def arith(op: str, a: Value, b: Value) -> Value:
    if a is None or b is None:
        return None
    if isinstance(a, bool) or isinstance(b, bool) or not isinstance(a, (int, float)) \
            or not isinstance(b, (int, float)):
        raise ValueTypeError(f"arithmetic {op} needs numbers, got {a!r} and {b!r}")
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        return None
    return a / b


def compile_expr(expr: Expr, resolve: Callable[[Expr], Compiled]) -> Compiled:
    """Turn an expression tree into a row function.

    ``resolve`` compiles column references and any node type this function
    does not know itself.
    """
    if isinstance(expr, Literal):
        value = expr.value
        return lambda row: value
    if isinstance(expr, (PropertyRef, VarRef)):
        return resolve(expr)
    if isinstance(expr, Paren):
        return compile_expr(expr.inner, resolve)
    if isinstance(expr, Comparison):
        left, right, op = compile_expr(expr.left, resolve), compile_expr(expr.right, resolve), expr.op
        return lambda row: compare_values(left(row), right(row), op)
    if isinstance(expr, IsNull):
        inner, neg = compile_expr(expr.operand, resolve), expr.negated
        return lambda row: (inner(row) is not None) if neg else (inner(row) is None)
    if isinstance(expr, Arithmetic):
        left, right, op = compile_expr(expr.left, resolve), compile_expr(expr.right, resolve), expr.op
        return lambda row: arith(op, left(row), right(row))
    if isinstance(expr, Negate):
        inner = compile_expr(expr.operand, resolve)
        return lambda row: arith("-", 0, inner(row))
    if isinstance(expr, Not):
        inner = compile_expr(expr.operand, resolve)

        def negate(row: Row) -> bool | None:
            v = inner(row)
            return None if v is None else not v

        return negate
    if isinstance(expr, BoolOp):
        parts = [compile_expr(op, resolve) for op in expr.operands]
        if expr.op == "AND":
            def conj(row: Row) -> bool | None:
                unknown = False
                for p in parts:
                    v = p(row)
                    if v is False:
                        return False
                    if v is None:
                        unknown = True
                return None if unknown else True
            return conj

        def disj(row: Row) -> bool | None:
            unknown = False
            for p in parts:
                v = p(row)
                if v is True:
                    return True
                if v is None:
                    unknown = True
            return None if unknown else False
        return disj
    return resolve(expr)  # interpreter-specific nodes such as EXISTS


# -- evaluation ----------------------------------------------------------------------


class Evaluator:
    def __init__(self, plan: LogicalPlan, g: MaterializedGraph, backend: str) -> None:
        self.plan = plan
        self.g = g
        self.backend = backend
        self.kinds = {name: info.kind for name, info in plan.variables.items()}

    # -- helpers -----------------------------------------------------------------

    def _edge_ids(self, label: str | None) -> range:
        return self.g.edges_with_label(label) if label is not None else range(self.g.edge_count)

    def _node_ids(self, label: str | None) -> range:
        return self.g.nodes_with_label(label) if label is not None else range(self.g.node_count)

    def _oriented(self, scan: ScanEdges) -> list[tuple[int, int, int]]:
        """(left node, edge, right node) triples for a scan, in edge-id order."""
        src, tgt = self.g.src, self.g.tgt
        out = []
        for e in self._edge_ids(scan.label):
            s, t = src[e], tgt[e]
            if scan.direction is Direction.FORWARD:
                out.append((s, e, t))
            elif scan.direction is Direction.BACKWARD:
                out.append((t, e, s))
            else:
                out.append((s, e, t))
                if s != t:
                    out.append((t, e, s))
        return out

    def _resolver(self, columns: tuple[str, ...]) -> Callable[[Expr], Compiled]:
        index = {c: i for i, c in enumerate(columns)}

        def resolve(ref: Expr) -> Compiled:
            if isinstance(ref, VarRef):
                i = index[ref.name]
                return lambda row: row[i]
            assert isinstance(ref, PropertyRef)
            i = index[ref.var]
            getter = (self.g.node_prop_getter(ref.key) if self.kinds.get(ref.var) == "node"
                      else self.g.edge_prop_getter(ref.key))
            return lambda row: getter(row[i])

        return resolve

    # -- operators ---------------------------------------------------------------

    def run(self, node: PlanNode) -> list[Row]:
        if isinstance(node, ScanNodes):
            return [(n,) for n in self._node_ids(node.label)]
        if isinstance(node, ScanEdges):
            rows = self._oriented(node)
            if node.left == node.right:
                return [(a, e) for a, e, b in rows if a == b]
            return rows
        if isinstance(node, Filter):
            pred = compile_expr(node.predicate, self._resolver(node.input.columns))
            return [row for row in self.run(node.input) if pred(row) is True]
        if isinstance(node, HashJoin):
            if self.backend == "graph" and isinstance(node.right, ScanEdges) and node.keys:
                return self._expand(node)
            return self._hash_join(node)
        if isinstance(node, TraverseClosure):
            return self._closure_graph(node)
        if isinstance(node, RecursiveFixpoint):
            return self._closure_fixpoint(node)
        if isinstance(node, Project):
            return self._project(node)
        if isinstance(node, Distinct):
            return list(dict.fromkeys(self.run(node.input)))
        raise TypeError(f"unknown operator {node!r}")

    def _hash_join(self, node: HashJoin) -> list[Row]:
        left_rows = self.run(node.left)
        right_rows = self.run(node.right)
        lcols, rcols = node.left.columns, node.right.columns
        li = [lcols.index(k) for k in node.keys]
        ri = [rcols.index(k) for k in node.keys]
        extra = [i for i, c in enumerate(rcols) if c not in lcols]
        out: list[Row] = []
        if len(right_rows) <= len(left_rows):
            index: dict[tuple, list[Row]] = {}
            for r in right_rows:
                index.setdefault(join_key(tuple(r[i] for i in ri)), []).append(r)
            for lrow in left_rows:
                for r in index.get(join_key(tuple(lrow[i] for i in li)), ()):
                    out.append(lrow + tuple(r[i] for i in extra))
        else:
            lindex: dict[tuple, list[Row]] = {}
            for lrow in left_rows:
                lindex.setdefault(join_key(tuple(lrow[i] for i in li)), []).append(lrow)
            for r in right_rows:
                tail = tuple(r[i] for i in extra)
                for lrow in lindex.get(join_key(tuple(r[i] for i in ri)), ()):
                    out.append(lrow + tail)
        return out

    def _expand(self, node: HashJoin) -> list[Row]:
        """Join against an edge scan by walking CSR buckets from the bound endpoint."""
        scan: ScanEdges = node.right  # type: ignore[assignment]
        left_rows = self.run(node.left)
        cols = node.left.columns
        if scan.left in cols:
            anchor, other, flip = scan.left, scan.right, False
        else:
            anchor, other, flip = scan.right, scan.left, True
        ai = cols.index(anchor)
        oi = cols.index(other) if other in cols else None
        ei = cols.index(scan.edge) if scan.edge in cols else None
        labels = [scan.label] if scan.label is not None else self.g.edge_labels
        if scan.direction is Direction.UNDIRECTED:
            directions = [Direction.FORWARD, Direction.BACKWARD]
        elif (scan.direction is Direction.FORWARD) != flip:
            directions = [Direction.FORWARD]
        else:
            directions = [Direction.BACKWARD]
        slices = [self.g.csr(label, d).lists + (d,) for label in labels for d in directions]
        src, tgt = self.g.src, self.g.tgt
        self_loop = anchor == other
        layout = [0 if c == scan.edge else 1 for c in node.columns[len(cols):]]
        out: list[Row] = []
        for row in left_rows:
            v = row[ai]
            for offsets, targets, eids, d in slices:
                for j in range(offsets[v], offsets[v + 1]):
                    w, e = targets[j], eids[j]
                    if d is Direction.BACKWARD and len(directions) == 2 and src[e] == tgt[e]:
                        continue  # a self-loop is one undirected match, already produced forwards
                    if self_loop and w != v:
                        continue
                    if oi is not None and row[oi] != w:
                        continue
                    if ei is not None and row[ei] != e:
                        continue
                    out.append(row + tuple((e, w)[p] for p in layout))
        return out

    def _pairs(self, node: TraverseClosure | RecursiveFixpoint, rows: list[Row]) -> tuple[int, int | None]:
        cols = node.input.columns
        si = cols.index(node.source)
        ti = cols.index(node.target) if node.target in cols else None
        return si, ti

    def _closure_graph(self, node: TraverseClosure) -> list[Row]:
        rows = self.run(node.input)
        si, ti = self._pairs(node, rows)
        fwd = self.g.csr(node.label, node.direction)
        if ti is not None and node.mode is PathMode.ANY_SHORTEST:
            back_dir = Direction.BACKWARD if node.direction is Direction.FORWARD else Direction.FORWARD
            back = self.g.csr(node.label, back_dir)
            found = any_shortest_cycle(fwd, back, ((r[si], r[ti]) for r in rows), node.depth_limit)
            ok = {(s, t) for s, t, *_ in found.rows}
            return [r for r in rows if (r[si], r[ti]) in ok]
        reach = ms_bfs(fwd, [r[si] for r in rows], node.depth_limit)
        if ti is not None:
            return [r for r in rows if r[ti] in reach[r[si]]]
        out = []
        for r in rows:
            for t in sorted(reach[r[si]]):
                out.append(r + (t,))
        return out

    def _closure_fixpoint(self, node: RecursiveFixpoint) -> list[Row]:
        rows = self.run(node.input)
        si, ti = self._pairs(node, rows)
        src, tgt = self.g.src, self.g.tgt
        edges = self._edge_ids(node.label)
        if node.direction is Direction.BACKWARD:
            step = [(tgt[e], src[e]) for e in edges]
        else:
            step = [(src[e], tgt[e]) for e in edges]
        starts = dict.fromkeys(r[si] for r in rows)
        base = set()
        for a, b in step:
            if a in starts:
                base.add((a, b, 1))
        reach: dict[int, set[int]] = {s: set() for s in starts}
        state = None
        for state in iterate_fixpoint(base, step, node.depth_limit, dedupe="pair"):
            pass
        if state is not None:
            for start, current, _depth in state.accumulated:
                reach[start].add(current)
        if ti is not None:
            return [r for r in rows if r[ti] in reach[r[si]]]
        return [r + (t,) for r in rows for t in sorted(reach[r[si]])]

    def _project(self, node: Project) -> list[Row]:
        rows = self.run(node.input)
        cols = node.input.columns
        getters = []
        for out in node.outputs:
            i = cols.index(out.variable)
            if out.key is None:
                key_of = self.g.node_key

                def get(row: Row, i: int = i, key_of: Callable = key_of) -> Value:
                    key = key_of(row[i])
                    return key[0] if len(key) == 1 else key
            else:
                prop = (self.g.node_prop_getter(out.key) if self.kinds.get(out.variable) == "node"
                        else self.g.edge_prop_getter(out.key))

                def get(row: Row, i: int = i, prop: Callable = prop) -> Value:
                    return prop(row[i])
            getters.append(get)
        return [tuple(get(row) for get in getters) for row in rows]


def execute(plan: LogicalPlan, db: Database | None, g: MaterializedGraph, backend: str = "auto") -> ResultTable:
    """Evaluate ``plan`` over ``g`` with the chosen backend ("auto" picks by plan shape)."""
    from ..planner.plan import choose_backend

    if backend == "auto":
        backend = choose_backend(plan).backend
    if backend == "relational":
        plan = to_relational(plan)
    elif backend != "graph":
        raise ValueError(f"unknown backend {backend!r}")
    rows = Evaluator(plan, g, backend).run(plan.root)
    return ResultTable(plan.columns, rows)
