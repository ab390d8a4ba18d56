"""Materialized property graphs and their CSR adjacency slices."""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable

import numpy as np

from ..errors import DanglingEdgeKey, InvalidGraphDef, NodeOutOfRange, UnknownLabel, UnknownTable
from ..pgqparse.ast import Direction
from ..relstore import Database, Table, Value
from .ddl import EdgeTableDef, KeyReference, PropertyGraphDef, VertexTableDef


def _canon_columns(table: Table, cols: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(table.schema.columns[table.schema.index_of(c)].name for c in cols)


def _resolve_ref(db: Database, gdef: PropertyGraphDef, et: EdgeTableDef, ref: KeyReference) -> KeyReference:
    table = db.table(et.table)
    try:
        vt = gdef.vertex_table(ref.vertex_table)
    except KeyError:
        raise InvalidGraphDef(
            f"edge table {et.table} references {ref.vertex_table}, which is not a declared vertex table"
        ) from None
    vtable = db.table(vt.table)
    if len(ref.columns) != len(ref.vertex_columns):
        raise InvalidGraphDef(f"edge table {et.table}: key arity mismatch in reference to {vt.table}")
    return KeyReference(_canon_columns(table, ref.columns), vt.table, _canon_columns(vtable, ref.vertex_columns))


def validate_graph_def(db: Database, gdef: PropertyGraphDef) -> PropertyGraphDef:
    """Check ``gdef`` against the catalog and fill in default keys and properties."""
    if gdef.resolved:
        return gdef
    labels = [label.lower() for label in gdef.labels()]
    dup = {label for label in labels if labels.count(label) > 1}
    if dup:
        raise InvalidGraphDef(f"labels must be unique across the graph: {sorted(dup)}")
    tables = [vt.table.lower() for vt in gdef.vertex_tables]
    if len(set(tables)) != len(tables):
        raise InvalidGraphDef("a table may be declared as a vertex table only once")

    vertices = []
    for vt in gdef.vertex_tables:
        table = db.table(vt.table)
        if vt.key is not None:
            key = _canon_columns(table, vt.key)
        elif table.schema.primary_key:
            key = table.schema.primary_key
        else:
            raise InvalidGraphDef(f"vertex table {vt.table} has neither a KEY clause nor a primary key")
        props = table.schema.column_names if vt.properties is None else _canon_columns(table, vt.properties)
        vertices.append(replace(vt, key=key, properties=props))
    resolved = replace(gdef, vertex_tables=tuple(vertices))

    edges = []
    for et in gdef.edge_tables:
        table = db.table(et.table)
        source = _resolve_ref(db, resolved, et, et.source)
        destination = _resolve_ref(db, resolved, et, et.destination)
        key = _canon_columns(table, et.key) if et.key is not None else table.schema.primary_key
        props = table.schema.column_names if et.properties is None else _canon_columns(table, et.properties)
        edges.append(replace(et, source=source, destination=destination, key=key, properties=props))
    return replace(resolved, edge_tables=tuple(edges), resolved=True)


@dataclass(frozen=True)
class Csr:
    """Adjacency of one (edge label, direction): bucket v is targets[offsets[v]:offsets[v+1]]."""

    label: str
    direction: Direction
    offsets: np.ndarray  # int64, length |N| + 1
    targets: np.ndarray  # int64 neighbour node ids
    edge_ids: np.ndarray  # int64 edge ids, parallel to ``targets``

    @property
    def node_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def edge_count(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def lists(self) -> tuple[list[int], list[int], list[int]]:
        """Plain-list copies; Python-level traversal is much faster on lists than on arrays."""
        return self.offsets.tolist(), self.targets.tolist(), self.edge_ids.tolist()

    def neighbors(self, v: int) -> list[tuple[int, int]]:
        if not 0 <= v < self.node_count:
            raise NodeOutOfRange(f"node {v} outside 0..{self.node_count - 1}")
        off, tgt, eid = self.lists
        lo, hi = off[v], off[v + 1]
        return list(zip(tgt[lo:hi], eid[lo:hi]))


class MaterializedGraph:
    """The tuple (N, E, lab, src, tgt, prop) realized as dense id arrays.

    Node ids are assigned in vertex-table declaration order, then row order;
    edge ids likewise over edge tables.
    """

    def __init__(self, db: Database, gdef: PropertyGraphDef) -> None:
        self.db = db
        self.gdef = gdef
        self.vertex_labels = [vt.label_name for vt in gdef.vertex_tables]
        self.edge_labels = [et.label_name for et in gdef.edge_tables]
        self._vertex_tables = [db.table(vt.table) for vt in gdef.vertex_tables]
        self._edge_tables = [db.table(et.table) for et in gdef.edge_tables]

        node_table: list[int] = []
        node_row: list[int] = []
        self.node_base: list[int] = []
        for ti, table in enumerate(self._vertex_tables):
            self.node_base.append(len(node_table))
            node_table.extend([ti] * table.row_count)
            node_row.extend(range(table.row_count))
        self.node_table = node_table
        self.node_row = node_row

        self._key_maps: dict[tuple[int, tuple[str, ...]], dict[tuple, int]] = {}
        edge_table: list[int] = []
        edge_row: list[int] = []
        src: list[int] = []
        tgt: list[int] = []
        self.edge_base: list[int] = []
        for ti, (et, table) in enumerate(zip(gdef.edge_tables, self._edge_tables)):
            self.edge_base.append(len(edge_table))
            ends = []
            for ref in (et.source, et.destination):
                vti = self._vertex_index(ref.vertex_table)
                kmap = self._key_map(vti, ref.vertex_columns)
                cols = [table.column(c) for c in ref.columns]
                ids = []
                for r in range(table.row_count):
                    key = tuple(c[r] for c in cols)
                    node = kmap.get(key)
                    if node is None:
                        raise DanglingEdgeKey(
                            f"{et.table} row {r}: {', '.join(ref.columns)}={key} has no matching {ref.vertex_table} row"
                        )
                    ids.append(node)
                ends.append(ids)
            edge_table.extend([ti] * table.row_count)
            edge_row.extend(range(table.row_count))
            src.extend(ends[0])
            tgt.extend(ends[1])
        self.edge_table = edge_table
        self.edge_row = edge_row
        self.src = src
        self.tgt = tgt

        self._node_props = [self._prop_columns(t, vt.properties) for t, vt in zip(self._vertex_tables, gdef.vertex_tables)]
        self._edge_props = [self._prop_columns(t, et.properties) for t, et in zip(self._edge_tables, gdef.edge_tables)]
        self._csr_cache: dict[tuple[str, Direction], Csr] = {}
        self._csr_lock = threading.Lock()

    # -- construction helpers --------------------------------------------------

    def _vertex_index(self, table: str) -> int:
        low = table.lower()
        for i, vt in enumerate(self.gdef.vertex_tables):
            if vt.table.lower() == low:
                return i
        raise UnknownTable(table)

    def _key_map(self, vti: int, columns: tuple[str, ...]) -> dict[tuple, int]:
        cache_key = (vti, tuple(c.lower() for c in columns))
        kmap = self._key_maps.get(cache_key)
        if kmap is None:
            table = self._vertex_tables[vti]
            cols = [table.column(c) for c in columns]
            base = self.node_base[vti]
            kmap = {}
            for r in range(table.row_count):
                kmap.setdefault(tuple(c[r] for c in cols), base + r)
            self._key_maps[cache_key] = kmap
        return kmap

    @staticmethod
    def _prop_columns(table: Table, props: tuple[str, ...] | None) -> dict[str, list[Value]]:
        names = table.schema.column_names if props is None else props
        return {p.lower(): table.column(p) for p in names}

    # -- the formal tuple ----------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self.node_table)

    @property
    def edge_count(self) -> int:
        return len(self.edge_table)

    def node_label(self, n: int) -> str:
        return self.vertex_labels[self.node_table[n]]

    def edge_label(self, e: int) -> str:
        return self.edge_labels[self.edge_table[e]]

    def lab_node(self, n: int) -> frozenset[str]:
        return frozenset((self.node_label(n),))

    def lab_edge(self, e: int) -> frozenset[str]:
        return frozenset((self.edge_label(e),))

    def node_prop(self, n: int, key: str) -> Value:
        col = self._node_props[self.node_table[n]].get(key.lower())
        return None if col is None else col[self.node_row[n]]

    def edge_prop(self, e: int, key: str) -> Value:
        col = self._edge_props[self.edge_table[e]].get(key.lower())
        return None if col is None else col[self.edge_row[e]]

    def node_has_prop(self, n: int, key: str) -> bool:
        return key.lower() in self._node_props[self.node_table[n]]

    def edge_has_prop(self, e: int, key: str) -> bool:
        return key.lower() in self._edge_props[self.edge_table[e]]

    def node_prop_getter(self, key: str) -> Callable[[int], Value]:
        per_table = [props.get(key.lower()) for props in self._node_props]
        node_table, node_row = self.node_table, self.node_row

        def get(n: int) -> Value:
            col = per_table[node_table[n]]
            return None if col is None else col[node_row[n]]

        return get

    def edge_prop_getter(self, key: str) -> Callable[[int], Value]:
        per_table = [props.get(key.lower()) for props in self._edge_props]
        edge_table, edge_row = self.edge_table, self.edge_row

        def get(e: int) -> Value:
            col = per_table[edge_table[e]]
            return None if col is None else col[edge_row[e]]

        return get

    def node_key(self, n: int) -> tuple:
        vt = self.gdef.vertex_tables[self.node_table[n]]
        table = self._vertex_tables[self.node_table[n]]
        return tuple(table.column(c)[self.node_row[n]] for c in vt.key or ())

    def node_by_key(self, table: str, key: tuple) -> int | None:
        vti = self._vertex_index(table)
        return self._key_map(vti, self.gdef.vertex_tables[vti].key or ()).get(key)

    def vertex_def(self, label: str) -> VertexTableDef:
        vt = self.gdef.vertex_by_label(label)
        if vt is None:
            raise UnknownLabel(label)
        return vt

    # -- label scans -----------------------------------------------------------

    def _label_index(self, labels: list[str], label: str) -> int | None:
        low = label.lower()
        for i, name in enumerate(labels):
            if name.lower() == low:
                return i
        return None

    def has_node_label(self, label: str) -> bool:
        return self._label_index(self.vertex_labels, label) is not None

    def has_edge_label(self, label: str) -> bool:
        return self._label_index(self.edge_labels, label) is not None

    def nodes_with_label(self, label: str) -> range:
        i = self._label_index(self.vertex_labels, label)
        if i is None:
            raise UnknownLabel(label)
        return range(self.node_base[i], self.node_base[i] + self._vertex_tables[i].row_count)

    def edges_with_label(self, label: str) -> range:
        i = self._label_index(self.edge_labels, label)
        if i is None:
            raise UnknownLabel(label)
        return range(self.edge_base[i], self.edge_base[i] + self._edge_tables[i].row_count)

    def node_label_index(self, label: str) -> int | None:
        return self._label_index(self.vertex_labels, label)

    # -- CSR ---------------------------------------------------------------------

    def csr(self, label: str, direction: Direction = Direction.FORWARD) -> Csr:
        """Cached CSR slice; concurrent first builds yield one canonical object."""
        key = (label.lower(), direction)
        cached = self._csr_cache.get(key)
        if cached is not None:
            return cached
        with self._csr_lock:
            cached = self._csr_cache.get(key)
            if cached is None:
                cached = build_csr(self, label, direction)
                self._csr_cache[key] = cached
            return cached

    def stats(self) -> dict[str, int]:
        out = {"|N|": self.node_count, "|E|": self.edge_count}
        for label in self.edge_labels:
            out[f"|E:{label}|"] = len(self.edges_with_label(label))
        return out


def build_csr(g: MaterializedGraph, label: str, direction: Direction = Direction.FORWARD) -> Csr:
    """CSR slice for one edge label; buckets sorted by neighbour id, then edge id."""
    if direction is Direction.UNDIRECTED:
        raise ValueError("CSR slices are forward or backward")
    edges = g.edges_with_label(label)
    n = g.node_count
    eids = np.arange(edges.start, edges.stop, dtype=np.int64)
    src = np.asarray(g.src[edges.start:edges.stop], dtype=np.int64)
    tgt = np.asarray(g.tgt[edges.start:edges.stop], dtype=np.int64)
    if direction is Direction.BACKWARD:
        src, tgt = tgt, src
    order = np.lexsort((eids, tgt, src))
    counts = np.bincount(src, minlength=n) if len(src) else np.zeros(n, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return Csr(g.edge_labels[g._label_index(g.edge_labels, label)], direction, offsets, tgt[order], eids[order])


def materialize(db: Database, gdef: PropertyGraphDef) -> MaterializedGraph:
    """Eagerly realize the graph view defined by ``gdef`` over ``db``."""
    return MaterializedGraph(db, validate_graph_def(db, gdef))
