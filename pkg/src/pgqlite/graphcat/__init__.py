"""Property-graph catalog: DDL, validation, materialization and CSR slices."""

from .ddl import (
    DdlScript,
    EdgeTableDef,
    KeyReference,
    PropertyGraphDef,
    VertexTableDef,
    format_create_table,
    format_ddl,
    parse_ddl,
    parse_script,
)
from .graph import Csr, MaterializedGraph, build_csr, materialize, validate_graph_def

__all__ = [
    "Csr",
    "DdlScript",
    "EdgeTableDef",
    "KeyReference",
    "MaterializedGraph",
    "PropertyGraphDef",
    "VertexTableDef",
    "build_csr",
    "format_create_table",
    "format_ddl",
    "materialize",
    "parse_ddl",
    "parse_script",
    "validate_graph_def",
]
