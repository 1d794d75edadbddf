"""Desk-scale simulator of a PIM-based graph store serving batch k-hop queries."""

from .engine import GraphSystem, QueryBatch, QueryPlan, compile_khop
from .fabric import HOST, CostLedger, Fabric, FabricConfig, Loc, Module
from .graph import SENTINEL, Edge, EdgeEvent, EventKind, khop_oracle, parse_snap_edgelist
from .partitioner import HashPartitioner, MoctopusPartitioner, PartitionerConfig

__all__ = [
    "GraphSystem", "QueryBatch", "QueryPlan", "compile_khop",
    "HOST", "CostLedger", "Fabric", "FabricConfig", "Loc", "Module",
    "SENTINEL", "Edge", "EdgeEvent", "EventKind", "khop_oracle", "parse_snap_edgelist",
    "HashPartitioner", "MoctopusPartitioner", "PartitionerConfig",
]
