"""Experiment harness: ingest, query twice around a migration pass, report."""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from .engine import GraphSystem, QueryResult, compile_khop
from .fabric import CostLedger, FabricConfig
from .generators import parse_gen_spec
from .graph import Edge, EdgeEvent, NodeId, read_snap_file
from .ops import Status
from .partitioner import PartitionerConfig


@dataclass
class ExperimentConfig:
    partitioner: str = "moctopus"
    modules: int = 64
    k: int = 3
    batch_size: int = 1024
    seed: int = 0
    degree_threshold: int = 16
    capacity_factor: float = 1.05
    input: str | None = None
    gen: str | None = None
    out: str | None = None
    mispartition: float = 0.0
    threads: int = 0

    def __post_init__(self):
        if (self.input is None) == (self.gen is None):
            raise ValueError("exactly one of input / gen must be given")
        if self.partitioner not in ("moctopus", "hash"):
            raise ValueError(f"unknown partitioner {self.partitioner!r}")
        if self.k < 1 or self.batch_size < 1 or self.modules < 1:
            raise ValueError("k, batch_size and modules must be >= 1")

    def with_partitioner(self, name: str) -> "ExperimentConfig":
        d = asdict(self)
        d["partitioner"] = name
        return ExperimentConfig(**d)

    def build_system(self) -> GraphSystem:
        pcfg = PartitionerConfig(
            degree_threshold=self.degree_threshold,
            capacity_factor=self.capacity_factor,
            force_hash_fraction=self.mispartition,
            force_hash_salt=self.seed,
        )
        return GraphSystem(self.partitioner, FabricConfig(self.modules, threads=self.threads), pcfg)


def load_edges(cfg: ExperimentConfig) -> list[Edge]:
    if cfg.input is not None:
        return read_snap_file(cfg.input)
    return parse_gen_spec(cfg.gen, cfg.seed)


def answer_checksum(ans: Sequence[set[NodeId]]) -> str:
    """Order-independent digest of per-query answer sets."""
    h = hashlib.sha256()
    for q, nodes in enumerate(ans):
        h.update(f"{q}:".encode())
        h.update(",".join(map(str, sorted(nodes))).encode())
        h.update(b";")
    return h.hexdigest()


def sample_sources(nodes: Sequence[NodeId], batch_size: int, seed: int) -> list[NodeId]:
    rng = random.Random(seed)
    return [nodes[rng.randrange(len(nodes))] for _ in range(batch_size)]


def fresh_edge_batch(nodes: Sequence[NodeId], present: set, size: int, seed: int) -> list[Edge]:
    """Distinct random edges not already in the graph, so deleting them is an exact inverse."""
    rng = random.Random(seed)
    room = len(nodes) ** 2 - len(present)
    if size > room:
        raise ValueError(f"graph too dense for a batch of {size} new edges")
    out: dict[Edge, None] = {}
    while len(out) < size:
        e = Edge(nodes[rng.randrange(len(nodes))], nodes[rng.randrange(len(nodes))])
        if e not in present:
            out[e] = None
    return list(out)


@dataclass
class PassMetrics:
    cpc_bytes: int
    ipc_bytes: int
    host_lookups: int
    intra_lookups: list[int]
    intra_hops: list[int]
    max_over_avg_lookup_ratio: float
    max_over_avg_lookup_count_ratio: float
    answer_pairs: int

    @classmethod
    def from_result(cls, res: QueryResult) -> "PassMetrics":
        c = res.cost
        return cls(c.cpc_bytes, c.ipc_bytes, c.host_lookups, c.intra_lookups, c.intra_hops,
                   round(c.max_over_avg_hops(), 6), round(c.max_over_avg_lookups(), 6),
                   sum(len(a) for a in res.ans))


def _cost_dict(c: CostLedger) -> dict[str, int]:
    return {"cpc_bytes": c.cpc_bytes, "ipc_bytes": c.ipc_bytes}


@dataclass
class MetricsReport:
    config: dict[str, Any]
    graph: dict[str, Any]
    ingest: dict[str, int]
    pass1: PassMetrics
    migration: dict[str, int]
    pass2: PassMetrics
    result_checksum: str
    checksum_stable: bool
    wall_ms: dict[str, float] = field(default_factory=dict)

    # headline numbers are those of the first pass
    @property
    def cpc_bytes(self) -> int:
        return self.pass1.cpc_bytes

    @property
    def ipc_bytes(self) -> int:
        return self.pass1.ipc_bytes

    @property
    def max_over_avg_lookup_ratio(self) -> float:
        return self.pass1.max_over_avg_lookup_ratio

    @property
    def migrations_applied(self) -> int:
        return self.migration["migrations_applied"]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _graph_summary(system: GraphSystem, edges: Sequence[Edge]) -> dict[str, Any]:
    part = system.partitioner
    return {
        "edges_in": len(edges),
        "nodes": len(part.vector),
        "host_resident": len(system.host.rows),
        "module_load_max": max(part.loads),
        "module_load_min": min(part.loads),
        "capacity_limit": part.capacity_limit(),
    }


def run_experiment(cfg: ExperimentConfig, edges: Sequence[Edge] | None = None) -> MetricsReport:
    wall: dict[str, float] = {}
    t0 = time.perf_counter()
    if edges is None:
        edges = load_edges(cfg)
    system = cfg.build_system()
    try:
        before = system.ledger.copy()
        system.ingest(edges)
        ingest_cost = system.ledger - before
        wall["ingest"] = (time.perf_counter() - t0) * 1e3

        nodes = sorted(system.vector.loc)
        if not nodes:
            raise ValueError("empty graph")
        plan = compile_khop(sample_sources(nodes, cfg.batch_size, cfg.seed), cfg.k)

        t1 = time.perf_counter()
        first = system.execute(plan)
        wall["pass1"] = (time.perf_counter() - t1) * 1e3

        t2 = time.perf_counter()
        before = system.ledger.copy()
        moved = system.migrate_from_reports(first.reports)
        mig_cost = system.ledger - before
        wall["migration"] = (time.perf_counter() - t2) * 1e3

        t3 = time.perf_counter()
        second = system.execute(plan)
        wall["pass2"] = (time.perf_counter() - t3) * 1e3

        checksum = answer_checksum(first.ans)
        report = MetricsReport(
            config=_config_dict(cfg),
            graph=_graph_summary(system, edges),
            ingest=_cost_dict(ingest_cost),
            pass1=PassMetrics.from_result(first),
            migration={"migrations_applied": moved, "reports": len(first.reports),
                       **_cost_dict(mig_cost)},
            pass2=PassMetrics.from_result(second),
            result_checksum=checksum,
            checksum_stable=answer_checksum(second.ans) == checksum,
        )
        system.fabric.check_memory_budget()
    finally:
        system.fabric.close()
    wall["total"] = (time.perf_counter() - t0) * 1e3
    report.wall_ms = {k: round(v, 3) for k, v in wall.items()}
    return report


def _config_dict(cfg: ExperimentConfig) -> dict[str, Any]:
    d = asdict(cfg)
    d.pop("out")
    return d


def run_update(cfg: ExperimentConfig, edges: Sequence[Edge] | None = None) -> dict[str, Any]:
    """Insert a random edge batch, replay it, delete it; check queries are restored."""
    t0 = time.perf_counter()
    if edges is None:
        edges = load_edges(cfg)
    system = cfg.build_system()
    try:
        system.ingest(edges)
        nodes = sorted(system.vector.loc)
        plan = compile_khop(sample_sources(nodes, cfg.batch_size, cfg.seed), cfg.k)
        base = answer_checksum(system.execute(plan).ans)

        batch = fresh_edge_batch(nodes, set(system.edges()), cfg.batch_size, cfg.seed + 1)
        phases: dict[str, Any] = {}
        for name, events in (
            ("insert", [EdgeEvent.insert(u, v) for u, v in batch]),
            ("replay", [EdgeEvent.insert(u, v) for u, v in batch]),
            ("delete", [EdgeEvent.delete(u, v) for u, v in batch]),
        ):
            before = system.ledger.copy()
            statuses = system.process_update_batch(events)
            cost = system.ledger - before
            phases[name] = {
                "statuses": {s.value: statuses.count(s) for s in Status},
                **_cost_dict(cost),
            }
        after = answer_checksum(system.execute(plan).ans)
    finally:
        system.fabric.close()
    return {
        "config": _config_dict(cfg),
        "graph": _graph_summary(system, edges),
        "phases": phases,
        "checksum_before": base,
        "checksum_after": after,
        "restored": base == after,
        "wall_ms": {"total": round((time.perf_counter() - t0) * 1e3, 3)},
    }


def run_compare(cfg: ExperimentConfig) -> dict[str, Any]:
    edges = load_edges(cfg)
    reports = {name: run_experiment(cfg.with_partitioner(name), edges).to_dict()
               for name in ("moctopus", "hash")}
    m, h = reports["moctopus"], reports["hash"]

    def ratio(a, b):
        return round(a / b, 6) if b else None

    summary = {
        "ipc_ratio_pass1": ratio(m["pass1"]["ipc_bytes"], h["pass1"]["ipc_bytes"]),
        "ipc_ratio_pass2": ratio(m["pass2"]["ipc_bytes"], h["pass2"]["ipc_bytes"]),
        "cpc_ratio_pass1": ratio(m["pass1"]["cpc_bytes"], h["pass1"]["cpc_bytes"]),
        "lookup_imbalance_moctopus": m["pass1"]["max_over_avg_lookup_ratio"],
        "lookup_imbalance_hash": h["pass1"]["max_over_avg_lookup_ratio"],
        "checksums_equal": m["result_checksum"] == h["result_checksum"],
    }
    return {"summary": summary, "moctopus": m, "hash": h}


def strip_wall(obj: Any) -> Any:
    """Drop every ``wall_ms`` entry; used for determinism comparisons."""
    if isinstance(obj, dict):
        return {k: strip_wall(v) for k, v in obj.items() if k != "wall_ms"}
    if isinstance(obj, list):
        return [strip_wall(v) for v in obj]
    return obj


def format_report(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2) + "\n"
