"""Query processor: k-hop plans, smxm/mwait rounds and update batches."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import ops
from .errors import ContractError
from .fabric import CostLedger, Fabric, FabricConfig
from .graph import SENTINEL, EdgeEvent, EventKind, NodeId
from .host_store import INITIAL_CAPACITY, HostStore
from .partitioner import (MigrationPlan, MoctopusPartitioner, PartitionerConfig, Promote,
                          make_partitioner)

FrontierMatrix = list[set[NodeId]]


@dataclass(frozen=True)
class QueryBatch:
    sources: tuple[NodeId, ...]

    def __init__(self, sources: Iterable[NodeId]):
        object.__setattr__(self, "sources", tuple(sources))

    def __len__(self):
        return len(self.sources)


@dataclass(frozen=True)
class QueryPlan:
    batch: QueryBatch
    k: int

    @property
    def rounds(self) -> int:
        return self.k


def compile_khop(batch: QueryBatch | Sequence[NodeId], k: int) -> QueryPlan:
    if k < 1:
        raise ValueError("k-hop plans need k >= 1")
    if not isinstance(batch, QueryBatch):
        batch = QueryBatch(batch)
    return QueryPlan(batch, k)


@dataclass
class QueryResult:
    ans: FrontierMatrix
    cost: CostLedger
    reports: list[ops.Report] = field(default_factory=list)
    # ids dispatched to modules per round, for the frontier-cost check
    dispatched_ids: list[int] = field(default_factory=list)


class GraphSystem:
    """One simulated Moctopus (or PIM-hash) deployment."""

    def __init__(
        self,
        partitioner: str = "moctopus",
        fabric_config: FabricConfig | None = None,
        partitioner_config: PartitionerConfig | None = None,
        initial_capacity: int = INITIAL_CAPACITY,
    ):
        self.fabric = Fabric(fabric_config)
        self.partitioner: MoctopusPartitioner = make_partitioner(
            partitioner, self.fabric.P, partitioner_config)
        self.host = HostStore(self.fabric, initial_capacity)
        self.migrations_applied = 0

    @property
    def ledger(self) -> CostLedger:
        return self.fabric.ledger

    @property
    def vector(self):
        return self.partitioner.vector

    # -- storage hooks -----------------------------------------------------------

    def fetch_adjacency(self, u: NodeId) -> list[NodeId]:
        loc = self.partitioner.loc(u)
        if loc is None or self.partitioner.out_degree(u) == 0:
            return []
        if loc.is_host:
            return self.host.scan(u)
        return self.fabric.dispatch(ops.FetchAdj(u), loc.module)

    def _move(self, u: NodeId, src: int, dst: int):
        # rows exist on modules only for nodes with out-edges
        if self.partitioner.out_degree(u) == 0:
            return
        hops = self.fabric.dispatch(ops.MigrateOut(u), src)
        self.fabric.dispatch(ops.MigrateIn(u, hops), dst)

    def promote_node(self, u: NodeId):
        loc = self.partitioner.loc(u)
        if loc is None or loc.is_host:
            raise ContractError(f"node {u} is not module-resident")
        hops = []
        if self.partitioner.out_degree(u) > 0:
            hops = self.fabric.dispatch(ops.MigrateOut(u), loc.module)
        self.host.promote(u, hops)
        self.partitioner.apply_promotion(u, self._move)

    def apply_migration(self, plan: MigrationPlan) -> int:
        n = self.partitioner.apply_migration(plan, self._move)
        self.migrations_applied += n
        return n

    def migrate_from_reports(self, reports: Iterable[ops.Report]) -> int:
        plan = self.partitioner.plan_migrations(reports, self.fetch_adjacency)
        return self.apply_migration(plan)

    # -- updates -------------------------------------------------------------------

    def _store_edge(self, u: NodeId, v: NodeId) -> ops.Status:
        loc = self.partitioner.loc(u)
        if loc.is_host:
            return self.host.insert_edge(u, v)
        return self.fabric.dispatch(ops.Add(u, v), loc.module)

    def insert_edge(self, u: NodeId, v: NodeId) -> ops.Status:
        part = self.partitioner
        fresh = u not in part.vector or v not in part.vector
        part.place_endpoints(u, v)
        status = self._store_edge(u, v)
        if fresh and status is not ops.Status.INSERTED:
            raise ContractError(f"edge ({u},{v}) with a new endpoint reported {status}")
        if status is ops.Status.INSERTED:
            promo = part.note_out_edge(u)
            if isinstance(promo, Promote):
                self.promote_node(u)
        return status

    def delete_edge(self, u: NodeId, v: NodeId) -> ops.Status:
        loc = self.partitioner.loc(u)
        if loc is None or v not in self.partitioner.vector:
            return ops.Status.NOT_FOUND
        if loc.is_host:
            status = self.host.delete_edge(u, v)
        else:
            status = self.fabric.dispatch(ops.Sub(u, v), loc.module)
        if status is ops.Status.REMOVED:
            self.partitioner.note_out_edge_removed(u)
        return status

    def process_update_batch(self, events: Iterable[EdgeEvent]) -> list[ops.Status]:
        out = []
        for kind, (u, v) in events:
            if kind is EventKind.INSERT:
                out.append(self.insert_edge(u, v))
            else:
                out.append(self.delete_edge(u, v))
        return out

    def ingest(self, edges: Iterable[tuple[NodeId, NodeId]]) -> list[ops.Status]:
        return self.process_update_batch(EdgeEvent.insert(u, v) for u, v in edges)

    # -- queries ------------------------------------------------------------------

    def execute(self, plan: QueryPlan) -> QueryResult:
        loc_of = self.vector.loc
        degree = self.vector.out_degree
        fabric = self.fabric
        before = fabric.ledger.copy()
        frontier: FrontierMatrix = [{s} for s in plan.batch.sources]
        reports: list[ops.Report] = []
        dispatched = []

        for rnd in range(plan.k):
            last = rnd == plan.k - 1
            per_module: dict[int, list[tuple[int, NodeId]]] = defaultdict(list)
            host_entries: dict[NodeId, list[int]] = defaultdict(list)
            for q, nodes in enumerate(frontier):
                for u in sorted(nodes):
                    loc = loc_of.get(u)
                    if loc is None or degree.get(u, 0) == 0:
                        continue
                    if loc.module is None:
                        host_entries[u].append(q)
                    else:
                        per_module[loc.module].append((q, u))
            dispatched.append(sum(len(f) for f in per_module.values()))

            replies = fabric.parallel_round({m: ops.Smxm(f) for m, f in per_module.items()})

            # mwait: gather, route, dedupe per query
            nxt: FrontierMatrix = [set() for _ in frontier]
            for m in sorted(replies):
                reply = replies[m]
                reports.extend(reply.reports)
                remote: dict[int, int] = defaultdict(int)
                for q, hops in reply.hits:
                    nxt[q].update(hops)
                    if last:
                        continue
                    for w in hops:
                        wl = loc_of.get(w)
                        if wl is not None and wl.module is not None and wl.module != m:
                            remote[wl.module] += 1
                for dst in sorted(remote):
                    fabric.forward(m, dst, remote[dst])
            for u in sorted(host_entries):
                hops = self.host.scan(u)
                for q in host_entries[u]:
                    nxt[q].update(hops)
            frontier = nxt

        return QueryResult(frontier, fabric.ledger - before, reports, dispatched)

    def query(self, sources: Sequence[NodeId], k: int) -> FrontierMatrix:
        return self.execute(compile_khop(sources, k)).ans

    # -- consistency checks ---------------------------------------------------------

    def edges(self) -> set[tuple[NodeId, NodeId]]:
        """Every stored edge, read straight from module rows and host rows."""
        out = set()
        for mod in self.fabric.modules:
            for u, row in mod.adj.items():
                out.update((u, w) for w in row)
        for u, row in self.host.rows.items():
            out.update((u, w) for w in row.cols if w != SENTINEL)
        return out
