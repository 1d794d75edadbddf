"""Per-module operator processor and local graph storage."""

from __future__ import annotations

import heapq

from . import ops
from .errors import ProtocolError, RoutingError
from .graph import NodeId


class PIMModule:
    """One simulated PIM module.

    ``adj`` is the local row segment: node -> ordered next-hop set (a dict
    with ``None`` values keeps insertion order and O(1) removal).  ``elem_pos``
    and ``free`` are this module's shard of the supplementary maps serving
    host-resident rows whose shard home is this module.
    """

    def __init__(self, module_id: int):
        self.module_id = module_id
        self.adj: dict[NodeId, dict[NodeId, None]] = {}
        self.elem_pos: dict[NodeId, dict[NodeId, int]] = {}
        self.free: dict[NodeId, list[int]] = {}  # min-heaps

    def handle(self, op: ops.Op):
        handler = getattr(self, "op_" + op.kind, None) if isinstance(op, ops.Op) else None
        if handler is None:
            raise ProtocolError(f"module {self.module_id}: unknown operator {type(op).__name__}")
        return handler(op)

    # -- local graph storage ------------------------------------------------

    def _row(self, u: NodeId) -> dict[NodeId, None]:
        try:
            return self.adj[u]
        except KeyError:
            raise RoutingError(f"node {u} is not resident on module {self.module_id}") from None

    def op_smxm(self, op: ops.Smxm) -> ops.SmxmReply:
        reply = ops.SmxmReply()
        seen: set[NodeId] = set()
        adj = self.adj
        for q, u in op.frontier:
            row = self._row(u)
            reply.hits.append((q, list(row)))
            if u in seen:
                continue
            seen.add(u)
            local = sum(1 for w in row if w in adj)
            if local < len(row):
                reply.reports.append(ops.Report(u, local, len(row)))
        return reply

    def op_add(self, op: ops.Add) -> ops.Status:
        row = self.adj.setdefault(op.u, {})
        if op.v in row:
            return ops.Status.DUPLICATE
        row[op.v] = None
        return ops.Status.INSERTED

    def op_sub(self, op: ops.Sub) -> ops.Status:
        row = self.adj.get(op.u)
        if row is None or op.v not in row:
            return ops.Status.NOT_FOUND
        del row[op.v]
        if not row:
            del self.adj[op.u]
        return ops.Status.REMOVED

    def op_fetch_adj(self, op: ops.FetchAdj) -> list[NodeId]:
        return list(self._row(op.u))

    def op_migrate_out(self, op: ops.MigrateOut) -> list[NodeId]:
        hops = list(self._row(op.u))
        del self.adj[op.u]
        return hops

    def op_migrate_in(self, op: ops.MigrateIn) -> None:
        if op.u in self.adj:
            raise RoutingError(f"node {op.u} already resident on module {self.module_id}")
        self.adj[op.u] = dict.fromkeys(op.hops)

    # -- supplementary shard for host-resident rows ---------------------------

    def op_edge_check_alloc(self, op: ops.EdgeCheckAlloc):
        positions = self.elem_pos.get(op.u, {})
        pos = positions.get(op.v)
        if pos is not None:
            return ops.ExistsAt(pos)
        free = self.free.get(op.u)
        if not free:
            return ops.NeedGrow()
        pos = heapq.heappop(free)
        self.elem_pos.setdefault(op.u, {})[op.v] = pos
        return ops.AllocatedAt(pos)

    def op_edge_free(self, op: ops.EdgeFree):
        positions = self.elem_pos.get(op.u)
        if not positions or op.v not in positions:
            return ops.Status.NOT_FOUND
        pos = positions.pop(op.v)
        heapq.heappush(self.free.setdefault(op.u, []), pos)
        return ops.FreedAt(pos)

    def op_extend_free(self, op: ops.ExtendFree) -> None:
        free = self.free.setdefault(op.u, [])
        for p in op.positions:
            heapq.heappush(free, p)

    def op_init_shard(self, op: ops.InitShard) -> None:
        if op.u in self.elem_pos:
            raise RoutingError(f"shard for node {op.u} already initialised on module {self.module_id}")
        self.elem_pos[op.u] = dict(op.positions)
        free = list(op.free)
        heapq.heapify(free)
        self.free[op.u] = free

    # -- introspection ----------------------------------------------------------

    def free_positions(self, u: NodeId) -> set[int]:
        return set(self.free.get(u, ()))

    def estimated_bytes(self, id_width: int = 8) -> int:
        rows = sum(id_width * (1 + len(r)) for r in self.adj.values())
        shard = sum(2 * id_width * len(m) for m in self.elem_pos.values())
        shard += sum(id_width * len(f) for f in self.free.values())
        return rows + shard
