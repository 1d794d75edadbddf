"""Host-side rows for high-degree nodes.

Each row is a flat slot array (``cols``) scanned in one pass at query time.
Which slot an edge occupies, and which slots are free, is tracked by the
row's shard on a PIM module; the host only writes slots it is told to.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ops
from .errors import ContractError, SimulationError
from .fabric import Fabric
from .graph import SENTINEL, NodeId
from .partitioner import splitmix64

INITIAL_CAPACITY = 32


def pow2_at_least(n: int) -> int:
    return 1 << max(n - 1, 0).bit_length()


@dataclass
class HostRow:
    cols: list[int]
    occupied: int = 0

    @property
    def capacity(self) -> int:
        return len(self.cols)


class HostStore:
    def __init__(self, fabric: Fabric, initial_capacity: int = INITIAL_CAPACITY):
        if initial_capacity < 1 or initial_capacity & (initial_capacity - 1):
            raise ValueError("initial_capacity must be a positive power of two")
        self.fabric = fabric
        self.initial_capacity = initial_capacity
        self.rows: dict[NodeId, HostRow] = {}
        self.slots_allocated: dict[NodeId, int] = {}

    def __contains__(self, u: NodeId) -> bool:
        return u in self.rows

    def shard_of(self, u: NodeId) -> int:
        return splitmix64(u) % self.fabric.P

    def _row(self, u: NodeId) -> HostRow:
        try:
            return self.rows[u]
        except KeyError:
            raise ContractError(f"node {u} is not host-resident") from None

    def insert_edge(self, u: NodeId, v: NodeId) -> ops.Status:
        row = self._row(u)
        shard = self.shard_of(u)
        res = self.fabric.dispatch(ops.EdgeCheckAlloc(u, v), shard)
        if isinstance(res, ops.NeedGrow):
            self._grow(u, row, shard)
            res = self.fabric.dispatch(ops.EdgeCheckAlloc(u, v), shard)
            if isinstance(res, ops.NeedGrow):
                raise SimulationError(f"shard for {u} still full after growth")
        if isinstance(res, ops.ExistsAt):
            return ops.Status.DUPLICATE
        row.cols[res.pos] = v
        row.occupied += 1
        return ops.Status.INSERTED

    def _grow(self, u: NodeId, row: HostRow, shard: int):
        old = row.capacity
        row.cols.extend([SENTINEL] * old)
        self.slots_allocated[u] += old
        self.fabric.dispatch(ops.ExtendFree(u, list(range(old, 2 * old))), shard)

    def delete_edge(self, u: NodeId, v: NodeId) -> ops.Status:
        row = self._row(u)
        res = self.fabric.dispatch(ops.EdgeFree(u, v), self.shard_of(u))
        if isinstance(res, ops.FreedAt):
            row.cols[res.pos] = SENTINEL
            row.occupied -= 1
            return ops.Status.REMOVED
        return ops.Status.NOT_FOUND

    def scan(self, u: NodeId) -> list[NodeId]:
        row = self._row(u)
        self.fabric.ledger.host_lookups += 1
        return [w for w in row.cols if w != SENTINEL]

    def promote(self, u: NodeId, adjacency: list[NodeId]):
        if u in self.rows:
            raise ContractError(f"node {u} already host-resident")
        n = len(adjacency)
        cap = pow2_at_least(max(n, self.initial_capacity))
        cols = list(adjacency) + [SENTINEL] * (cap - n)
        self.rows[u] = HostRow(cols, n)
        self.slots_allocated[u] = cap
        positions = {w: i for i, w in enumerate(adjacency)}
        self.fabric.dispatch(ops.InitShard(u, positions, list(range(n, cap))), self.shard_of(u))
