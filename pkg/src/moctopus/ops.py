"""Operator payloads exchanged between the host and PIM modules.

Each payload knows how many node ids it carries on the wire, and how many
node ids its reply carries.  Positions, counts and status codes ride in the
message header and are not charged separately.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, NamedTuple

from .graph import NodeId


class Status(enum.Enum):
    INSERTED = "inserted"
    DUPLICATE = "duplicate"
    REMOVED = "removed"
    NOT_FOUND = "not_found"


@dataclass(frozen=True)
class ExistsAt:
    pos: int


@dataclass(frozen=True)
class AllocatedAt:
    pos: int


@dataclass(frozen=True)
class NeedGrow:
    pass


@dataclass(frozen=True)
class FreedAt:
    pos: int


class Report(NamedTuple):
    """Mispartition hint emitted by a module during path matching."""

    node: NodeId
    local_hits: int
    pim_resident_degree: int


@dataclass
class SmxmReply:
    hits: list[tuple[int, list[NodeId]]] = field(default_factory=list)
    reports: list[Report] = field(default_factory=list)


class Op:
    kind = "op"

    def request_ids(self) -> int:
        return 0

    def reply_ids(self, result: Any) -> int:
        return 0


@dataclass
class Smxm(Op):
    frontier: list[tuple[int, NodeId]]
    kind = "smxm"

    def request_ids(self):
        return len(self.frontier)

    def reply_ids(self, result: SmxmReply):
        return sum(len(h) for _, h in result.hits) + len(result.reports)


@dataclass
class Add(Op):
    u: NodeId
    v: NodeId
    kind = "add"

    def request_ids(self):
        return 2


@dataclass
class Sub(Op):
    u: NodeId
    v: NodeId
    kind = "sub"

    def request_ids(self):
        return 2


@dataclass
class FetchAdj(Op):
    u: NodeId
    kind = "fetch_adj"

    def request_ids(self):
        return 1

    def reply_ids(self, result):
        return len(result)


@dataclass
class MigrateOut(Op):
    u: NodeId
    kind = "migrate_out"

    def request_ids(self):
        return 1

    def reply_ids(self, result):
        return len(result)


@dataclass
class MigrateIn(Op):
    u: NodeId
    hops: list[NodeId]
    kind = "migrate_in"

    def request_ids(self):
        return 1 + len(self.hops)


@dataclass
class EdgeCheckAlloc(Op):
    u: NodeId
    v: NodeId
    kind = "edge_check_alloc"

    def request_ids(self):
        return 2


@dataclass
class EdgeFree(Op):
    u: NodeId
    v: NodeId
    kind = "edge_free"

    def request_ids(self):
        return 2


@dataclass
class ExtendFree(Op):
    u: NodeId
    positions: list[int]
    kind = "extend_free"

    def request_ids(self):
        return 1


@dataclass
class InitShard(Op):
    """Bulk install of a freshly promoted node's position map and free slots."""

    u: NodeId
    positions: dict[NodeId, int]
    free: list[int]
    kind = "init_shard"

    def request_ids(self):
        return 1 + len(self.positions)
