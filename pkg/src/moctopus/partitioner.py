"""Node placement: radical greedy assignment, capacity gate, promotion, migration.

The host keeps the only copy of the partitioning state.  Storage side effects
(moving adjacency between modules, building host rows) are performed by the
caller through the ``mover`` hook so this module stays storage-agnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Sequence

from .errors import ContractError, SimulationError
from .fabric import HOST, Loc
from .graph import NodeId
from .ops import Report

MASK64 = 2**64 - 1


def splitmix64(x: int) -> int:
    """splitmix64 finalizer; fixed and seed-free so placements reproduce."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class PartitionerConfig:
    degree_threshold: int = 16
    capacity_factor: Fraction | float | str = Fraction(105, 100)
    capacity_floor: int = 16
    migration_hit_fraction: Fraction | float | str = Fraction(1, 2)
    # fraction of new nodes deliberately placed by hash (mispartition injection)
    force_hash_fraction: float = 0.0
    force_hash_salt: int = 0

    def __post_init__(self):
        # floats go through str() so 1.05 means exactly 105/100
        for name in ("capacity_factor", "migration_hit_fraction"):
            val = getattr(self, name)
            if not isinstance(val, Fraction):
                object.__setattr__(self, name, Fraction(str(val)))
        if self.capacity_factor <= 1:
            raise ValueError("capacity_factor must be > 1")
        if self.degree_threshold < 1:
            raise ValueError("degree_threshold must be >= 1")
        if not 0 < self.migration_hit_fraction <= 1:
            raise ValueError("migration_hit_fraction must be in (0, 1]")
        if self.capacity_floor < 0:
            raise ValueError("capacity_floor must be >= 0")


class Assign(NamedTuple):
    node: NodeId
    loc: Loc


class Promote(NamedTuple):
    node: NodeId


class Move(NamedTuple):
    node: NodeId
    src: int
    dst: int


@dataclass
class MigrationPlan:
    moves: list[Move]

    def __post_init__(self):
        nodes = [m.node for m in self.moves]
        if len(set(nodes)) != len(nodes):
            raise ContractError("node appears twice in migration plan")
        if any(m.src == m.dst for m in self.moves):
            raise ContractError("migration with src == dst")

    def __len__(self):
        return len(self.moves)


# mover(node, src_module, dst_module) transfers the node's adjacency
Mover = Callable[[NodeId, int, int], None]
AdjacencyFetch = Callable[[NodeId], Sequence[NodeId]]


def capacity_limit(loads: Sequence[int], cfg: PartitionerConfig) -> int:
    P = len(loads)
    if P < 1:
        raise ValueError("need at least one module")
    return max(math.ceil(cfg.capacity_factor * sum(loads) / P), cfg.capacity_floor)


def hash_fallback(u: NodeId, loads: Sequence[int], limit: int) -> int:
    eligible = [m for m, load in enumerate(loads) if load < limit]
    if not eligible:
        raise SimulationError("no module below the capacity limit")
    return eligible[splitmix64(u) % len(eligible)]


class NodePartitioningVector:
    """Node -> (loc, out_degree) directory plus per-module load counts."""

    def __init__(self, module_count: int):
        self.loc: dict[NodeId, Loc] = {}
        self.out_degree: dict[NodeId, int] = {}
        self.loads = [0] * module_count
        # insertion-ordered per-module resident sets
        self.residents: list[dict[NodeId, None]] = [{} for _ in range(module_count)]

    def __contains__(self, u: NodeId) -> bool:
        return u in self.loc

    def __len__(self):
        return len(self.loc)

    def place(self, u: NodeId, loc: Loc):
        old = self.loc.get(u)
        if old is not None and old.module is not None:
            self.loads[old.module] -= 1
            del self.residents[old.module][u]
        self.loc[u] = loc
        self.out_degree.setdefault(u, 0)
        if loc.module is not None:
            self.loads[loc.module] += 1
            self.residents[loc.module][u] = None

    def host_nodes(self) -> list[NodeId]:
        return [u for u, l in self.loc.items() if l.module is None]


class MoctopusPartitioner:
    """Greedy-adaptive partitioner with host promotion of high-degree nodes."""

    name = "moctopus"

    def __init__(self, module_count: int, config: PartitionerConfig | None = None):
        self.config = config or PartitionerConfig()
        self.P = module_count
        self.vector = NodePartitioningVector(module_count)
        self.promoted: set[NodeId] = set()
        self.spills = 0
        # audit(event, node) is called after every placement change
        self.audit: Callable[[str, NodeId], None] | None = None

    # -- helpers ---------------------------------------------------------

    def loc(self, u: NodeId) -> Loc | None:
        return self.vector.loc.get(u)

    def out_degree(self, u: NodeId) -> int:
        return self.vector.out_degree.get(u, 0)

    @property
    def loads(self) -> list[int]:
        return self.vector.loads

    def capacity_limit(self) -> int:
        return capacity_limit(self.vector.loads, self.config)

    def _notify(self, event: str, node: NodeId):
        if self.audit is not None:
            self.audit(event, node)

    def _forced_hash(self, u: NodeId) -> bool:
        frac = self.config.force_hash_fraction
        if frac <= 0:
            return False
        return splitmix64(u ^ self.config.force_hash_salt ^ 0x5A5A5A5A) % 1_000_000 < frac * 1_000_000

    # -- assignment ----------------------------------------------------------

    def assign_new_node(self, u: NodeId, first_neighbor: NodeId | None) -> Loc:
        if u in self.vector:
            raise ContractError(f"node {u} already assigned")
        loads = self.vector.loads
        limit = self.capacity_limit()
        anchor = self.vector.loc.get(first_neighbor) if first_neighbor is not None else None
        if (anchor is not None and anchor.module is not None
                and loads[anchor.module] < limit and not self._forced_hash(u)):
            loc = anchor
        else:
            loc = Loc(hash_fallback(u, loads, limit))
        self.vector.place(u, loc)
        self._notify("assign", u)
        return loc

    def place_endpoints(self, u: NodeId, v: NodeId) -> list[Assign]:
        """Assign whichever endpoints are new; destination first."""
        actions = []
        if v not in self.vector:
            anchor = u if u in self.vector else None
            actions.append(Assign(v, self.assign_new_node(v, anchor)))
        if u not in self.vector:
            actions.append(Assign(u, self.assign_new_node(u, v)))
        return actions

    def note_out_edge(self, u: NodeId) -> Promote | None:
        deg = self.vector.out_degree[u] + 1
        self.vector.out_degree[u] = deg
        loc = self.vector.loc[u]
        if deg > self.config.degree_threshold and loc.module is not None:
            return Promote(u)
        return None

    def note_out_edge_removed(self, u: NodeId):
        self.vector.out_degree[u] -= 1

    def on_edge_inserted(self, u: NodeId, v: NodeId) -> list[Assign | Promote]:
        """Placement actions for a new (non-duplicate) edge u->v."""
        actions: list[Assign | Promote] = list(self.place_endpoints(u, v))
        promo = self.note_out_edge(u)
        if promo is not None:
            actions.append(promo)
        return actions

    # -- promotion -----------------------------------------------------------

    def apply_promotion(self, u: NodeId, mover: Mover | None = None) -> int:
        """Re-home ``u`` on the host, then spill to restore the capacity bound.

        Returns the number of spill moves.  The audit hook fires once, after
        the spill, since intermediate states may still be over the limit.
        """
        loc = self.vector.loc.get(u)
        if loc is None or loc.module is None:
            raise ContractError(f"node {u} is not module-resident")
        self.vector.place(u, HOST)
        self.promoted.add(u)
        spill = self.rebalance_plan()
        for node, src, dst in spill.moves:
            if mover is not None:
                mover(node, src, dst)
            self.vector.place(node, Loc(dst))
        self.spills += len(spill)
        self._notify("promote", u)
        return len(spill)

    def rebalance_plan(self) -> MigrationPlan:
        """Spill moves restoring the capacity bound after the limit shrank.

        Promotions remove nodes from the PIM side, which can lower the limit
        below a full module's load.  The most recently placed residents of
        such modules are re-homed by hash among modules under the limit.
        """
        loads = list(self.vector.loads)
        limit = capacity_limit(loads, self.config)
        moves = []
        for m in range(self.P):
            if loads[m] <= limit:
                continue
            for u in reversed(list(self.vector.residents[m])):
                if loads[m] <= limit:
                    break
                loads[m] -= 1
                t = hash_fallback(u, loads, limit)
                loads[t] += 1
                moves.append(Move(u, m, t))
        return MigrationPlan(moves)

    # -- migration -------------------------------------------------------------

    def plan_migrations(self, reports: Iterable[Report], fetch: AdjacencyFetch) -> MigrationPlan:
        cfg = self.config
        loc = self.vector.loc
        loads = list(self.vector.loads)
        limit = capacity_limit(loads, cfg)
        seen: set[NodeId] = set()
        moves = []
        for rep in reports:
            u = rep.node
            if u in seen:
                continue
            seen.add(u)
            home = loc.get(u)
            if home is None or home.module is None:
                continue
            if rep.pim_resident_degree < 2:
                continue
            if Fraction(rep.local_hits, rep.pim_resident_degree) >= cfg.migration_hit_fraction:
                continue
            counts = [0] * self.P
            for w in fetch(u):
                wl = loc.get(w)
                if wl is not None and wl.module is not None:
                    counts[wl.module] += 1
            degree = sum(counts)
            if degree < 2 or Fraction(counts[home.module], degree) >= cfg.migration_hit_fraction:
                continue
            target = max(range(self.P), key=lambda m: (counts[m], -m))
            if target == home.module or loads[target] >= limit:
                continue
            loads[target] += 1
            loads[home.module] -= 1
            moves.append(Move(u, home.module, target))
        return MigrationPlan(moves)

    def apply_migration(self, plan: MigrationPlan, mover: Mover) -> int:
        """Execute still-valid moves; returns how many were applied."""
        applied = 0
        for node, src, dst in plan.moves:
            cur = self.vector.loc.get(node)
            if cur is None or cur.module != src:
                continue
            # the plan may predate other placements; re-check at apply time
            if self.vector.loads[dst] >= self.capacity_limit():
                continue
            mover(node, src, dst)
            self.vector.place(node, Loc(dst))
            applied += 1
            self._notify("migrate", node)
        return applied


class HashPartitioner(MoctopusPartitioner):
    """PIM-hash baseline: every node lives on module hash(u) mod P, forever."""

    name = "hash"

    def assign_new_node(self, u: NodeId, first_neighbor: NodeId | None) -> Loc:
        if u in self.vector:
            raise ContractError(f"node {u} already assigned")
        loc = Loc(splitmix64(u) % self.P)
        self.vector.place(u, loc)
        self._notify("assign", u)
        return loc

    def note_out_edge(self, u: NodeId) -> Promote | None:
        self.vector.out_degree[u] += 1
        return None

    def rebalance_plan(self) -> MigrationPlan:
        return MigrationPlan([])

    def plan_migrations(self, reports, fetch) -> MigrationPlan:
        return MigrationPlan([])


def make_partitioner(kind: str, module_count: int, config: PartitionerConfig | None = None):
    if kind == "moctopus":
        return MoctopusPartitioner(module_count, config)
    if kind == "hash":
        return HashPartitioner(module_count, config)
    raise ValueError(f"unknown partitioner: {kind!r}")
