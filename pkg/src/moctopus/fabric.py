"""Simulated host + P-module machine with byte-level traffic accounting."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple

from . import ops
from .errors import ContractError, ProtocolError
from .pim import PIMModule

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FabricConfig:
    module_count: int = 64
    module_memory_budget: int = 64 * 2**20
    id_width: int = 8
    header_bytes: int = 16
    threads: int = 0  # >0 runs parallel rounds on a thread pool

    def __post_init__(self):
        if self.module_count < 1:
            raise ValueError("module_count must be >= 1")
        if self.module_memory_budget <= 0:
            raise ValueError("module_memory_budget must be > 0")


class Loc(NamedTuple):
    """Residence of a node: ``Loc(None)`` is the host, ``Loc(m)`` module m."""

    module: int | None

    @property
    def is_host(self) -> bool:
        return self.module is None

    def __repr__(self):
        return "Host" if self.module is None else f"Module({self.module})"


HOST = Loc(None)


def Module(m: int) -> Loc:
    return Loc(m)


@dataclass
class CostLedger:
    module_count: int
    cpc_bytes: int = 0
    ipc_bytes: int = 0
    host_lookups: int = 0
    # one per (query, node) frontier entry served by the module
    intra_lookups: list[int] = field(default_factory=list)
    # next-hop ids read out of local storage by those lookups
    intra_hops: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.intra_lookups:
            self.intra_lookups = [0] * self.module_count
        if not self.intra_hops:
            self.intra_hops = [0] * self.module_count

    def copy(self) -> "CostLedger":
        return CostLedger(self.module_count, self.cpc_bytes, self.ipc_bytes,
                          self.host_lookups, list(self.intra_lookups), list(self.intra_hops))

    def __sub__(self, other: "CostLedger") -> "CostLedger":
        return CostLedger(
            self.module_count,
            self.cpc_bytes - other.cpc_bytes,
            self.ipc_bytes - other.ipc_bytes,
            self.host_lookups - other.host_lookups,
            [a - b for a, b in zip(self.intra_lookups, other.intra_lookups)],
            [a - b for a, b in zip(self.intra_hops, other.intra_hops)],
        )

    def __add__(self, other: "CostLedger") -> "CostLedger":
        return CostLedger(
            self.module_count,
            self.cpc_bytes + other.cpc_bytes,
            self.ipc_bytes + other.ipc_bytes,
            self.host_lookups + other.host_lookups,
            [a + b for a, b in zip(self.intra_lookups, other.intra_lookups)],
            [a + b for a, b in zip(self.intra_hops, other.intra_hops)],
        )

    @staticmethod
    def _max_over_avg(counts: list[int]) -> float:
        total = sum(counts)
        if total == 0:
            return 0.0
        return max(counts) * len(counts) / total

    def max_over_avg_lookups(self) -> float:
        """Imbalance of per-module lookup counts (max / mean)."""
        return self._max_over_avg(self.intra_lookups)

    def max_over_avg_hops(self) -> float:
        """Imbalance of per-module next-hop volume (max / mean)."""
        return self._max_over_avg(self.intra_hops)


class Fabric:
    """Host coordinator owning P modules and the traffic ledger.

    All traffic goes through ``dispatch`` (host<->module) or ``forward``
    (module->module via the host).  Only the host thread touches the ledger.
    """

    def __init__(self, config: FabricConfig | None = None):
        self.config = config or FabricConfig()
        self.modules = [PIMModule(m) for m in range(self.config.module_count)]
        self.ledger = CostLedger(self.config.module_count)
        self._pool = ThreadPoolExecutor(self.config.threads) if self.config.threads > 0 else None

    @property
    def P(self) -> int:
        return self.config.module_count

    def message_bytes(self, id_count: int) -> int:
        return self.config.header_bytes + id_count * self.config.id_width

    def _check_target(self, target: int):
        if not 0 <= target < self.P:
            raise ContractError(f"no such module: {target}")

    @staticmethod
    def _check_op(op: Any):
        if not isinstance(op, ops.Op):
            raise ProtocolError(f"not an operator payload: {op!r}")

    def _charge(self, op: ops.Op, result: Any, failed: bool = False):
        self.ledger.cpc_bytes += self.message_bytes(op.request_ids())
        # a failed operator still costs its request and an error header
        self.ledger.cpc_bytes += self.message_bytes(0 if failed else op.reply_ids(result))

    def _count_lookups(self, target: int, op: ops.Op, result: Any):
        if isinstance(op, ops.Smxm):
            self.ledger.intra_lookups[target] += len(op.frontier)
            self.ledger.intra_hops[target] += sum(len(h) for _, h in result.hits)

    def dispatch(self, op: ops.Op, target: int) -> Any:
        self._check_target(target)
        self._check_op(op)
        try:
            result = self.modules[target].handle(op)
        except Exception:
            self._charge(op, None, failed=True)
            raise
        self._charge(op, result)
        self._count_lookups(target, op, result)
        return result

    def forward(self, src: int, dst: int, id_count: int) -> None:
        self._check_target(src)
        self._check_target(dst)
        if src == dst:
            raise ContractError("local hits are never forwarded")
        if id_count < 0:
            raise ContractError("negative id count")
        nbytes = self.message_bytes(id_count)
        self.ledger.ipc_bytes += nbytes
        self.ledger.cpc_bytes += 2 * nbytes

    def parallel_round(self, round_ops: Mapping[int, ops.Op]) -> dict[int, Any]:
        """Run one operator per module behind a barrier.

        Costs are charged in ascending module order after every module has
        finished; the first (lowest-id) module error is re-raised afterwards.
        """
        targets = sorted(round_ops)
        for t in targets:
            self._check_target(t)
            self._check_op(round_ops[t])

        def run(t):
            try:
                return self.modules[t].handle(round_ops[t]), None
            except Exception as exc:  # surfaced after the barrier
                return None, exc

        if self._pool is not None and len(targets) > 1:
            outcomes = list(self._pool.map(run, targets))
        else:
            outcomes = [run(t) for t in targets]

        results: dict[int, Any] = {}
        first_error = None
        for t, (res, exc) in zip(targets, outcomes):
            op = round_ops[t]
            self._charge(op, res, failed=exc is not None)
            if exc is not None:
                first_error = first_error or exc
                continue
            self._count_lookups(t, op, res)
            results[t] = res
        if first_error is not None:
            raise first_error
        return results

    def check_memory_budget(self) -> list[int]:
        """Module ids whose estimated footprint exceeds the budget (logged)."""
        over = []
        for mod in self.modules:
            used = mod.estimated_bytes(self.config.id_width)
            if used > self.config.module_memory_budget:
                log.warning("module %d over memory budget: %d > %d bytes",
                            mod.module_id, used, self.config.module_memory_budget)
                over.append(mod.module_id)
        return over

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None
