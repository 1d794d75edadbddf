import pytest

from moctopus import ops
from moctopus.errors import ContractError, ProtocolError, RoutingError
from moctopus.fabric import CostLedger, Fabric, FabricConfig


@pytest.fixture
def fabric():
    f = Fabric(FabricConfig(module_count=4))
    # module 0 owns 1 -> [2, 3, 4, 5]; module 1 owns 10 -> [11]
    for v in (2, 3, 4, 5):
        f.modules[0].op_add(ops.Add(1, v))
    f.modules[1].op_add(ops.Add(10, 11))
    return f


def test_config_validation():
    with pytest.raises(ValueError):
        FabricConfig(module_count=0)
    with pytest.raises(ValueError):
        FabricConfig(module_memory_budget=0)


def test_smxm_cost_ten_out_four_back():
    f = Fabric(FabricConfig(module_count=1))
    mod = f.modules[0]
    # two 2-cycles (all hops local, so no reports) plus six rows with no hops
    for u, v in [(1, 2), (2, 1), (3, 4), (4, 3)]:
        mod.op_add(ops.Add(u, v))
    for u in range(10, 16):
        mod.op_migrate_in(ops.MigrateIn(u, []))
    frontier = [(0, u) for u in (1, 2, 3, 4, 10, 11, 12, 13, 14, 15)]
    reply = f.dispatch(ops.Smxm(frontier), 0)
    assert reply.reports == []
    assert sum(len(h) for _, h in reply.hits) == 4
    assert f.ledger.cpc_bytes == (16 + 80) + (16 + 32) == 144


def test_empty_payload_two_headers():
    f = Fabric(FabricConfig(module_count=1))
    f.dispatch(ops.Smxm([]), 0)
    assert f.ledger.cpc_bytes == 32


def test_add_cost():
    f = Fabric(FabricConfig(module_count=2))
    assert f.dispatch(ops.Add(1, 2), 1) is ops.Status.INSERTED
    assert f.ledger.cpc_bytes == (16 + 16) + 16


def test_forward_costs():
    f = Fabric(FabricConfig(module_count=2))
    f.forward(0, 1, 100)
    assert (f.ledger.ipc_bytes, f.ledger.cpc_bytes) == (816, 1632)
    f.forward(1, 0, 0)
    assert (f.ledger.ipc_bytes, f.ledger.cpc_bytes) == (816 + 16, 1632 + 32)
    with pytest.raises(ContractError):
        f.forward(1, 1, 3)


def test_unknown_operator_is_protocol_error():
    f = Fabric(FabricConfig(module_count=1))
    with pytest.raises(ProtocolError):
        f.dispatch(ops.Op(), 0)
    with pytest.raises(ProtocolError):
        f.dispatch("smxm", 0)


def test_bad_target():
    f = Fabric(FabricConfig(module_count=2))
    with pytest.raises(ContractError):
        f.dispatch(ops.Smxm([]), 2)


def test_parallel_round_empty(fabric):
    before = fabric.ledger.copy()
    assert fabric.parallel_round({}) == {}
    assert fabric.ledger == before


def test_parallel_round_isolation_and_additivity(fabric):
    round_ops = {0: ops.Smxm([(0, 1)]), 1: ops.Smxm([(0, 10), (1, 10)])}
    res = fabric.parallel_round(round_ops)
    assert res[0].hits == [(0, [2, 3, 4, 5])]
    assert res[1].hits == [(0, [11]), (1, [11])]

    seq = Fabric(FabricConfig(module_count=4))
    for v in (2, 3, 4, 5):
        seq.modules[0].op_add(ops.Add(1, v))
    seq.modules[1].op_add(ops.Add(10, 11))
    for m in sorted(round_ops):
        seq.dispatch(round_ops[m], m)
    assert fabric.ledger == seq.ledger
    assert fabric.ledger.intra_lookups == [1, 2, 0, 0]
    assert fabric.ledger.intra_hops == [4, 2, 0, 0]


def test_parallel_round_error_after_barrier(fabric):
    round_ops = {0: ops.Smxm([(0, 1)]), 2: ops.Smxm([(0, 77)]), 3: ops.Smxm([])}
    with pytest.raises(RoutingError):
        fabric.parallel_round(round_ops)
    # every module's traffic was accounted, including the one that failed
    expected = (16 + 8) + (16 + 8 * 5) + (16 + 8) + 16 + 16 + 16
    assert fabric.ledger.cpc_bytes == expected
    assert fabric.ledger.intra_lookups == [1, 0, 0, 0]


def test_threaded_rounds_match_sequential(fabric):
    threaded = Fabric(FabricConfig(module_count=4, threads=4))
    for m in range(4):
        threaded.modules[m].adj = {k: dict(v) for k, v in fabric.modules[m].adj.items()}
    round_ops = {0: ops.Smxm([(0, 1), (3, 1)]), 1: ops.Smxm([(2, 10)])}
    a = fabric.parallel_round(round_ops)
    b = threaded.parallel_round(round_ops)
    threaded.close()
    assert a == b and fabric.ledger == threaded.ledger


def test_ledger_arithmetic():
    a = CostLedger(2, 10, 3, 1, [1, 2], [5, 6])
    b = CostLedger(2, 4, 1, 0, [1, 0], [1, 1])
    assert (a - b) + b == a
    assert a.max_over_avg_lookups() == pytest.approx(2 * 2 / 3)
    assert CostLedger(3).max_over_avg_hops() == 0.0


def test_memory_budget_warning(caplog):
    f = Fabric(FabricConfig(module_count=1, module_memory_budget=16))
    f.dispatch(ops.Add(1, 2), 0)
    f.dispatch(ops.Add(1, 3), 0)
    assert f.check_memory_budget() == [0]
    assert "over memory budget" in caplog.text
