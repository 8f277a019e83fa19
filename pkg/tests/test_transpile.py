import math

import numpy as np
import pytest

from qwb.circuit import Circuit, GateKind, UsageError, control_generic
from qwb.sim import dense_unitary
from qwb.transpile import ResourceMetrics, metrics, transpile

from helpers import equal_up_to_global_phase, random_circuit


def _only_basis(circ):
    for g in circ.gates:
        if g.kind is GateKind.U3 and not g.controls:
            continue
        if g.kind is GateKind.X and len(g.controls) == 1 and g.control_state == (1,):
            continue
        raise AssertionError(f"non-basis gate {g}")


def test_transpile_h_is_single_u3():
    c = Circuit(1)
    c.h(0)
    t = transpile(c)
    assert len(t.gates) == 1
    g = t.gates[0]
    assert g.kind is GateKind.U3
    assert g.params == pytest.approx((math.pi / 2, 0.0, math.pi))


def test_round_trip_random_circuits():
    rng = np.random.default_rng(20)
    for _ in range(20):
        c = random_circuit(rng, 5, 25)
        t = transpile(c)
        _only_basis(t)
        assert equal_up_to_global_phase(dense_unitary(c), dense_unitary(t), 1e-9)


def test_fusion_cancels_adjacent_inverses():
    c = Circuit(1)
    c.h(0)
    c.h(0)
    assert transpile(c).gates == []
    c2 = Circuit(2)
    c2.s(0)
    c2.t(0)
    c2.h(1)
    t = transpile(c2)
    assert metrics(t).u3_count == 2      # S,T fused into one U3; H another


def test_controlled_single_qubit_gate_two_cx():
    c = Circuit(2)
    c._emit(GateKind.RY, (1,), (0.7,), (0,), (1,))
    t = transpile(c)
    assert metrics(t).cx_count == 2
    assert equal_up_to_global_phase(dense_unitary(c), dense_unitary(t), 1e-9)


def test_generic_controlled_swap_counts():
    base = Circuit(2)
    base.swap(0, 1)
    ctl = control_generic(base, 2)
    t = transpile(ctl)
    assert metrics(t).cx_count == 18
    assert equal_up_to_global_phase(dense_unitary(ctl), dense_unitary(t), 1e-9)


def test_mcx_lowering_counts():
    for k, want in ((1, 1), (2, 6), (3, 14), (4, 30)):
        c = Circuit(k + 1)
        c.mcx(list(range(k)), k)
        t = transpile(c)
        assert metrics(t).cx_count == want
        assert equal_up_to_global_phase(dense_unitary(c), dense_unitary(t), 1e-9)


def test_mcz_lowering_matches():
    rng = np.random.default_rng(21)
    for w in (2, 3, 4):
        state = [int(b) for b in rng.integers(0, 2, w)]
        c = Circuit(w)
        c.mcz(list(range(w)), state)
        t = transpile(c)
        _only_basis(t)
        assert equal_up_to_global_phase(dense_unitary(c), dense_unitary(t), 1e-9)


def test_multi_controlled_u3_lowering():
    c = Circuit(3)
    c._emit(GateKind.H, (2,), (), (0, 1), (1, 1))
    t = transpile(c)
    _only_basis(t)
    assert equal_up_to_global_phase(dense_unitary(c), dense_unitary(t), 1e-9)


def test_controlled_xxyy_generic_lowering():
    c = Circuit(3)
    c._emit(GateKind.XXPLUSYY, (0, 1), (0.931, math.pi / 2), (2,), (1,))
    t = transpile(c)
    _only_basis(t)
    assert equal_up_to_global_phase(dense_unitary(c), dense_unitary(t), 1e-9)


def test_metrics_depth_parallel_vs_chained():
    c = Circuit(4)
    c.cx(0, 1)
    c.cx(2, 3)
    assert metrics(c).depth == 1
    c2 = Circuit(3)
    c2.cx(0, 1)
    c2.cx(1, 2)
    assert metrics(c2).depth == 2


def test_metrics_ignores_barriers_and_counts():
    c = Circuit(2)
    c.u3(1, 2, 3, 0)
    c.barrier([0, 1])
    c.cx(0, 1)
    m = metrics(c)
    assert m == ResourceMetrics(qubit_count=2, u3_count=1, cx_count=1, depth=2)


def test_metrics_rejects_untranspiled():
    c = Circuit(2)
    c.swap(0, 1)
    with pytest.raises(UsageError):
        metrics(c)


def test_barriers_dropped_by_transpile():
    c = Circuit(2)
    c.barrier([0, 1])
    c.h(0)
    t = transpile(c)
    assert all(g.kind is not GateKind.BARRIER for g in t.gates)
