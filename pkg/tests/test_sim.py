import math

import numpy as np
import pytest

from qwb.circuit import Circuit, UsageError
from qwb.sim import (ResourceLimitError, SparseState, apply, dense_unitary,
                     dump_state, load_state, sample)

from helpers import definitional_unitary, random_circuit, random_sparse_dict


def test_x_on_zero():
    c = Circuit(1)
    c.x(0)
    st = apply(SparseState.zero(1), c)
    assert st.amplitude(1) == pytest.approx(1)
    assert st.amplitude(0) == 0


def test_bell_pair():
    c = Circuit(2)
    c.h(0)
    c.cx(0, 1)
    st = apply(SparseState.zero(2), c)
    r = 1 / math.sqrt(2)
    assert st.amplitude(0b00) == pytest.approx(r)
    assert st.amplitude(0b11) == pytest.approx(r)
    assert st.support() == 2


def test_dense_unitary_x():
    c = Circuit(1)
    c.x(0)
    assert np.allclose(dense_unitary(c), [[0, 1], [1, 0]])


def test_dense_unitary_xxyy_matches_displayed_matrix():
    phi = 1.234
    c = Circuit(2)
    c.xxyy(phi, 0, 1)
    cv, sv = math.cos(phi / 2), math.sin(phi / 2)
    want = np.array([[1, 0, 0, 0], [0, cv, -sv, 0], [0, sv, cv, 0], [0, 0, 0, 1]])
    assert np.allclose(dense_unitary(c), want, atol=1e-12)


def test_random_circuits_match_definitional_unitary():
    rng = np.random.default_rng(10)
    for _ in range(15):
        c = random_circuit(rng, 4, 20)
        assert np.max(np.abs(dense_unitary(c) - definitional_unitary(c))) < 1e-9


def test_apply_on_random_states_matches_dense():
    rng = np.random.default_rng(11)
    for _ in range(10):
        c = random_circuit(rng, 4, 15)
        amps = random_sparse_dict(rng, 4, 6)
        vec = np.zeros(16, dtype=complex)
        for k, v in amps.items():
            vec[k] = v
        want = definitional_unitary(c) @ vec
        got = apply(SparseState.from_dict(4, amps), c)
        out = np.zeros(16, dtype=complex)
        out[got.keys] = got.amps
        assert np.max(np.abs(out - want)) < 1e-9


def test_norm_preserved_over_many_gates():
    rng = np.random.default_rng(12)
    c = random_circuit(rng, 6, 10_000)
    st = apply(SparseState.zero(6), c)
    assert abs(st.norm() - 1.0) <= 1e-9


def test_controls_with_polarity():
    c = Circuit(2)
    c.mcx([0], 1, [0])   # activate on |0>
    st = apply(SparseState.zero(2), c)
    assert st.amplitude(0b10) == pytest.approx(1)


def test_gate_out_of_range_is_error():
    c = Circuit(3)
    c.x(2)
    with pytest.raises(UsageError):
        apply(SparseState.zero(2), c)


def test_sample_deterministic_and_sums_to_shots():
    c = Circuit(2)
    c.h(0)
    c.cx(0, 1)
    st = apply(SparseState.zero(2), c)
    a = sample(st, [0, 1], 10_000, seed=7)
    b = sample(st, [0, 1], 10_000, seed=7)
    assert a == b
    assert sum(a.counts.values()) == a.shots == 10_000
    # Binomial 3-sigma window around 5000 per outcome.
    for outcome in ("00", "11"):
        assert abs(a.counts[outcome] - 5000) <= 3 * math.sqrt(10_000 * 0.25)


def test_sample_single_outcome():
    c = Circuit(1)
    c.x(0)
    st = apply(SparseState.zero(1), c)
    assert sample(st, [0], 100, seed=0).counts == {"1": 100}


def test_sample_requires_qubits_and_shots():
    st = SparseState.zero(1)
    with pytest.raises(UsageError):
        sample(st, [], 10, seed=0)
    with pytest.raises(UsageError):
        sample(st, [0], 0, seed=0)


def test_marginal_sampling():
    c = Circuit(2)
    c.h(0)
    c.x(1)
    st = apply(SparseState.zero(2), c)
    counts = sample(st, [1], 50, seed=3)
    assert counts.counts == {"1": 50}


def test_amplitude_queries():
    st = SparseState.zero(2)
    assert st.amplitude(0) == pytest.approx(1)
    assert st.amplitude(1) == 0


def test_dense_unitary_qubit_cap():
    with pytest.raises(UsageError):
        dense_unitary(Circuit(13))


def test_support_cap_raises_resource_error():
    c = Circuit(8)
    for q in range(8):
        c.h(q)
    with pytest.raises(ResourceLimitError) as err:
        apply(SparseState.zero(8), c, max_support=100)
    assert err.value.qubit_count == 8


def test_dump_and_load_round_trip():
    rng = np.random.default_rng(13)
    st = SparseState.from_dict(3, random_sparse_dict(rng, 3, 5))
    text = dump_state(st)
    lines = text.strip().splitlines()
    assert lines == sorted(lines)
    back = load_state(text, 3)
    for k, v in st.amplitudes.items():
        assert back.amplitude(k) == pytest.approx(v)


def test_pruning_drops_tiny_amplitudes():
    st = SparseState.from_dict(2, {0: 1.0, 3: 1e-14})
    out = apply(st, Circuit(2))
    assert out.support() == 1


def test_dealloc_debug_assertion():
    c = Circuit(1)
    q = c.allocate()
    c.x(q)
    c.deallocate(q)
    with pytest.raises(UsageError):
        apply(SparseState.zero(c.num_qubits), c, debug=True)


def test_max_support_seen_tracked():
    c = Circuit(3)
    for q in range(3):
        c.h(q)
    st = apply(SparseState.zero(3), c)
    assert st.max_support_seen == 8
