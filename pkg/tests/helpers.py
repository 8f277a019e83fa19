"""Shared test utilities: an independent dense-gate oracle and random
circuit generation.

``definitional_unitary`` computes circuit matrices straight from the gate
definitions with per-basis-state bit arithmetic, sharing no code with the
package's simulator.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from qwb.circuit import Circuit, Gate, GateKind


def _matrix_1q(gate: Gate) -> np.ndarray:
    k = gate.kind
    if k is GateKind.X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k is GateKind.H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if k is GateKind.S:
        return np.diag([1, 1j]).astype(complex)
    if k is GateKind.SDG:
        return np.diag([1, -1j]).astype(complex)
    if k is GateKind.T:
        return np.diag([1, cmath.exp(1j * math.pi / 4)])
    if k is GateKind.TDG:
        return np.diag([1, cmath.exp(-1j * math.pi / 4)])
    if k is GateKind.RY:
        th = gate.params[0]
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if k is GateKind.U3:
        th, ph, la = gate.params
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[c, -cmath.exp(1j * la) * s],
                         [cmath.exp(1j * ph) * s, cmath.exp(1j * (ph + la)) * c]])
    raise AssertionError(k)


def _controls_satisfied(gate: Gate, idx: int) -> bool:
    return all(((idx >> q) & 1) == s for q, s in zip(gate.controls, gate.control_state))


def definitional_gate_column(gate: Gate, idx: int, out: np.ndarray) -> None:
    """Add the gate's action on basis state ``idx`` into column vector ``out``."""
    if gate.kind is GateKind.BARRIER or not _controls_satisfied(gate, idx):
        out[idx] += 1.0
        return
    if gate.kind is GateKind.MCZ:
        t = gate.targets[0]
        out[idx] += -1.0 if (idx >> t) & 1 else 1.0
        return
    if gate.kind is GateKind.SWAP:
        a, b = gate.targets
        ba, bb = (idx >> a) & 1, (idx >> b) & 1
        j = (idx & ~((1 << a) | (1 << b))) | (bb << a) | (ba << b)
        out[j] += 1.0
        return
    if gate.kind is GateKind.XXPLUSYY:
        phi, beta = gate.params
        assert abs(beta - math.pi / 2) < 1e-12
        a, b = gate.targets
        ba, bb = (idx >> a) & 1, (idx >> b) & 1
        if ba == bb:
            out[idx] += 1.0
            return
        c, s = math.cos(phi / 2), math.sin(phi / 2)
        other = idx ^ ((1 << a) | (1 << b))
        if ba == 1:     # |a=1,b=0> -> c |same> + s |other>
            out[idx] += c
            out[other] += s
        else:           # |a=0,b=1> -> c |same> - s |a=1,b=0>
            out[idx] += c
            out[other] += -s
        return
    t = gate.targets[0]
    m = _matrix_1q(gate)
    bit = (idx >> t) & 1
    out[idx & ~(1 << t)] += m[0, bit]
    out[idx | (1 << t)] += m[1, bit]


def definitional_unitary(circuit: Circuit) -> np.ndarray:
    dim = 2 ** circuit.num_qubits
    u = np.eye(dim, dtype=complex)
    for gate in circuit.gates:
        g = np.zeros((dim, dim), dtype=complex)
        for idx in range(dim):
            definitional_gate_column(gate, idx, g[:, idx])
        u = g @ u
    return u


def random_circuit(rng, num_qubits: int, num_gates: int,
                   mixing_only: bool = False) -> Circuit:
    circ = Circuit(num_qubits)
    kinds = ["x", "h", "s", "sdg", "t", "tdg", "ry", "u3", "cx", "swap",
             "xxyy", "mcz", "mcx"]
    if mixing_only:
        kinds = ["h", "ry", "u3", "cx"]
    for _ in range(num_gates):
        kind = kinds[rng.integers(len(kinds))]
        qs = rng.permutation(num_qubits)
        if kind == "x":
            circ.x(int(qs[0]))
        elif kind == "h":
            circ.h(int(qs[0]))
        elif kind == "s":
            circ.s(int(qs[0]))
        elif kind == "sdg":
            circ.sdg(int(qs[0]))
        elif kind == "t":
            circ.t(int(qs[0]))
        elif kind == "tdg":
            circ.tdg(int(qs[0]))
        elif kind == "ry":
            circ.ry(rng.uniform(-3, 3), int(qs[0]))
        elif kind == "u3":
            circ.u3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), int(qs[0]))
        elif kind == "cx":
            circ.cx(int(qs[0]), int(qs[1]))
        elif kind == "swap":
            circ.swap(int(qs[0]), int(qs[1]))
        elif kind == "xxyy":
            circ.xxyy(rng.uniform(-3, 3), int(qs[0]), int(qs[1]))
        elif kind == "mcz":
            w = int(rng.integers(2, min(4, num_qubits) + 1))
            circ.mcz([int(q) for q in qs[:w]], [int(b) for b in rng.integers(0, 2, w)])
        elif kind == "mcx":
            w = int(rng.integers(1, min(3, num_qubits - 1) + 1))
            circ.mcx([int(q) for q in qs[:w]], int(qs[w]),
                     [int(b) for b in rng.integers(0, 2, w)])
    return circ


def random_sparse_dict(rng, num_qubits: int, support: int) -> dict[int, complex]:
    dim = 2 ** num_qubits
    keys = rng.choice(dim, size=min(support, dim), replace=False)
    amps = rng.normal(size=len(keys)) + 1j * rng.normal(size=len(keys))
    amps /= np.linalg.norm(amps)
    return {int(k): complex(a) for k, a in zip(keys, amps)}


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol=1e-9) -> bool:
    k = np.unravel_index(np.argmax(np.abs(a)), a.shape)
    if abs(a[k]) < tol or abs(b[k]) < tol:
        return False
    phase = b[k] / a[k]
    return bool(np.max(np.abs(a * phase - b)) <= tol)
