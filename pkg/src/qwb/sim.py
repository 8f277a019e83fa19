"""Sparse statevector simulator.

State is a map from basis index to complex amplitude, stored internally as a
sorted int64 key array plus a complex128 amplitude array so gate application
vectorizes.  Qubit 0 is the least-significant bit of the basis index.

Amplitudes below ``PRUNE_EPSILON`` are dropped after every gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, GateKind, UsageError

PRUNE_EPSILON = 1e-12

_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED_1Q = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
}

_PHASE_1Q = {
    GateKind.S: 1j,
    GateKind.SDG: -1j,
    GateKind.T: np.exp(1j * math.pi / 4),
    GateKind.TDG: np.exp(-1j * math.pi / 4),
}


SINGLE_QUBIT_MIXING = frozenset({GateKind.H, GateKind.RY, GateKind.U3})


class ResourceLimitError(RuntimeError):
    """Simulation exceeds capacity (qubit count or sparse support)."""

    def __init__(self, message: str, qubit_count: int | None = None):
        super().__init__(message)
        self.qubit_count = qubit_count


def gate_matrix_1q(gate: Gate) -> np.ndarray:
    """Exact 2x2 matrix of a single-qubit gate kind (no global phase slack)."""
    kind = gate.kind
    if kind in _FIXED_1Q:
        return _FIXED_1Q[kind]
    if kind in _PHASE_1Q:
        return np.array([[1, 0], [0, _PHASE_1Q[kind]]], dtype=complex)
    if kind is GateKind.RY:
        th = gate.params[0]
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind is GateKind.U3:
        th, ph, lam = gate.params
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[c, -np.exp(1j * lam) * s],
                         [np.exp(1j * ph) * s, np.exp(1j * (ph + lam)) * c]])
    raise UsageError(f"{kind.value} is not a single-qubit kind")


@dataclass
class SparseState:
    """Sparse statevector.  ``keys`` sorted ascending, parallel to ``amps``."""

    num_qubits: int
    keys: np.ndarray
    amps: np.ndarray
    max_support_seen: int = 0

    @classmethod
    def zero(cls, num_qubits: int) -> "SparseState":
        return cls.basis_state(num_qubits, 0)

    @classmethod
    def basis_state(cls, num_qubits: int, index: int) -> "SparseState":
        if num_qubits > 62:
            raise ResourceLimitError(
                f"{num_qubits} qubits exceed the 62-qubit sparse index capacity",
                qubit_count=num_qubits)
        return cls(num_qubits,
                   np.array([index], dtype=np.int64),
                   np.array([1.0 + 0.0j]), 1)

    @classmethod
    def from_dict(cls, num_qubits: int, amplitudes: dict[int, complex]) -> "SparseState":
        keys = np.array(sorted(amplitudes), dtype=np.int64)
        amps = np.array([amplitudes[int(k)] for k in keys], dtype=complex)
        return cls(num_qubits, keys, amps, len(keys))

    @property
    def amplitudes(self) -> dict[int, complex]:
        return {int(k): complex(a) for k, a in zip(self.keys, self.amps)}

    def amplitude(self, basis_index: int) -> complex:
        i = np.searchsorted(self.keys, basis_index)
        if i < len(self.keys) and self.keys[i] == basis_index:
            return complex(self.amps[i])
        return 0.0

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def support(self) -> int:
        return len(self.keys)

    def copy(self) -> "SparseState":
        return SparseState(self.num_qubits, self.keys.copy(), self.amps.copy(),
                           self.max_support_seen)

    def probability(self, qubit: int, value: int = 1) -> float:
        mask = ((self.keys >> qubit) & 1) == value
        return float(np.sum(np.abs(self.amps[mask]) ** 2))


def _control_mask(gate: Gate):
    cmask = 0
    cval = 0
    for q, s in zip(gate.controls, gate.control_state):
        cmask |= 1 << q
        if s:
            cval |= 1 << q
    return np.int64(cmask), np.int64(cval)


def _merge(keys_a, amps_a, keys_b, amps_b):
    """Merge two (sorted-or-not) sparse chunks, summing duplicate keys."""
    keys = np.concatenate([keys_a, keys_b])
    amps = np.concatenate([amps_a, amps_b])
    order = np.argsort(keys, kind="stable")
    keys, amps = keys[order], amps[order]
    uniq, start = np.unique(keys, return_index=True)
    summed = np.add.reduceat(amps, start) if len(keys) else amps
    return uniq, summed


def _apply_permutation(keys, amps, sel, flip_mask):
    keys = keys.copy()
    keys[sel] ^= np.int64(flip_mask)
    order = np.argsort(keys, kind="stable")
    return keys[order], amps[order]


def _apply_mix_pairs(keys, amps, sel, bit_lo, bit_hi, m):
    """Apply a 2x2 mix between the pair of basis states that differ in the
    given one-hot bit masks, over selected entries.  ``m`` maps (lo, hi)
    occupancy amplitudes: new_lo = m00*lo + m01*hi ; new_hi = m10*lo + m11*hi.
    """
    base = np.unique(keys[sel] & ~np.int64(bit_lo | bit_hi))
    lo_keys = base | np.int64(bit_lo)
    hi_keys = base | np.int64(bit_hi)
    a_lo = _lookup(keys, amps, lo_keys)
    a_hi = _lookup(keys, amps, hi_keys)
    new_lo = m[0, 0] * a_lo + m[0, 1] * a_hi
    new_hi = m[1, 0] * a_lo + m[1, 1] * a_hi
    # Untouched part: everything not in the affected pair set.
    affected = np.concatenate([lo_keys, hi_keys])
    touched = np.isin(keys, affected, assume_unique=False)
    return _merge(keys[~touched], amps[~touched],
                  np.concatenate([lo_keys, hi_keys]),
                  np.concatenate([new_lo, new_hi]))


def _lookup(keys, amps, query):
    idx = np.searchsorted(keys, query)
    idx = np.clip(idx, 0, len(keys) - 1) if len(keys) else idx
    out = np.zeros(len(query), dtype=complex)
    if len(keys):
        hit = keys[idx] == query
        out[hit] = amps[idx[hit]]
    return out


def _prune(keys, amps, eps):
    if eps <= 0:
        keep = np.abs(amps) > 0
    else:
        keep = np.abs(amps) >= eps
    return keys[keep], amps[keep]


def apply(state: SparseState, circuit: Circuit, *, debug: bool = False,
          prune_epsilon: float = PRUNE_EPSILON,
          max_support: int | None = None) -> SparseState:
    """Run the circuit on a copy of ``state``, gate by gate."""
    if circuit.num_qubits > state.num_qubits:
        raise UsageError(
            f"circuit uses {circuit.num_qubits} qubits, state has {state.num_qubits}")
    if state.num_qubits > 62:
        raise ResourceLimitError(
            f"{state.num_qubits} qubits exceed sparse index capacity",
            qubit_count=state.num_qubits)

    keys, amps = _prune(state.keys.copy(), state.amps.copy(), prune_epsilon)
    max_seen = max(state.max_support_seen, len(keys))
    dealloc_by_pos: dict[int, list[int]] = {}
    if debug:
        for pos, q in circuit.dealloc_events:
            dealloc_by_pos.setdefault(pos, []).append(q)

    for pos, gate in enumerate(circuit.gates):
        if debug and pos in dealloc_by_pos:
            _assert_zero(keys, amps, dealloc_by_pos[pos])
        keys, amps = _apply_gate(keys, amps, gate)
        keys, amps = _prune(keys, amps, prune_epsilon)
        max_seen = max(max_seen, len(keys))
        if max_support is not None and len(keys) > max_support:
            raise ResourceLimitError(
                f"sparse support {len(keys)} exceeds cap {max_support} "
                f"({state.num_qubits} qubits)", qubit_count=state.num_qubits)
    if debug and len(circuit.gates) in dealloc_by_pos:
        _assert_zero(keys, amps, dealloc_by_pos[len(circuit.gates)])

    return SparseState(state.num_qubits, keys, amps, max_seen)


def _assert_zero(keys, amps, qubits):
    for q in qubits:
        p1 = float(np.sum(np.abs(amps[((keys >> q) & 1) == 1]) ** 2))
        if p1 > 1e-9:
            raise UsageError(
                f"deallocated qubit {q} is not |0> (P(1)={p1:.3e})")


def _apply_gate(keys, amps, gate: Gate):
    kind = gate.kind
    if kind is GateKind.BARRIER:
        return keys, amps
    cmask, cval = _control_mask(gate)
    sel = (keys & cmask) == cval if cmask else np.ones(len(keys), dtype=bool)

    if kind is GateKind.MCZ:
        t = gate.targets[0]
        hit = sel & (((keys >> t) & 1) == 1)
        amps = amps.copy()
        amps[hit] = -amps[hit]
        return keys, amps

    if kind in _PHASE_1Q:
        t = gate.targets[0]
        hit = sel & (((keys >> t) & 1) == 1)
        amps = amps.copy()
        amps[hit] *= _PHASE_1Q[kind]
        return keys, amps

    if kind is GateKind.X:
        bit = 1 << gate.targets[0]
        return _apply_permutation(keys, amps, sel, bit)

    if kind is GateKind.SWAP:
        a, b = gate.targets
        differ = sel & ((((keys >> a) & 1) != ((keys >> b) & 1)))
        return _apply_permutation(keys, amps, differ, (1 << a) | (1 << b))

    if kind is GateKind.XXPLUSYY:
        phi, beta = gate.params
        if abs(beta - math.pi / 2) > 1e-12:
            raise UsageError("XXPLUSYY is only supported at beta = pi/2")
        a, b = gate.targets
        bit_a, bit_b = 1 << a, 1 << b
        differ = sel & ((((keys >> a) & 1) != ((keys >> b) & 1)))
        if not np.any(differ):
            return keys, amps
        c, s = math.cos(phi / 2), math.sin(phi / 2)
        # |a=1,b=0> -> c|a=1,b=0> + s|a=0,b=1>;  |a=0,b=1> -> -s .. + c ..
        m = np.array([[c, -s], [s, c]], dtype=complex)
        return _apply_mix_pairs(keys, amps, differ, bit_a, bit_b, m)

    if kind in SINGLE_QUBIT_MIXING:
        # Pair-mixing only among control-satisfied entries; controls never
        # involve the target, so both pair members share the control pattern.
        t = gate.targets[0]
        bit = 1 << t
        if not np.any(sel):
            return keys, amps
        m = gate_matrix_1q(gate)
        base = np.unique(keys[sel] & ~np.int64(bit))
        k0 = base
        k1 = base | np.int64(bit)
        a0 = _lookup(keys, amps, k0)
        a1 = _lookup(keys, amps, k1)
        n0 = m[0, 0] * a0 + m[0, 1] * a1
        n1 = m[1, 0] * a0 + m[1, 1] * a1
        touched = np.isin(keys, np.concatenate([k0, k1]))
        return _merge(keys[~touched], amps[~touched],
                      np.concatenate([k0, k1]), np.concatenate([n0, n1]))

    raise UsageError(f"cannot simulate gate kind {kind.value}")


@dataclass
class MeasurementCounts:
    shots: int
    counts: dict[str, int]

    def frequency(self, outcome: str) -> float:
        return self.counts.get(outcome, 0) / self.shots


def sample(state: SparseState, measured_qubits, shots: int, seed) -> MeasurementCounts:
    """Draw ``shots`` outcomes from the marginal over ``measured_qubits``.

    Outcome strings read as binary numbers: the last character is
    ``measured_qubits[0]``'s bit.
    """
    measured = list(measured_qubits)
    if not measured:
        raise UsageError("measured_qubits must be nonempty")
    if shots < 1:
        raise UsageError("shots must be >= 1")

    width = len(measured)
    outcome_vals = np.zeros(len(state.keys), dtype=np.int64)
    for i, q in enumerate(measured):
        outcome_vals |= ((state.keys >> q) & 1) << i
    probs: dict[int, float] = {}
    weights = np.abs(state.amps) ** 2
    for v, w in zip(outcome_vals, weights):
        probs[int(v)] = probs.get(int(v), 0.0) + float(w)

    vals = sorted(probs)
    p = np.array([probs[v] for v in vals])
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p)
    counts = {}
    for v, n in zip(vals, draws):
        if n:
            counts[format(v, f"0{width}b")] = int(n)
    return MeasurementCounts(shots, counts)


def sample_values(state: SparseState, measured_qubits, shots: int, seed) -> dict[int, int]:
    """Like ``sample`` but keyed by integer outcome (bit i = measured[i])."""
    mc = sample(state, measured_qubits, shots, seed)
    return {int(k, 2): v for k, v in mc.counts.items()}


def dense_unitary(circuit: Circuit) -> np.ndarray:
    """2^n x 2^n matrix assembled column-by-column by simulating basis inputs."""
    n = circuit.num_qubits
    if n > 12:
        raise UsageError(f"dense_unitary supports at most 12 qubits, got {n}")
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        st = apply(SparseState.basis_state(n, col), circuit, prune_epsilon=0.0)
        out[st.keys, col] = st.amps
    return out


def dump_state(state: SparseState) -> str:
    """Text lines ``bitstring amplitude_re amplitude_im`` sorted by bitstring."""
    n = state.num_qubits
    lines = []
    for k, a in zip(state.keys, state.amps):
        lines.append(f"{format(int(k), f'0{n}b')} {a.real:.17g} {a.imag:.17g}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_state(text: str, num_qubits: int) -> SparseState:
    amplitudes = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        bits, re_s, im_s = line.split()
        amplitudes[int(bits, 2)] = complex(float(re_s), float(im_s))
    return SparseState.from_dict(num_qubits, amplitudes)
