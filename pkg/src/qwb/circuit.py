"""Gate and circuit representation with qubit allocation and structural transforms.

Conventions (fixed throughout the package):
  * Qubit 0 is the least-significant bit of a basis index.
  * A controlled X with one activate-on-1 control is the CX gate; more controls
    (or open controls) make it an MCX.  MCZ stores one participating qubit as
    the target and the remaining ones as controls; it is symmetric under
    reordering.
  * Inversion negates rotation angles (U3 adjoint is U3(-theta, -lam, -phi))
    and swaps S/Sdg, T/Tdg.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from enum import Enum


class UsageError(ValueError):
    """Raised when an operation is applied outside its contract."""


class GateKind(str, Enum):
    X = "X"
    H = "H"
    S = "S"
    SDG = "SDG"
    T = "T"
    TDG = "TDG"
    RY = "RY"
    U3 = "U3"
    SWAP = "SWAP"
    XXPLUSYY = "XXPLUSYY"
    MCZ = "MCZ"
    BARRIER = "BARRIER"


SINGLE_QUBIT_KINDS = frozenset({
    GateKind.X, GateKind.H, GateKind.S, GateKind.SDG,
    GateKind.T, GateKind.TDG, GateKind.RY, GateKind.U3,
})

_PARAM_COUNT = {
    GateKind.RY: 1,
    GateKind.U3: 3,
    GateKind.XXPLUSYY: 2,
}

_ADJOINT_SWAP = {
    GateKind.S: GateKind.SDG,
    GateKind.SDG: GateKind.S,
    GateKind.T: GateKind.TDG,
    GateKind.TDG: GateKind.T,
}


@dataclass(frozen=True)
class Gate:
    """One circuit instruction.

    ``targets`` are the qubits the base operation acts on; ``controls`` carry
    an explicit per-qubit ``control_state`` (1 = activate on |1>, 0 = open
    circle / activate on |0>).
    """

    kind: GateKind
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    controls: tuple[int, ...] = ()
    control_state: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.controls) != len(self.control_state):
            raise UsageError("controls and control_state lengths differ")
        want = _PARAM_COUNT.get(self.kind, 0)
        if len(self.params) != want:
            raise UsageError(f"{self.kind.value} expects {want} params, got {len(self.params)}")
        seen = set(self.targets) | set(self.controls)
        if len(seen) != len(self.targets) + len(self.controls):
            raise UsageError("targets and controls must be disjoint and unique")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def adjoint(self) -> "Gate":
        kind = _ADJOINT_SWAP.get(self.kind, self.kind)
        params = self.params
        if self.kind is GateKind.RY:
            params = (-self.params[0],)
        elif self.kind is GateKind.U3:
            th, ph, lam = self.params
            params = (-th, -lam, -ph)
        elif self.kind is GateKind.XXPLUSYY:
            params = (-self.params[0], self.params[1])
        return replace(self, kind=kind, params=params)

    def display_name(self) -> str:
        """Conventional name: CX/MCX for controlled X, CZ for two-qubit MCZ."""
        if self.kind is GateKind.X and self.controls:
            if len(self.controls) == 1 and self.control_state == (1,):
                return "CX"
            return "MCX"
        if self.kind is GateKind.MCZ:
            if len(self.controls) == 1 and self.control_state == (1,):
                return "CZ"
            return "MCZ"
        name = self.kind.value
        if self.controls:
            name = "C" * len(self.controls) + name
        return name


def _identity_map(n: int) -> list[int]:
    return list(range(n))


class Circuit:
    """Ordered gate sequence over an allocatable qubit pool.

    ``allocate`` reuses the lowest free index before growing the pool.  Gates
    emitted through the helper methods are relabeled through ``wire_map``,
    which ``permute_wires`` composes without emitting any gates.
    """

    def __init__(self, num_qubits: int = 0):
        self.num_qubits = num_qubits
        self.gates: list[Gate] = []
        self._free: list[int] = []          # min-heap of deallocated indices
        self._free_set: set[int] = set()
        self.wire_map: list[int] = _identity_map(num_qubits)
        # (gate position, qubit) pairs recorded at deallocation, used by the
        # simulator's debug mode to assert the |0> contract.
        self.dealloc_events: list[tuple[int, int]] = []
        self.alloc_events: list[tuple[int, int]] = []
        self.alloc_log: list[int] = []

    # -- allocation ---------------------------------------------------------

    def allocate(self) -> int:
        if self._free:
            q = heapq.heappop(self._free)
            self._free_set.discard(q)
        else:
            q = self.num_qubits
            self.num_qubits += 1
            self.wire_map.append(q)
        self.alloc_log.append(q)
        self.alloc_events.append((len(self.gates), q))
        return q

    def allocate_register(self, size: int) -> list[int]:
        return [self.allocate() for _ in range(size)]

    def deallocate(self, qubit: int) -> None:
        if qubit >= self.num_qubits or qubit in self._free_set:
            raise UsageError(f"qubit {qubit} is not currently allocated")
        self.dealloc_events.append((len(self.gates), qubit))
        heapq.heappush(self._free, qubit)
        self._free_set.add(qubit)

    @property
    def free_pool(self) -> frozenset[int]:
        return frozenset(self._free_set)

    # -- wire permutation ---------------------------------------------------

    def permute_wires(self, perm: dict[int, int]) -> None:
        """Relabel subsequent emissions: logical q now refers to the wire that
        logical ``perm[q]`` referred to before the call.  Emits zero gates."""
        if sorted(perm.keys()) != sorted(perm.values()):
            raise UsageError("permutation must be a bijection over its domain")
        for q in perm:
            if not 0 <= q < self.num_qubits:
                raise UsageError(f"permutation index {q} out of range")
        old = list(self.wire_map)
        for q, src in perm.items():
            self.wire_map[q] = old[src]

    # -- gate emission ------------------------------------------------------

    def _emit(self, kind, targets, params=(), controls=(), control_state=()):
        for q in tuple(targets) + tuple(controls):
            if not 0 <= q < self.num_qubits:
                raise UsageError(f"gate references out-of-range qubit {q}")
        targets = tuple(self.wire_map[t] for t in targets)
        controls = tuple(self.wire_map[c] for c in controls)
        gate = Gate(kind, targets, tuple(float(p) for p in params),
                    controls, tuple(int(s) for s in control_state))
        self._check_live(gate)
        self.gates.append(gate)
        return gate

    def _check_live(self, gate: Gate) -> None:
        for q in gate.qubits:
            if not 0 <= q < self.num_qubits:
                raise UsageError(f"gate references out-of-range qubit {q}")
            if q in self._free_set:
                raise UsageError(f"gate references deallocated qubit {q}")

    def x(self, q): self._emit(GateKind.X, (q,))
    def h(self, q): self._emit(GateKind.H, (q,))
    def s(self, q): self._emit(GateKind.S, (q,))
    def sdg(self, q): self._emit(GateKind.SDG, (q,))
    def t(self, q): self._emit(GateKind.T, (q,))
    def tdg(self, q): self._emit(GateKind.TDG, (q,))
    def ry(self, theta, q): self._emit(GateKind.RY, (q,), (theta,))
    def u3(self, theta, phi, lam, q): self._emit(GateKind.U3, (q,), (theta, phi, lam))

    def phase(self, lam, q):
        """diag(1, e^{i lam}) — exactly U3(0, 0, lam)."""
        self._emit(GateKind.U3, (q,), (0.0, 0.0, lam))

    def cx(self, ctrl, target):
        self._emit(GateKind.X, (target,), controls=(ctrl,), control_state=(1,))

    def swap(self, a, b): self._emit(GateKind.SWAP, (a, b))

    def xxyy(self, phi, a, b, beta=None):
        import math
        self._emit(GateKind.XXPLUSYY, (a, b), (phi, math.pi / 2 if beta is None else beta))

    def mcx(self, controls, target, control_state=None):
        """Atomic multi-controlled X; lowered by the transpiler."""
        controls = tuple(controls)
        if control_state is None:
            control_state = (1,) * len(controls)
        self._emit(GateKind.X, (target,), controls=controls, control_state=tuple(control_state))

    def mcz(self, qubits, control_state=None):
        """Phase -1 on the basis state matching ``control_state`` across ``qubits``."""
        qubits = tuple(qubits)
        if len(qubits) < 2:
            raise UsageError("mcz needs at least 2 qubits")
        if control_state is None:
            control_state = (1,) * len(qubits)
        control_state = tuple(int(s) for s in control_state)
        if len(control_state) != len(qubits):
            raise UsageError("control_state length mismatch")
        # Normalize: keep a state-1 qubit as the target when one exists,
        # otherwise conjugate the last qubit with X.
        try:
            k = control_state.index(1)
        except ValueError:
            k = -1
        if k < 0:
            tgt = qubits[-1]
            rest = qubits[:-1]
            rest_state = control_state[:-1]
            self.x(tgt)
            self._emit(GateKind.MCZ, (tgt,), controls=rest, control_state=rest_state)
            self.x(tgt)
            return
        tgt = qubits[k]
        rest = qubits[:k] + qubits[k + 1:]
        rest_state = control_state[:k] + control_state[k + 1:]
        self._emit(GateKind.MCZ, (tgt,), controls=rest, control_state=rest_state)

    def cz(self, a, b): self.mcz((a, b))

    def barrier(self, qubits=()):
        self._emit(GateKind.BARRIER, tuple(qubits))

    # -- fragment handling --------------------------------------------------

    def mark(self) -> int:
        return len(self.gates)

    def gates_since(self, mark: int) -> tuple[Gate, ...]:
        return tuple(self.gates[mark:])

    def alloc_mark(self) -> int:
        return len(self.alloc_log)

    def allocs_since(self, mark: int) -> tuple[int, ...]:
        return tuple(self.alloc_log[mark:])

    def _reserve_freed(self, gates) -> list[int]:
        """Pull currently-free qubits referenced by a replayed fragment back
        out of the pool (a fragment may have allocated and released ancillae
        internally; its mirror re-uses the same wires and re-releases them)."""
        refs = {q for g in gates for q in g.qubits}
        reserved = sorted(q for q in refs if q in self._free_set)
        if reserved:
            self._free_set.difference_update(reserved)
            self._free = [q for q in self._free if q in self._free_set]
            heapq.heapify(self._free)
            self.alloc_log.extend(reserved)
            self.alloc_events.extend((len(self.gates), q) for q in reserved)
        return reserved

    def extend_verbatim(self, gates) -> None:
        """Append already-mapped gates without applying wire_map."""
        gates = tuple(gates)
        reserved = self._reserve_freed(gates)
        for g in gates:
            self._check_live(g)
            self.gates.append(g)
        for q in reversed(reserved):
            self.deallocate(q)

    def extend_inverted(self, gates) -> None:
        """Append the adjoint of an already-mapped gate sequence."""
        gates = tuple(gates)
        reserved = self._reserve_freed(gates)
        for g in reversed(gates):
            if g.kind is GateKind.BARRIER:
                continue
            inv = g.adjoint()
            self._check_live(inv)
            self.gates.append(inv)
        for q in reversed(reserved):
            self.deallocate(q)


def invert(circuit: Circuit) -> Circuit:
    """Reversed circuit with every gate replaced by its adjoint."""
    out = Circuit(circuit.num_qubits)
    for g in reversed(circuit.gates):
        if g.kind is GateKind.BARRIER:
            continue
        out.gates.append(g.adjoint())
    return out


def control_generic(circuit: Circuit, ctrl: int) -> Circuit:
    """Every gate acquires ``ctrl`` as an additional activate-on-1 control.

    The generic one-fits-all method: correct for any circuit, usually far
    more expensive than a construction-specific controlled version.
    """
    for g in circuit.gates:
        if ctrl in g.qubits:
            raise UsageError(f"control qubit {ctrl} collides with circuit wires")
    out = Circuit(max(circuit.num_qubits, ctrl + 1))
    for g in circuit.gates:
        if g.kind is GateKind.BARRIER:
            out.gates.append(g)
            continue
        out.gates.append(replace(g, controls=g.controls + (ctrl,),
                                 control_state=g.control_state + (1,)))
    return out


# -- text serialization -----------------------------------------------------
#
# Line format (whitespace separated, one gate per line):
#
#   GATE <kind> <params|-> <targets> <controls|-> <control_state|->
#
# Lists are comma-joined with no spaces; "-" stands for an empty list.  The
# first line is "QUBITS <n>".  Params are printed with repr-level precision.

def to_text(circuit: Circuit) -> str:
    lines = [f"QUBITS {circuit.num_qubits}"]
    for g in circuit.gates:
        params = ",".join(f"{p!r}" for p in g.params) or "-"
        targets = ",".join(str(t) for t in g.targets)
        controls = ",".join(str(c) for c in g.controls) or "-"
        state = ",".join(str(s) for s in g.control_state) or "-"
        lines.append(f"GATE {g.kind.value} {params} {targets} {controls} {state}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("QUBITS "):
        raise UsageError("missing QUBITS header")
    circ = Circuit(int(lines[0].split()[1]))
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 6 or parts[0] != "GATE":
            raise UsageError(f"malformed gate line: {ln!r}")
        _, kind, params, targets, controls, state = parts
        circ.gates.append(Gate(
            GateKind(kind),
            tuple(int(t) for t in targets.split(",")) if targets != "-" else (),
            tuple(float(p) for p in params.split(",")) if params != "-" else (),
            tuple(int(c) for c in controls.split(",")) if controls != "-" else (),
            tuple(int(s) for s in state.split(",")) if state != "-" else (),
        ))
    return circ
