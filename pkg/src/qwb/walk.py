"""Quantum walk over a backtracking tree: node encoding, state preparation,
the diffusers, phase estimation, marked-node detection, and solution search.

Node encoding
-------------

A tree of ``max_depth`` N with ``deg = 2**branch_bits`` children per node
lives on:

  * ``h``: N+1 qubits (circuit wires 0..N), one-hot height register.  A leaf
    has height 0, the root height N.
  * ``branch_qa``: N registers of ``branch_bits`` qubits following ``h``;
    entry i stores the branch taken when stepping down to height i, so the
    register holds the reversed path.  The node with path [0, 1] in a binary
    depth-4 tree is |branch_qa> = |[0,0,1,0]>, |h> = |00100>.

Heights are root-relative, so a subtree re-uses the encoding unchanged: the
effective root of a subtree with ``root_path`` of length L sits at height
N - L, and everything above it stays classical.

Basis states whose branch entries below the height index are nonzero are
non-algorithmic; the walk never populates them when started from a node
state, and the diffusers never map them onto algorithmic states.

Oracle builders receive ``(tree, circuit)``, allocate whatever they need via
``circuit.allocate``, emit gates, and return the result qubit.  The diffuser
records the fragment, applies its phase, replays the exact inverse and
returns every allocated qubit to the pool, so builders never uncompute.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, UsageError
from .sim import SparseState, apply, sample
from .synthesis import controlled_h, fredkin, mcz, xx_plus_yy


@dataclass(frozen=True)
class WalkConfig:
    """Detection / search parameters.

    ``beta_const`` and ``gamma_const`` are the universal constants of the
    detection procedure (left open in the source material; surfaced here),
    ``accept_threshold`` the detection vote fraction (3/8 by default).
    """

    precision_bits: int = 3
    shots: int = 10000
    delta: float = 0.25
    beta_const: float = 1.0
    gamma_const: float = 4.0
    accept_threshold: float = 3.0 / 8.0

    def __post_init__(self):
        if self.precision_bits < 1:
            raise UsageError("precision_bits must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise UsageError("delta must lie in (0, 1)")


@dataclass
class DetectionResult:
    marked: bool
    accept_number: int
    repetitions: int
    precision_bits: int
    zero_frequency: float


NodePath = tuple[int, ...]


def trivial_oracle(tree, circ) -> int:
    """Constant-false predicate: a fresh |0> result qubit, zero gates."""
    return circ.allocate()


def oracle_from_paths(paths):
    """Exact node-set predicate: fires on the listed paths (height gated).

    Examines only the height bit and the branch entries at or above it, so
    it is insensitive to non-algorithmic dirt below the height index (which
    also makes it legal under subspace optimization).
    """
    paths = [tuple(p) for p in paths]

    def builder(tree, circ):
        res = circ.allocate()
        for p in paths:
            if len(p) > tree.max_depth:
                raise UsageError(f"path {p} longer than tree depth")
            height = tree.max_depth - len(p)
            controls = [tree.h[height]]
            state = [1]
            for a, label in enumerate(p):
                reg = tree.branch_reg(tree.max_depth - 1 - a)
                for j, q in enumerate(reg):
                    controls.append(q)
                    state.append((label >> j) & 1)
            circ.mcx(controls, res, state)
        return res

    return builder


class BacktrackingTree:
    """Walk registers, oracle builders and circuit emitters for one tree."""

    def __init__(self, max_depth: int, branch_bits: int, accept_builder,
                 reject_builder, subspace_optimization: bool = False,
                 root_path: NodePath = ()):
        if max_depth < 1:
            raise UsageError("max_depth must be >= 1")
        self.max_depth = max_depth
        self.branch_bits = branch_bits
        self.deg = 2 ** branch_bits
        self.accept_builder = accept_builder
        self.reject_builder = reject_builder
        self.subspace_optimization = subspace_optimization
        self.root_path = tuple(root_path)
        if len(self.root_path) > max_depth:
            raise UsageError("root path longer than maximum depth")
        self.h = list(range(max_depth + 1))
        base = max_depth + 1
        self._branch = [tuple(base + i * branch_bits + j for j in range(branch_bits))
                        for i in range(max_depth)]
        self.num_tree_qubits = base + max_depth * branch_bits

    # -- registers ----------------------------------------------------------

    def branch_reg(self, i: int) -> tuple[int, ...]:
        return self._branch[i]

    def branch_qubits(self) -> list[int]:
        return [q for reg in self._branch for q in reg]

    @property
    def effective_depth(self) -> int:
        return self.max_depth - len(self.root_path)

    def new_circuit(self) -> Circuit:
        return Circuit(self.num_tree_qubits)

    def subtree(self, new_root: NodePath) -> "BacktrackingTree":
        return BacktrackingTree(self.max_depth, self.branch_bits,
                                self.accept_builder, self.reject_builder,
                                self.subspace_optimization, tuple(new_root))

    # -- node states --------------------------------------------------------

    def init_node(self, circ: Circuit, path: NodePath) -> None:
        """X gates preparing the node state for ``path`` (relative to this
        tree's root) on fresh registers."""
        full = self.root_path + tuple(path)
        if len(full) > self.max_depth:
            raise UsageError("path longer than maximum depth")
        height = self.max_depth - len(full)
        circ.x(self.h[height])
        for a, label in enumerate(full):
            if not 0 <= label < self.deg:
                raise UsageError(f"branch label {label} out of range")
            reg = self.branch_reg(self.max_depth - 1 - a)
            for j, q in enumerate(reg):
                if (label >> j) & 1:
                    circ.x(q)

    def node_index(self, path: NodePath) -> int:
        """Basis index of a node state (workspace qubits zero)."""
        full = self.root_path + tuple(path)
        idx = 1 << self.h[self.max_depth - len(full)]
        for a, label in enumerate(full):
            reg = self.branch_reg(self.max_depth - 1 - a)
            for j, q in enumerate(reg):
                if (label >> j) & 1:
                    idx |= 1 << q
        return idx

    def decode_outcome(self, h_value: int, branch_values) -> NodePath | None:
        """Map measured register contents to an absolute path, or None if the
        outcome is not an algorithmic node of this (sub)tree."""
        if h_value == 0 or (h_value & (h_value - 1)):
            return None
        j = h_value.bit_length() - 1
        if j > self.effective_depth:
            return None
        if any(branch_values[i] for i in range(j)):
            return None
        path = tuple(branch_values[self.max_depth - 1 - a]
                     for a in range(self.max_depth - j))
        if path[:len(self.root_path)] != self.root_path:
            return None
        return path

    def phi_state(self, path: NodePath, num_qubits: int | None = None) -> SparseState:
        """Normalized alternating-sign superposition along the root-to-node
        path (sqrt(n) weight on the root); fixed by the walk step when the
        endpoint is marked."""
        n_eff = self.effective_depth
        amplitudes = {self.node_index(()): math.sqrt(n_eff)}
        for ell in range(1, len(path) + 1):
            amplitudes[self.node_index(tuple(path[:ell]))] = (-1.0) ** ell
        norm = math.sqrt(sum(a * a for a in amplitudes.values()))
        nq = num_qubits if num_qubits is not None else self.num_tree_qubits
        return SparseState.from_dict(nq, {k: v / norm for k, v in amplitudes.items()})

    # -- walk emitters ------------------------------------------------------

    def _psi_prep_gates(self, circ: Circuit, even: bool):
        """Build the child-superposition preparation as a mapped gate list."""
        shadow = Circuit(circ.num_qubits)
        shadow.wire_map = list(circ.wire_map)
        self._emit_psi_prep(shadow, even)
        return tuple(shadow.gates)

    def _emit_psi_prep(self, circ: Circuit, even: bool) -> None:
        n = self.effective_depth
        ev = int(even)
        phi = 2.0 * math.atan(math.sqrt(self.deg))
        root_phi = 2.0 * math.atan(math.sqrt(n * self.deg))

        def pair(angle, i):
            # Shift amplitude from height i+1 toward height i (positive
            # weight), gated on the child's branch entry being zero so
            # non-algorithmic states stay put; then fan the fresh child
            # branch entry into the uniform superposition.
            reg = self.branch_reg(i)
            xx_plus_yy(circ, -angle, self.h[i], self.h[i + 1],
                       ctrl_qubits=reg, ctrl_state=(0,) * len(reg))
            for q in reg:
                controlled_h(circ, self.h[i], q)

        if n % 2 != ev and n >= 1:
            pair(root_phi, n - 1)
        for i in range(ev, n - 1, 2):
            pair(phi, i)

    def psi_prep(self, circ: Circuit, even: bool) -> None:
        circ.extend_verbatim(self._psi_prep_gates(circ, even))

    def qstep_diffuser(self, circ: Circuit, even: bool, ctrl=()) -> None:
        """One diffuser: reflections about the child superpositions over all
        parent subspaces of the selected height parity (identity on marked
        nodes, minus identity on rejected ones)."""
        n = self.effective_depth
        ev = int(even)
        ctrl = tuple(ctrl)

        prep = self._psi_prep_gates(circ, even)
        circ.extend_inverted(prep)

        oddity = circ.allocate()
        for i in range(n + 1):
            if i % 2 != ev:
                circ.cx(self.h[i], oddity)

        # Phase the non-accepted parents.
        amark, gmark = circ.alloc_mark(), circ.mark()
        accept_q = self.accept_builder(self, circ)
        accept_gates = circ.gates_since(gmark)
        mcz(circ, (oddity, accept_q) + ctrl, (1, 0) + (1,) * len(ctrl))
        circ.extend_inverted(accept_gates)
        _release(circ, amark)

        # Lifting.  The height increment would read the root as a leaf; when
        # the root has child parity, flipping its oddity masks it from the
        # reject phase below.
        root_fix = (n % 2) == ev
        if root_fix:
            circ.cx(self.h[n], oddity)

        temp = []
        swap_gates = ()
        if not self.subspace_optimization:
            temp = circ.allocate_register(self.branch_bits)
            smark = circ.mark()
            for i in range(n):
                if i % 2 == ev:
                    reg = self.branch_reg(i)
                    for j, q in enumerate(reg):
                        fredkin(circ, temp[j], q, ctrl=self.h[i])
            swap_gates = circ.gates_since(smark)

        circ.permute_wires(self._increment_perm())

        # Phase the children of rejected parents, evaluated on the lift.
        amark, gmark = circ.alloc_mark(), circ.mark()
        reject_q = self.reject_builder(self, circ)
        reject_gates = circ.gates_since(gmark)
        mcz(circ, (reject_q, oddity) + ctrl, (1, 0) + (1,) * len(ctrl))
        circ.extend_inverted(reject_gates)
        _release(circ, amark)

        circ.permute_wires(self._decrement_perm())

        if not self.subspace_optimization:
            circ.extend_inverted(swap_gates)
            for q in reversed(temp):
                circ.deallocate(q)

        if root_fix:
            circ.cx(self.h[n], oddity)
        for i in range(n + 1):
            if i % 2 != ev:
                circ.cx(self.h[i], oddity)
        circ.deallocate(oddity)

        circ.extend_verbatim(prep)

    def _increment_perm(self) -> dict[int, int]:
        n = self.effective_depth
        perm = {self.h[0]: self.h[n]}
        for j in range(1, n + 1):
            perm[self.h[j]] = self.h[j - 1]
        return perm

    def _decrement_perm(self) -> dict[int, int]:
        return {v: k for k, v in self._increment_perm().items()}

    def quantum_step(self, circ: Circuit, ctrl=()) -> None:
        """One walk step: the even-distance diffuser, then the odd one."""
        n = self.effective_depth
        self.qstep_diffuser(circ, even=(n % 2 == 0), ctrl=ctrl)
        self.qstep_diffuser(circ, even=(n % 2 == 1), ctrl=ctrl)

    def estimate_phase(self, circ: Circuit, precision_bits: int) -> list[int]:
        """Standard phase estimation on the walk step; returns the ancilla
        register.  The all-zero outcome witnesses an eigenvalue-1 component.
        Controlled powers are literal repetitions of the controlled step."""
        if precision_bits < 1:
            raise UsageError("precision_bits must be >= 1")
        anc = circ.allocate_register(precision_bits)
        for a in anc:
            circ.h(a)
        for k, a in enumerate(anc):
            for _ in range(2 ** k):
                self.quantum_step(circ, ctrl=(a,))
        _inverse_qft(circ, anc)
        return anc


def _release(circ, alloc_mark):
    """Return every qubit a fragment allocated (and has not itself released)
    to the pool, newest first."""
    for q in reversed(circ.allocs_since(alloc_mark)):
        if q not in circ.free_pool:
            circ.deallocate(q)


def _cphase(circ, theta, a, b):
    circ.phase(theta / 2, a)
    circ.phase(theta / 2, b)
    circ.cx(a, b)
    circ.phase(-theta / 2, b)
    circ.cx(a, b)


def _inverse_qft(circ, qubits):
    # No terminal swap layer: only the all-zero outcome is consumed, which is
    # ordering-independent.
    for j in range(len(qubits)):
        for i in range(j):
            _cphase(circ, -math.pi / 2 ** (j - i), qubits[i], qubits[j])
        circ.h(qubits[j])


# ---------------------------------------------------------------------------
# detection and search


def tree_size_bound(tree: BacktrackingTree) -> int:
    """Full-tree node count (deg^(n+1)-1)/(deg-1) for the effective depth."""
    n, d = tree.effective_depth, tree.deg
    return (d ** (n + 1) - 1) // (d - 1)


def detection_precision(tree: BacktrackingTree, config: WalkConfig) -> int:
    """Precision bits so the phase grid resolves beta/sqrt(T n)."""
    n = tree.effective_depth
    t = tree_size_bound(tree)
    return max(1, math.ceil(math.log2(math.sqrt(t * n) / config.beta_const)))


def detect_marked(tree: BacktrackingTree, config: WalkConfig, seed=0,
                  max_support=None) -> DetectionResult:
    """Vote over K = ceil(gamma ln(1/delta)) phase estimations from the root.

    The estimations are independent and identically distributed, so they are
    drawn as K seeded shots from one simulated outcome distribution.
    """
    reps = max(1, math.ceil(config.gamma_const * math.log(1.0 / config.delta)))
    precision = detection_precision(tree, config)
    circ = tree.new_circuit()
    tree.init_node(circ, ())
    anc = tree.estimate_phase(circ, precision)
    state = apply(SparseState.zero(circ.num_qubits), circ, max_support=max_support)
    counts = sample(state, anc, reps, seed)
    accept_number = counts.counts.get("0" * len(anc), 0)
    return DetectionResult(
        marked=accept_number >= config.accept_threshold * reps,
        accept_number=accept_number,
        repetitions=reps,
        precision_bits=precision,
        zero_frequency=accept_number / reps,
    )


def classically_accepted(tree: BacktrackingTree, path: NodePath = ()) -> bool:
    """Evaluate the accept oracle on a single node state via simulation."""
    circ = tree.new_circuit()
    tree.init_node(circ, path)
    res = tree.accept_builder(tree, circ)
    state = apply(SparseState.zero(circ.num_qubits), circ)
    return state.probability(res, 1) > 0.5


@dataclass
class SearchStats:
    qpe_runs: int = 0
    max_support: int = 0
    explored: list[NodePath] = field(default_factory=list)


def find_solution(tree: BacktrackingTree, config: WalkConfig, seed=None,
                  max_support=None, stats: SearchStats | None = None) -> NodePath | None:
    """Recursive search: phase-estimate from the current root, decode the
    tree-register outcomes that co-occur with the all-zero ancilla register,
    keep the ones extending the root path by one label, and recurse into the
    most frequent label first (ties to the smaller label).  Each level
    rebuilds registers and re-runs phase estimation.  Returns the absolute
    path of an accepted node, or None."""
    rng = np.random.default_rng(seed)
    return _search(tree, config, rng, max_support, stats)


def _search(tree, config, rng, max_support, stats):
    if classically_accepted(tree, ()):
        return tree.root_path
    if tree.effective_depth == 0:
        return None

    circ = tree.new_circuit()
    tree.init_node(circ, ())
    anc = tree.estimate_phase(circ, config.precision_bits)
    state = apply(SparseState.zero(circ.num_qubits), circ, max_support=max_support)
    if stats is not None:
        stats.qpe_runs += 1
        stats.max_support = max(stats.max_support, state.max_support_seen)

    measured = list(anc) + tree.h + tree.branch_qubits()
    counts = sample(state, measured, config.shots, rng.integers(2 ** 63))

    p = len(anc)
    labels: Counter[int] = Counter()
    for outcome, count in counts.counts.items():
        value = int(outcome, 2)
        if value & ((1 << p) - 1):
            continue
        value >>= p
        h_value = value & ((1 << (tree.max_depth + 1)) - 1)
        value >>= tree.max_depth + 1
        branch_values = []
        for _ in range(tree.max_depth):
            branch_values.append(value & (tree.deg - 1))
            value >>= tree.branch_bits
        path = tree.decode_outcome(h_value, branch_values)
        if path is None:
            continue
        if len(path) == len(tree.root_path) + 1 and path[:-1] == tree.root_path:
            labels[path[-1]] += count

    for label, _ in sorted(labels.items(), key=lambda kv: (-kv[1], kv[0])):
        child = tree.root_path + (label,)
        if stats is not None:
            stats.explored.append(child)
        found = _search(tree.subtree(child), config, rng, max_support, stats)
        if found is not None:
            return found
    return None


# ---------------------------------------------------------------------------
# decoding and visualization


@dataclass
class DecodedState:
    nodes: dict[NodePath, complex]
    non_algorithmic: dict[int, complex]

    def non_algorithmic_mass(self) -> float:
        return sum(abs(a) ** 2 for a in self.non_algorithmic.values())


def decode_tree_state(tree: BacktrackingTree, state: SparseState,
                      amp_epsilon: float = 1e-11) -> DecodedState:
    """Group amplitudes by decoded node identity; everything that is not an
    algorithmic node state (with clean workspace) goes to the separate
    non-algorithmic bucket."""
    nodes: dict[NodePath, complex] = {}
    other: dict[int, complex] = {}
    tree_mask = (1 << tree.num_tree_qubits) - 1
    h_mask = (1 << (tree.max_depth + 1)) - 1
    for idx, amp in zip(state.keys, state.amps):
        idx = int(idx)
        amp = complex(amp)
        if abs(amp) < amp_epsilon:
            continue
        if idx & ~tree_mask:
            other[idx] = amp
            continue
        h_value = idx & h_mask
        branch_values = []
        for i in range(tree.max_depth):
            reg = tree.branch_reg(i)
            v = 0
            for j, q in enumerate(reg):
                v |= ((idx >> q) & 1) << j
            branch_values.append(v)
        path = tree.decode_outcome(h_value, branch_values)
        if path is None:
            other[idx] = amp
        else:
            nodes[path] = nodes.get(path, 0.0) + amp
    return DecodedState(nodes, other)


def to_dot(decoded: DecodedState) -> str:
    """DOT graph of the decoded support: green fill for positive real part,
    purple for negative; edges between present parent/child pairs."""
    lines = ["digraph walk {", "  node [style=filled];",
             f"  // non-algorithmic mass: {decoded.non_algorithmic_mass():.3e}"]
    for path, amp in sorted(decoded.nodes.items()):
        color = "palegreen" if amp.real >= 0 else "plum"
        label = "[" + ",".join(str(x) for x in path) + "]"
        lines.append(f'  "{label}" [fillcolor={color}, '
                     f'label="{label}\\n{amp.real:+.3f}{amp.imag:+.3f}i"];')
    present = set(decoded.nodes)
    for path in sorted(present):
        if path and path[:-1] in present:
            parent = "[" + ",".join(str(x) for x in path[:-1]) + "]"
            child = "[" + ",".join(str(x) for x in path) + "]"
            lines.append(f'  "{parent}" -> "{child}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def demo_tree(depth: int = 3, subspace_optimization: bool = False) -> BacktrackingTree:
    """Binary demo tree: accept marks the all-ones path, reject cuts the
    subtree under [0]."""
    return BacktrackingTree(
        depth, 1,
        accept_builder=oracle_from_paths([(1,) * depth]),
        reject_builder=oracle_from_paths([(0,)]),
        subspace_optimization=subspace_optimization,
    )
