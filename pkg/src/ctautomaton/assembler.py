"""Circuit -> command program compiler and the abstract pointer machine.

The machine has an n-qubit register, a pointer position and one internal
pointer qubit. Commands: L/R move the pointer, S swaps the addressed qubit
with the internal qubit, G applies the two-qubit gate ``g`` to
(addressed qubit, internal qubit).

Circuit gates:

* ``{"g": "G", "q": [a, b]}`` applies ``g`` to the ordered pair (qubit b, qubit a).
  Compiled as: walk to a, S (load a), walk to b, G, walk back to a, S (restore).
* ``{"g": "G1", "q": [a]}`` applies ``g`` to (qubit a, internal qubit); the
  internal qubit acts as a fiducial ancilla.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain import SCHEMA_VERSION, CommandProgram
from .errors import InvalidArgument, MachineRangeError
from .hamiltonian import default_g_gate

GATE_KINDS = ("G", "G1")


@dataclass(frozen=True)
class CircuitGate:
    kind: str
    qubits: tuple[int, ...]


@dataclass
class Circuit:
    n_qubits: int
    gates: list[CircuitGate] = field(default_factory=list)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidArgument("a circuit needs at least one qubit")
        gates = []
        for g in self.gates:
            if not isinstance(g, CircuitGate):
                g = CircuitGate(g[0], tuple(g[1]))
            if g.kind not in GATE_KINDS:
                raise InvalidArgument(f"unknown gate kind {g.kind!r}")
            want = 2 if g.kind == "G" else 1
            if len(g.qubits) != want:
                raise InvalidArgument(f"{g.kind} takes {want} qubit(s)")
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise InvalidArgument(f"qubit index out of range in {g}")
            if len(set(g.qubits)) != len(g.qubits):
                raise InvalidArgument("two-qubit gate on a single qubit")
            gates.append(CircuitGate(g.kind, tuple(int(q) for q in g.qubits)))
        self.gates = gates

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n_qubits": self.n_qubits,
            "gates": [{"g": g.kind, "q": list(g.qubits)} for g in self.gates],
        }

    @classmethod
    def from_dict(cls, data) -> "Circuit":
        try:
            return cls(int(data["n_qubits"]), [CircuitGate(g["g"], tuple(g["q"])) for g in data.get("gates", [])])
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed circuit: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "Circuit":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _walk(src: int, dst: int) -> str:
    return "R" * (dst - src) if dst >= src else "L" * (src - dst)


def compile_circuit(circuit: Circuit, pointer_start: int = 0) -> CommandProgram:
    """Command string reproducing ``circuit`` on the pointer machine."""
    if not 0 <= pointer_start < circuit.n_qubits:
        raise InvalidArgument("pointer_start outside the register")
    out = []
    pos = pointer_start
    for gate in circuit.gates:
        if gate.kind == "G":
            a, b = gate.qubits
            out += [_walk(pos, a), "S", _walk(a, b), "G", _walk(b, a), "S"]
            pos = a
        else:
            (a,) = gate.qubits
            out += [_walk(pos, a), "G"]
            pos = a
    return CommandProgram("".join(out))


# short alias
compile = compile_circuit  # noqa: A001


def pad(program: CommandProgram, n_pad: int) -> CommandProgram:
    if n_pad < 0:
        raise InvalidArgument("n_pad must be non-negative")
    return CommandProgram(program.real, program.padding + n_pad)


def recommended_padding(l_p: int, l_q: int) -> int:
    """Padding so that the command block has N = (l_p + l_q)^2 entries."""
    return (l_p + l_q) ** 2 - l_p


def departures_needed(l_p: int, l_q: int) -> int:
    """k = l_p + l_q commands must leave the starting block."""
    return l_p + l_q


# ---------------------------------------------------------------------------
# Machine semantics
# ---------------------------------------------------------------------------


@dataclass
class MachineState:
    """``state`` has shape (2,)*n_qubits + (2,); the last axis is the internal qubit."""

    state: np.ndarray
    pointer: int
    frame_shift: int = 0

    @property
    def n_qubits(self) -> int:
        return self.state.ndim - 1

    def vector(self) -> np.ndarray:
        return self.state.reshape(-1)

    def register_distribution(self) -> dict[str, float]:
        """Marginal over the n register qubits."""
        probs = (np.abs(self.state) ** 2).sum(axis=-1).reshape(-1)
        n = self.n_qubits
        return {format(i, f"0{n}b"): float(p) for i, p in enumerate(probs) if p > 1e-15}


def basis_tensor(bits: str, internal: int = 0) -> np.ndarray:
    n = len(bits)
    psi = np.zeros((2,) * n + (2,), dtype=complex)
    psi[tuple(int(b) for b in bits) + (internal,)] = 1
    return psi


def _apply_two(psi: np.ndarray, gate: np.ndarray, first: int, second: int) -> np.ndarray:
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, psi, axes=([2, 3], [first, second]))
    return np.moveaxis(out, [0, 1], [first, second])


def interpret(
    program: CommandProgram,
    qubit_init: str | np.ndarray,
    pointer_start: int = 0,
    g_gate: np.ndarray | None = None,
    pointer_qubit: int = 0,
) -> MachineState:
    """Run the program sequentially on the abstract machine.

    ``qubit_init`` is a bitstring or a full state tensor of shape
    (2,)*n + (2,). Real commands must keep the pointer on the register
    (MachineRangeError otherwise). Padding commands are all L and execute
    after the program; they only shift the computer's frame, so they are
    recorded in ``frame_shift`` without touching the register.
    """
    g = default_g_gate() if g_gate is None else np.asarray(g_gate, dtype=complex)
    if isinstance(qubit_init, str):
        psi = basis_tensor(qubit_init, pointer_qubit)
    else:
        psi = np.array(qubit_init, dtype=complex)
    n = psi.ndim - 1
    if not 0 <= pointer_start < n:
        raise MachineRangeError("pointer_start outside the register")
    pos = pointer_start
    internal = n
    for step, cmd in enumerate(program.real):
        if cmd == "L":
            pos -= 1
        elif cmd == "R":
            pos += 1
        if not 0 <= pos < n:
            raise MachineRangeError(f"command {step} ({cmd}) moves the pointer to {pos}, outside 0..{n - 1}")
        if cmd == "S":
            psi = np.swapaxes(psi, pos, internal).copy()
        elif cmd == "G":
            psi = _apply_two(psi, g, pos, internal)
    return MachineState(psi, pos - program.padding, program.padding)


def simulate_circuit(
    circuit: Circuit,
    qubit_init: str | np.ndarray,
    g_gate: np.ndarray | None = None,
    ancilla: int = 0,
) -> np.ndarray:
    """Direct gate-by-gate statevector simulation; returns shape (2,)*n + (2,) with the ancilla last."""
    g = default_g_gate() if g_gate is None else np.asarray(g_gate, dtype=complex)
    psi = basis_tensor(qubit_init, ancilla) if isinstance(qubit_init, str) else np.array(qubit_init, dtype=complex)
    anc = circuit.n_qubits
    for gate in circuit.gates:
        if gate.kind == "G":
            a, b = gate.qubits
            psi = _apply_two(psi, g, b, a)
        else:
            psi = _apply_two(psi, g, gate.qubits[0], anc)
    return psi


def program_length_bound(circuit: Circuit) -> int:
    """Upper bound on the compiled length: each gate walks at most 3 (n-1) sites plus 3 commands."""
    return len(circuit.gates) * (3 * max(circuit.n_qubits - 1, 0) + 3)


def bell_gate() -> np.ndarray:
    """CNOT(first -> second) after a Hadamard on the first qubit; takes |00> to a Bell pair."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    return cnot @ np.kron(h, np.eye(2))
