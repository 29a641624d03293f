"""Command unitaries, the two-site term and the translationally invariant chain Hamiltonian."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .chain import (
    COMMANDS,
    N_PROGRAM,
    REG_DIM,
    SCHEMA_VERSION,
    SITE_DIM,
    ChainState,
    Command,
    PointerState,
)
from .errors import InvalidArgument

PAIR_REG_DIM = REG_DIM * REG_DIM  # 36
PAIR_DIM = SITE_DIM * SITE_DIM  # 900


def default_g_gate() -> np.ndarray:
    """Controlled-phase(pi/2) after a pi/8 y-rotation of the control (first) qubit."""
    c, s = np.cos(np.pi / 16), np.sin(np.pi / 16)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    cphase = np.diag([1, 1, 1, 1j]).astype(complex)
    return cphase @ np.kron(ry, np.eye(2))


def check_unitary(u: np.ndarray, atol: float = 1e-12) -> None:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {u.shape}")
    err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if err > atol:
        raise InvalidArgument(f"matrix is not unitary (max |U^dag U - 1| = {err:.2e})")


def _reg(q: int, p: int) -> int:
    return q * 3 + p


def gate_unitary(cmd: Command, g_gate: np.ndarray | None = None) -> np.ndarray:
    """U^C on the 36-dim (qubit x pointer) space of sites (i, i+1).

    Two-site register index is ``reg_i * 6 + reg_{i+1}`` with
    ``reg = qubit*3 + pointer``.
    """
    cmd = Command(cmd)
    if cmd is Command.E:
        raise InvalidArgument("the empty command has no unitary")
    if g_gate is None:
        g_gate = default_g_gate()
    g_gate = np.asarray(g_gate, dtype=complex)
    if g_gate.shape != (4, 4):
        raise InvalidArgument("g_gate must be a 4x4 matrix")
    check_unitary(g_gate)

    u = np.zeros((PAIR_REG_DIM, PAIR_REG_DIM), dtype=complex)
    for q1 in range(2):
        for p1 in range(3):
            for q2 in range(2):
                for p2 in range(3):
                    col = _reg(q1, p1) * REG_DIM + _reg(q2, p2)
                    second = _reg(q2, p2)
                    if cmd is Command.L:
                        u[_reg(q2, p1) * REG_DIM + _reg(q1, p2), col] = 1
                    elif cmd is Command.R:
                        u[_reg(q1, p2) * REG_DIM + _reg(q2, p1), col] = 1
                    elif p1 == PointerState.ABSENT:
                        u[col, col] = 1
                    elif cmd is Command.S:
                        b = p1 - 1
                        u[_reg(b, 1 + q1) * REG_DIM + second, col] = 1
                    else:  # G acts on (qubit_i, pointer-internal qubit)
                        b = p1 - 1
                        for out in range(4):
                            amp = g_gate[out, q1 * 2 + b]
                            if amp != 0:
                                qo, bo = divmod(out, 2)
                                u[_reg(qo, 1 + bo) * REG_DIM + second, col] += amp
    return u


@dataclass
class GateSet:
    g_gate: np.ndarray = field(default_factory=default_g_gate)

    def __post_init__(self):
        self.g_gate = np.asarray(self.g_gate, dtype=complex)
        self.u = {cmd: gate_unitary(cmd, self.g_gate) for cmd in COMMANDS}
        # column -> [(row, value)] for sparse application on register dicts
        self.columns = {cmd: _columns(u) for cmd, u in self.u.items()}
        self.columns_dag = {cmd: _columns(u.conj().T) for cmd, u in self.u.items()}

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "g_gate": [[[z.real, z.imag] for z in row] for row in self.g_gate],
        }

    @classmethod
    def from_dict(cls, data) -> "GateSet":
        try:
            m = np.array([[complex(re, im) for re, im in row] for row in data["g_gate"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgument(f"malformed gate file: {exc}") from None
        if m.shape != (4, 4):
            raise InvalidArgument("g_gate must be 4x4")
        return cls(m)

    @classmethod
    def load(cls, path: str | Path) -> "GateSet":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _columns(u: np.ndarray) -> list[list[tuple[int, complex]]]:
    return [[(int(r), complex(u[r, c])) for r in np.flatnonzero(np.abs(u[:, c]) > 0)] for c in range(u.shape[1])]


def build_two_site_term(gates: GateSet) -> sp.csr_matrix:
    """900x900 Hermitian term on the full (30-level)^2 space of a bond.

    Pair index is ``site_i * 30 + site_{i+1}``. The (e, C) -> (C, e) block
    moves C one site left applying U^C; its conjugate moves it right with U^C^dag.
    """
    rows, cols, vals = [], [], []
    for cmd in COMMANDS:
        u = gates.u[cmd]
        for c in range(PAIR_REG_DIM):
            ra, rb = divmod(c, REG_DIM)
            src = (ra * N_PROGRAM + Command.E) * SITE_DIM + rb * N_PROGRAM + cmd
            for r in np.flatnonzero(np.abs(u[:, c]) > 0):
                oa, ob = divmod(int(r), REG_DIM)
                dst = (oa * N_PROGRAM + cmd) * SITE_DIM + ob * N_PROGRAM + Command.E
                rows.append(dst)
                cols.append(src)
                vals.append(u[r, c])
    left = sp.csr_matrix((vals, (rows, cols)), shape=(PAIR_DIM, PAIR_DIM), dtype=complex)
    return (left + left.conj().T).tocsr()


class ChainHamiltonian:
    """H = sum over bonds of the same two-site term, applied matrix-free to sparse states."""

    def __init__(self, n_sites: int, boundary: str = "open", gates: GateSet | None = None):
        if n_sites < 2:
            raise InvalidArgument("n_sites must be at least 2")
        if boundary not in ("open", "periodic"):
            raise InvalidArgument(f"unknown boundary {boundary!r}")
        self.n_sites = n_sites
        self.boundary = boundary
        self.gates = gates if gates is not None else GateSet()
        self.term = build_two_site_term(self.gates)
        n_bonds = n_sites if boundary == "periodic" else n_sites - 1
        self.bonds = [(i, (i + 1) % n_sites) for i in range(n_bonds)]
        csc = self.term.tocsc()
        self._cols: list[list[tuple[int, complex]]] = []
        for c in range(PAIR_DIM):
            lo, hi = csc.indptr[c], csc.indptr[c + 1]
            self._cols.append([(int(r), complex(v)) for r, v in zip(csc.indices[lo:hi], csc.data[lo:hi])])

    def apply_basis(self, config: tuple[int, ...]) -> dict[tuple[int, ...], complex]:
        out: dict[tuple[int, ...], complex] = {}
        for i, j in self.bonds:
            for dst, val in self._cols[config[i] * SITE_DIM + config[j]]:
                a, b = divmod(dst, SITE_DIM)
                new = list(config)
                new[i], new[j] = a, b
                key = tuple(new)
                out[key] = out.get(key, 0j) + val
        return out

    def apply(self, state: ChainState) -> ChainState:
        out: dict[tuple[int, ...], complex] = {}
        for config, amp in state.items():
            for key, val in self.apply_basis(config).items():
                out[key] = out.get(key, 0j) + amp * val
        return ChainState(state.n_sites, out)

    def expectation(self, state: ChainState) -> complex:
        return state.vdot(self.apply(state))

    def __matmul__(self, state: ChainState) -> ChainState:
        return self.apply(state)


def build_chain_hamiltonian(n_sites: int, boundary: str = "open", gates: GateSet | None = None) -> ChainHamiltonian:
    return ChainHamiltonian(n_sites, boundary, gates)


def apply_diagonal(state: ChainState, fn) -> ChainState:
    """Multiply every basis component by ``fn(config)``; used for counting operators."""
    return ChainState(state.n_sites, {k: v * fn(k) for k, v in state.items()})
