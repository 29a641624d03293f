"""Exact time evolution of the automaton on its command-configuration subspace.

Starting from a state whose program register holds a fixed configuration,
every term of H moves one command into a neighbouring empty site while
applying U^C (left move) or U^C^dag (right move) to the qubit/pointer
registers. The reachable states are therefore labelled by command
configurations, and the register contents of each label are fixed by
replaying the moves. On an open chain this labelling is one-to-one. On a
ring, commands can wind around and return to the same configuration with
different registers; :class:`InvariantSubspace` detects this and keeps such
winding sectors as separate basis vectors (or merges them with the right
phase when the registers agree up to one).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .chain import (
    REG_DIM,
    ChainLayout,
    ChainState,
    Command,
    join_site,
    make_initial_state,
    program_part,
    register_part,
)
from .errors import InvalidArgument, NumericalError, PreconditionError, ResourceLimitError
from .hamiltonian import ChainHamiltonian, GateSet
from .krylov import expm_dense, expm_krylov

DEFAULT_CAP = 500_000
DENSE_THRESHOLD = 2048

Registers = dict  # tuple of per-site register indices -> amplitude


@dataclass(frozen=True, order=True)
class CommandConfiguration:
    """Sites of all non-empty program registers, left to right, with their commands."""

    positions: tuple[tuple[int, Command], ...]

    @classmethod
    def from_program(cls, program: Iterable[int]) -> "CommandConfiguration":
        return cls(tuple((i, Command(p)) for i, p in enumerate(program) if p != Command.E))

    @classmethod
    def from_config(cls, config: tuple[int, ...]) -> "CommandConfiguration":
        return cls.from_program(program_part(config))

    @classmethod
    def from_string(cls, text: str) -> "CommandConfiguration":
        """``"eeRSe"`` style description, one character per site."""
        return cls.from_program(0 if ch in "e." else Command.from_char(ch) for ch in text)

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.positions)

    @property
    def tags(self) -> tuple[Command, ...]:
        return tuple(c for _, c in self.positions)

    def __len__(self) -> int:
        return len(self.positions)

    def program_registers(self, n_sites: int) -> tuple[int, ...]:
        prog = [0] * n_sites
        for s, c in self.positions:
            prog[s] = int(c)
        return tuple(prog)

    def to_string(self, n_sites: int) -> str:
        return "".join("e" if p == 0 else Command(p).name for p in self.program_registers(n_sites))


@dataclass
class MeasurementOutcome:
    configuration: CommandConfiguration
    probability: float
    collapsed: ChainState


# ---------------------------------------------------------------------------
# Elementary moves
# ---------------------------------------------------------------------------


def _can_move(pos: list[int] | tuple[int, ...], j: int, step: int, n_sites: int, periodic: bool) -> bool:
    k = len(pos)
    target = pos[j] + step
    if not periodic:
        if not 0 <= target < n_sites:
            return False
        nb = j + step
        return not (0 <= nb < k and pos[nb] == target)
    if k == 1:
        return n_sites > 1
    if step < 0:
        blocker = pos[j - 1] if j > 0 else pos[-1] - n_sites
    else:
        blocker = pos[j + 1] if j < k - 1 else pos[0] + n_sites
    return blocker != target


def _apply_pair(regs: Mapping, cols, i: int, j: int) -> Registers:
    out: Registers = {}
    for key, amp in regs.items():
        for r, val in cols[key[i] * REG_DIM + key[j]]:
            a, b = divmod(r, REG_DIM)
            new = list(key)
            new[i] = a
            new[j] = b
            new = tuple(new)
            out[new] = out.get(new, 0j) + amp * val
    return out


def _move_registers(regs, gates: GateSet, tag: Command, site: int, step: int, n_sites: int) -> Registers:
    """Registers after moving command ``tag`` from ``site`` one step (-1 left, +1 right)."""
    if step < 0:
        i = (site - 1) % n_sites
        cols = gates.columns[tag]
    else:
        i = site % n_sites
        cols = gates.columns_dag[tag]
    return _apply_pair(regs, cols, i, (i + 1) % n_sites)


def _overlap(a: Mapping, b: Mapping) -> complex:
    if len(a) > len(b):
        return _overlap(b, a).conjugate()
    return sum(v.conjugate() * b.get(k, 0j) for k, v in a.items())


def _wrapped_key(pos, tags, n_sites: int) -> tuple:
    return tuple(sorted(((p % n_sites, int(c)) for p, c in zip(pos, tags))))


# ---------------------------------------------------------------------------
# Subspaces
# ---------------------------------------------------------------------------


class InvariantSubspace:
    """Reachable states from one configuration, with the hopping matrix between them.

    With ``registers=None`` only command configurations are tracked (this is
    the bare configuration graph). With registers, each basis vector is
    ``|configuration> (x) |registers>`` and ``hopping`` is the matrix of H in
    that orthonormal basis.
    """

    def __init__(
        self,
        n_sites: int,
        boundary: str,
        root: CommandConfiguration,
        registers: Mapping | None = None,
        gates: GateSet | None = None,
        cap: int = DEFAULT_CAP,
        check: bool | None = None,
    ):
        if boundary not in ("open", "periodic"):
            raise InvalidArgument(f"unknown boundary {boundary!r}")
        self.n_sites = n_sites
        self.boundary = boundary
        self.periodic = boundary == "periodic"
        self.tags = root.tags
        self.gates = gates if gates is not None else GateSet()
        self.track = registers is not None
        # on open chains the configuration fixes the state; verifying it is optional
        self.check = self.periodic if check is None else check
        self.lifted: list[tuple[int, ...]] = []
        self.configurations: list[CommandConfiguration] = []
        self.registers: list[Registers] = []
        self._by_key: dict[tuple, list[int]] = {}
        rows: list[int] = []
        cols: list[int] = []
        vals: list[complex] = []

        self._add(root.sites, dict(registers) if self.track else None, cap)
        queue = deque([0])
        k = len(self.tags)
        while queue:
            u = queue.popleft()
            pos = self.lifted[u]
            for j in range(k):
                for step in (-1, 1):
                    if not _can_move(pos, j, step, n_sites, self.periodic):
                        continue
                    new = list(pos)
                    new[j] += step
                    new = tuple(new)
                    key = _wrapped_key(new, self.tags, n_sites)
                    known = self._by_key.get(key)
                    if not self.track or (known and not self.check):
                        if known:
                            v, phase = known[0], 1.0
                        else:
                            regs = None
                            if self.track:
                                regs = _move_registers(self.registers[u], self.gates, self.tags[j], pos[j], step, n_sites)
                            v, phase = self._add(new, regs, cap), 1.0
                            queue.append(v)
                    else:
                        regs = _move_registers(self.registers[u], self.gates, self.tags[j], pos[j], step, n_sites)
                        v, phase = self._match(known or [], regs)
                        if v is None:
                            v, phase = self._add(new, regs, cap), 1.0
                            queue.append(v)
                    rows.append(v)
                    cols.append(u)
                    vals.append(phase)
        dim = len(self.lifted)
        self.hopping = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
        self.hopping.sum_duplicates()
        self.index = {c: i for i, c in enumerate(self.configurations)} if not self.has_sectors else None

    def _add(self, pos, regs, cap: int) -> int:
        if len(self.lifted) >= cap:
            raise ResourceLimitError(f"invariant subspace exceeds cap of {cap} states")
        n = len(self.lifted)
        sites = [p % self.n_sites for p in pos]
        order = sorted(range(len(pos)), key=lambda j: sites[j])
        self.lifted.append(tuple(pos))
        self.configurations.append(CommandConfiguration(tuple((sites[j], self.tags[j]) for j in order)))
        self.registers.append(regs)
        self._by_key.setdefault(_wrapped_key(pos, self.tags, self.n_sites), []).append(n)
        return n

    def _match(self, candidates: list[int], regs: Registers):
        for v in candidates:
            ov = _overlap(self.registers[v], regs)
            if abs(abs(ov) - 1.0) < 1e-9:
                return v, ov
            if abs(ov) > 1e-9:
                raise NumericalError(
                    "winding sectors with partially overlapping registers; "
                    "use evolve_full for this instance",
                    {"overlap": abs(ov)},
                )
        return None, None

    @property
    def dim(self) -> int:
        return len(self.lifted)

    @property
    def has_sectors(self) -> bool:
        """True when some configuration appears with more than one register state."""
        return len(set(self.configurations)) != len(self.configurations)

    def node_of(self, config: CommandConfiguration) -> int:
        if self.index is None:
            raise InvalidArgument("configuration labels are not unique in this subspace")
        return self.index[config]

    def evolve(self, v0: np.ndarray, t: float, tol: float = 1e-10, dense_threshold: int = DENSE_THRESHOLD) -> np.ndarray:
        if self.dim <= dense_threshold:
            return expm_dense(self.hopping.toarray(), v0, t)
        return expm_krylov(self.hopping.dot, v0, t, tol=tol)

    def distribution(self, amps: np.ndarray) -> dict[CommandConfiguration, float]:
        out: dict[CommandConfiguration, float] = {}
        for c, a in zip(self.configurations, amps):
            out[c] = out.get(c, 0.0) + float(abs(a) ** 2)
        return out

    def expand(self, amps: np.ndarray, nodes: Iterable[int] | None = None, atol: float = 0.0) -> ChainState:
        if not self.track:
            raise InvalidArgument("subspace was built without registers")
        out: dict[tuple[int, ...], complex] = {}
        for u in range(self.dim) if nodes is None else nodes:
            a = amps[u]
            if abs(a) <= atol:
                continue
            prog = self.configurations[u].program_registers(self.n_sites)
            for regs, r in self.registers[u].items():
                key = tuple(join_site(x, p) for x, p in zip(regs, prog))
                out[key] = out.get(key, 0j) + a * r
        return ChainState(self.n_sites, out)


@dataclass
class SubspaceBasis:
    configurations: list[CommandConfiguration]
    index: dict[CommandConfiguration, int]
    adjacency: sp.csr_matrix

    def __len__(self) -> int:
        return len(self.configurations)


def enumerate_subspace(
    initial: CommandConfiguration, n_sites: int, boundary: str = "open", cap: int = DEFAULT_CAP
) -> SubspaceBasis:
    """All command configurations reachable by single moves into empty sites."""
    sub = InvariantSubspace(n_sites, boundary, initial, registers=None, cap=cap)
    return SubspaceBasis(sub.configurations, {c: i for i, c in enumerate(sub.configurations)}, sub.hopping.real.tocsr())


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------


def split_by_configuration(state: ChainState) -> dict[CommandConfiguration, Registers]:
    parts: dict[CommandConfiguration, Registers] = {}
    for config, amp in state.items():
        c = CommandConfiguration.from_config(config)
        regs = parts.setdefault(c, {})
        key = register_part(config)
        regs[key] = regs.get(key, 0j) + amp
    return parts


def build_subspace(
    state: ChainState, H: ChainHamiltonian, cap: int = DEFAULT_CAP, check: bool | None = None
) -> tuple[InvariantSubspace, np.ndarray]:
    """Subspace containing ``state`` and its coordinate vector.

    Raises InvalidArgument if the state is not contained in the subspace
    grown from its first component (use :func:`evolve` for such states).
    """
    parts = split_by_configuration(state)
    if not parts:
        raise InvalidArgument("empty state")
    root_cfg, root_regs = next(iter(parts.items()))
    nrm = np.sqrt(sum(abs(v) ** 2 for v in root_regs.values()))
    sub = InvariantSubspace(
        H.n_sites, H.boundary, root_cfg, {k: v / nrm for k, v in root_regs.items()}, H.gates, cap, check
    )
    v0 = np.zeros(sub.dim, dtype=complex)
    for cfg, regs in parts.items():
        placed = False
        for u in sub._by_key.get(_wrapped_key(cfg.sites, cfg.tags, sub.n_sites), []):
            ov = _overlap(sub.registers[u], regs)
            resid = sum(abs(regs.get(k, 0j) - ov * sub.registers[u].get(k, 0j)) ** 2 for k in set(regs) | set(sub.registers[u]))
            if resid < 1e-20 + 1e-20 * abs(ov) ** 2:
                v0[u] += ov
                placed = True
                break
        if not placed:
            raise InvalidArgument("state is not contained in a single invariant subspace")
    return sub, v0


def evolve(
    state: ChainState,
    H: ChainHamiltonian,
    t: float,
    tol: float = 1e-10,
    cap: int = DEFAULT_CAP,
    dense_threshold: int = DENSE_THRESHOLD,
) -> ChainState:
    """exp(-iHt)|state>, computed on the invariant subspace(s) of the state."""
    if t < 0:
        raise InvalidArgument("t must be non-negative")
    if t == 0:
        return state.copy()
    try:
        sub, v0 = build_subspace(state, H, cap)
        return sub.expand(sub.evolve(v0, t, tol, dense_threshold))
    except InvalidArgument:
        pass
    # general superposition: evolve each configuration component on its own
    out = ChainState(state.n_sites)
    for cfg, regs in split_by_configuration(state).items():
        prog = cfg.program_registers(state.n_sites)
        part = ChainState(state.n_sites, {tuple(join_site(x, p) for x, p in zip(k, prog)): v for k, v in regs.items()})
        sub, v0 = build_subspace(part, H, cap)
        out = out + sub.expand(sub.evolve(v0, t, tol, dense_threshold))
    return out


def reachable_basis(state: ChainState, H: ChainHamiltonian, cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    """Product-basis configurations reachable from the support of ``state`` under H."""
    seen = {c: None for c in state}
    queue = deque(seen)
    while queue:
        c = queue.popleft()
        for nxt in H.apply_basis(c):
            if nxt not in seen:
                if len(seen) >= cap:
                    raise ResourceLimitError(f"reachable basis exceeds cap of {cap}")
                seen[nxt] = None
                queue.append(nxt)
    return list(seen)


def evolve_full(state: ChainState, H: ChainHamiltonian, t: float, cap: int = 200_000) -> ChainState:
    """Reference evolution in the full product basis (no configuration labelling).

    Builds the sparse matrix of H on every basis state reachable from the
    support of ``state`` and applies scipy's ``expm_multiply``.
    """
    basis = reachable_basis(state, H, cap)
    index = {c: i for i, c in enumerate(basis)}
    rows, cols, vals = [], [], []
    for j, c in enumerate(basis):
        for nxt, val in H.apply_basis(c).items():
            rows.append(index[nxt])
            cols.append(j)
            vals.append(val)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(len(basis),) * 2, dtype=complex)
    v0 = np.array([state.get(c) for c in basis], dtype=complex)
    vt = spla.expm_multiply(-1j * t * mat, v0)
    return ChainState(state.n_sites, dict(zip(basis, vt)))


# ---------------------------------------------------------------------------
# Measurement, success and readout
# ---------------------------------------------------------------------------


def configuration_distribution(state: ChainState) -> dict[CommandConfiguration, float]:
    """Exact marginal distribution of the program registers."""
    out: dict[CommandConfiguration, float] = {}
    for config, amp in state.items():
        c = CommandConfiguration.from_config(config)
        out[c] = out.get(c, 0.0) + abs(amp) ** 2
    return out


def project_configuration(state: ChainState, configuration: CommandConfiguration) -> ChainState:
    prog = configuration.program_registers(state.n_sites)
    return ChainState(state.n_sites, {k: v for k, v in state.items() if program_part(k) == prog})


def measure_program(state: ChainState, seed: int | None = None, rng: np.random.Generator | None = None) -> MeasurementOutcome:
    """Sample a program-register measurement and collapse the state."""
    dist = configuration_distribution(state)
    configs = sorted(dist)
    probs = np.array([dist[c] for c in configs])
    probs = probs / probs.sum()
    if rng is None:
        rng = np.random.default_rng(seed)
    pick = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    pick = min(pick, len(configs) - 1)
    config = configs[pick]
    collapsed = project_configuration(state, config).normalized()
    return MeasurementOutcome(config, float(probs[pick]), collapsed)


def success_predicate(config: CommandConfiguration, layout: ChainLayout) -> bool:
    """All real-program commands sit strictly left of the quantum computer."""
    lo = layout.qc_window[0]
    sites = sorted(config.sites)
    return all(s < lo for s in sites[: layout.l_p])


def success_probability(state: ChainState, layout: ChainLayout) -> float:
    return sum(p for c, p in configuration_distribution(state).items() if success_predicate(c, layout))


def _interleaving(
    start: list[int], target: list[int], n_sites: int, periodic: bool, rng: np.random.Generator | None
) -> Iterator[tuple[int, int, int]]:
    """Yield elementary moves (command index, site before move, step) from start to target."""
    pos = list(start)
    while pos != target:
        movable = []
        for j, (p, q) in enumerate(zip(pos, target)):
            if p != q:
                step = 1 if q > p else -1
                if _can_move(pos, j, step, n_sites, periodic):
                    movable.append((j, step))
        if not movable:
            raise InvalidArgument("final configuration is not reachable")
        j, step = movable[int(rng.integers(len(movable)))] if rng is not None else movable[0]
        yield j, pos[j], step
        pos[j] += step


def _lift(initial: CommandConfiguration, final: CommandConfiguration, n_sites: int, periodic: bool) -> list[int]:
    if len(initial) != len(final):
        raise InvalidArgument("configurations hold different numbers of commands")
    if not periodic:
        if initial.tags != final.tags:
            raise InvalidArgument("final configuration does not preserve the command order")
        if any(not 0 <= s < n_sites for s in final.sites):
            raise InvalidArgument("final configuration leaves the chain")
        return list(final.sites)
    # ring: pick the label rotation and winding with the smallest total displacement
    k = len(final)
    best = None
    for rot in range(k):
        if tuple(final.tags[(j + rot) % k] for j in range(k)) != initial.tags:
            continue
        base = [final.sites[(j + rot) % k] + (n_sites if j + rot >= k else 0) for j in range(k)]
        for shift in (-2 * n_sites, -n_sites, 0, n_sites):
            cand = [s + shift for s in base]
            cost = sum(abs(a - b) for a, b in zip(cand, initial.sites))
            if best is None or cost < best[0]:
                best = (cost, cand)
    if best is None:
        raise InvalidArgument("final configuration does not preserve the command order")
    return best[1]


def replay(
    initial: CommandConfiguration,
    final: CommandConfiguration,
    initial_registers: Mapping | tuple[int, ...],
    gates: GateSet | None = None,
    n_sites: int | None = None,
    boundary: str = "open",
    rng: np.random.Generator | None = None,
) -> Registers:
    """Register contents after moving the commands from ``initial`` to ``final``.

    Moves are applied one site at a time in some interleaving (random when
    ``rng`` is given); the result does not depend on the interleaving. On a
    ring the winding is ambiguous and the lifting with the smallest total
    displacement is used.
    """
    gates = gates if gates is not None else GateSet()
    regs = {tuple(initial_registers): 1.0 + 0j} if isinstance(initial_registers, tuple) else dict(initial_registers)
    if n_sites is None:
        n_sites = len(next(iter(regs)))
    periodic = boundary == "periodic"
    target = _lift(initial, final, n_sites, periodic)
    for j, site, step in _interleaving(list(initial.sites), target, n_sites, periodic, rng):
        regs = _move_registers(regs, gates, initial.tags[j], site, step, n_sites)
    return regs


def qubit_home_sites(layout: ChainLayout, final: CommandConfiguration) -> list[int]:
    """Chain sites holding each logical qubit's register once ``final`` is reached.

    Only L moves permute qubit registers, so tracking labels through them is enough.
    """
    initial = CommandConfiguration.from_config(next(iter(make_initial_state(layout))))
    label = list(range(layout.n_sites))
    periodic = layout.boundary == "periodic"
    target = _lift(initial, final, layout.n_sites, periodic)
    for j, site, step in _interleaving(list(initial.sites), target, layout.n_sites, periodic, None):
        if initial.tags[j] is Command.L:
            i = (site - 1) % layout.n_sites if step < 0 else site % layout.n_sites
            k = (i + 1) % layout.n_sites
            label[i], label[k] = label[k], label[i]
    where = {lab: s for s, lab in enumerate(label)}
    lo = layout.qc_window[0]
    return [where[lo + q] for q in range(layout.l_q)]


def _qubit_marginal(state: ChainState, sites: list[int], out: dict[str, float], weight: float = 1.0) -> None:
    for config, amp in state.items():
        bits = "".join(str(config[s] // 15) for s in sites)
        out[bits] = out.get(bits, 0.0) + weight * abs(amp) ** 2


def readout(state: ChainState, layout: ChainLayout, outcome: MeasurementOutcome) -> dict[str, float]:
    """Distribution of the logical qubits for a successful program measurement."""
    if not success_predicate(outcome.configuration, layout):
        raise PreconditionError("readout requires a configuration with the whole program executed")
    collapsed = project_configuration(state, outcome.configuration)
    nrm = collapsed.norm()
    if nrm == 0:
        collapsed = outcome.collapsed
    else:
        collapsed = collapsed.scaled(1 / nrm)
    out: dict[str, float] = {}
    _qubit_marginal(collapsed, qubit_home_sites(layout, outcome.configuration), out)
    return dict(sorted(out.items()))


def postselected_readout(state: ChainState, layout: ChainLayout) -> tuple[float, dict[str, float]]:
    """(success probability, qubit distribution conditioned on success)."""
    groups: dict[CommandConfiguration, ChainState] = {}
    for config, amp in state.items():
        c = CommandConfiguration.from_config(config)
        if success_predicate(c, layout):
            groups.setdefault(c, ChainState(state.n_sites)).amplitudes[config] = amp
    p_success = sum(g.norm() ** 2 for g in groups.values())
    if p_success == 0:
        raise PreconditionError("success has zero probability in this state")
    out: dict[str, float] = {}
    for c, g in groups.items():
        _qubit_marginal(g, qubit_home_sites(layout, c), out, 1.0 / p_success)
    return p_success, dict(sorted(out.items()))


def register_state(state: ChainState) -> Registers:
    """Register contents of a state with a single command configuration."""
    parts = split_by_configuration(state)
    if len(parts) != 1:
        raise InvalidArgument("state spans several command configurations")
    return next(iter(parts.values()))


def root_configuration(state: ChainState) -> CommandConfiguration:
    return CommandConfiguration.from_config(next(iter(state)))


__all__ = [
    "CommandConfiguration",
    "InvariantSubspace",
    "MeasurementOutcome",
    "SubspaceBasis",
    "build_subspace",
    "configuration_distribution",
    "enumerate_subspace",
    "evolve",
    "evolve_full",
    "measure_program",
    "postselected_readout",
    "qubit_home_sites",
    "readout",
    "replay",
    "success_predicate",
    "success_probability",
]
