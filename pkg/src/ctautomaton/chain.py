"""Site encoding, chain layouts and chain states for the 30-level automaton.

Every site carries three registers: a qubit (2 levels), a pointer register
(3 levels: no pointer, or a pointer whose internal qubit is 0 or 1) and a
program register (5 levels: empty or one of the commands L, R, S, G).
The site index is ``qubit*15 + pointer*5 + program``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple

import numpy as np

from .errors import InvalidArgument, LayoutError

SCHEMA_VERSION = 1

SITE_DIM = 30
REG_DIM = 6  # qubit (2) x pointer (3)
N_PROGRAM = 5


class Command(IntEnum):
    E = 0
    L = 1
    R = 2
    S = 3
    G = 4

    @classmethod
    def from_char(cls, ch: str) -> "Command":
        try:
            return cls[ch.upper()]
        except KeyError:
            raise InvalidArgument(f"unknown command {ch!r}") from None


COMMANDS = (Command.L, Command.R, Command.S, Command.G)


class PointerState(IntEnum):
    ABSENT = 0
    P0 = 1
    P1 = 2

    @property
    def present(self) -> bool:
        return self is not PointerState.ABSENT

    @property
    def internal(self) -> int:
        if self is PointerState.ABSENT:
            raise InvalidArgument("no pointer present")
        return int(self) - 1


class SiteBasis(NamedTuple):
    qubit: int
    pointer: PointerState
    program: Command


def encode_site(qubit: int, pointer: int, program: int) -> int:
    if qubit not in (0, 1):
        raise InvalidArgument(f"qubit must be 0 or 1, got {qubit!r}")
    if not 0 <= int(pointer) < 3:
        raise InvalidArgument(f"pointer must be in 0..2, got {pointer!r}")
    if not 0 <= int(program) < N_PROGRAM:
        raise InvalidArgument(f"program must be in 0..4, got {program!r}")
    return qubit * 15 + int(pointer) * 5 + int(program)


def decode_site(index: int) -> SiteBasis:
    if not 0 <= index < SITE_DIM:
        raise InvalidArgument(f"site index must be in 0..29, got {index!r}")
    qubit, rest = divmod(index, 15)
    pointer, program = divmod(rest, 5)
    return SiteBasis(qubit, PointerState(pointer), Command(program))


def register_index(qubit: int, pointer: int) -> int:
    """Index of the (qubit, pointer) pair inside the 6-dim register factor."""
    return qubit * 3 + int(pointer)


def split_site(index: int) -> tuple[int, int]:
    """Site index -> (register index, program index)."""
    return divmod(index, N_PROGRAM)


def join_site(register: int, program: int) -> int:
    return register * N_PROGRAM + program


# ---------------------------------------------------------------------------
# Programs and layouts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CommandProgram:
    """A command string plus ``padding`` trailing L commands (irrelevant code)."""

    real: str = ""
    padding: int = 0

    def __post_init__(self):
        real = self.real.upper().replace(" ", "")
        for ch in real:
            if ch not in "LRSG":
                raise InvalidArgument(f"program may only contain L, R, S, G; got {ch!r}")
        if self.padding < 0:
            raise InvalidArgument("padding must be non-negative")
        object.__setattr__(self, "real", real)

    @property
    def l_p(self) -> int:
        return len(self.real)

    @property
    def text(self) -> str:
        return self.real + "L" * self.padding

    @property
    def commands(self) -> list[Command]:
        return [Command.from_char(c) for c in self.text]

    def __len__(self) -> int:
        return self.l_p + self.padding


@dataclass(frozen=True)
class ChainLayout:
    """Placement of computer, pointer and program on a finite chain.

    ``qc_window`` is an inclusive site interval ``(lo, hi)``. The real program
    occupies ``program_start .. program_start + l_p - 1`` and the padding
    follows immediately to its right.
    """

    n_sites: int
    qc_window: tuple[int, int]
    pointer_site: int | None = None
    program: CommandProgram = field(default_factory=CommandProgram)
    qubits: str = ""
    program_start: int | None = None
    boundary: str = "open"
    pointer_qubit: int = 0

    def __post_init__(self):
        lo, hi = (int(v) for v in self.qc_window)
        object.__setattr__(self, "qc_window", (lo, hi))
        if self.pointer_site is None:
            object.__setattr__(self, "pointer_site", lo)
        if self.program_start is None:
            object.__setattr__(self, "program_start", hi + 1)
        if not self.qubits:
            object.__setattr__(self, "qubits", "0" * (hi - lo + 1))
        self.validate()

    @property
    def l_q(self) -> int:
        return self.qc_window[1] - self.qc_window[0] + 1

    @property
    def l_p(self) -> int:
        return self.program.l_p

    @property
    def padding_length(self) -> int:
        return self.program.padding

    @property
    def program_interval(self) -> tuple[int, int]:
        return self.program_start, self.program_start + self.l_p - 1

    @property
    def command_sites(self) -> list[int]:
        return list(range(self.program_start, self.program_start + len(self.program)))

    def validate(self) -> None:
        lo, hi = self.qc_window
        if self.boundary not in ("open", "periodic"):
            raise LayoutError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        if self.n_sites < 2:
            raise LayoutError("a chain needs at least two sites")
        if not 0 <= lo <= hi < self.n_sites:
            raise LayoutError(f"qc_window {self.qc_window} outside chain of {self.n_sites} sites")
        if len(self.qubits) != self.l_q or any(c not in "01" for c in self.qubits):
            raise LayoutError(f"qubits must be a bitstring of length {self.l_q}")
        if not lo <= self.pointer_site <= hi:
            raise LayoutError("pointer must start inside the quantum computer")
        if self.pointer_qubit not in (0, 1):
            raise LayoutError("pointer_qubit must be 0 or 1")
        if len(self.program) and self.program_start <= hi:
            raise LayoutError("program interval overlaps the quantum computer")
        if self.program_start + len(self.program) > self.n_sites:
            raise LayoutError("program does not fit on the chain")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n_sites": self.n_sites,
            "boundary": self.boundary,
            "qc_window": list(self.qc_window),
            "pointer_site": self.pointer_site,
            "pointer_qubit": self.pointer_qubit,
            "program_start": self.program_start,
            "program": self.program.real,
            "padding": self.program.padding,
            "qubits": self.qubits,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ChainLayout":
        try:
            return cls(
                n_sites=int(data["n_sites"]),
                qc_window=tuple(data["qc_window"]),
                pointer_site=data.get("pointer_site"),
                program=CommandProgram(data.get("program", ""), int(data.get("padding", 0))),
                qubits=data.get("qubits", ""),
                program_start=data.get("program_start"),
                boundary=data.get("boundary", "open"),
                pointer_qubit=int(data.get("pointer_qubit", 0)),
            )
        except KeyError as exc:
            raise LayoutError(f"layout is missing field {exc.args[0]!r}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "ChainLayout":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def default_layout(
    program: CommandProgram,
    qubits: str,
    left_margin: int | None = None,
    right_margin: int = 0,
    pointer_offset: int = 0,
    pointer_qubit: int = 0,
) -> ChainLayout:
    """Open chain: margin | computer | program + padding | margin.

    The left margin defaults to ``l_p`` sites, the minimum that lets every
    real command end up left of the computer.
    """
    if left_margin is None:
        left_margin = program.l_p
    l_q = len(qubits)
    lo = left_margin
    hi = lo + l_q - 1
    return ChainLayout(
        n_sites=left_margin + l_q + len(program) + right_margin,
        qc_window=(lo, hi),
        pointer_site=lo + pointer_offset,
        program=program,
        qubits=qubits,
        pointer_qubit=pointer_qubit,
    )


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

Config = tuple  # tuple of site indices, one per chain site


class ChainState:
    """Sparse amplitude map over chain basis configurations."""

    __slots__ = ("n_sites", "amplitudes")

    def __init__(self, n_sites: int, amplitudes: Mapping[Config, complex] | None = None):
        self.n_sites = n_sites
        self.amplitudes: dict[Config, complex] = dict(amplitudes or {})

    @classmethod
    def basis(cls, config: Iterable[int]) -> "ChainState":
        config = tuple(int(s) for s in config)
        return cls(len(config), {config: 1.0 + 0j})

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __iter__(self) -> Iterator[Config]:
        return iter(self.amplitudes)

    def items(self):
        return self.amplitudes.items()

    def get(self, config: Config) -> complex:
        return self.amplitudes.get(config, 0j)

    def copy(self) -> "ChainState":
        return ChainState(self.n_sites, self.amplitudes)

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values())))

    def normalized(self) -> "ChainState":
        nrm = self.norm()
        if nrm == 0:
            raise InvalidArgument("cannot normalize the zero state")
        return self.scaled(1.0 / nrm)

    def scaled(self, factor: complex) -> "ChainState":
        return ChainState(self.n_sites, {k: v * factor for k, v in self.amplitudes.items()})

    def pruned(self, atol: float = 0.0) -> "ChainState":
        return ChainState(self.n_sites, {k: v for k, v in self.amplitudes.items() if abs(v) > atol})

    def vdot(self, other: "ChainState") -> complex:
        """<self|other>."""
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        total = 0j
        for k, v in small.amplitudes.items():
            w = big.amplitudes.get(k)
            if w is not None:
                total += v.conjugate() * w if small is self else w.conjugate() * v
        return total

    def __add__(self, other: "ChainState") -> "ChainState":
        out = dict(self.amplitudes)
        for k, v in other.amplitudes.items():
            out[k] = out.get(k, 0j) + v
        return ChainState(self.n_sites, out)

    def __sub__(self, other: "ChainState") -> "ChainState":
        return self + other.scaled(-1.0)

    def max_abs_diff(self, other: "ChainState") -> float:
        keys = set(self.amplitudes) | set(other.amplitudes)
        return max((abs(self.get(k) - other.get(k)) for k in keys), default=0.0)

    def __repr__(self) -> str:
        return f"ChainState(n_sites={self.n_sites}, support={len(self)})"


def program_part(config: Config) -> tuple[int, ...]:
    return tuple(s % N_PROGRAM for s in config)


def register_part(config: Config) -> tuple[int, ...]:
    return tuple(s // N_PROGRAM for s in config)


def pointer_count(config: Config) -> int:
    return sum(1 for s in config if (s // N_PROGRAM) % 3 != 0)


def command_count(config: Config) -> int:
    return sum(1 for s in config if s % N_PROGRAM != 0)


def make_initial_state(
    layout: ChainLayout,
    qubit_init: str | None = None,
    program: CommandProgram | None = None,
) -> ChainState:
    """Product basis state: computer, one pointer, program to the right."""
    if qubit_init is not None or program is not None:
        data = layout.to_dict()
        if qubit_init is not None:
            data["qubits"] = qubit_init
        if program is not None:
            data["program"] = program.real
            data["padding"] = program.padding
        layout = ChainLayout.from_dict(data)
    lo, _ = layout.qc_window
    qubit = [0] * layout.n_sites
    for k, ch in enumerate(layout.qubits):
        qubit[lo + k] = int(ch)
    pointer = [PointerState.ABSENT] * layout.n_sites
    pointer[layout.pointer_site] = PointerState(1 + layout.pointer_qubit)
    prog = [Command.E] * layout.n_sites
    for site, cmd in zip(layout.command_sites, layout.program.commands):
        prog[site] = cmd
    config = tuple(encode_site(q, p, c) for q, p, c in zip(qubit, pointer, prog))
    return ChainState.basis(config)


def format_config(config: Config) -> str:
    """Three text rows (qubit / pointer / program), one column per site."""
    sites = [decode_site(s) for s in config]
    rows = (
        "".join(str(s.qubit) for s in sites),
        "".join("." if s.pointer is PointerState.ABSENT else str(s.pointer.internal) for s in sites),
        "".join("e" if s.program is Command.E else s.program.name for s in sites),
    )
    return "\n".join(rows)
