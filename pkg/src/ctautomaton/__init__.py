"""Continuous-time quantum automaton: chain model, exact evolution, transport analysis and a TI wrapper construction."""

from .chain import (
    SCHEMA_VERSION,
    ChainLayout,
    ChainState,
    Command,
    CommandProgram,
    default_layout,
    make_initial_state,
)
from .errors import (
    InvalidArgument,
    LayoutError,
    MachineRangeError,
    NumericalError,
    PreconditionError,
    ResourceLimitError,
)
from .evolver import CommandConfiguration, evolve, postselected_readout, success_predicate
from .hamiltonian import ChainHamiltonian, GateSet, build_chain_hamiltonian

__version__ = "0.1.0"

__all__ = [
    "SCHEMA_VERSION",
    "ChainHamiltonian",
    "ChainLayout",
    "ChainState",
    "Command",
    "CommandConfiguration",
    "CommandProgram",
    "GateSet",
    "InvalidArgument",
    "LayoutError",
    "MachineRangeError",
    "NumericalError",
    "PreconditionError",
    "ResourceLimitError",
    "build_chain_hamiltonian",
    "default_layout",
    "evolve",
    "make_initial_state",
    "postselected_readout",
    "success_predicate",
]
