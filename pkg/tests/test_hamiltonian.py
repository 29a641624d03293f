import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctautomaton.chain import (
    REG_DIM,
    ChainState,
    Command,
    PointerState,
    command_count,
    encode_site,
    pointer_count,
    register_index,
)
from ctautomaton.errors import InvalidArgument
from ctautomaton.hamiltonian import (
    COMMANDS,
    GateSet,
    apply_diagonal,
    build_chain_hamiltonian,
    build_two_site_term,
    default_g_gate,
    gate_unitary,
)


def _pair(r1, r2):
    return r1 * REG_DIM + r2


def _basis36(r1, r2):
    v = np.zeros(36, dtype=complex)
    v[_pair(r1, r2)] = 1
    return v


@pytest.fixture(scope="module")
def gates():
    return GateSet()


@pytest.mark.parametrize("cmd", COMMANDS)
def test_unitary(cmd, gates):
    u = gates.u[cmd]
    assert np.max(np.abs(u.conj().T @ u - np.eye(36))) < 1e-12


def test_default_gate_unitary():
    g = default_g_gate()
    assert np.allclose(g.conj().T @ g, np.eye(4), atol=1e-14)


def test_non_unitary_gate_rejected():
    with pytest.raises(InvalidArgument):
        gate_unitary(Command.G, np.ones((4, 4)))


def test_r_moves_pointer(gates):
    v = gates.u[Command.R] @ _basis36(register_index(0, PointerState.P1), register_index(0, PointerState.ABSENT))
    assert np.allclose(v, _basis36(register_index(0, PointerState.ABSENT), register_index(0, PointerState.P1)))


def test_l_swaps_qubits(gates):
    v = gates.u[Command.L] @ _basis36(register_index(1, PointerState.P0), register_index(0, PointerState.ABSENT))
    assert np.allclose(v, _basis36(register_index(0, PointerState.P0), register_index(1, PointerState.ABSENT)))


def test_s_swaps_with_pointer_qubit(gates):
    v = gates.u[Command.S] @ _basis36(register_index(1, PointerState.P0), register_index(1, PointerState.ABSENT))
    assert np.allclose(v, _basis36(register_index(0, PointerState.P1), register_index(1, PointerState.ABSENT)))


@pytest.mark.parametrize("cmd", [Command.S, Command.G])
def test_identity_without_pointer(cmd, gates):
    u = gates.u[cmd]
    for q1 in range(2):
        for r2 in range(REG_DIM):
            v = _basis36(register_index(q1, PointerState.ABSENT), r2)
            assert np.allclose(u @ v, v)


@pytest.mark.parametrize("cmd", [Command.S, Command.G])
def test_acts_on_first_site_only(cmd, gates):
    u = gates.u[cmd].reshape(REG_DIM, REG_DIM, REG_DIM, REG_DIM)
    # u = A (x) 1 on the second site
    for r2 in range(REG_DIM):
        for r2p in range(REG_DIM):
            block = u[:, r2p, :, r2]
            expected = u[:, 0, :, 0] if r2 == r2p else 0
            assert np.allclose(block, expected)


def test_g_matches_gate(gates):
    g = default_g_gate()
    for q, b in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        v = gates.u[Command.G] @ _basis36(register_index(q, 1 + b), 0)
        for qo in range(2):
            for bo in range(2):
                assert v[_pair(register_index(qo, 1 + bo), 0)] == pytest.approx(g[qo * 2 + bo, q * 2 + b])


def test_two_site_term_hermitian(gates):
    m = build_two_site_term(gates)
    assert abs(m - m.conj().T).max() < 1e-12
    assert m.shape == (900, 900)


def test_term_structure(gates):
    m = build_two_site_term(gates).tocoo()
    for r, c in zip(m.row, m.col):
        pa, pb = (r // 30) % 5, (r % 30) % 5
        qa, qb = (c // 30) % 5, (c % 30) % 5
        # every nonzero swaps an (e, C) and a (C, e) program pair
        assert {(pa, pb), (qa, qb)} in ({(0, x), (x, 0)} for x in range(1, 5))
        assert pa == qb and pb == qa


def test_s_move_without_pointer(gates):
    m = build_two_site_term(gates)
    a, b = encode_site(0, 0, Command.E), encode_site(1, 0, Command.S)
    dst = encode_site(0, 0, Command.S) * 30 + encode_site(1, 0, Command.E)
    assert m[dst, a * 30 + b] == 1


def test_empty_pair_is_annihilated(gates):
    m = build_two_site_term(gates)
    for q1 in range(2):
        for p1 in range(3):
            for q2 in range(2):
                for p2 in range(3):
                    col = encode_site(q1, p1, 0) * 30 + encode_site(q2, p2, 0)
                    assert m[:, col].nnz == 0


def _random_state(rng, n_sites, n_terms=6):
    amps = {}
    for _ in range(n_terms):
        cfg = tuple(int(x) for x in rng.integers(0, 30, n_sites))
        amps[cfg] = complex(rng.normal(), rng.normal())
    return ChainState(n_sites, amps).normalized()


@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_chain_hermitian(boundary, rng):
    H = build_chain_hamiltonian(4, boundary)
    for _ in range(10):
        a, b = _random_state(rng, 4), _random_state(rng, 4)
        assert abs(a.vdot(H @ b) - np.conj(b.vdot(H @ a))) < 1e-10


def test_bonds():
    assert build_chain_hamiltonian(2, "open").bonds == [(0, 1)]
    assert build_chain_hamiltonian(3, "periodic").bonds == [(0, 1), (1, 2), (2, 0)]
    with pytest.raises(InvalidArgument):
        build_chain_hamiltonian(1)


@given(st.lists(st.integers(0, 29), min_size=2, max_size=6))
def test_basis_expectation_vanishes(config):
    H = build_chain_hamiltonian(len(config), "periodic")
    assert H.expectation(ChainState.basis(config)) == 0


def test_all_empty_program_gives_zero():
    cfg = (encode_site(1, 1, 0), encode_site(0, 0, 0), encode_site(1, 0, 0))
    assert len(build_chain_hamiltonian(3) @ ChainState.basis(cfg)) == 0


@pytest.mark.parametrize("counter", [command_count, pointer_count])
@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_conserved_counts(counter, boundary, rng):
    H = build_chain_hamiltonian(4, boundary)
    for _ in range(10):
        s = _random_state(rng, 4)
        lhs = apply_diagonal(H @ s, counter)
        rhs = H @ apply_diagonal(s, counter)
        assert lhs.max_abs_diff(rhs) < 1e-10


def test_gate_set_json_round_trip(tmp_path):
    g = GateSet(np.kron(np.eye(2), [[0, 1], [1, 0]]))
    path = tmp_path / "g.json"
    path.write_text(json.dumps(g.to_dict()))
    assert np.array_equal(GateSet.load(path).g_gate, g.g_gate)


def test_gate_set_bad_file():
    with pytest.raises(InvalidArgument):
        GateSet.from_dict({"g_gate": [[1, 2]]})
