import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctautomaton.chain import (
    SITE_DIM,
    ChainLayout,
    ChainState,
    Command,
    CommandProgram,
    PointerState,
    command_count,
    decode_site,
    default_layout,
    encode_site,
    format_config,
    make_initial_state,
    pointer_count,
)
from ctautomaton.errors import InvalidArgument, LayoutError


def test_encode_origin():
    assert encode_site(0, PointerState.ABSENT, Command.E) == 0


def test_encode_is_bijection():
    images = [encode_site(q, p, c) for q, p, c in itertools.product(range(2), range(3), range(5))]
    assert sorted(images) == list(range(SITE_DIM))
    for q, p, c in itertools.product(range(2), range(3), range(5)):
        assert tuple(decode_site(encode_site(q, p, c))) == (q, p, c)


def test_round_trip_example():
    s = decode_site(encode_site(1, PointerState.P1, Command.G))
    assert s == (1, PointerState.P1, Command.G)


@pytest.mark.parametrize("args", [(2, 0, 0), (0, 3, 0), (0, 0, 5), (-1, 0, 0)])
def test_encode_rejects_out_of_range(args):
    with pytest.raises(InvalidArgument):
        encode_site(*args)


def test_decode_rejects_out_of_range():
    with pytest.raises(InvalidArgument):
        decode_site(30)


def test_program_rejects_unknown_command():
    with pytest.raises(InvalidArgument):
        CommandProgram("LX")


def test_program_padding():
    p = CommandProgram("SRG", 2)
    assert p.l_p == 3 and len(p) == 5 and p.text == "SRGLL"


def test_empty_program_state():
    layout = ChainLayout(n_sites=4, qc_window=(1, 2), qubits="00")
    state = make_initial_state(layout)
    (config,) = state
    assert state.norm() == pytest.approx(1.0)
    assert command_count(config) == 0
    assert pointer_count(config) == 1


def test_seven_qubit_layout():
    # seven-qubit computer, pointer on its leftmost site, program to the right
    layout = ChainLayout(
        n_sites=16, qc_window=(2, 8), program=CommandProgram("RRSG"), qubits="0110100"
    )
    state = make_initial_state(layout)
    assert len(state) == 1
    (config,) = state
    rows = format_config(config).splitlines()
    assert rows[0] == "0001101000000000"
    assert rows[1] == "..0............."
    assert rows[2] == "eeeeeeeeeRRSGeee"
    assert pointer_count(config) == 1


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_sites=6, qc_window=(1, 3), program=CommandProgram("RR"), program_start=3),
        dict(n_sites=5, qc_window=(1, 2), program=CommandProgram("RRR")),
        dict(n_sites=5, qc_window=(1, 2), pointer_site=3),
        dict(n_sites=5, qc_window=(3, 6)),
        dict(n_sites=5, qc_window=(1, 2), qubits="012"),
        dict(n_sites=5, qc_window=(1, 2), boundary="twisted"),
    ],
)
def test_layout_errors(kwargs):
    with pytest.raises(LayoutError):
        ChainLayout(**kwargs)


def test_layout_json_round_trip(tmp_path):
    layout = default_layout(CommandProgram("SRGLS", 3), "01", left_margin=2)
    path = tmp_path / "l.json"
    path.write_text(layout.dumps())
    assert ChainLayout.load(path) == layout
    data = json.loads(layout.dumps())
    assert data["schema_version"] == 1
    assert data["qc_window"] == [2, 3]


def test_missing_field():
    with pytest.raises(LayoutError):
        ChainLayout.from_dict({"qc_window": [0, 1]})


@given(
    program=st.text(alphabet="LRSG", max_size=5),
    qubits=st.text(alphabet="01", min_size=1, max_size=4),
    left=st.integers(0, 3),
    pad=st.integers(0, 3),
    offset=st.data(),
)
def test_initial_state_invariants(program, qubits, left, pad, offset):
    off = offset.draw(st.integers(0, len(qubits) - 1))
    layout = default_layout(CommandProgram(program, pad), qubits, left_margin=left, right_margin=1, pointer_offset=off)
    state = make_initial_state(layout)
    assert len(state) == 1
    (config,), amp = zip(*state.items())
    assert amp[0] == 1
    assert pointer_count(config) == 1
    assert command_count(config) == len(program) + pad
    sites = [decode_site(s) for s in config]
    lo, hi = layout.qc_window
    for i, s in enumerate(sites):
        if not lo <= i <= hi:
            assert s.qubit == 0
        if i not in layout.command_sites:
            assert s.program is Command.E


def test_state_arithmetic():
    a = ChainState(2, {(0, 1): 1.0})
    b = ChainState(2, {(0, 1): 1j, (1, 0): 2.0})
    assert (a + b).get((0, 1)) == 1 + 1j
    assert a.vdot(b) == 1j
    assert (b - b).max_abs_diff(ChainState(2)) == 0
    assert b.normalized().norm() == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        ChainState(2).normalized()
