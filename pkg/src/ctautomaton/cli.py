"""Command-line entry point.

Subcommands and their outputs:

``assemble``  circuit JSON -> layout JSON (chain-model schema).
``evolve``    layout JSON -> JSON {outcome, probability, success, readout, ...};
              ``--distribution`` writes CSV columns ``configuration,probability``.
``p1``        CSV columns ``N,M,k,t,p1,p,bound,p1_line,crossings,departures,departures_one_side``.
``appendix``  JSON breakdown of the three-region estimate.
``slater``    CSV columns ``configuration,probability`` (final sites joined by ``-``).
``qma verify``  JSON spectrum result.

Exit status: 0 on success, 1 on invalid input or usage, 2 on numerical failure.
The thread pool used for t-grids honours ``CTAUTOMATON_NUM_THREADS``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from . import assembler, evolver, qma, transport
from .chain import SCHEMA_VERSION, ChainLayout, default_layout, make_initial_state
from .errors import NumericalError
from .hamiltonian import GateSet, build_chain_hamiltonian

THREADS_ENV = "CTAUTOMATON_NUM_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's 2
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def num_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v) or v < 0:
        raise argparse.ArgumentTypeError("must be a finite non-negative number")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _gates(path: str | None) -> GateSet:
    return GateSet() if path is None else GateSet.load(path)


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------


def cmd_assemble(args) -> int:
    circuit = assembler.Circuit.load(args.circuit)
    program = assembler.compile_circuit(circuit, args.pointer_start)
    n_pad = args.pad
    if n_pad is None:
        n_pad = assembler.recommended_padding(program.l_p, circuit.n_qubits)
    program = assembler.pad(program, n_pad)
    qubits = args.qubits if args.qubits is not None else "0" * circuit.n_qubits
    if len(qubits) != circuit.n_qubits:
        raise assembler.InvalidArgument("--qubits length must equal the circuit's qubit count")
    layout = default_layout(
        program,
        qubits,
        left_margin=args.left_margin,
        right_margin=args.right_margin,
        pointer_offset=args.pointer_start,
        pointer_qubit=args.pointer_qubit,
    )
    _emit(layout.dumps() + "\n", args.out)
    return 0


def cmd_evolve(args) -> int:
    layout = ChainLayout.load(args.layout)
    gates = _gates(args.gate_file)
    H = build_chain_hamiltonian(layout.n_sites, layout.boundary, gates)
    state0 = make_initial_state(layout)
    sub, v0 = evolver.build_subspace(state0, H)
    amps = sub.evolve(v0, args.t, args.tol) if args.t > 0 else v0.copy()
    dist = sub.distribution(amps)

    if args.distribution is not None:
        rows = [(c.to_string(layout.n_sites), p) for c, p in sorted(dist.items())]
        _emit(_csv(("configuration", "probability"), rows), args.distribution)

    p_success = sum(p for c, p in dist.items() if evolver.success_predicate(c, layout))
    overlap = abs(np.vdot(v0, amps))
    result = {
        "schema_version": SCHEMA_VERSION,
        "t": args.t,
        "subspace_dim": sub.dim,
        "norm": float(np.linalg.norm(amps)),
        "initial_overlap": float(overlap),
        "success_probability": float(p_success),
        "outcome": None,
        "probability": None,
        "success": False,
        "readout": None,
        "attempts": 0,
    }
    if args.measure:
        rng = np.random.default_rng(args.seed)
        for attempt in range(args.repeat + 1):
            configs = sorted(dist)
            probs = np.array([dist[c] for c in configs])
            probs = probs / probs.sum()
            pick = min(int(np.searchsorted(np.cumsum(probs), rng.random(), side="right")), len(configs) - 1)
            config = configs[pick]
            ok = evolver.success_predicate(config, layout)
            result.update(
                outcome=config.to_string(layout.n_sites),
                probability=float(probs[pick]),
                success=ok,
                attempts=attempt + 1,
            )
            if ok:
                node = [u for u, c in enumerate(sub.configurations) if c == config]
                collapsed = sub.expand(amps, nodes=node)
                outcome = evolver.MeasurementOutcome(config, float(probs[pick]), collapsed.normalized())
                result["readout"] = evolver.readout(collapsed, layout, outcome)
                break
            if attempt == args.repeat:
                break
            # collapse onto the observed configuration and keep evolving
            keep = np.array([c == config for c in sub.configurations])
            amps = np.where(keep, amps, 0)
            amps = amps / np.linalg.norm(amps)
            amps = sub.evolve(amps, args.t, args.tol)
            dist = sub.distribution(amps)
    elif p_success > 0:
        nodes = [u for u, c in enumerate(sub.configurations) if evolver.success_predicate(c, layout)]
        _, result["readout"] = evolver.postselected_readout(sub.expand(amps, nodes=nodes), layout)
    if args.distribution is None or args.out is not None:
        _emit(_json(result), args.out)
    return 0


def _p1_row(N: int, M: int, k: int, t: float) -> list:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = transport.transport_report(N, M, t, k)
    r = rep.row()
    dep = N * rep.p
    return [N, M, k, float(t), r["p1"], r["p"], r["bound"], r["p1_line"], r["crossings"], dep, dep / 2]


P1_COLUMNS = ("N", "M", "k", "t", "p1", "p", "bound", "p1_line", "crossings", "departures", "departures_one_side")


def cmd_p1(args) -> int:
    N = args.N
    M = args.M if args.M is not None else 100 * N
    k = args.k if args.k is not None else max(1, math.isqrt(N))
    if args.t is not None:
        times = list(args.t)
    elif args.t_grid is not None:
        start, stop, num = args.t_grid
        times = list(np.linspace(start, stop, int(num)))
    else:
        times = [args.t_mult * N]
    if any(t < 0 or not math.isfinite(t) for t in times):
        raise assembler.InvalidArgument("times must be finite and non-negative")
    if 2 * transport.ring_crossings(M, max(times)) > 1:
        print(f"warning: the ring wraps (2t/M = {transport.ring_crossings(M, max(times)):.3g})", file=sys.stderr)
    with ThreadPoolExecutor(max_workers=num_threads()) as pool:
        rows = list(pool.map(lambda t: _p1_row(N, M, k, t), times))
    _emit(_csv(P1_COLUMNS, rows), args.csv)
    return 0


def cmd_appendix(args) -> int:
    N = args.N
    M = args.M if args.M is not None else 100 * N
    t = args.t if args.t is not None else args.t_mult * N
    est = transport.appendix_estimate(N, M, t, args.eps)
    data = {"schema_version": SCHEMA_VERSION, **est.to_dict()}
    _emit(_json(data), args.out)
    return 0


def cmd_slater(args) -> int:
    initial = args.initial
    if args.final is not None:
        p = transport.slater_config_probability(initial, args.final, args.t, args.M, args.boundary)
        rows = [("-".join(map(str, args.final)), p)]
    else:
        dist = transport.slater_distribution(initial, args.t, args.M, args.boundary)
        rows = [("-".join(map(str, c)), p) for c, p in sorted(dist.items())]
    _emit(_csv(("configuration", "probability"), rows), args.csv)
    return 0


def cmd_qma_verify(args) -> int:
    h = qma.InputHamiltonian.load(args.input)
    res = qma.verify_promise(h, zero_tol=args.zero_tol, method=args.method)
    _emit(_json(res.to_dict()), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctautomaton", description="Continuous-time quantum automaton toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="SUBCOMMAND")

    a = sub.add_parser("assemble", help="compile a circuit into a chain layout")
    a.add_argument("--circuit", required=True, help="circuit JSON {n_qubits, gates:[{g, q}]}")
    a.add_argument("--pad", type=int, default=None, help="padding L commands (default: (l_p+l_q)^2 - l_p)")
    a.add_argument("--qubits", default=None, help="initial qubit bitstring (default all 0)")
    a.add_argument("--pointer-start", type=int, default=0)
    a.add_argument("--pointer-qubit", type=int, choices=(0, 1), default=0)
    a.add_argument("--left-margin", type=int, default=None, help="empty sites left of the computer (default l_p)")
    a.add_argument("--right-margin", type=int, default=0)
    a.add_argument("--out", default=None, help="output layout JSON (default stdout)")
    a.set_defaults(func=cmd_assemble)

    e = sub.add_parser("evolve", help="evolve a layout and optionally measure the program register")
    e.add_argument("--layout", required=True)
    e.add_argument("--t", type=_nonneg_float, required=True)
    e.add_argument("--tol", type=float, default=1e-10)
    e.add_argument("--measure", action="store_true", help="sample a program-register measurement")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--repeat", type=int, default=0, help="on failure, evolve the collapsed state again up to this many times")
    e.add_argument("--gate-file", default=None, help="gate set JSON overriding the default g")
    e.add_argument("--distribution", default=None, metavar="CSV", help="write the configuration distribution as CSV")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_evolve)

    t = sub.add_parser("p1", help="block-retention probability p1 and the success bound")
    t.add_argument("--N", type=_positive_int, required=True)
    t.add_argument("--M", type=_positive_int, default=None, help="ring size (default 100 N)")
    g = t.add_mutually_exclusive_group()
    g.add_argument("--t", type=float, nargs="+", default=None, help="explicit times")
    g.add_argument("--t-mult", type=_nonneg_float, default=5000.0, help="t = t_mult * N (default 5000)")
    g.add_argument("--t-grid", type=float, nargs=3, metavar=("START", "STOP", "NUM"), default=None)
    t.add_argument("--k", type=_positive_int, default=None, help="departures needed (default isqrt(N))")
    t.add_argument("--csv", default=None, help="output CSV (default stdout)")
    t.set_defaults(func=cmd_p1)

    ap = sub.add_parser("appendix", help="three-region breakdown of the p1 estimate")
    ap.add_argument("--N", type=_positive_int, required=True)
    ap.add_argument("--eps", type=float, default=0.001)
    ap.add_argument("--M", type=_positive_int, default=None, help="ring size (default 100 N)")
    ap.add_argument("--t", type=_nonneg_float, default=None)
    ap.add_argument("--t-mult", type=_nonneg_float, default=5000.0)
    ap.add_argument("--out", default=None)
    ap.set_defaults(func=cmd_appendix)

    s = sub.add_parser("slater", help="free-fermion configuration probabilities")
    s.add_argument("--M", type=_positive_int, required=True)
    s.add_argument("--initial", type=_int_list, required=True, help="comma-separated initial sites")
    s.add_argument("--final", type=_int_list, default=None, help="single final configuration")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--boundary", choices=("periodic", "open"), default="periodic")
    s.add_argument("--csv", default=None)
    s.set_defaults(func=cmd_slater)

    q = sub.add_parser("qma", help="translationally invariant wrapper construction")
    qsub = q.add_subparsers(dest="qma_command", parser_class=_Parser, metavar="ACTION")
    qv = qsub.add_parser("verify", help="compare the ground energy with the promise bound")
    qv.add_argument("--input", required=True, help="JSON {n, d, bonds}")
    qv.add_argument("--zero-tol", type=float, default=1e-9)
    qv.add_argument("--method", choices=("dense", "iterative"), default="dense")
    qv.add_argument("--out", default=None)
    qv.set_defaults(func=cmd_qma_verify)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            print("ctautomaton: error: a subcommand is required", file=sys.stderr)
            return 1
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(json.dumps(exc.diagnostics, default=str), file=sys.stderr)
        return 2
    except (ValueError, IndexError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
