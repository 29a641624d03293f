"""Translationally invariant wrapper H_n = H' + (1/n) sum_i |1><1|_i (x) h_n around a chain Hamiltonian h_n.

Every site gets one extra qubit. The physical chain is a ring of ``n + 1``
sites of dimension ``2d``; site ``i`` controls a copy of ``h_n`` placed on
the other ``n`` sites ``i+1, ..., i+n`` (mod n+1). Each control/bond pair is
a three-site term, and the term set is the same from every site.

Local basis on a site: ``extra_qubit * d + system_level``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chain import SCHEMA_VERSION
from .errors import InvalidArgument, ResourceLimitError
from .krylov import lanczos_min_eig

DENSE_CAP = 4096


def _is_hermitian(m: np.ndarray, atol: float = 1e-12) -> bool:
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= atol


@dataclass
class InputHamiltonian:
    """Nearest-neighbour chain Hamiltonian h_n: ``bonds[j]`` acts on sites (j, j+1)."""

    n: int
    d: int
    bonds: list[np.ndarray]

    def __post_init__(self):
        if self.n < 2:
            raise InvalidArgument("n must be at least 2")
        if self.d < 1:
            raise InvalidArgument("d must be positive")
        bonds = [np.asarray(b, dtype=complex) for b in self.bonds]
        if len(bonds) == 1 and self.n > 2:
            bonds = bonds * (self.n - 1)
        if len(bonds) != self.n - 1:
            raise InvalidArgument(f"expected {self.n - 1} bonds, got {len(bonds)}")
        for b in bonds:
            if b.shape != (self.d**2, self.d**2):
                raise InvalidArgument(f"bond has shape {b.shape}, expected {(self.d**2,) * 2}")
            if not _is_hermitian(b):
                raise InvalidArgument("bond is not Hermitian")
        self.bonds = bonds

    def matrix(self) -> np.ndarray:
        dim = self.d**self.n
        if dim > DENSE_CAP:
            raise ResourceLimitError(f"h_n has dimension {dim} > {DENSE_CAP}")
        out = np.zeros((dim, dim), dtype=complex)
        for j, b in enumerate(self.bonds):
            out += np.kron(np.kron(np.eye(self.d**j), b), np.eye(self.d ** (self.n - j - 2)))
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "d": self.d,
            "bonds": [[[[z.real, z.imag] for z in row] for row in b] for b in self.bonds],
        }

    @classmethod
    def from_dict(cls, data) -> "InputHamiltonian":
        try:
            bonds = [np.array([[complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in row] for row in b]) for b in data["bonds"]]
            return cls(int(data["n"]), int(data["d"]), bonds)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidArgument):
                raise
            raise InvalidArgument(f"malformed Hamiltonian input: {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> "InputHamiltonian":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def h_prime_bracket(bits) -> int:
    """1 - sum_k n_k + sum_{k' != k''} n_k' n_k'' (ordered pairs)."""
    w = int(sum(bits))
    return 1 - w + w * (w - 1)


def build_h_prime(n: int, n_qubits: int | None = None) -> np.ndarray:
    """Diagonal of H' on ``n_qubits`` extra qubits (default ``n``), prefactor 1/(n(n-1)).

    Index bit order: qubit 0 is the most significant bit.
    """
    if n < 2:
        raise InvalidArgument("n must be at least 2")
    n_qubits = n if n_qubits is None else n_qubits
    diag = np.array([h_prime_bracket(bits) for bits in itertools.product((0, 1), repeat=n_qubits)], dtype=float)
    return diag / (n * (n - 1))


def _apply_local(psi: np.ndarray, op: np.ndarray, sites: tuple[int, ...], n_sites: int, dim: int) -> np.ndarray:
    """Apply ``op`` (on ``len(sites)`` sites, in that order) to a vector or to the columns of a matrix."""
    k = len(sites)
    batch = psi.shape[1:]
    t = psi.reshape((dim,) * n_sites + batch)
    opt = op.reshape((dim,) * (2 * k))
    out = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), list(sites)))
    # tensordot puts the op's output axes first, then the untouched axes in order
    rest = [a for a in range(n_sites) if a not in sites]
    out = np.moveaxis(out, range(n_sites), list(sites) + rest)
    return out.reshape(psi.shape)


class TiQmaHamiltonian:
    """H_n on a ring of n+1 sites with local dimension 2d, applied matrix-free."""

    def __init__(self, h: InputHamiltonian):
        self.h = h
        self.n = h.n
        self.d = h.d
        self.n_sites = h.n + 1
        self.local_dim = 2 * h.d
        self.dim = self.local_dim**self.n_sites
        self.h_prime = build_h_prime(self.n, self.n_sites)
        d = self.d
        p1 = np.diag([0.0, 1.0])
        eye_d = np.eye(d)
        control = np.kron(p1, eye_d)
        self.controlled_terms: list[tuple[tuple[int, int, int], np.ndarray]] = []
        for i in range(self.n_sites):
            for j, bond in enumerate(h.bonds):
                a = (i + 1 + j) % self.n_sites
                b = (i + 2 + j) % self.n_sites
                pair = _embed_bond(bond, d)
                op = np.kron(control, pair) / self.n
                self.controlled_terms.append(((i, a, b), op))

    def _extra_bits(self) -> np.ndarray:
        # value of H' for each full basis index
        idx = np.arange(self.dim)
        digits = [(idx // self.local_dim ** (self.n_sites - 1 - s)) % self.local_dim for s in range(self.n_sites)]
        extra = [dg // self.d for dg in digits]
        code = np.zeros(self.dim, dtype=np.int64)
        for e in extra:
            code = code * 2 + e
        return self.h_prime[code]

    def apply(self, psi: np.ndarray) -> np.ndarray:
        if not hasattr(self, "_hp_diag"):
            self._hp_diag = self._extra_bits()
        diag = self._hp_diag if psi.ndim == 1 else self._hp_diag[:, None]
        out = diag * psi
        for sites, op in self.controlled_terms:
            out = out + _apply_local(psi, op, sites, self.n_sites, self.local_dim)
        return out

    def to_dense(self) -> np.ndarray:
        if self.dim > DENSE_CAP:
            raise ResourceLimitError(f"H_n has dimension {self.dim} > {DENSE_CAP}")
        return self.apply(np.eye(self.dim, dtype=complex))

    def max_term_support(self) -> int:
        return max(len(set(s)) for s, _ in self.controlled_terms)


def _embed_bond(bond: np.ndarray, d: int) -> np.ndarray:
    """Two-site operator on (2d)^2 acting as ``bond`` on the system levels only."""
    b = bond.reshape(d, d, d, d)  # (s_a', s_b', s_a, s_b)
    out = np.zeros((2, d, 2, d, 2, d, 2, d), dtype=complex)
    for ea in range(2):
        for eb in range(2):
            out[ea, :, eb, :, ea, :, eb, :] = b
    return out.reshape(4 * d * d, 4 * d * d)


def build_ti_qma(h: InputHamiltonian) -> TiQmaHamiltonian:
    return TiQmaHamiltonian(h)


def min_eigenvalue(H, method: str = "dense", tol: float = 1e-9, seed: int = 0) -> float:
    """Smallest eigenvalue of a Hermitian matrix or of an object with ``apply``/``dim``."""
    if method == "dense":
        mat = H.to_dense() if hasattr(H, "to_dense") else np.asarray(H)
        if mat.shape[0] > DENSE_CAP:
            raise ResourceLimitError(f"dimension {mat.shape[0]} exceeds dense cap {DENSE_CAP}")
        return float(np.linalg.eigvalsh(mat)[0])
    if method == "iterative":
        if hasattr(H, "apply"):
            matvec, n = H.apply, H.dim
        else:
            mat = H
            matvec, n = (lambda v: mat @ v), mat.shape[0]
        return lanczos_min_eig(matvec, n, tol=tol, seed=seed).value
    raise InvalidArgument(f"unknown method {method!r}")


@dataclass
class SpectrumResult:
    lambda_min: float
    e0: float
    gap_bound: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "lambda_min": self.lambda_min,
            "e0": self.e0,
            "gap_bound": self.gap_bound,
            "verdict": self.verdict,
        }


def promise_bound(lambda_min: float, n: int) -> float:
    return min(lambda_min / n, 1.0 / (n * n * (n - 1)))


def verify_promise(h: InputHamiltonian, zero_tol: float = 1e-9, method: str = "dense") -> SpectrumResult:
    """Compare the ground energy of H_n with the lower bound min(lambda_min/n, 1/(n^2(n-1)))."""
    lam = min_eigenvalue(h.matrix(), "dense")
    e0 = min_eigenvalue(build_ti_qma(h), method)
    bound = promise_bound(lam, h.n)
    if abs(e0) < zero_tol and abs(lam) < zero_tol:
        verdict = "zero-energy"
    elif e0 >= bound - zero_tol:
        verdict = "gapped-above-bound"
    else:
        verdict = "violation"
    return SpectrumResult(lam, e0, bound, verdict)
