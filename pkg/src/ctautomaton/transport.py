"""Free-fermion transport of the command block on a ring.

Commands only hop into empty neighbouring sites and never overtake each
other, so their occupation pattern evolves as non-interacting fermions with
the single-particle Hamiltonian ``sum_k |k+1><k| + h.c.``. On an ``M``-site
ring the modes have energies ``eps(q) = 2 cos(2 pi q / M)`` and a particle
started at ``y`` has amplitude ``K_t(x - y)`` at ``x``, where

    K_t(d) = (1/M) sum_{q=1}^{M} exp(i 2 pi q d / M + i eps(q) t).

Sites are 0-based here; the initially filled block is ``0 .. N-1``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.special import jv

from . import kernels
from .errors import InvalidArgument


def dispersion(M: int) -> np.ndarray:
    """eps(q) for q = 1..M (index q-1)."""
    q = np.arange(1, M + 1)
    return 2.0 * np.cos(2.0 * np.pi * q / M)


def _tables(M: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    r = np.arange(M)
    w = np.exp(2j * np.pi * r / M)
    z = np.exp(1j * dispersion(M) * t)
    return w, z


def propagator(d, t: float, M: int, backend: str | None = None):
    """K_t(d); ``d`` may be an int or an integer array."""
    if M < 1:
        raise InvalidArgument("M must be positive")
    w, z = _tables(M, t)
    scalar = np.ndim(d) == 0
    out = kernels.get_backend(backend).propagator_sum(np.atleast_1d(np.asarray(d, dtype=np.int64)), w, z)
    return complex(out[0]) if scalar else out


def propagator_line(d, t: float):
    """Infinite-line limit: K_t(d) = i^|d| J_|d|(2t)."""
    d = np.abs(np.asarray(d))
    return (1j**d) * jv(d, 2.0 * t)


def single_particle_propagator(M: int, t: float, boundary: str = "periodic") -> np.ndarray:
    """Matrix U[x, y] = <x| exp(+i A t) |y> for the hopping adjacency A."""
    if boundary == "periodic":
        K = propagator(np.arange(M), t, M)
        x = np.arange(M)
        return K[(x[:, None] - x[None, :]) % M]
    if boundary == "open":
        A = np.diag(np.ones(M - 1), 1) + np.diag(np.ones(M - 1), -1)
        evals, evecs = np.linalg.eigh(A)
        return (evecs * np.exp(1j * evals * t)) @ evecs.T
    raise InvalidArgument(f"unknown boundary {boundary!r}")


# ---------------------------------------------------------------------------
# p1: probability to remain in the starting block
# ---------------------------------------------------------------------------


def _check_block(N: int, M: int) -> None:
    if N < 1 or M < 1:
        raise InvalidArgument("N and M must be positive")
    if N > M:
        raise InvalidArgument("block longer than the ring")


def p1(N: int, M: int, t: float, backend: str | None = None) -> float:
    """Probability that particle 1 is still inside the block of N sites at time t.

    Uses sum_{x,y} |K(x-y)|^2 = sum_d (N - |d|) |K(d)|^2, cost O(N M).
    """
    _check_block(N, M)
    d = np.arange(-(N - 1), N)
    K = propagator(d, t, M, backend)
    return float(np.sum((N - np.abs(d)) * np.abs(K) ** 2) / N)


def p1_literal(N: int, M: int, t: float, backend: str | None = None) -> float:
    """Same quantity as :func:`p1`, summing |<phi_{y,t}|x>|^2 over every (x, y) pair."""
    _check_block(N, M)
    w, z = _tables(M, t)
    return float(kernels.get_backend(backend).p1_double_sum(N, w, z))


def p1_cosine_form(N: int, M: int, t: float) -> float:
    """(1/(N M^2)) sum_{x,y} sum_{q,q'} cos[(q-q')(x-y) 2pi/M + (eps(q)-eps(q'))t]. O(N^2 M^2)."""
    _check_block(N, M)
    eps = dispersion(M)
    q = np.arange(1, M + 1)
    dq = q[:, None] - q[None, :]
    dE = (eps[:, None] - eps[None, :]) * t
    total = 0.0
    for dxy in range(-(N - 1), N):
        total += (N - abs(dxy)) * np.cos(dq * dxy * 2 * np.pi / M + dE).sum()
    return float(total / (N * M * M))


def p1_line(N: int, t: float) -> float:
    """Infinite-line value (1/N) sum_d (N - |d|) J_d(2t)^2."""
    d = np.arange(-(N - 1), N)
    return float(np.sum((N - np.abs(d)) * jv(np.abs(d), 2.0 * t) ** 2) / N)


def ring_crossings(M: int, t: float) -> float:
    """How many times the fastest mode (group velocity 2) has crossed the ring."""
    return 2.0 * t / M


def success_bound(p1_value, N: int, k: int):
    """Worst-case lower bound (1 - k + N p)/(1 - k + N) on the success probability.

    Assumes the only outcomes are k-1 departures (failure) or all N
    departures, with the mean fixed at N p.
    """
    if not 1 <= k <= N:
        raise InvalidArgument(f"need 1 <= k <= N, got k={k}, N={N}")
    p = 1 - p1_value
    return (1 - k + N * p) / (1 - k + N)


@dataclass
class TransportReport:
    N: int
    M: int
    t: float
    k: int
    p1: float
    p: float
    p_s_bound: float
    p1_line: float
    crossings: float

    def row(self) -> dict:
        return {
            "t": self.t,
            "p1": self.p1,
            "p": self.p,
            "bound": self.p_s_bound,
            "p1_line": self.p1_line,
            "crossings": self.crossings,
        }


def transport_report(N: int, M: int, t: float, k: int | None = None, warn: bool = True) -> TransportReport:
    if k is None:
        k = max(1, math.isqrt(N))
    value = p1(N, M, t)
    crossings = ring_crossings(M, t)
    if warn and crossings > 0.5:
        warnings.warn(
            f"the ring wraps (2t/M = {crossings:.3g}); p1 is the exact finite-ring value",
            RuntimeWarning,
            stacklevel=2,
        )
    return TransportReport(N, M, t, k, value, 1 - value, success_bound(value, N, k), p1_line(N, t), crossings)


# ---------------------------------------------------------------------------
# Densities and departures
# ---------------------------------------------------------------------------


def one_body_density(N: int, M: int, t: float) -> np.ndarray:
    """<n_x> on the ring for the block 0..N-1 evolved to time t."""
    _check_block(N, M)
    K = propagator(np.arange(M), t, M)
    x = np.arange(M)
    return np.array([np.sum(np.abs(K[(xx - np.arange(N)) % M]) ** 2) for xx in x])


@dataclass
class Departures:
    expected: float  # N (1 - p1), both directions
    from_density: float
    left: float
    right: float


def expected_departures(N: int, M: int, t: float) -> Departures:
    """Mean number of particles outside the starting block, with a density cross-check.

    ``left``/``right`` split the outside region at its midpoint; by the
    reflection symmetry of the problem they agree up to the odd middle site.
    """
    expected = N * (1 - p1(N, M, t))
    rho = one_body_density(N, M, t)
    outside = np.arange(N, M)
    half = (M - N) // 2
    right = float(rho[outside[:half]].sum())
    left = float(rho[outside[len(outside) - half :]].sum())
    return Departures(expected, float(rho[outside].sum()), left, right)


# ---------------------------------------------------------------------------
# Slater determinants and brute-force hopping models
# ---------------------------------------------------------------------------


def _check_sites(sites, M: int) -> list[int]:
    sites = [int(s) for s in sites]
    if len(set(sites)) != len(sites):
        raise InvalidArgument("repeated sites")
    if any(not 0 <= s < M for s in sites):
        raise InvalidArgument("site outside the ring")
    return sites


def slater_config_probability(initial_sites, final_sites, t: float, M: int, boundary: str = "periodic", U=None) -> float:
    """|det K_t(final_j - initial_k)|^2."""
    initial_sites = _check_sites(initial_sites, M)
    final_sites = _check_sites(final_sites, M)
    if len(initial_sites) != len(final_sites):
        raise InvalidArgument("initial and final sets differ in size")
    if U is None:
        U = single_particle_propagator(M, t, boundary)
    A = U[np.ix_(sorted(final_sites), sorted(initial_sites))]
    return float(abs(np.linalg.det(A)) ** 2)


def slater_distribution(initial_sites, t: float, M: int, boundary: str = "periodic") -> dict[tuple[int, ...], float]:
    initial_sites = _check_sites(initial_sites, M)
    U = single_particle_propagator(M, t, boundary)
    return {
        c: slater_config_probability(initial_sites, c, t, M, boundary, U)
        for c in itertools.combinations(range(M), len(initial_sites))
    }


def hopping_hamiltonian(M: int, N: int, boundary: str = "periodic", statistics: str = "fermion"):
    """Dense N-particle hopping Hamiltonian on occupation configurations.

    ``statistics="fermion"`` puts the Jordan-Wigner sign (-1)^(N-1) on hops
    across the periodic bond; ``"hardcore"`` (the command model) uses +1.
    """
    if statistics not in ("fermion", "hardcore"):
        raise InvalidArgument(f"unknown statistics {statistics!r}")
    configs = list(itertools.combinations(range(M), N))
    index = {c: i for i, c in enumerate(configs)}
    H = np.zeros((len(configs), len(configs)))
    bonds = [(i, i + 1) for i in range(M - 1)]
    if boundary == "periodic" and M > 1:
        bonds.append((M - 1, 0))
    for c in configs:
        occ = set(c)
        for a, b in bonds:
            for src, dst in ((a, b), (b, a)):
                if src in occ and dst not in occ:
                    new = tuple(sorted(occ - {src} | {dst}))
                    sign = 1.0
                    if statistics == "fermion" and {a, b} == {M - 1, 0} and M > 2:
                        sign = (-1.0) ** (N - 1)
                    H[index[new], index[c]] += sign
    return configs, H


def evolve_hopping(initial_sites, t: float, M: int, boundary: str = "periodic", statistics: str = "fermion"):
    """Configuration probabilities from dense evolution of :func:`hopping_hamiltonian`."""
    initial = tuple(sorted(_check_sites(initial_sites, M)))
    configs, H = hopping_hamiltonian(M, len(initial), boundary, statistics)
    v0 = np.zeros(len(configs), dtype=complex)
    v0[configs.index(initial)] = 1
    vt = sla.expm(-1j * t * H) @ v0
    return {c: float(abs(a) ** 2) for c, a in zip(configs, vt)}


# ---------------------------------------------------------------------------
# Integral-approximation bound on p1
# ---------------------------------------------------------------------------


def g_weight(delta, N: int, M: int):
    delta = np.asarray(delta, dtype=float)
    return np.sin(N * np.pi * delta / M) ** 2 / delta**2


def f_exact(delta, M: int, t: float, backend: str | None = None):
    """2 sum_{q=1}^{M-delta} cos((eps(q) - eps(q+delta)) t)."""
    et = dispersion(M) * t
    return kernels.get_backend(backend).f_cosine_sum(np.atleast_1d(np.asarray(delta, dtype=np.int64)), et)


def f_bessel(delta, M: int, t: float):
    """Large-M form 2 M J0(4 t delta pi / M)."""
    return 2.0 * M * jv(0, 4.0 * t * np.asarray(delta, dtype=float) * np.pi / M)


@dataclass
class AppendixEstimate:
    N: int
    M: int
    t: float
    eps: float
    delta_lo: float
    delta_hi: float
    term1: float
    term2: float
    term3: float
    term1_bound: float
    term2_bound: float
    total: float
    bound: float
    bessel_terms: tuple[float, float, float]
    bessel_max_abs_diff: float
    p1_exact: float
    f: np.ndarray = field(repr=False)
    f_bessel: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "M": self.M,
            "t": self.t,
            "eps": self.eps,
            "delta_lo": self.delta_lo,
            "delta_hi": self.delta_hi,
            "term1": self.term1,
            "term2": self.term2,
            "term3": self.term3,
            "term1_bound": self.term1_bound,
            "term2_bound": self.term2_bound,
            "total": self.total,
            "bound": self.bound,
            "bessel_terms": list(self.bessel_terms),
            "bessel_max_abs_diff": self.bessel_max_abs_diff,
            "p1_exact": self.p1_exact,
        }


def appendix_estimate(N: int, M: int, t: float, eps: float = 0.001, backend: str | None = None) -> AppendixEstimate:
    """Three-way split of (1/(N pi^2)) sum_delta g(delta) f(delta).

    Region 1 is delta <= eps M / N, region 2 up to 2 M / N, region 3 the
    rest. ``term1_bound`` is 2 eps; ``term2_bound`` is the region-2 weight
    times max |f|/(2M) there; the third term is evaluated exactly.
    ``bessel_max_abs_diff`` is max |f - f_bessel| / (2M) over regions 1-2.
    """
    _check_block(N, M)
    if not 0 < eps < 1:
        raise InvalidArgument("eps must lie in (0, 1)")
    delta = np.arange(1, M + 1)
    g = g_weight(delta, N, M)
    f = f_exact(delta, M, t, backend)
    fb = f_bessel(delta, M, t)
    lo, hi = eps * M / N, 2.0 * M / N
    r1 = delta <= lo
    r2 = (delta > lo) & (delta <= hi)
    r3 = delta > hi
    pref = 1.0 / (N * np.pi**2)
    terms = tuple(float(pref * np.sum(g[r] * f[r])) for r in (r1, r2, r3))
    bterms = tuple(float(pref * np.sum(g[r] * fb[r])) for r in (r1, r2, r3))
    weight2 = pref * np.sum(g[r2]) * 2 * M
    fmax = float(np.max(np.abs(f[r2])) / (2 * M)) if r2.any() else 0.0
    term2_bound = float(weight2 * fmax)
    near = r1 | r2
    diff = float(np.max(np.abs(f[near] - fb[near])) / (2 * M)) if near.any() else 0.0
    return AppendixEstimate(
        N=N,
        M=M,
        t=t,
        eps=eps,
        delta_lo=lo,
        delta_hi=hi,
        term1=terms[0],
        term2=terms[1],
        term3=terms[2],
        term1_bound=2 * eps,
        term2_bound=term2_bound,
        total=float(sum(terms)),
        bound=2 * eps + term2_bound + terms[2],
        bessel_terms=bterms,
        bessel_max_abs_diff=diff,
        p1_exact=p1(N, M, t, backend),
        f=f,
        f_bessel=fb,
        g=g,
    )
