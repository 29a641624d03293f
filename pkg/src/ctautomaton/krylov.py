"""Lanczos-based exponential action and extremal eigenvalues for Hermitian operators.

Both routines only need a ``matvec`` callable, so they work equally for
scipy sparse matrices and matrix-free operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import NumericalError

Matvec = Callable[[np.ndarray], np.ndarray]


def _lanczos(matvec: Matvec, v0: np.ndarray, m: int):
    """m-step Lanczos with full reorthogonalization.

    Returns (V, alpha, beta) where ``beta[k]`` couples V[k] and V[k+1];
    ``beta[-1]`` is the residual coupling out of the Krylov space.
    """
    n = v0.shape[0]
    m = max(1, min(m, n))
    V = np.zeros((m, n), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[0] = v0 / np.linalg.norm(v0)
    k_used = m
    for k in range(m):
        w = matvec(V[k])
        alpha[k] = np.vdot(V[k], w).real
        w = w - alpha[k] * V[k]
        if k > 0:
            w = w - beta[k - 1] * V[k - 1]
        # two passes of classical Gram-Schmidt keep the basis orthonormal
        for _ in range(2):
            w = w - V[: k + 1].T @ (V[: k + 1].conj() @ w)
        b = np.linalg.norm(w)
        beta[k] = b
        if k + 1 < m:
            if b < 1e-14:
                k_used = k + 1
                break
            V[k + 1] = w / b
    return V[:k_used], alpha[:k_used], beta[:k_used]


def expm_krylov(
    matvec: Matvec,
    v: np.ndarray,
    t: float,
    tol: float = 1e-10,
    m: int = 30,
    min_step: float = 1e-8,
) -> np.ndarray:
    """exp(-i t A) v for Hermitian A, by restarted Lanczos with adaptive step halving.

    Each step of length ``tau`` is accepted when the standard a-posteriori
    error estimate ``beta_m |[exp(-i tau T)]_{m,1}|`` is below
    ``tol * tau / t``; otherwise the step is halved.
    """
    v = np.asarray(v, dtype=complex)
    if t == 0:
        return v.copy()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v.copy()
    sign = 1.0 if t > 0 else -1.0
    remaining = abs(t)
    tau = remaining
    w = v / nrm
    while remaining > 0:
        V, alpha, beta = _lanczos(matvec, w, m)
        k = len(alpha)
        T = np.diag(alpha) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        evals, evecs = np.linalg.eigh(T)
        tau = min(tau, remaining)
        while True:
            coeff = evecs @ (np.exp(-1j * sign * tau * evals) * evecs[0].conj())
            invariant = k < m or beta[-1] < 1e-14
            err = 0.0 if invariant else beta[-1] * abs(coeff[-1])
            if err <= tol * tau / abs(t) or invariant:
                break
            tau /= 2
            if tau < min_step * abs(t):
                raise NumericalError(
                    "Krylov exponential did not converge",
                    {"remaining_time": remaining, "step": tau, "error_estimate": err, "krylov_dim": k},
                )
        w = V.T @ coeff
        w /= np.linalg.norm(w)
        remaining -= tau
        if remaining < 1e-15 * abs(t):
            remaining = 0.0
        # try to grow the step again after a successful one
        tau *= 2
    return nrm * w


def expm_dense(H: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    evals, evecs = np.linalg.eigh(H)
    return evecs @ (np.exp(-1j * t * evals) * (evecs.conj().T @ v))


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    residual: float
    restarts: int


def lanczos_min_eig(
    matvec: Matvec,
    n: int,
    tol: float = 1e-9,
    m: int = 40,
    max_restarts: int = 200,
    v0: np.ndarray | None = None,
    seed: int = 0,
) -> EigenResult:
    """Smallest eigenpair of a Hermitian operator by explicitly restarted Lanczos."""
    if v0 is None:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = np.asarray(v0, dtype=complex)
    x /= np.linalg.norm(x)
    res = np.inf
    theta = np.nan
    for restart in range(max_restarts + 1):
        V, alpha, beta = _lanczos(matvec, x, m)
        k = len(alpha)
        if k == 1:
            evals, evecs = np.array([alpha[0]]), np.ones((1, 1))
        else:
            evals, evecs = sla.eigh_tridiagonal(alpha, beta[: k - 1])
        theta = float(evals[0])
        x = V.T @ evecs[:, 0]
        x /= np.linalg.norm(x)
        res = float(np.linalg.norm(matvec(x) - theta * x))
        if res <= tol * max(1.0, abs(theta)):
            return EigenResult(theta, x, res, restart)
    raise NumericalError(
        "Lanczos eigensolver did not converge",
        {"eigenvalue": theta, "residual": res, "restarts": max_restarts},
    )
