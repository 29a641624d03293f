"""Pure numpy implementations of the transport kernels.

Same signatures as the compiled ``_kernels`` module; selected by
``ctautomaton.kernels`` when the extension is missing or disabled.

``w`` is the table exp(2*pi*i*r/M) for r = 0..M-1 and ``z`` is
exp(i*eps(q)*t) for q = 1..M (``z[q-1]``).
"""

import numpy as np

_CHUNK = 1 << 22


def propagator_sum(ds, w, z):
    """(1/M) sum_q w[(q*d) mod M] z[q] for every d in ``ds``."""
    ds = np.asarray(ds, dtype=np.int64)
    M = len(z)
    q = np.arange(1, M + 1, dtype=np.int64)
    out = np.empty(len(ds), dtype=complex)
    rows = max(1, _CHUNK // M)
    for lo in range(0, len(ds), rows):
        d = ds[lo : lo + rows] % M
        out[lo : lo + rows] = (w[(d[:, None] * q[None, :]) % M] * z[None, :]).sum(axis=1) / M
    return out


def f_cosine_sum(deltas, et):
    """2 * sum_{q=1}^{M-delta} cos(et[q] - et[q+delta]) with et[q-1] = eps(q) t."""
    deltas = np.asarray(deltas, dtype=np.int64)
    M = len(et)
    out = np.empty(len(deltas))
    for a, dl in enumerate(deltas):
        n = M - dl
        out[a] = 2.0 * np.cos(et[:n] - et[dl : dl + n]).sum() if n > 0 else 0.0
    return out


def p1_double_sum(N, w, z):
    """(1/N) sum_{x,y=1}^{N} |phi_{y,t}(x)|^2, each amplitude summed over q separately."""
    M = len(z)
    q = np.arange(1, M + 1, dtype=np.int64)
    total = 0.0
    for y in range(1, N + 1):
        x = np.arange(1, N + 1, dtype=np.int64)
        amp = (w[((x[:, None] - y) * q[None, :]) % M] * z[None, :]).sum(axis=1) / M
        total += float(np.sum(amp.real**2 + amp.imag**2))
    return total / N
