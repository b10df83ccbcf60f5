"""Gain recovery once the delays are known.

``b[n] = N(tau)^+ d[n]``, then ``a(w) = D(w, tau)^{-1} b(w)`` on the DTFT grid,
and for pilot-aided channel estimation ``alpha_k[n] = a_k[n] / s[n]``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .model import as_delays, vandermonde

__all__ = ["RecoveredChannel", "recover_b", "recover_a", "recover_channel_coeffs"]


@dataclass(frozen=True, eq=False)
class RecoveredChannel:
    """Estimated delays, gain sequences and (optionally) channel coefficients."""

    delays: object
    gains: np.ndarray
    channel_coeffs: np.ndarray = None
    path: str = None


def recover_b(d, tau, cfg):
    """Apply the left pseudo-inverse of ``N(tau)`` to every measurement vector.

    Returns a ``(K, N)`` array.
    """
    x = np.atleast_2d(np.asarray(getattr(d, "channels", d), dtype=complex))
    N = vandermonde(tau, cfg)
    if N.shape[0] < N.shape[1]:
        raise DomainError(f"need p >= K (p={N.shape[0]}, K={N.shape[1]})")
    return np.linalg.pinv(N) @ x


def recover_a(b, tau, cfg):
    """Undo the delay phases: ``A_k(w_j) = exp(1j*w_j*t_k) B_k(w_j)``.

    Operates on the ``n_grid``-point DFT of each row of ``b``.
    """
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    t = as_delays(tau, cfg.T)
    n = b.shape[1]
    omega = 2 * np.pi * np.arange(n) / (n * cfg.T)
    B = np.fft.fft(b, axis=1)
    return np.fft.ifft(np.exp(1j * np.outer(t, omega)) * B, axis=1)


def recover_channel_coeffs(a, symbols):
    """``alpha_k[n] = a_k[n] / s[n]`` for known, nonzero pilot symbols.

    Raises:
        DomainError: Listing the indices of zero symbols.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    s = np.asarray(symbols, dtype=complex)
    if s.shape[-1] != a.shape[1]:
        raise DomainError(f"{s.shape[-1]} symbols for {a.shape[1]}-sample gains")
    zeros = np.flatnonzero(s == 0)
    if zeros.size:
        raise DomainError(f"pilot symbols are zero at indices {zeros.tolist()}")
    return a / s
