"""Delay recovery from the modified measurements ``d[n] = N(tau) b[n]``.

Correlation assembly, rank detection (uncorrelated vs correlated gains),
forward spatial smoothing and LS / TLS ESPRIT on the rotational invariance
``N_up = N_down R`` with ``R_kk = exp(-1j*2*pi*t_k/T)``.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, InsufficientChannelsError, RankDeficientSubspaceError
from .model import DelaySet

__all__ = [
    "CorrelationMatrix",
    "correlation",
    "effective_rank",
    "spatial_smooth",
    "signal_subspace",
    "esprit",
    "recover_delays",
]


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Hermitian ``q x q`` correlation accumulated from ``count`` vectors."""

    matrix: np.ndarray
    count: int
    smoothed: bool = False

    @property
    def q(self):
        return self.matrix.shape[0]


def _as_matrix(R):
    return R.matrix if isinstance(R, CorrelationMatrix) else np.asarray(R)


def _data(d, n_vectors=None):
    x = getattr(d, "channels", d)
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    if n_vectors is not None:
        x = x[:, : int(n_vectors)]
    if x.shape[1] < 1:
        raise DomainError("need at least one measurement vector")
    return x


def correlation(d, n_vectors=None):
    """``R_dd = sum_n d[n] d[n]^H`` over the first ``n_vectors`` columns."""
    x = _data(d, n_vectors)
    R = x @ x.conj().T
    return CorrelationMatrix(0.5 * (R + R.conj().T), x.shape[1])


def effective_rank(R, rel_tol=1e-6):
    """Number of singular values above ``rel_tol`` times the largest one."""
    if not 0 < rel_tol < 1:
        raise DomainError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    s = np.linalg.svd(_as_matrix(R), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def spatial_smooth(d, K, n_vectors=None):
    """Forward spatial smoothing with ``M = p - K`` sub-vectors of length ``K + 1``.

    ``R_bar = (1/M) sum_i sum_n d_i[n] d_i[n]^H`` where ``d_i[n]`` holds
    channels ``i .. i+K``. The result has rank ``K`` regardless of the gain
    correlation once ``M >= K`` (i.e. ``p >= 2K``).

    Raises:
        InsufficientChannelsError: If ``p < K + 1``.
    """
    x = _data(d, n_vectors)
    p = x.shape[0]
    M = p - K
    if M < 1:
        raise InsufficientChannelsError(f"spatial smoothing needs p >= K+1 (p={p}, K={K})")
    Rdd = x @ x.conj().T
    Rbar = sum(Rdd[i : i + K + 1, i : i + K + 1] for i in range(M)) / M
    return CorrelationMatrix(0.5 * (Rbar + Rbar.conj().T), x.shape[1], smoothed=True)


def signal_subspace(R, K, rel_tol=1e-6):
    """``K`` dominant left singular vectors of ``R`` and all singular values.

    Raises:
        RankDeficientSubspaceError: If fewer than ``K`` singular values exceed
            ``rel_tol`` times the largest.
    """
    U, s, _ = np.linalg.svd(_as_matrix(R))
    if K > s.size or s[0] == 0 or s[K - 1] <= rel_tol * s[0]:
        raise RankDeficientSubspaceError(
            f"need {K} significant singular values, got {np.count_nonzero(s > rel_tol * s[0]) if s[0] else 0}"
        )
    return U[:, :K], s


def _rotation_ls(Es):
    return np.linalg.lstsq(Es[:-1], Es[1:], rcond=None)[0]


def _rotation_tls(Es):
    K = Es.shape[1]
    C = np.hstack([Es[:-1], Es[1:]])
    _, V = np.linalg.eigh(C.conj().T @ C)
    V = V[:, ::-1]  # descending eigenvalues
    V12 = V[:K, K:]
    V22 = V[K:, K:]
    return -V12 @ np.linalg.inv(V22)


def esprit(R, K, T=1.0, variant="TLS", rel_tol=1e-6, return_eigenvalues=False):
    """ESPRIT delay estimates from a correlation matrix.

    Steps: SVD of ``R``; ``E_s`` = ``K`` dominant left singular vectors;
    ``Phi`` solves ``E_s_down Phi = E_s_up`` (least squares or total least
    squares); ``t_i = -(T/2pi) arg(lambda_i)`` for the eigenvalues of ``Phi``,
    wrapped into ``[0, T)``.

    Args:
        R: ``q x q`` correlation matrix (``q >= K + 1``).
        K: Number of delays.
        T: Period.
        variant: ``"TLS"`` or ``"LS"``.
        rel_tol: Relative singular value threshold for the rank check.
        return_eigenvalues: Also return the eigenvalues of ``Phi``.

    Returns:
        :class:`DelaySet`, or ``(DelaySet, eigenvalues)``.
    """
    Rm = _as_matrix(R)
    if Rm.shape[0] < K + 1:
        raise InsufficientChannelsError(f"ESPRIT needs q >= K+1 (q={Rm.shape[0]}, K={K})")
    Es, _ = signal_subspace(Rm, K, rel_tol)
    if variant == "LS":
        Phi = _rotation_ls(Es)
    elif variant == "TLS":
        Phi = _rotation_tls(Es)
    else:
        raise DomainError(f"variant must be 'LS' or 'TLS', got {variant!r}")
    lam = np.linalg.eigvals(Phi)
    t = np.mod(-T / (2 * np.pi) * np.angle(lam), T)
    t[t >= T] = 0.0
    delays = DelaySet(t, T)
    return (delays, lam) if return_eigenvalues else delays


def recover_delays(d, K, T=None, rel_tol=1e-6, variant="TLS", n_vectors=None, return_path=False, guard_tol=1e-9):
    """Recover ``K`` delays from modified measurements.

    Builds ``R_dd``; if its effective rank is at least ``K`` runs ESPRIT on it
    directly, otherwise (correlated gains) on the spatially smoothed matrix.
    ``rel_tol`` only drives that decision; ESPRIT itself rejects a subspace
    only when it is numerically rank deficient (``guard_tol``).

    Args:
        d: :class:`~subnyq.frontend.MeasurementSet` or ``(p, N)`` array.
        K: Number of paths.
        T: Period (taken from ``d.cfg`` when omitted).
        rel_tol: Relative threshold for the uncorrelated/correlated decision.
        variant: ``"TLS"`` or ``"LS"``.
        n_vectors: Use only the first ``n_vectors`` measurement vectors.
        return_path: Also return ``"direct"`` or ``"smoothed"``.
        guard_tol: Relative singular value floor below which ESPRIT raises
            :class:`RankDeficientSubspaceError`.
    """
    if T is None:
        T = d.cfg.T
    x = _data(d, n_vectors)
    if x.shape[0] < K + 1:
        raise InsufficientChannelsError(f"need p >= K+1 channels (p={x.shape[0]}, K={K})")
    R = correlation(x)
    if effective_rank(R, rel_tol) >= K:
        path = "direct"
    else:
        R = spatial_smooth(x, K)
        path = "smoothed"
    delays = esprit(R, K, T, variant=variant, rel_tol=min(rel_tol, guard_tol))
    return (delays, path) if return_path else delays
