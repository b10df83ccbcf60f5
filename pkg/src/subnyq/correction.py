"""Digital correction filter bank ``W^{-1}``.

Turns the raw samples ``c[n]`` into modified measurements
``d[n] = N(tau) b[n]``, either exactly (per-bin inverses on the DTFT grid)
or with truncated FIR filters obtained from the inverse DTFT of ``W^{-1}``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DomainError, FrontEndSingularError
from .frontend import COND_SINGULAR, w_grid, w_matrix

__all__ = ["CorrectionBank", "build_exact", "design_fir", "fir_response", "apply"]


@dataclass(frozen=True, eq=False)
class CorrectionBank:
    """A realized correction filter bank.

    Attributes:
        mode: ``"exact"`` or ``"fir"``.
        cfg: Band configuration.
        inverses: ``(n_grid, p, p)`` per-bin inverses (exact mode).
        taps: ``(p, p, L)`` tap matrix indexed by lag ``-(L-1)/2 .. (L-1)/2``
            (fir mode).
        cond: Condition number of ``W`` per bin of the grid it was built on.
    """

    mode: str
    cfg: object
    inverses: np.ndarray = None
    taps: np.ndarray = None
    cond: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def n_taps(self):
        return None if self.taps is None else self.taps.shape[-1]

    @property
    def group_delay(self):
        """Delay (in samples) a causal realization would introduce."""
        return 0 if self.taps is None else (self.taps.shape[-1] - 1) // 2


def _invert(W, cond):
    bad = np.flatnonzero(~np.isfinite(cond) | (cond > COND_SINGULAR))
    if bad.size:
        j = int(bad[0])
        raise FrontEndSingularError(f"W is singular at grid bin {j} (cond={cond[j]:.3g})", bin_index=j)
    return np.linalg.inv(W)


def build_exact(bank, pulse, cfg):
    """Per-bin inverses of ``W`` on the ``n_grid`` DTFT grid.

    Raises:
        FrontEndSingularError: Naming the first singular bin.
    """
    W, cond = w_grid(bank, pulse, cfg)
    return CorrectionBank("exact", cfg, inverses=_invert(W, cond), cond=cond)


def design_fir(bank, pulse, cfg, taps, window="rect", oversample=8):
    """Truncated-FIR approximation of ``W^{-1}``.

    ``W^{-1}`` is sampled on a dense grid of ``oversample * n_grid`` bins, each
    entry is inverse-DTFT'd and the impulse response is kept on the ``taps``
    lags centred on zero.

    Args:
        taps: Odd filter length ``L`` with ``1 <= L <= n_grid``.
        window: ``"rect"`` (plain truncation) or ``"hann"`` (raised cosine).
        oversample: Dense-grid factor.
    """
    L = int(taps)
    if L < 1 or L % 2 == 0:
        raise DomainError(f"taps must be a positive odd integer, got {taps}")
    if L > cfg.n_grid:
        raise DomainError(f"taps={L} exceeds n_grid={cfg.n_grid}")
    n_dense = oversample * cfg.n_grid
    omega = 2 * np.pi * np.arange(n_dense) / (n_dense * cfg.T)
    W = w_matrix(bank, pulse, cfg, omega)
    cond = np.linalg.cond(W)
    Winv = _invert(W, cond)
    h = np.fft.ifft(Winv, axis=0)  # h[lag mod n_dense]
    half = (L - 1) // 2
    lags = np.arange(-half, half + 1)
    h = h[lags % n_dense]  # (L, p, p)
    if window == "hann":
        h = h * (0.5 + 0.5 * np.cos(np.pi * lags / (half + 1)))[:, None, None]
    elif window != "rect":
        raise DomainError(f"unknown window {window!r}")
    return CorrectionBank(
        "fir", cfg, taps=np.moveaxis(h, 0, -1), cond=cond,
        meta={"window": window, "design_bins": n_dense, "group_delay": half},
    )


def fir_response(bank, omega):
    """Frequency response ``sum_lag h[lag] exp(-1j*w*lag*T)`` of a FIR bank."""
    L = bank.taps.shape[-1]
    lags = np.arange(L) - (L - 1) // 2
    E = np.exp(-1j * np.outer(np.asarray(omega, dtype=float), lags) * bank.cfg.T)
    return np.einsum("lmk,jk->jlm", bank.taps, E)


def apply(bank, c):
    """Apply the correction bank to raw samples.

    Exact mode multiplies per DFT bin (requires ``c`` to have ``n_grid``
    samples). FIR mode performs a cyclic convolution with the tap matrix; the
    taps are centred on zero lag, so the output is already advanced by the
    group delay ``(L-1)/2`` and stays lag-aligned with ``c``.
    """
    if c.p != bank.cfg.p:
        raise DomainError(f"channel count mismatch: bank has {bank.cfg.p}, samples have {c.p}")
    x = c.channels
    n = x.shape[1]
    if bank.mode == "exact":
        if n != bank.cfg.n_grid:
            raise DomainError(f"exact correction needs {bank.cfg.n_grid} samples, got {n}")
        X = np.fft.fft(x, axis=1)
        d = np.fft.ifft(np.einsum("jlm,mj->lj", bank.inverses, X), axis=1)
        meta = {**c.meta, "correction": "exact"}
    else:
        L = bank.taps.shape[-1]
        if L > n:
            raise DomainError(f"{L} taps exceed the {n}-sample record")
        half = (L - 1) // 2
        H = np.zeros((bank.cfg.p, bank.cfg.p, n), dtype=complex)
        H[..., np.arange(-half, half + 1) % n] = bank.taps
        d = np.fft.ifft(np.einsum("lmj,mj->lj", np.fft.fft(H, axis=-1), np.fft.fft(x, axis=1)), axis=1)
        meta = {**c.meta, "correction": "fir", "taps": L, "group_delay": half}
    return replace(c, channels=d, kind="corrected", meta=meta)
