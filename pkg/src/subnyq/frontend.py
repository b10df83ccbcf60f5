"""Sampling front end.

A bank of ``p`` filters ``s_l*(-t)`` followed by uniform samplers at rate
``1/T`` turns the analog signal into ``p`` sequences ``c_l[n]``. In the DTFT
domain these satisfy ``c(w) = W(w) N(tau) b(w)`` with ``W = S G``. This module
builds the per-bin matrices, synthesizes ``c_l[n]`` on the cyclic grid, and
provides a brute-force quadrature oracle plus a noise injector.

Frequency responses are evaluated with half-open supports ``[lo, hi)`` so the
``p`` alias slots of a grid point never hit two adjacent bands at once.
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DomainError, FrontEndSingularError, IllConditionedPulseError
from .model import BandConfig, as_delays, vandermonde

__all__ = [
    "FilterBank",
    "Pulse",
    "MeasurementSet",
    "ideal_bandpass",
    "delayed_lowpass",
    "tapered_bandpass",
    "tabulated_bank",
    "flat_pulse",
    "dirac_pulse",
    "tabulated_pulse",
    "s_matrix",
    "g_diag",
    "w_matrix",
    "w_matrix_direct",
    "w_grid",
    "synthesize_samples",
    "oracle_samples",
    "add_noise",
    "COND_WARN",
    "COND_SINGULAR",
]

# cond(W) above COND_WARN warns; above COND_SINGULAR is treated as singular.
COND_WARN = 1e6
COND_SINGULAR = 1e12


def _in_band(freqs, lo, hi):
    return (freqs >= lo) & (freqs < hi)


def _table_lookup(table, freqs, cfg):
    """Nearest-node lookup on the band grid ``lo + 2*pi*i/(n_grid*T)``."""
    lo, _ = cfg.band
    step = 2 * np.pi / (cfg.n_grid * cfg.T)
    idx = np.rint((np.asarray(freqs) - lo) / step).astype(int)
    valid = (idx >= 0) & (idx < table.shape[-1])
    out = np.zeros(table.shape[:-1] + idx.shape, dtype=complex)
    out[..., valid] = table[..., idx[valid]]
    return out


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Frequency responses ``S_l(w)`` of the ``p`` sampling filters.

    Use the constructor functions (:func:`ideal_bandpass`,
    :func:`delayed_lowpass`, :func:`tapered_bandpass`, :func:`tabulated_bank`)
    rather than instantiating directly.
    """

    kind: str
    cfg: BandConfig
    deltas: np.ndarray = None
    table: np.ndarray = None

    def response(self, freqs):
        """Evaluate all filters at ``freqs``; returns shape ``(p,) + freqs.shape``."""
        cfg = self.cfg
        freqs = np.asarray(freqs, dtype=float)
        T = cfg.T
        if self.kind == "tabulated":
            return _table_lookup(self.table, freqs, cfg)
        out = np.zeros((cfg.p,) + freqs.shape, dtype=complex)
        if self.kind == "delayed":
            lo, hi = cfg.band
            inside = _in_band(freqs, lo, hi)
            for ell, delta in enumerate(self.deltas):
                out[ell] = np.where(inside, T * np.exp(-1j * freqs * delta), 0)
            return out
        for ell in range(1, cfg.p + 1):
            lo = 2 * np.pi * (ell - 1 + cfg.gamma) / T
            hi = 2 * np.pi * (ell + cfg.gamma) / T
            inside = _in_band(freqs, lo, hi)
            if self.kind == "bandpass":
                val = T
            elif self.kind == "tapered":
                val = 1.1 - (1 - 0.4 * ell) * np.cos(freqs - 2 * np.pi * ell / T)
            else:
                raise DomainError(f"unknown filter bank kind {self.kind!r}")
            out[ell - 1] = np.where(inside, val, 0)
        return out


def ideal_bandpass(cfg):
    """Ideal bandpass bank: ``S_l = T`` on the ``l``-th slot of the band."""
    return FilterBank("bandpass", cfg)


def delayed_lowpass(cfg, deltas):
    """Delay ``Delta_l`` followed by an ideal lowpass onto the working band.

    ``S_l(w) = T*exp(-1j*w*Delta_l)`` on the band. The classical choice uses
    ``gamma = -p/2`` and ``Delta_l = (l - 1)*T/p``.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.shape != (cfg.p,):
        raise DomainError(f"need {cfg.p} channel delays, got shape {deltas.shape}")
    if np.any(deltas < 0) or np.any(deltas >= cfg.T):
        raise DomainError(f"channel delays must lie in [0, {cfg.T})")
    return FilterBank("delayed", cfg, deltas=deltas)


def tapered_bandpass(cfg):
    """Non-ideal bandpass bank with a cosine taper on each slot.

    ``S_l(w) = 1.1 - (1 - 0.4*l)*cos(w - 2*pi*l/T)`` on slot ``l``, zero
    elsewhere. Invertible for ``p <= 5``.
    """
    return FilterBank("tapered", cfg)


def tabulated_bank(cfg, table):
    """Bank given by samples on the band grid.

    ``table[l, i]`` is ``S_l`` at ``lo + 2*pi*i/(n_grid*T)`` for
    ``i = 0..p*n_grid - 1``, where ``lo`` is the lower band edge.
    """
    table = np.asarray(table, dtype=complex)
    if table.shape != (cfg.p, cfg.p * cfg.n_grid):
        raise DomainError(f"table must have shape {(cfg.p, cfg.p * cfg.n_grid)}, got {table.shape}")
    return FilterBank("tabulated", cfg, table=table)


@dataclass(frozen=True, eq=False)
class Pulse:
    """Fourier transform ``G(w)`` of the known pulse ``g(t)``."""

    kind: str
    cfg: BandConfig
    table: np.ndarray = None

    def response(self, freqs):
        freqs = np.asarray(freqs, dtype=float)
        if self.kind == "dirac":
            return np.ones(freqs.shape, dtype=complex)
        if self.kind == "flat":
            lo, hi = self.cfg.band
            return np.where(_in_band(freqs, lo, hi), self.cfg.T, 0).astype(complex)
        if self.kind == "tabulated":
            return _table_lookup(self.table, freqs, self.cfg)
        raise DomainError(f"unknown pulse kind {self.kind!r}")


def flat_pulse(cfg):
    """Pulse with ``G(w) = T`` on the working band."""
    return Pulse("flat", cfg)


def dirac_pulse(cfg):
    """``g(t) = delta(t)``, so ``G(w) = 1`` everywhere."""
    return Pulse("dirac", cfg)


def tabulated_pulse(cfg, table):
    """Pulse sampled on the band grid (same layout as :func:`tabulated_bank`)."""
    table = np.asarray(table, dtype=complex)
    if table.shape != (cfg.p * cfg.n_grid,):
        raise DomainError(f"table must have shape {(cfg.p * cfg.n_grid,)}, got {table.shape}")
    return Pulse("tabulated", cfg, table=table)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """``p`` parallel sample sequences of common length.

    Attributes:
        channels: ``(p, N)`` complex array, row ``l`` is channel ``l``.
        kind: ``"raw"`` for ``c[n]`` or ``"corrected"`` for ``d[n]``.
        cfg: Band configuration the samples were produced with.
        meta: Free-form metadata (noise variance, FIR group delay, ...).
    """

    channels: np.ndarray
    kind: str
    cfg: BandConfig
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ch = np.atleast_2d(np.asarray(self.channels, dtype=complex))
        if ch.shape[0] != self.cfg.p:
            raise DomainError(f"expected {self.cfg.p} channels, got {ch.shape[0]}")
        if self.kind not in ("raw", "corrected"):
            raise DomainError(f"kind must be 'raw' or 'corrected', got {self.kind!r}")
        object.__setattr__(self, "channels", ch)

    @property
    def p(self):
        return self.channels.shape[0]

    @property
    def n_samples(self):
        return self.channels.shape[1]

    def __add__(self, other):
        return replace(self, channels=self.channels + other.channels, meta=dict(self.meta))


def _check_pulse(g_values, where="working band", tol=1e-8):
    mag = np.abs(g_values)
    top = mag.max(initial=0.0)
    if top == 0 or not np.all(np.isfinite(mag)) or mag.min() <= tol * top:
        raise IllConditionedPulseError(
            f"|G| drops to {mag.min():.3g} (max {top:.3g}) on the {where}; "
            "the pulse must satisfy 0 < a <= |G| <= b on the band"
        )


def s_matrix(bank, omega):
    """``S_lm(w) = (1/T) * conj(S_l(w + 2*pi*(m - 1 + gamma)/T))``.

    ``omega`` may be a scalar (returns ``p x p``) or an array (returns
    ``omega.shape + (p, p)``).
    """
    cfg = bank.cfg
    freqs = cfg.slot_frequencies(omega)  # (..., p) indexed by m
    resp = bank.response(freqs)  # (p_l, ..., p_m)
    return np.moveaxis(resp.conj(), 0, -2) / cfg.T


def g_diag(pulse, cfg, omega, check=True):
    """Diagonal ``G_mm(w) = G(w + 2*pi*(m - 1 + gamma)/T)``.

    Raises:
        IllConditionedPulseError: If ``|G|`` is (numerically) zero at any of the
            evaluated slot frequencies.
    """
    g = pulse.response(cfg.slot_frequencies(omega))
    if check:
        _check_pulse(g)
    return g[..., :, None] * np.eye(cfg.p)


def w_matrix(bank, pulse, cfg, omega):
    """``W(w) = S(w) G(w)`` at one or more frequencies."""
    return s_matrix(bank, omega) @ g_diag(pulse, cfg, omega)


def w_matrix_direct(bank, pulse, cfg, omega):
    """Entrywise assembly ``W_lm = (1/T) conj(S_l(f_m)) G(f_m)``, ``f_m`` the slot frequencies.

    Independent of :func:`s_matrix` / :func:`g_diag`; used to cross-check the
    factorization.
    """
    omega = np.asarray(omega, dtype=float)
    out = np.empty(omega.shape + (cfg.p, cfg.p), dtype=complex)
    for m in range(cfg.p):
        f = omega + 2 * np.pi * (m + cfg.gamma) / cfg.T
        s = bank.response(f)
        g = pulse.response(f)
        for ell in range(cfg.p):
            out[..., ell, m] = np.conj(s[ell]) * g / cfg.T
    return out


def w_grid(bank, pulse, cfg):
    """``W`` on the full DTFT grid plus its per-bin condition numbers.

    Returns:
        ``(W, cond)`` with ``W`` of shape ``(n_grid, p, p)``.

    Raises:
        FrontEndSingularError: At the first bin where ``W`` is numerically
            singular.
    """
    W = w_matrix(bank, pulse, cfg, cfg.grid())
    cond = np.linalg.cond(W)
    bad = np.flatnonzero(~np.isfinite(cond) | (cond > COND_SINGULAR))
    if bad.size:
        j = int(bad[0])
        raise FrontEndSingularError(f"W is singular at grid bin {j} (cond={cond[j]:.3g})", bin_index=j)
    if cond.max() > COND_WARN:
        warnings.warn(f"W is poorly conditioned (max cond {cond.max():.3g})", RuntimeWarning, stacklevel=2)
    return W, cond


def _gains_array(gains, K, n_grid):
    a = np.atleast_2d(np.asarray(gains, dtype=complex))
    if a.shape[0] != K:
        raise DomainError(f"expected {K} gain sequences, got {a.shape[0]}")
    if a.shape[1] > n_grid:
        raise DomainError(f"gain length {a.shape[1]} exceeds n_grid={n_grid}")
    return a


def synthesize_samples(tau, gains, bank, pulse, cfg):
    """Raw samples ``c_l[n]`` under the cyclic (``n_grid``-periodic) convention.

    Per grid bin: ``a(w) = DFT(a_k)``, ``b(w) = D(w, tau) a(w)``,
    ``c(w) = W(w) N(tau) b(w)``; then an inverse DFT per channel. Gain
    sequences shorter than ``n_grid`` are zero padded.

    Args:
        tau: Delays (:class:`DelaySet` or array).
        gains: ``(K, N)`` complex gain sequences, ``N <= n_grid``.
        bank: Sampling filter bank.
        pulse: Pulse spectrum.
        cfg: Band configuration.

    Returns:
        :class:`MeasurementSet` of kind ``"raw"`` with ``n_grid`` samples.
    """
    t = as_delays(tau, cfg.T)
    a = _gains_array(gains, t.size, cfg.n_grid)
    W, cond = w_grid(bank, pulse, cfg)
    omega = cfg.grid()
    A = np.fft.fft(a, n=cfg.n_grid, axis=1)  # (K, n_grid)
    B = np.exp(-1j * np.outer(t, omega)) * A
    NB = vandermonde(t, cfg) @ B  # (p, n_grid)
    C = np.einsum("jlm,mj->lj", W, NB)
    c = np.fft.ifft(C, axis=1)
    return MeasurementSet(c, "raw", cfg, meta={"max_cond": float(cond.max())})


def oracle_samples(tau, gains, bank, pulse, cfg, quad_points=None, n_index=None):
    """Brute-force ``c_l[n]`` by quadrature of the inverse DTFT.

    Evaluates ``C_l(w) = sum_k A_k(w) (1/T) sum_m conj(S_l(w - 2*pi*m/T))
    G(w - 2*pi*m/T) exp(-1j*(w - 2*pi*m/T)*t_k)`` with the aperiodic
    (finite-sum) DTFT ``A_k`` on a midpoint rule over ``[0, 2*pi/T)``, and
    integrates ``c_l[n] = (T/2pi) int C_l(w) exp(1j*w*n*T) dw``. No matrix of
    the cyclic pipeline is reused. Intended as a test oracle only.

    Args:
        quad_points: Number of quadrature nodes (default ``16*p*n_grid``).
        n_index: Sample indices to evaluate (default ``0..n_grid-1``).

    Returns:
        :class:`MeasurementSet` of kind ``"raw"`` with one column per entry of
        ``n_index``.
    """
    t = as_delays(tau, cfg.T)
    a = _gains_array(gains, t.size, cfg.n_grid)
    T = cfg.T
    Q = int(quad_points or 16 * cfg.p * cfg.n_grid)
    n_index = np.arange(cfg.n_grid) if n_index is None else np.asarray(n_index)
    w = (np.arange(Q) + 0.5) * 2 * np.pi / (Q * T)
    A = np.exp(-1j * np.outer(w, np.arange(a.shape[1])) * T) @ a.T  # (Q, K)
    C = np.zeros((cfg.p, Q), dtype=complex)
    # every alias w - 2*pi*m/T that can land in the working band
    for m in range(-(cfg.p + cfg.gamma) - 1, -cfg.gamma + 2):
        f = w - 2 * np.pi * m / T
        s = bank.response(f)
        g = pulse.response(f)
        if not np.any(s) or not np.any(g):
            continue
        phase = np.exp(-1j * np.outer(f, t))  # (Q, K)
        C += np.conj(s) * (g * (A * phase).sum(axis=1)) / T
    kernel = np.exp(1j * np.outer(w, n_index) * T)  # (Q, len(n_index))
    c = C @ kernel / Q
    return MeasurementSet(c, "raw", cfg, meta={"quad_points": Q, "n_index": n_index})


def add_noise(m, snr_db, seed=None):
    """Add circular complex white Gaussian noise at a given SNR.

    The noise variance is ``P / 10**(snr_db/10)`` where ``P`` is the mean
    per-sample power over all channels. ``snr_db = inf`` returns an
    unchanged copy.
    """
    if np.isposinf(snr_db):
        return replace(m, channels=m.channels.copy(), meta={**m.meta, "noise_var": 0.0})
    rng = np.random.default_rng(seed)
    power = np.mean(np.abs(m.channels) ** 2)
    var = power / 10 ** (snr_db / 10)
    w = rng.standard_normal(m.channels.shape) + 1j * rng.standard_normal(m.channels.shape)
    return replace(m, channels=m.channels + np.sqrt(var / 2) * w, meta={**m.meta, "noise_var": float(var)})
