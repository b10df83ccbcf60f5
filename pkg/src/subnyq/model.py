"""Signal model: band configuration, delay sets and the structured matrices.

The received signal is a sum of ``K`` delayed copies of a known pulse, each
modulated by its own gain sequence::

    x(t) = sum_k sum_n a_k[n] g(t - t_k - nT)

Everything downstream works with the quantities defined here: the steering
vector ``n(t)``, the ``p x K`` Vandermonde matrix ``N(tau)`` and the diagonal
phase matrix ``D(omega, tau)``. Gain sequences are plain ``(K, N)`` complex
arrays.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateModelError, DomainError

__all__ = [
    "BandConfig",
    "DelaySet",
    "as_delays",
    "steering_vector",
    "vandermonde",
    "delay_phase_diag",
    "jakes_gains",
    "path_powers",
]


@dataclass(frozen=True)
class BandConfig:
    """Sampling configuration shared by every stage of the pipeline.

    Args:
        p: Number of sampling channels.
        n_grid: Size of the DTFT grid (and of every sequence in the cyclic
            pipeline).
        gamma: Integer index of the working band
            ``[2*pi*gamma/T, 2*pi*(p + gamma)/T]``.
        T: Symbol period in seconds.
    """

    p: int
    n_grid: int
    gamma: int = 0
    T: float = 1.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise DomainError(f"p must be a positive integer, got {self.p}")
        if int(self.n_grid) != self.n_grid or self.n_grid < 1:
            raise DomainError(f"n_grid must be a positive integer, got {self.n_grid}")
        if int(self.gamma) != self.gamma:
            raise DomainError(f"gamma must be an integer, got {self.gamma}")
        if not self.T > 0:
            raise DomainError(f"T must be positive, got {self.T}")

    @property
    def band(self):
        """Working band ``(low, high)`` in rad/s."""
        return (2 * np.pi * self.gamma / self.T, 2 * np.pi * (self.p + self.gamma) / self.T)

    def grid(self):
        """DTFT grid ``omega_j = 2*pi*j / (n_grid*T)``, ``j = 0..n_grid-1``."""
        return 2 * np.pi * np.arange(self.n_grid) / (self.n_grid * self.T)

    def slot_offsets(self):
        """Frequency offsets ``2*pi*(m - 1 + gamma)/T`` of the ``p`` alias slots."""
        return 2 * np.pi * (np.arange(self.p) + self.gamma) / self.T

    def slot_frequencies(self, omega):
        """Absolute frequencies ``omega + 2*pi*(m - 1 + gamma)/T``.

        Returns an array of shape ``omega.shape + (p,)``.
        """
        omega = np.asarray(omega, dtype=float)
        return omega[..., None] + self.slot_offsets()


@dataclass(frozen=True, eq=False)
class DelaySet:
    """``K`` distinct delays in ``[0, T)``, stored sorted ascending."""

    delays: np.ndarray
    T: float = 1.0

    def __post_init__(self):
        t = np.sort(np.atleast_1d(np.asarray(self.delays, dtype=float)))
        if t.ndim != 1 or t.size == 0:
            raise DomainError("a delay set needs at least one delay")
        if np.any(~np.isfinite(t)) or np.any(t < 0) or np.any(t >= self.T):
            raise DomainError(f"delays must lie in [0, T={self.T}), got {t}")
        if np.any(np.diff(t) == 0):
            raise DegenerateModelError(f"delays must be distinct, got {t}")
        t.setflags(write=False)
        object.__setattr__(self, "delays", t)

    def __len__(self):
        return self.delays.size

    def __iter__(self):
        return iter(self.delays)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.delays, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, DelaySet):
            return NotImplemented
        return self.T == other.T and np.array_equal(self.delays, other.delays)

    def __repr__(self):
        return f"DelaySet({self.delays.tolist()}, T={self.T})"

    @property
    def K(self):
        return self.delays.size

    def shifted(self, s):
        """Delays shifted by ``s`` modulo ``T``."""
        return DelaySet(np.mod(self.delays + s, self.T), self.T)


def as_delays(tau, T):
    """Validated delay array from a :class:`DelaySet` or array-like.

    Array input keeps its order, so it may be paired with gains listed in
    path order; a :class:`DelaySet` is always sorted ascending.
    """
    if isinstance(tau, DelaySet):
        return tau.delays
    t = np.atleast_1d(np.asarray(tau, dtype=float))
    DelaySet(t, T)
    return t


def steering_vector(t, cfg):
    """Steering vector ``n(t)`` of a single delay.

    Element ``m`` (1-based) is ``exp(-1j*2*pi*(m - 1 + gamma)*t/T)``.

    Raises:
        DomainError: If ``t`` is outside ``[0, T)``.
    """
    t = float(t)
    if not 0 <= t < cfg.T:
        raise DomainError(f"delay {t} outside [0, {cfg.T})")
    m = np.arange(cfg.p) + cfg.gamma
    return np.exp(-2j * np.pi * m * t / cfg.T)


def vandermonde(tau, cfg):
    """The ``p x K`` matrix ``N(tau)`` whose columns are steering vectors.

    Raises:
        DegenerateModelError: If two delays coincide.
        DomainError: If a delay is outside ``[0, T)``.
    """
    if isinstance(tau, DelaySet):
        t = tau.delays
    else:
        t = np.atleast_1d(np.asarray(tau, dtype=float))
        if np.unique(t).size != t.size:
            raise DegenerateModelError(f"duplicate delays in {t}")
        if np.any(t < 0) or np.any(t >= cfg.T):
            raise DomainError(f"delays must lie in [0, {cfg.T}), got {t}")
    m = np.arange(cfg.p) + cfg.gamma
    return np.exp(-2j * np.pi * np.outer(m, t) / cfg.T)


def delay_phase_diag(omega, tau):
    """Diagonal matrix ``D(omega, tau)`` with entries ``exp(-1j*omega*t_k)``.

    ``tau`` may be a :class:`DelaySet` or any array of delays; no range check
    is applied so that ``D(-omega)`` and shifted delays work as well.
    """
    t = tau.delays if isinstance(tau, DelaySet) else np.atleast_1d(np.asarray(tau, dtype=float))
    return np.diag(np.exp(-1j * float(omega) * t))


def jakes_gains(f_d, T, n, power=1.0, seed=None, n_osc=32, angle_offset=0.25):
    """Rayleigh-fading gain sequence ``alpha[n] = alpha(nT)`` (Jakes model).

    Sum of ``n_osc`` equal-power complex sinusoids at Doppler frequencies
    ``f_d*cos(theta_i)`` with ``theta_i = 2*pi*(i + angle_offset)/n_osc`` and
    independent uniform phases drawn per realization. The expected
    autocorrelation is ``power * J0(2*pi*f_d*m*T)`` at lag ``m``.

    ``angle_offset`` keeps the arrival angles away from mirror-symmetric
    pairs (0 and 0.5 are degenerate), so the time-averaged power of a single
    long realization is close to ``power``.

    Args:
        f_d: Maximal Doppler shift in Hz (``f_d >= 0``).
        T: Sampling period in seconds.
        n: Number of samples.
        power: Expected mean-square value.
        seed: Seed or ``numpy.random.Generator``.
        n_osc: Number of oscillators.
        angle_offset: Fractional offset of the arrival angles.

    Returns:
        Complex array of length ``n``.
    """
    if f_d < 0:
        raise DomainError(f"f_d must be non-negative, got {f_d}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not power > 0:
        raise DomainError(f"power must be positive, got {power}")
    rng = np.random.default_rng(seed)
    theta = 2 * np.pi * (np.arange(n_osc) + angle_offset) / n_osc
    phases = rng.uniform(0.0, 2 * np.pi, n_osc)
    t = np.arange(n) * T
    arg = 2 * np.pi * f_d * np.outer(t, np.cos(theta)) + phases
    return np.sqrt(power / n_osc) * np.exp(1j * arg).sum(axis=1)


def path_powers(K, profile="decreasing"):
    """Per-path mean powers for the channel-estimation scenario.

    ``"decreasing"`` gives ``(1/2)**(k-1)``; ``"increasing"`` gives the literal
    ``(1/2)**(-k+1)`` reading, i.e. ``2**(k-1)``.
    """
    k = np.arange(1, K + 1)
    if profile == "decreasing":
        return 0.5 ** (k - 1)
    if profile == "increasing":
        return 2.0 ** (k - 1)
    raise DomainError(f"unknown power profile {profile!r}")
