import numpy as np
import pytest

from subnyq.model import BandConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_gains(rng, K, n):
    return rng.standard_normal((K, n)) + 1j * rng.standard_normal((K, n))


def smooth_gains(K, n_grid):
    """Gaussian-windowed tones centred mid-band; their spectra vanish near w = 0."""
    n = np.arange(n_grid)
    rows = []
    for k in range(K):
        env = np.exp(-0.5 * ((n - n_grid / 2 - 5 * k) / 5.0) ** 2)
        freq = np.pi * (0.8 + 0.4 * k / max(K - 1, 1))
        rows.append(env * np.exp(1j * (freq * n + k)))
    return np.array(rows)


def random_delays(rng, K, T=1.0, min_sep=1e-3):
    while True:
        t = np.sort(rng.uniform(0, T, K))
        gaps = np.diff(np.concatenate([t, [t[0] + T]]))
        if gaps.min() >= min_sep * T:
            return t


@pytest.fixture
def cfg4():
    return BandConfig(p=4, n_grid=64)
