import numpy as np
import pytest
from conftest import random_gains
from hypothesis import given, settings
from hypothesis import strategies as st

from subnyq.correction import apply, build_exact
from subnyq.exceptions import DomainError
from subnyq.frontend import flat_pulse, ideal_bandpass, synthesize_samples, tapered_bandpass
from subnyq.gain_recovery import recover_a, recover_b, recover_channel_coeffs
from subnyq.model import BandConfig, vandermonde


def measurements(t, b, p):
    return vandermonde(t, BandConfig(p=p, n_grid=1)) @ b


class TestRecoverB:
    def test_inverts_vandermonde(self, rng):
        cfg = BandConfig(p=5, n_grid=1, gamma=1)
        t = np.array([0.1, 0.4, 0.8])
        b = random_gains(rng, 3, 20)
        np.testing.assert_allclose(recover_b(vandermonde(t, cfg) @ b, t, cfg), b, atol=1e-12)

    def test_overdetermined_matches_square(self, rng):
        t = np.array([0.15, 0.65])
        b = random_gains(rng, 2, 8)
        square = recover_b(measurements(t, b, 2), t, BandConfig(p=2, n_grid=1))
        tall = recover_b(measurements(t, b, 4), t, BandConfig(p=4, n_grid=1))
        np.testing.assert_allclose(tall, square, atol=1e-12)

    def test_zero_in_zero_out(self):
        assert not np.any(recover_b(np.zeros((4, 6)), [0.1, 0.4], BandConfig(p=4, n_grid=1)))

    def test_least_squares_on_noise(self, rng):
        cfg = BandConfig(p=6, n_grid=1)
        t = np.array([0.2, 0.7])
        x = random_gains(rng, 6, 10)
        N = vandermonde(t, cfg)
        ref = np.linalg.lstsq(N, x, rcond=None)[0]
        np.testing.assert_allclose(recover_b(x, t, cfg), ref, atol=1e-12)


class TestRecoverA:
    def test_zero_delays_leave_gains(self, rng):
        cfg = BandConfig(p=3, n_grid=20)
        b = random_gains(rng, 1, 20)
        np.testing.assert_allclose(recover_a(b, [0.0], cfg), b, atol=1e-14)

    @settings(max_examples=25)
    @given(st.floats(0.0, 0.99))
    def test_energy_preserved(self, t0):
        cfg = BandConfig(p=2, n_grid=24)
        b = random_gains(np.random.default_rng(5), 1, 24)
        a = recover_a(b, [t0], cfg)
        assert np.linalg.norm(a) == pytest.approx(np.linalg.norm(b), rel=1e-12)

    def test_undoes_integer_delay_as_shift(self):
        # with T = 1 and a delay phase exp(-1j*w*t), removing it is exact on the grid
        cfg = BandConfig(p=2, n_grid=16)
        a = random_gains(np.random.default_rng(0), 1, 16)
        t = [0.3]
        B = np.exp(-1j * np.outer(t, cfg.grid())) * np.fft.fft(a, axis=1)
        np.testing.assert_allclose(recover_a(np.fft.ifft(B, axis=1), t, cfg), a, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(0.0, 0.99), min_size=1, max_size=3, unique=True), st.integers(0, 1000))
    def test_pipeline_roundtrip(self, t, seed):
        t = np.sort(t)
        if t.size > 1 and np.min(np.diff(t)) < 0.05:
            return
        K = t.size
        cfg = BandConfig(p=K + 2, n_grid=32)
        a = random_gains(np.random.default_rng(seed), K, 32)
        bank, pulse = tapered_bandpass(cfg), flat_pulse(cfg)
        d = apply(build_exact(bank, pulse, cfg), synthesize_samples(t, a, bank, pulse, cfg))
        a_hat = recover_a(recover_b(d, t, cfg), t, cfg)
        np.testing.assert_allclose(a_hat, a, atol=1e-9 * np.max(np.abs(a)))


class TestChannelCoeffs:
    def test_unit_symbols(self, rng):
        a = random_gains(rng, 2, 7)
        np.testing.assert_array_equal(recover_channel_coeffs(a, np.ones(7)), a)

    def test_divides_by_symbols(self):
        a = np.array([[2.0, -4.0, 6.0]])
        np.testing.assert_allclose(recover_channel_coeffs(a, [1, -2, 3]), [[2, 2, 2]])

    def test_zero_symbols_listed(self):
        with pytest.raises(DomainError, match=r"\[1, 3\]"):
            recover_channel_coeffs(np.ones((1, 4)), [1, 0, 1, 0])

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            recover_channel_coeffs(np.ones((2, 4)), [1, 1])

    def test_bpsk_pilots_end_to_end(self, rng):
        cfg = BandConfig(p=4, n_grid=64)
        t = np.array([0.25, 0.6])
        alpha = random_gains(rng, 2, 64)
        s = rng.choice([-1.0, 1.0], 64)
        bank, pulse = ideal_bandpass(cfg), flat_pulse(cfg)
        d = apply(build_exact(bank, pulse, cfg), synthesize_samples(t, alpha * s, bank, pulse, cfg))
        coeffs = recover_channel_coeffs(recover_a(recover_b(d, t, cfg), t, cfg), s)
        np.testing.assert_allclose(coeffs, alpha, atol=1e-11)
