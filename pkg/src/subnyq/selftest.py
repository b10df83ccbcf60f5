"""Quick numerical self check used by ``subnyq selftest``."""

import numpy as np

from .correction import apply, build_exact
from .delay_recovery import recover_delays
from .frontend import flat_pulse, ideal_bandpass, oracle_samples, synthesize_samples, tapered_bandpass
from .gain_recovery import recover_a, recover_b
from .model import BandConfig, DelaySet


def _exactness(rng, K, bank_fn, n_grid=64):
    cfg = BandConfig(p=2 * K, n_grid=n_grid)
    bank, pulse = bank_fn(cfg), flat_pulse(cfg)
    tau = DelaySet(np.sort(rng.choice(1000, K, replace=False)) / 1000 + rng.uniform(0, 1e-3), 1.0)
    a = rng.standard_normal((K, n_grid)) + 1j * rng.standard_normal((K, n_grid))
    d = apply(build_exact(bank, pulse, cfg), synthesize_samples(tau, a, bank, pulse, cfg))
    est = recover_delays(d, K)
    a_hat = recover_a(recover_b(d, est, cfg), est, cfg)
    return max(np.max(np.abs(est.delays - tau.delays)), np.max(np.abs(a_hat - a)) / np.max(np.abs(a)))


def run_selftest(seed=0, out=print):
    """Run the checks, print one line each, return ``True`` if all pass."""
    rng = np.random.default_rng(seed)
    checks = []
    for K in (1, 2, 3):
        err = _exactness(rng, K, ideal_bandpass)
        checks.append((f"noiseless exactness, bandpass, K={K}", err, 1e-8))
    err = _exactness(rng, 1, tapered_bandpass)
    checks.append(("noiseless exactness, tapered bank, K=1", err, 1e-8))

    cfg = BandConfig(p=3, n_grid=64)
    n = np.arange(cfg.n_grid)
    a = np.exp(-0.5 * ((n - 32) / 4.0) ** 2) * np.exp(1j * np.pi * n)
    bank, pulse = ideal_bandpass(cfg), flat_pulse(cfg)
    tau = DelaySet([0.3], 1.0)
    c = synthesize_samples(tau, a[None], bank, pulse, cfg).channels
    o = oracle_samples(tau, a[None], bank, pulse, cfg, quad_points=4096).channels
    checks.append(("cyclic synthesis vs quadrature oracle", np.max(np.abs(c - o)) / np.max(np.abs(c)), 1e-3))

    ok = True
    for name, err, tol in checks:
        passed = bool(err < tol)
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}: {err:.3g} (tol {tol:g})")
    return ok
