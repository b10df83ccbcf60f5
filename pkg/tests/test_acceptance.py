"""Acceptance suite.

Each test prints exactly one ``PASS``/``FAIL`` line with the measured value,
the tolerance and the wall time, then asserts. Run with ``pytest -v`` (or
``pytest tests/test_acceptance.py -v``); the lines are written with capture
disabled so they show up in the log.
"""

import math
import time

import numpy as np
import pytest
from conftest import random_delays, random_gains, smooth_gains

from subnyq.correction import apply, build_exact
from subnyq.delay_recovery import correlation, effective_rank, recover_delays
from subnyq.frontend import (
    delayed_lowpass,
    dirac_pulse,
    flat_pulse,
    ideal_bandpass,
    oracle_samples,
    synthesize_samples,
    tapered_bandpass,
)
from subnyq.gain_recovery import recover_a, recover_b
from subnyq.harness import SCENARIOS, ExperimentConfig, format_csv, match_delays, run_scenario
from subnyq.model import BandConfig


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail, elapsed, limit=None):
        timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail} | {timing}")

    return emit


def noiseless_pipeline(t, a, cfg, bank, pulse):
    d = apply(build_exact(bank, pulse, cfg), synthesize_samples(t, a, bank, pulse, cfg))
    est, path = recover_delays(d, len(t), cfg.T, return_path=True)
    order, dist = match_delays(est, t, cfg.T)
    a_hat = recover_a(recover_b(d, est, cfg), est, cfg)[order, : a.shape[1]]
    gain_err = np.max(np.abs(a_hat - a)) / np.max(np.abs(a))
    return dist.max() / cfg.T, gain_err, path, d


def test_noiseless_exactness(report):
    start = time.perf_counter()
    rng = np.random.default_rng(20240101)
    worst_delay = worst_gain = 0.0
    for i in range(200):
        K = (1, 2, 4)[i % 3]
        cfg = BandConfig(p=2 * K, n_grid=128)
        t = random_delays(rng, K, min_sep=1e-3)
        a = random_gains(rng, K, 100)
        de, ge, _, _ = noiseless_pipeline(t, a, cfg, ideal_bandpass(cfg), flat_pulse(cfg))
        worst_delay, worst_gain = max(worst_delay, de), max(worst_gain, ge)
    elapsed = time.perf_counter() - start
    ok = worst_delay < 1e-8 and worst_gain < 1e-7 and elapsed < 30
    report(1, "noiseless exactness, 200 instances, K in {1,2,4}, p=2K", ok,
           f"max delay err {worst_delay:.2e} T (tol 1e-8), max gain err {worst_gain:.2e} (tol 1e-7)",
           elapsed, 30)
    assert ok


def test_correlated_gains(report):
    start = time.perf_counter()
    # a first path that is constant over the whole cyclic record occupies a single DFT bin,
    # so b_2[n] is a fixed multiple of b_1[n] and R_bb has rank one
    cfg = BandConfig(p=4, n_grid=100)
    t = np.array([0.4352, 0.521])
    a1 = np.full(100, 0.8 - 0.6j)
    a = np.vstack([a1, 2 * a1])
    bank, pulse = ideal_bandpass(cfg), flat_pulse(cfg)
    de, ge, path, d = noiseless_pipeline(t, a, cfg, bank, pulse)
    rank = effective_rank(correlation(d))
    elapsed = time.perf_counter() - start
    ok = rank == 1 and path == "smoothed" and de < 1e-8 and elapsed < 1
    report(2, "rank-one gain coherence (a2 = 2 a1), K=2, p=4", ok,
           f"effective rank {rank}, path {path}, max delay err {de:.2e} T (tol 1e-8)", elapsed, 1)
    assert ok


def test_minimal_channels(report):
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    cfg = BandConfig(p=5, n_grid=128)
    t = random_delays(rng, 4, min_sep=0.02)
    a = random_gains(rng, 4, 100)
    de, ge, path, d = noiseless_pipeline(t, a, cfg, ideal_bandpass(cfg), flat_pulse(cfg))
    rank = effective_rank(correlation(d))
    elapsed = time.perf_counter() - start
    ok = rank == 4 and de < 1e-8 and elapsed < 1
    report(3, "K=4 paths from p=K+1=5 channels", ok,
           f"effective rank {rank}, path {path}, max delay err {de:.2e} T (tol 1e-8)", elapsed, 1)
    assert ok


def test_oracle_equivalence(report):
    start = time.perf_counter()
    t = [0.2113, 0.5871]
    a = smooth_gains(2, 100)
    interior = slice(16, 112)
    worst = 0.0
    setups = [
        (0, ideal_bandpass, flat_pulse),
        (0, tapered_bandpass, flat_pulse),
        (-2, lambda c: delayed_lowpass(c, np.arange(c.p) / c.p), dirac_pulse),
    ]
    for gamma, make_bank, make_pulse in setups:
        cfg = BandConfig(p=4, n_grid=128, gamma=gamma)
        bank, pulse = make_bank(cfg), make_pulse(cfg)
        c = synthesize_samples(t, a, bank, pulse, cfg).channels
        o = oracle_samples(t, a, bank, pulse, cfg, quad_points=16384).channels
        worst = max(worst, np.max(np.abs(c[:, interior] - o[:, interior])) / np.max(np.abs(c)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-3 and elapsed < 10
    report(4, "cyclic synthesis vs quadrature oracle, 3 front ends", ok,
           f"max interior rel err {worst:.2e} (tol 1e-3)", elapsed, 10)
    assert ok


def _not_above(lo_row, hi_row):
    """``hi`` is not significantly above ``lo`` (difference within 2 combined standard errors)."""
    se = math.hypot(lo_row["se"], hi_row["se"])
    return hi_row["mse"] <= lo_row["mse"] + 2 * se


def test_snr_and_channel_sweeps(report):
    start = time.perf_counter()
    snr_rows = run_scenario(ExperimentConfig.for_scenario("mse-vs-snr", trials=100))["mse_vs_snr"]
    p_rows = run_scenario(
        ExperimentConfig.for_scenario("mse-vs-p", trials=100, p_grid=[4, 8], snr_db=[10])
    )["mse_vs_p"]
    elapsed = time.perf_counter() - start
    decreasing = all(_not_above(snr_rows[i], snr_rows[i + 1]) for i in range(len(snr_rows) - 1))
    strict = all(snr_rows[i + 1]["mse"] < snr_rows[i]["mse"] for i in range(len(snr_rows) - 1))
    by_p = {r["p"]: r["mse"] for r in p_rows}
    ok = decreasing and by_p[8] < by_p[4] and elapsed < 300
    curve = ", ".join(f"{r['snr_db']:g}dB:{r['mse']:.2e}" for r in snr_rows)
    report(5, "MSE decreases with SNR and with channel count", ok,
           f"{curve}; strictly monotone {strict}; MSE(p=8) {by_p[8]:.2e} < MSE(p=4) {by_p[4]:.2e}",
           elapsed, 300)
    assert ok


def test_vector_count_sweep(report):
    start = time.perf_counter()
    rows = run_scenario(ExperimentConfig.for_scenario("mse-vs-nvec", trials=100))["mse_vs_nvec"]
    elapsed = time.perf_counter() - start
    curves = {}
    for r in rows:
        curves.setdefault(r["fd"], {})[r["nvec"]] = r["mse"]
    slow, fast = curves[0.05], curves[0.1]
    more_helps = all(c[100] <= c[25] for c in curves.values())
    target = slow[80]

    def vectors_needed(curve):
        return min((n for n, m in sorted(curve.items()) if m <= target), default=math.inf)

    n_slow, n_fast = vectors_needed(slow), vectors_needed(fast)
    ok = more_helps and n_fast < n_slow and elapsed < 300
    report(6, "MSE vs measurement vectors at 20 dB", ok,
           f"MSE(100)<=MSE(25) for both fd: {more_helps}; target {target:.2e} reached at "
           f"{n_fast} vectors (fd=0.1) vs {n_slow} (fd=0.05)", elapsed, 300)
    assert ok


def test_filter_length_floor(report):
    start = time.perf_counter()
    rows = run_scenario(ExperimentConfig.for_scenario("mse-vs-taps", trials=100, snr_db=[60]))["mse_vs_taps"]
    elapsed = time.perf_counter() - start
    floor = {r["taps"]: r for r in rows}
    ok = _not_above(floor[25], floor[49]) and _not_above(floor[11], floor[25]) and elapsed < 300
    report(7, "60 dB delay-MSE floor vs correction filter length (tapered bank)", ok,
           ", ".join(f"L={L}:{floor[L]['mse']:.4e}" for L in (11, 25, 49)) + " (2 SE tolerance)",
           elapsed, 300)
    assert ok


def test_determinism(report, tmp_path):
    start = time.perf_counter()
    mismatched = []
    for scenario in SCENARIOS:
        trials = 1 if scenario == "single-run" else 6
        outputs = []
        for threads in (1, 4, 1):
            cfg = ExperimentConfig.for_scenario(scenario, trials=trials, seed=77)
            tables = run_scenario(cfg, threads=threads)
            outputs.append({name: format_csv(rows).encode() for name, rows in tables.items()})
        if not outputs[0] == outputs[1] == outputs[2]:
            mismatched.append(scenario)
    elapsed = time.perf_counter() - start
    ok = not mismatched
    report(8, "byte-identical CSV across reruns and thread counts (1, 4)", ok,
           f"{len(SCENARIOS)} scenarios, mismatches: {mismatched or 'none'}", elapsed)
    assert ok
