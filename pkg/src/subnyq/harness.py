"""Monte-Carlo experiment engine.

Scenarios:

* ``channel-est``: time-varying multipath channel estimation with known
  pilot symbols (per-path energies and the first path's gain track).
* ``mse-vs-snr``, ``mse-vs-p``, ``mse-vs-nvec``, ``mse-vs-taps``: delay MSE
  sweeps over SNR, channel count, number of measurement vectors and
  correction-filter length.
* ``single-run``: one trial, true vs estimated delays.

Every trial draws its randomness from ``numpy.random.default_rng([seed,
trial, stream])``, and grid points within a trial reuse the same draws
(common random numbers). Trials may run on any number of threads; results
are aggregated in trial order with :func:`math.fsum`, so tables are
reproducible bit for bit.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .correction import apply, build_exact, design_fir
from .delay_recovery import recover_delays
from .exceptions import ConfigError, DomainError
from .frontend import (
    add_noise,
    delayed_lowpass,
    dirac_pulse,
    flat_pulse,
    ideal_bandpass,
    synthesize_samples,
    tapered_bandpass,
)
from .gain_recovery import RecoveredChannel, recover_a, recover_b, recover_channel_coeffs
from .model import BandConfig, DelaySet, jakes_gains, path_powers

__all__ = [
    "SCENARIOS",
    "ExperimentConfig",
    "TrialResult",
    "delay_error",
    "match_delays",
    "make_bank",
    "make_pulse",
    "estimate",
    "run_channel_estimation",
    "run_mse_vs_snr",
    "run_mse_vs_p",
    "run_mse_vs_nvec",
    "run_mse_vs_taps",
    "run_single",
    "run_scenario",
    "format_csv",
    "write_outputs",
]

SCENARIOS = ("channel-est", "mse-vs-snr", "mse-vs-p", "mse-vs-nvec", "mse-vs-taps", "single-run")

_DEFAULTS = {
    # delays closer than 1/p are not resolvable at 15 dB and swamp the energy averages
    "channel-est": dict(K=4, p=5, snr_db=[15.0], delays="uniform", min_separation=0.2,
                        power_profile="decreasing"),
    "mse-vs-snr": dict(snr_db=[5.0, 10.0, 15.0, 20.0, 25.0, 30.0]),
    "mse-vs-p": dict(snr_db=[10.0], p_grid=[3, 4, 5, 6, 7, 8]),
    "mse-vs-nvec": dict(snr_db=[20.0], fd=[0.05, 0.1],
                        nvec_grid=[10, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100]),
    "mse-vs-taps": dict(p=3, bank="tapered", snr_db=[10.0, 20.0, 30.0, 40.0, 50.0, 60.0], taps=[11, 25, 49]),
    "single-run": dict(snr_db=[30.0], trials=1),
}


@dataclass
class ExperimentConfig:
    """Configuration of one experiment; JSON config files use these field names.

    ``fd`` is in Hz, delays in seconds. ``snr_db`` accepts ``inf`` for
    noiseless runs. ``rel_tol=None`` picks 1e-6 for noiseless and 1e-2 for
    noisy data. ``taps`` entry ``0`` means exact (per-bin) correction.
    """

    scenario: str = "mse-vs-snr"
    K: int = 2
    p: int = 4
    gamma: int = 0
    T: float = 1.0
    n_grid: int = None
    n_sym: int = 100
    fd: list = field(default_factory=lambda: [0.05])
    snr_db: list = field(default_factory=lambda: [20.0])
    taps: list = field(default_factory=lambda: [0])
    p_grid: list = field(default_factory=lambda: [4])
    nvec_grid: list = field(default_factory=lambda: [100])
    trials: int = 1000
    seed: int = 0
    bank: str = "bandpass"
    pulse: str = "flat"
    delays: object = field(default_factory=lambda: [0.4352, 0.521])
    power_profile: str = "unit"
    power_norm: str = "expectation"
    min_separation: float = 1 / 500
    variant: str = "TLS"
    rel_tol: float = None
    n_osc: int = 32

    @classmethod
    def for_scenario(cls, scenario, **overrides):
        """Scenario defaults with ``overrides`` applied, validated."""
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
        params = {"scenario": scenario, **_DEFAULTS[scenario], **overrides}
        cfg = cls(**params)
        cfg.validate()
        return cfg

    @classmethod
    def from_dict(cls, data, scenario=None):
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        data = dict(data)
        scenario = scenario or data.pop("scenario", None) or cls.scenario
        data.pop("scenario", None)
        return cls.for_scenario(scenario, **data)

    @classmethod
    def from_json(cls, path, scenario=None):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data, scenario)

    def to_dict(self):
        d = asdict(self)
        d["snr_db"] = [_snr_repr(s) for s in self.snr_db]
        return d

    @property
    def n_grid_eff(self):
        return self.n_grid or self.n_sym

    def validate(self):
        self.snr_db = [_parse_snr(s) for s in self.snr_db]
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for name in ("fd", "snr_db", "taps", "p_grid", "nvec_grid"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be a nonempty list")
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        ps = self.p_grid if self.scenario == "mse-vs-p" else [self.p]
        if min(ps) < self.K + 1:
            raise ConfigError(f"need p >= K+1 (K={self.K}, p={min(ps)})")
        if self.n_sym < 1 or self.n_grid_eff < self.n_sym:
            raise ConfigError("need 1 <= n_sym <= n_grid")
        if any(n < 1 or n > self.n_grid_eff for n in self.nvec_grid):
            raise ConfigError("nvec_grid entries must lie in [1, n_grid]")
        if any(L < 0 or (L and L % 2 == 0) or L > self.n_grid_eff for L in self.taps):
            raise ConfigError("taps must be 0 (exact) or odd lengths <= n_grid")
        if any(f < 0 for f in self.fd):
            raise ConfigError("fd must be non-negative")
        if self.bank not in ("bandpass", "delayed", "tapered"):
            raise ConfigError(f"unknown bank {self.bank!r}")
        if self.pulse not in ("flat", "dirac"):
            raise ConfigError(f"unknown pulse {self.pulse!r}")
        if self.power_profile not in ("decreasing", "increasing", "unit"):
            raise ConfigError(f"unknown power_profile {self.power_profile!r}")
        if self.power_norm not in ("expectation", "realization"):
            raise ConfigError(f"unknown power_norm {self.power_norm!r}")
        if self.variant not in ("LS", "TLS"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.delays != "uniform":
            try:
                t = DelaySet(self.delays, self.T)
            except DomainError as exc:
                raise ConfigError(f"bad delays: {exc}") from exc
            if len(t) != self.K:
                raise ConfigError(f"{len(t)} delays given for K={self.K}")
        elif self.min_separation * self.K >= 1:
            raise ConfigError("min_separation too large for K uniform delays")


def _parse_snr(s):
    if isinstance(s, str):
        if s.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ConfigError(f"bad SNR value {s!r}")
    return float(s)


def _snr_repr(s):
    return "inf" if math.isinf(s) else s


@dataclass
class TrialResult:
    """One estimate at one grid point.

    ``sq_errors`` are the matched per-delay squared circular errors in units
    of ``T**2``; ``delay_mse`` is their mean.
    """

    trial: int
    true_delays: np.ndarray
    est_delays: np.ndarray
    sq_errors: np.ndarray
    delay_mse: float
    gain_mse: float = math.nan
    meta: dict = field(default_factory=dict)


def match_delays(est, truth, T):
    """Optimal matching under circular distance.

    Returns ``(order, dist)``: ``est[order[k]]`` is matched to ``truth[k]`` at
    circular distance ``dist[k]``.
    """
    e = np.asarray(getattr(est, "delays", est), dtype=float)
    t = np.asarray(getattr(truth, "delays", truth), dtype=float)
    if e.shape != t.shape:
        raise DomainError(f"size mismatch: {e.size} estimates for {t.size} delays")
    diff = np.abs(t[:, None] - e[None, :]) % T
    dist = np.minimum(diff, T - diff)
    rows, cols = linear_sum_assignment(dist**2)
    order = np.empty_like(cols)
    order[rows] = cols
    return order, dist[np.arange(t.size), order]


def delay_error(est, truth, T=1.0):
    """Mean squared circular delay error, normalized by ``T**2``."""
    _, dist = match_delays(est, truth, T)
    return float(np.mean((dist / T) ** 2))


def make_bank(name, cfg):
    if name == "bandpass":
        return ideal_bandpass(cfg)
    if name == "tapered":
        return tapered_bandpass(cfg)
    if name == "delayed":
        return delayed_lowpass(cfg, np.arange(cfg.p) * cfg.T / cfg.p)
    raise ConfigError(f"unknown bank {name!r}")


def make_pulse(name, cfg):
    if name == "flat":
        return flat_pulse(cfg)
    if name == "dirac":
        return dirac_pulse(cfg)
    raise ConfigError(f"unknown pulse {name!r}")


def _band_config(cfg, p=None):
    gamma = cfg.gamma
    if cfg.bank == "delayed":
        gamma = -((p or cfg.p) // 2)
    return BandConfig(p=p or cfg.p, n_grid=cfg.n_grid_eff, gamma=gamma, T=cfg.T)


def _rel_tol(cfg, snr):
    if cfg.rel_tol is not None:
        return cfg.rel_tol
    return 1e-6 if math.isinf(snr) else 1e-2


def _rng(cfg, trial, stream):
    return np.random.default_rng([cfg.seed, trial, stream])


def _draw_delays(cfg, rng):
    if cfg.delays != "uniform":
        return np.asarray(cfg.delays, dtype=float)
    while True:
        t = rng.uniform(0, cfg.T, cfg.K)
        d = np.abs(t[:, None] - t[None, :])
        d = np.minimum(d, cfg.T - d)[np.triu_indices(cfg.K, 1)]
        if d.size == 0 or d.min() >= cfg.min_separation * cfg.T:
            return t


def _draw_gains(cfg, rng, fd, powers):
    out = np.empty((cfg.K, cfg.n_sym), dtype=complex)
    for k in range(cfg.K):
        g = jakes_gains(fd, cfg.T, cfg.n_sym, powers[k], seed=rng, n_osc=cfg.n_osc)
        if cfg.power_norm == "realization":
            g *= np.sqrt(powers[k] / np.mean(np.abs(g) ** 2))
        out[k] = g
    return out


def _powers(cfg):
    if cfg.power_profile == "unit":
        return np.ones(cfg.K)
    return path_powers(cfg.K, cfg.power_profile)


def estimate(c, K, bank, pulse, cfg, taps=0, rel_tol=1e-6, variant="TLS", n_vectors=None, symbols=None):
    """Run correction, delay recovery and gain recovery on raw samples.

    Args:
        c: Raw :class:`~subnyq.frontend.MeasurementSet`.
        K: Number of paths.
        taps: 0 for exact correction, else the FIR length.
        symbols: Optional known pilot symbols for channel coefficients.

    Returns:
        :class:`~subnyq.gain_recovery.RecoveredChannel` with gains in
        ascending-delay order.
    """
    corr = build_exact(bank, pulse, cfg) if not taps else design_fir(bank, pulse, cfg, taps)
    d = apply(corr, c)
    tau, path = recover_delays(d, K, cfg.T, rel_tol=rel_tol, variant=variant, n_vectors=n_vectors,
                               return_path=True)
    a = recover_a(recover_b(d, tau, cfg), tau, cfg)
    coeffs = None
    if symbols is not None:
        coeffs = recover_channel_coeffs(a[:, : len(symbols)], symbols)
    return RecoveredChannel(tau, a, coeffs, path)


def _score(trial, truth, gains, est, T, meta):
    order, dist = match_delays(est.delays, truth, T)
    sq = (dist / T) ** 2
    a_hat = est.gains[order, : gains.shape[1]]
    gain_mse = float(np.sum(np.abs(a_hat - gains) ** 2) / np.sum(np.abs(gains) ** 2))
    return TrialResult(trial, np.asarray(truth), est.delays.delays[order], sq, float(np.mean(sq)), gain_mse, meta)


def _sweep_trial(cfg, trial):
    """All grid points of one trial for the four MSE sweeps."""
    scene = _rng(cfg, trial, 0)
    truth = _draw_delays(cfg, scene)
    results = []
    fds = cfg.fd
    gains_by_fd = {fd: _draw_gains(cfg, _rng(cfg, trial, 1 + i), fd, _powers(cfg)) for i, fd in enumerate(fds)}
    ps = cfg.p_grid if cfg.scenario == "mse-vs-p" else [cfg.p]
    taps = cfg.taps if cfg.scenario == "mse-vs-taps" else [0]
    nvecs = cfg.nvec_grid if cfg.scenario == "mse-vs-nvec" else [None]
    for fd in fds:
        gains = gains_by_fd[fd]
        for p in ps:
            bc = _band_config(cfg, p)
            bank, pulse = make_bank(cfg.bank, bc), make_pulse(cfg.pulse, bc)
            c = synthesize_samples(truth, gains, bank, pulse, bc)
            for snr in cfg.snr_db:
                noisy = add_noise(c, snr, seed=_rng(cfg, trial, 100))
                for L in taps:
                    for nv in nvecs:
                        est = estimate(noisy, cfg.K, bank, pulse, bc, taps=L, rel_tol=_rel_tol(cfg, snr),
                                       variant=cfg.variant, n_vectors=nv)
                        meta = {"fd": fd, "p": p, "snr_db": snr, "taps": L, "nvec": nv or cfg.n_grid_eff,
                                "path": est.path}
                        results.append(_score(trial, truth, gains, est, cfg.T, meta))
    return results


def _run_trials(cfg, job, threads=1):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda i: job(cfg, i), range(cfg.trials)))
    return [job(cfg, i) for i in range(cfg.trials)]


def _mean_se(values):
    v = [float(x) for x in values]
    n = len(v)
    mean = math.fsum(v) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2 for x in v) / (n - 1)
    return mean, math.sqrt(var / n)


def _aggregate(per_trial, keys):
    groups = {}
    for results in per_trial:
        for r in results:
            groups.setdefault(tuple(r.meta[k] for k in keys), []).append(r)
    rows = []
    for key, rs in groups.items():
        mse, se = _mean_se(r.delay_mse for r in rs)
        gmse, _ = _mean_se(r.gain_mse for r in rs)
        row = dict(zip(keys, key))
        row.update(mse=mse, se=se, gain_mse=gmse, trials=len(rs),
                   smoothed=sum(r.meta["path"] == "smoothed" for r in rs))
        rows.append(row)
    return rows


def run_mse_vs_snr(cfg, threads=1):
    """Delay MSE versus SNR, one row per ``(fd, snr_db)``."""
    per_trial = _run_trials(cfg, _sweep_trial, threads)
    return {"mse_vs_snr": _aggregate(per_trial, ["fd", "snr_db"])}


def run_mse_vs_p(cfg, threads=1):
    """Delay MSE versus channel count, one row per ``(fd, snr_db, p)``."""
    per_trial = _run_trials(cfg, _sweep_trial, threads)
    return {"mse_vs_p": _aggregate(per_trial, ["fd", "snr_db", "p"])}


def run_mse_vs_nvec(cfg, threads=1):
    """Delay MSE versus number of measurement vectors, per ``(fd, snr_db, nvec)``."""
    per_trial = _run_trials(cfg, _sweep_trial, threads)
    return {"mse_vs_nvec": _aggregate(per_trial, ["fd", "snr_db", "nvec"])}


def run_mse_vs_taps(cfg, threads=1):
    """Delay MSE versus SNR for each correction-filter length, per ``(fd, taps, snr_db)``."""
    per_trial = _run_trials(cfg, _sweep_trial, threads)
    return {"mse_vs_taps": _aggregate(per_trial, ["fd", "taps", "snr_db"])}


def _channel_trial(cfg, trial):
    scene = _rng(cfg, trial, 0)
    truth = _draw_delays(cfg, scene)
    powers = _powers(cfg)
    alpha = _draw_gains(cfg, _rng(cfg, trial, 1), cfg.fd[0], powers)
    symbols = _rng(cfg, trial, 2).choice([-1.0, 1.0], size=cfg.n_sym)
    gains = alpha * symbols
    bc = _band_config(cfg)
    bank, pulse = make_bank(cfg.bank, bc), make_pulse(cfg.pulse, bc)
    c = synthesize_samples(truth, gains, bank, pulse, bc)
    snr = cfg.snr_db[0]
    noisy = add_noise(c, snr, seed=_rng(cfg, trial, 100))
    est = estimate(noisy, cfg.K, bank, pulse, bc, rel_tol=_rel_tol(cfg, snr), variant=cfg.variant,
                   symbols=symbols)
    order, dist = match_delays(est.delays, truth, cfg.T)
    alpha_hat = est.channel_coeffs[order]
    sq = (dist / cfg.T) ** 2
    meta = {
        "snr_db": snr,
        "path": est.path,
        "true_energy": np.mean(np.abs(alpha) ** 2, axis=1),
        "est_energy": np.mean(np.abs(alpha_hat) ** 2, axis=1),
        "alpha": alpha[0] if trial == 0 else None,
        "alpha_hat": alpha_hat[0] if trial == 0 else None,
    }
    gain_mse = float(np.sum(np.abs(alpha_hat - alpha) ** 2) / np.sum(np.abs(alpha) ** 2))
    return TrialResult(trial, truth, est.delays.delays[order], sq, float(np.mean(sq)), gain_mse, meta)


def run_channel_estimation(cfg, threads=1):
    """Time-varying channel estimation with known BPSK pilots.

    Returns three tables: ``channel_est`` (per-path configured power, mean
    true and estimated energies, delay MSE), ``pdp_trial0`` (delays and
    energies of the first trial) and ``first_tap`` (first-path gain magnitude
    track of the first trial).
    """
    results = _run_trials(cfg, _channel_trial, threads)
    powers = _powers(cfg)
    rows = []
    for k in range(cfg.K):
        true_e, _ = _mean_se(r.meta["true_energy"][k] for r in results)
        est_e, est_se = _mean_se(r.meta["est_energy"][k] for r in results)
        mse, se = _mean_se(r.sq_errors[k] for r in results)
        rows.append(dict(path=k + 1, configured_power=float(powers[k]), true_energy=true_e, est_energy=est_e,
                         est_energy_se=est_se, rel_energy_error=(est_e - powers[k]) / powers[k],
                         delay_mse=mse, delay_se=se))
    r0 = results[0]
    pdp = [dict(path=k + 1, true_delay=float(r0.true_delays[k]), est_delay=float(r0.est_delays[k]),
                true_energy=float(r0.meta["true_energy"][k]), est_energy=float(r0.meta["est_energy"][k]))
           for k in range(cfg.K)]
    track = [dict(n=n, true_abs=float(abs(r0.meta["alpha"][n])), est_abs=float(abs(r0.meta["alpha_hat"][n])))
             for n in range(cfg.n_sym)]
    mse, se = _mean_se(r.delay_mse for r in results)
    summary = [dict(snr_db=cfg.snr_db[0], mse=mse, se=se, gain_mse=_mean_se(r.gain_mse for r in results)[0],
                    trials=len(results))]
    return {"channel_est": rows, "pdp_trial0": pdp, "first_tap": track, "channel_est_summary": summary}


def run_single(cfg, threads=1):
    """One trial (index 0) at the first SNR; true vs estimated delays."""
    res = _sweep_trial(cfg, 0)[0]
    rows = [dict(k=k + 1, true_delay=float(res.true_delays[k]), est_delay=float(res.est_delays[k]),
                 sq_error=float(res.sq_errors[k])) for k in range(len(res.sq_errors))]
    return {"single_run": rows}


_RUNNERS = {
    "channel-est": run_channel_estimation,
    "mse-vs-snr": run_mse_vs_snr,
    "mse-vs-p": run_mse_vs_p,
    "mse-vs-nvec": run_mse_vs_nvec,
    "mse-vs-taps": run_mse_vs_taps,
    "single-run": run_single,
}


def run_scenario(cfg, threads=1):
    """Dispatch on ``cfg.scenario``; returns ``{table_name: rows}``."""
    cfg.validate()
    return _RUNNERS[cfg.scenario](cfg, threads=threads)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_csv(rows):
    """Render rows (list of dicts with identical keys) as CSV text."""
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def write_outputs(tables, out_dir, cfg):
    """Write one CSV per table plus ``meta.json`` into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, rows in tables.items():
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w", newline="") as fh:
            fh.write(format_csv(rows))
        paths.append(path)
    meta = {"tool": "subnyq", "version": __version__, "config": cfg.to_dict(), "tables": sorted(tables)}
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
