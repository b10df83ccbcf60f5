"""Command line interface: ``subnyq run|estimate|selftest``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .exceptions import (
    ConfigError,
    DomainError,
    FrontEndSingularError,
    InsufficientChannelsError,
    RankDeficientSubspaceError,
)
from .frontend import MeasurementSet
from .harness import SCENARIOS, ExperimentConfig, _band_config, estimate, format_csv, make_bank, make_pulse, run_scenario, write_outputs

log = logging.getLogger("subnyq")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _load_config(args, scenario):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if args.config:
        cfg = ExperimentConfig.from_json(args.config, scenario)
        data = {**cfg.to_dict(), **overrides}
        data.pop("scenario")
        return ExperimentConfig.for_scenario(cfg.scenario, **data)
    return ExperimentConfig.for_scenario(scenario, **overrides)


def cmd_run(args):
    cfg = _load_config(args, args.scenario)
    tables = run_scenario(cfg, threads=args.threads)
    for path in write_outputs(tables, args.out, cfg):
        print(path)
    return EXIT_OK


def _complex_rows(x, prefix):
    """One row per sample index with ``{prefix}{k}_re`` / ``_im`` columns."""
    rows = []
    for n in range(x.shape[1]):
        row = {"n": n}
        for k in range(x.shape[0]):
            row[f"{prefix}{k + 1}_re"] = float(x[k, n].real)
            row[f"{prefix}{k + 1}_im"] = float(x[k, n].imag)
        rows.append(row)
    return rows


def cmd_estimate(args):
    cfg = _load_config(args, "single-run")
    try:
        with np.load(args.input) as data:
            samples = np.asarray(data["samples"], dtype=complex)
            symbols = data["symbols"] if "symbols" in data.files else None
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read samples from {args.input}: {exc}") from exc
    cfg.n_grid = samples.shape[1]
    cfg.n_sym = samples.shape[1]
    cfg.validate()
    bc = _band_config(cfg)
    if samples.shape[0] != bc.p:
        raise ConfigError(f"config has p={bc.p} but input has {samples.shape[0]} channels")
    bank, pulse = make_bank(cfg.bank, bc), make_pulse(cfg.pulse, bc)
    rel_tol = cfg.rel_tol if cfg.rel_tol is not None else 1e-2
    taps = cfg.taps[0]
    res = estimate(MeasurementSet(samples, "raw", bc), cfg.K, bank, pulse, bc, taps=taps, rel_tol=rel_tol,
                   variant=cfg.variant, symbols=symbols)
    os.makedirs(args.out, exist_ok=True)
    delays = [dict(k=k + 1, delay=float(t)) for k, t in enumerate(res.delays)]
    tables = {"delays": delays, "gains": _complex_rows(res.gains, "a")}
    if res.channel_coeffs is not None:
        tables["channel_coeffs"] = _complex_rows(res.channel_coeffs, "alpha")
    for name, rows in tables.items():
        with open(os.path.join(args.out, f"{name}.csv"), "w", newline="") as fh:
            fh.write(format_csv(rows))
    with open(os.path.join(args.out, "meta.json"), "w") as fh:
        json.dump({"tool": "subnyq", "version": __version__, "config": cfg.to_dict(), "path": res.path,
                   "input": os.path.abspath(args.input)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(format_csv(delays), end="")
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest

    ok = run_selftest(seed=args.seed or 0)
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser():
    parser = argparse.ArgumentParser(prog="subnyq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"subnyq {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment scenario")
    run.add_argument("scenario", choices=SCENARIOS)
    run.add_argument("--config", help="JSON file with ExperimentConfig fields")
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--out", default="out")
    run.add_argument("--threads", type=int, default=1)
    run.set_defaults(func=cmd_run)

    est = sub.add_parser("estimate", help="estimate delays and gains from one dataset")
    est.add_argument("--input", required=True, help=".npz with 'samples' (p x N complex) and optional 'symbols'")
    est.add_argument("--config", help="JSON file with ExperimentConfig fields")
    est.add_argument("--seed", type=int)
    est.add_argument("--out", default="out")
    est.add_argument("--threads", type=int, default=1)
    est.set_defaults(func=cmd_estimate)

    st = sub.add_parser("selftest", help="quick numerical self check")
    st.add_argument("--seed", type=int)
    st.add_argument("--threads", type=int, default=1)
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InsufficientChannelsError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (FrontEndSingularError, RankDeficientSubspaceError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except DomainError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
