"""Experiment runner: config parsing, sweeps, CSV output, aggregation.

A sweep executes (sweep-value x scheme x seed) cells: generate the channel,
design with the scheme's assumptions, estimate the outage under the true
model, and append one CSV row.  Cells share channel and error seeds across
sweep values (common random numbers), failures are recorded per row without
aborting, and rows are written in deterministic order regardless of the work
pool schedule.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .beamform import DesignError, Infeasible, NumericalFailure, RandomizationFailed, alternating_optimize
from .channel import SystemParams, generate
from .evaluate import BASELINE_KINDS, design_baseline, estimate_outage

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "run_cell",
    "run_sweep",
    "write_rows",
    "summarize",
    "main",
]

CSV_HEADER = ["sweep", "value", "scheme", "seed", "power_dbm", "p_hat", "ci", "iters", "status"]
SUMMARY_HEADER = ["sweep", "value", "scheme", "n", "power_dbm_mean", "p_hat_mean", "p_hat_std"]
SCHEMES = ("Proposed",) + BASELINE_KINDS
SWEEP_AXES = ("delta_c", "beta", "L")


class ConfigError(Exception):
    """Malformed experiment configuration; message carries line context."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep definition plus the scenario constants it runs under."""

    sweep: str = "delta_c"
    grid: tuple = (0.005, 0.01, 0.02, 0.03)
    schemes: tuple = SCHEMES
    seeds: tuple = tuple(range(1, 11))
    n_samples: int = 2000
    n_antennas: int = 2
    n_elements: int = 24
    rate: float = 1.5
    tau: float = 0.01
    sigma2: float = 1e-11
    beta: float = 0.05
    delta_c: float = 0.01
    pos_bs: tuple = (0.0, 0.0)
    pos_ris: tuple = (90.0, 0.0)
    pos_user: tuple = (90.0, 5.0)
    alpha_cascaded: float = 3.0
    alpha_direct: float = 4.0
    rician_k: float = 5.0
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.sweep not in SWEEP_AXES:
            raise ConfigError(f"sweep must be one of {SWEEP_AXES}, got {self.sweep!r}")
        if len(self.grid) == 0:
            raise ConfigError("sweep grid must be non-empty")
        if any(b >= a for a, b in zip(self.grid[1:], self.grid[:-1])):
            raise ConfigError("sweep grid must be strictly increasing")
        if len(self.seeds) == 0:
            raise ConfigError("seeds must be non-empty")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ConfigError(f"unknown schemes {bad}; valid: {SCHEMES}")

    def params_at(self, value):
        """SystemParams for one sweep point."""
        overrides = {
            "delta_c": {"delta_c": float(value)},
            "beta": {"beta_t": float(value), "beta_r": float(value)},
            "L": {"n_elements": int(value)},
        }[self.sweep]
        base = dict(
            n_antennas=self.n_antennas,
            n_elements=self.n_elements,
            beta_t=self.beta,
            beta_r=self.beta,
            sigma2=self.sigma2,
            rate=self.rate,
            tau=self.tau,
            pos_bs=self.pos_bs,
            pos_ris=self.pos_ris,
            pos_user=self.pos_user,
            alpha_cascaded=self.alpha_cascaded,
            alpha_direct=self.alpha_direct,
            rician_k=self.rician_k,
            delta_c=self.delta_c,
            epsilon=self.epsilon,
        )
        base.update(overrides)
        return SystemParams(**base)


_CONFIG_KEYS = {
    "sweep": str,
    "grid": tuple,
    "schemes": tuple,
    "seeds": tuple,
    "n_samples": int,
    "n": int,
    "l": int,
    "rate": float,
    "tau": float,
    "sigma2": float,
    "noise_dbm": float,
    "beta": float,
    "delta_c": float,
    "bs": tuple,
    "ris": tuple,
    "user": tuple,
    "alpha_cascaded": float,
    "alpha_direct": float,
    "rician_k": float,
    "epsilon": float,
}

_KEY_TO_FIELD = {
    "n": "n_antennas",
    "l": "n_elements",
    "bs": "pos_bs",
    "ris": "pos_ris",
    "user": "pos_user",
}


def _parse_scalar(token):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return token


def _parse_value(text, lineno):
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ConfigError(f"line {lineno}: unterminated array")
        inner = text[1:-1].strip()
        if not inner:
            return ()
        return tuple(_parse_scalar(tok) for tok in inner.split(","))
    return _parse_scalar(text)


def load_config(path):
    """Parse the flat key-value config grammar (see README) into a config."""
    fields = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parsed = _parse_value(value, lineno)
        want = _CONFIG_KEYS[key]
        if want is tuple and not isinstance(parsed, tuple):
            raise ConfigError(f"line {lineno}: key {key!r} expects an array")
        if want is not tuple and isinstance(parsed, tuple):
            raise ConfigError(f"line {lineno}: key {key!r} expects a scalar")
        if key == "noise_dbm":
            fields["sigma2"] = 10.0 ** ((parsed - 30.0) / 10.0)
            continue
        if want is int:
            parsed = int(parsed)
        elif want is float:
            parsed = float(parsed)
        fields[_KEY_TO_FIELD.get(key, key)] = parsed
    try:
        return ExperimentConfig(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _eval_seed(seed, scheme):
    # stable across sweep values so that error draws are common random numbers
    return (int(seed) * 1000003 + SCHEMES.index(scheme)) & (2**63 - 1)


def run_cell(config, value, scheme, seed, **design_kwargs):
    """One (sweep-value, scheme, seed) cell; returns a CSV row dict."""
    params = config.params_at(value)
    chan = generate(params, seed)
    row = {
        "sweep": config.sweep,
        "value": value,
        "scheme": scheme,
        "seed": seed,
        "power_dbm": math.nan,
        "p_hat": math.nan,
        "ci": math.nan,
        "iters": 0,
        "status": "Optimal",
    }
    try:
        if scheme == "Proposed":
            design = alternating_optimize(chan, params, seed, **design_kwargs)
        else:
            design = design_baseline(scheme, chan, params, seed, **design_kwargs)
    except Infeasible:
        row["status"] = "Infeasible"
        return row, None, None
    except RandomizationFailed:
        row["status"] = "RandomizationFailed"
        return row, None, None
    except (NumericalFailure, DesignError):
        row["status"] = "NumericalFailure"
        return row, None, None

    if scheme == "PerfectRef":
        eval_params = replace(params, beta_t=0.0, beta_r=0.0)
        eval_chan = replace(chan, zeta_g=0.0, zeta_q=0.0)
    else:
        eval_params, eval_chan = params, chan
    outage = estimate_outage(design, eval_chan, eval_params, config.n_samples, _eval_seed(seed, scheme))

    row["power_dbm"] = 10.0 * math.log10(design.power) + 30.0
    row["p_hat"] = outage.p_hat
    row["ci"] = outage.ci_halfwidth
    row["iters"] = len(design.trace)
    return row, design, outage


def run_sweep(config, threads=1, design_kwargs=None, collect=None):
    """All sweep cells, rows ordered by (sweep-value, scheme, seed).

    ``collect``, when given, receives (row, design, outage) for every
    finished cell (called in deterministic order).  Failures are recorded in
    the row status and never abort the sweep.
    """
    design_kwargs = design_kwargs or {}
    cells = [
        (value, scheme, seed)
        for value in config.grid
        for scheme in config.schemes
        for seed in config.seeds
    ]
    if threads <= 1:
        results = [run_cell(config, *cell, **design_kwargs) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run_cell, config, *cell, **design_kwargs) for cell in cells]
            results = [f.result() for f in futures]
    rows = []
    for row, design, outage in results:
        rows.append(row)
        if collect is not None:
            collect(row, design, outage)
    return rows


def write_rows(rows, path, header=CSV_HEADER, timestamp=None):
    try:
        with open(path, "w", newline="") as fh:
            if timestamp:
                fh.write(f"# generated {timestamp}\n")
            writer = csv.DictWriter(fh, fieldnames=header)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _fmt(row[k]) for k in header})
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def read_rows(path):
    """Parse a sweep CSV back into typed rows; raises on malformed rows."""
    rows = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames != CSV_HEADER:
        raise IOError(f"{path}: unexpected header {reader.fieldnames}")
    for i, raw in enumerate(reader, 2):
        try:
            rows.append(
                {
                    "sweep": raw["sweep"],
                    "value": _parse_scalar(raw["value"]),
                    "scheme": raw["scheme"],
                    "seed": int(raw["seed"]),
                    "power_dbm": float(raw["power_dbm"]),
                    "p_hat": float(raw["p_hat"]),
                    "ci": float(raw["ci"]),
                    "iters": int(raw["iters"]),
                    "status": raw["status"],
                }
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise IOError(f"{path}: malformed row {i}: {exc}") from exc
    return rows


def summarize(rows):
    """Aggregate rows per (sweep-value, scheme): powers averaged in watts.

    Rows whose status is not Optimal are excluded from the aggregates; the
    ``n`` column counts the rows that contributed.
    """
    groups = {}
    order = []
    for row in rows:
        key = (row["value"], row["scheme"])
        if key not in groups:
            groups[key] = []
            order.append((row["sweep"], key))
        groups[key].append(row)
    out = []
    for sweep, key in order:
        value, scheme = key
        ok = [r for r in groups[key] if r["status"] == "Optimal"]
        if ok:
            powers_w = np.array([10.0 ** ((r["power_dbm"] - 30.0) / 10.0) for r in ok])
            p_hats = np.array([r["p_hat"] for r in ok])
            power_dbm_mean = 10.0 * math.log10(float(np.mean(powers_w))) + 30.0
            p_mean, p_std = float(np.mean(p_hats)), float(np.std(p_hats))
        else:
            power_dbm_mean = p_mean = p_std = math.nan
        out.append(
            {
                "sweep": sweep,
                "value": value,
                "scheme": scheme,
                "n": len(ok),
                "power_dbm_mean": power_dbm_mean,
                "p_hat_mean": p_mean,
                "p_hat_std": p_std,
            }
        )
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(prog="risbeam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a sweep config and write raw CSV")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--threads", type=int, default=1)
    run_p.add_argument("--no-timestamp", action="store_true")

    sum_p = sub.add_parser("summarize", help="aggregate a raw sweep CSV")
    sum_p.add_argument("--in", dest="inp", required=True)
    sum_p.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
            rows = run_sweep(config, threads=args.threads)
            stamp = None
            if not args.no_timestamp:
                import datetime

                stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
            write_rows(rows, args.out, timestamp=stamp)
        else:
            rows = read_rows(args.inp)
            write_rows(summarize(rows), args.out, header=SUMMARY_HEADER)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (IOError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
