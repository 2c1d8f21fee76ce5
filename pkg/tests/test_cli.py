"""Config grammar, sweep execution, CSV schema, aggregation, exit codes."""

import math

import numpy as np
import pytest

from risbeam import cli
from risbeam.cli import ConfigError, ExperimentConfig, load_config, run_sweep, summarize

TINY_CFG = """
# minimal single-cell sweep
sweep = delta_c
grid = [0.0]
schemes = [PerfectRef]
seeds = [1]
n_samples = 50
n = 2
l = 4
beta = 0.0
delta_c = 0.0
"""


def write(tmp_path, text, name="cfg.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_config_defaults_and_overrides(tmp_path):
    cfg = load_config(write(tmp_path, TINY_CFG))
    assert cfg.sweep == "delta_c"
    assert cfg.grid == (0.0,)
    assert cfg.n_elements == 4
    assert cfg.rate == 1.5  # spec default
    assert cfg.sigma2 == 1e-11


def test_load_config_noise_dbm(tmp_path):
    cfg = load_config(write(tmp_path, TINY_CFG + "noise_dbm = -80\n"))
    assert cfg.sigma2 == pytest.approx(1e-11)


def test_load_config_unknown_key(tmp_path):
    with pytest.raises(ConfigError, match="line 2"):
        load_config(write(tmp_path, "\nbogus = 3\n"))


def test_load_config_bad_array(tmp_path):
    with pytest.raises(ConfigError, match="unterminated"):
        load_config(write(tmp_path, "grid = [1, 2\n"))


def test_load_config_scalar_vs_array(tmp_path):
    with pytest.raises(ConfigError, match="expects an array"):
        load_config(write(tmp_path, "grid = 3\n"))


def test_config_grid_must_increase():
    with pytest.raises(ConfigError, match="strictly increasing"):
        ExperimentConfig(grid=(0.2, 0.1))


def test_config_unknown_scheme():
    with pytest.raises(ConfigError, match="unknown schemes"):
        ExperimentConfig(schemes=("Nope",))


def test_single_cell_perfect_ref(tmp_path):
    cfg = load_config(write(tmp_path, TINY_CFG))
    rows = run_sweep(cfg)
    assert len(rows) == 1
    row = rows[0]
    assert row["status"] == "Optimal"
    assert row["p_hat"] in (0.0, 1.0)
    assert math.isfinite(row["power_dbm"])


def test_rows_roundtrip_and_byte_identical(tmp_path):
    cfg = load_config(write(tmp_path, TINY_CFG))
    rows = run_sweep(cfg)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.write_rows(rows, out1)
    cli.write_rows(run_sweep(cfg), out2)
    assert out1.read_bytes() == out2.read_bytes()
    back = cli.read_rows(out1)
    assert back == rows


def test_csv_header_exact(tmp_path):
    cfg = load_config(write(tmp_path, TINY_CFG))
    out = tmp_path / "rows.csv"
    cli.write_rows(run_sweep(cfg), out)
    assert out.read_text().splitlines()[0] == "sweep,value,scheme,seed,power_dbm,p_hat,ci,iters,status"


def test_summarize_single_row_identity():
    rows = [
        {
            "sweep": "delta_c",
            "value": 0.01,
            "scheme": "Proposed",
            "seed": 1,
            "power_dbm": -10.0,
            "p_hat": 0.25,
            "ci": 0.01,
            "iters": 4,
            "status": "Optimal",
        }
    ]
    agg = summarize(rows)
    assert len(agg) == 1
    assert agg[0]["power_dbm_mean"] == pytest.approx(-10.0)
    assert agg[0]["p_hat_mean"] == pytest.approx(0.25)
    assert agg[0]["n"] == 1


def test_summarize_averages_power_in_watts():
    # 1 W and 3 W average to 2 W, i.e. 10*log10(2) + 30 dBm
    def row(seed, dbm):
        return {
            "sweep": "beta",
            "value": 0.05,
            "scheme": "Proposed",
            "seed": seed,
            "power_dbm": dbm,
            "p_hat": 0.0,
            "ci": 0.0,
            "iters": 3,
            "status": "Optimal",
        }

    agg = summarize([row(1, 30.0), row(2, 10.0 * math.log10(3.0) + 30.0)])
    assert agg[0]["power_dbm_mean"] == pytest.approx(10.0 * math.log10(2.0) + 30.0)


def test_summarize_skips_failed_rows():
    base = {
        "sweep": "L",
        "value": 8,
        "scheme": "Proposed",
        "seed": 1,
        "power_dbm": -10.0,
        "p_hat": 0.0,
        "ci": 0.0,
        "iters": 3,
        "status": "Optimal",
    }
    bad = dict(base, seed=2, power_dbm=math.nan, status="Infeasible")
    agg = summarize([base, bad])
    assert agg[0]["n"] == 1
    assert agg[0]["power_dbm_mean"] == pytest.approx(-10.0)


def test_main_run_and_summarize(tmp_path):
    cfg_path = write(tmp_path, TINY_CFG)
    raw = tmp_path / "raw.csv"
    summ = tmp_path / "summary.csv"
    assert cli.main(["run", "--config", str(cfg_path), "--out", str(raw), "--no-timestamp"]) == 0
    assert cli.main(["summarize", "--in", str(raw), "--out", str(summ)]) == 0
    header = summ.read_text().splitlines()[0]
    assert header == "sweep,value,scheme,n,power_dbm_mean,p_hat_mean,p_hat_std"


def test_main_exit_codes(tmp_path):
    bad_cfg = write(tmp_path, "bogus = 1\n", name="bad.cfg")
    assert cli.main(["run", "--config", str(bad_cfg), "--out", str(tmp_path / "x.csv")]) == 1
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "x.csv")]) == 1
    assert cli.main(["summarize", "--in", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "y.csv")]) == 2


def test_run_sweep_threaded_matches_serial(tmp_path):
    text = TINY_CFG.replace("seeds = [1]", "seeds = [1, 2]").replace(
        "schemes = [PerfectRef]", "schemes = [PerfectRef, NonrobustBoth]"
    )
    cfg = load_config(write(tmp_path, text))
    serial = run_sweep(cfg, threads=1)
    threaded = run_sweep(cfg, threads=4)
    assert serial == threaded


def test_common_random_numbers_across_sweep_values(tmp_path):
    # the channel draw for a seed must not depend on the sweep value
    cfg = ExperimentConfig(sweep="delta_c", grid=(0.01, 0.02), schemes=("Proposed",), seeds=(5,),
                           n_samples=10, n_elements=4)
    from risbeam.channel import generate

    a = generate(cfg.params_at(0.01), 5)
    b = generate(cfg.params_at(0.02), 5)
    assert np.array_equal(a.g_hat, b.g_hat)
    assert np.array_equal(a.Q_hat, b.Q_hat)
    assert a.zeta_q != b.zeta_q
