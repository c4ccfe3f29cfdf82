import json
import math

import numpy as np
import pytest
from scipy import optimize

from mcquantile import t_pdf
from mcquantile.experiments import (
    LINCHPIN_LAMBDA,
    ConfigurationError,
    ExperimentConfig,
    run_coverage_experiment,
    run_linchpin_bound_experiment,
    run_tour_stats,
    quantile_report,
)
from mcquantile import run_regenerative_rw, write_trace_csv


def test_linchpin_lambda_is_density_ratio_infimum():
    # lambda = inf_x q3(x)/f4(x), attained in the tails
    assert LINCHPIN_LAMBDA == pytest.approx(math.sqrt(9375.0) / (32.0 * math.pi), rel=1e-15)
    ratio = lambda x: float(t_pdf(3, x) / t_pdf(4, x))
    res = optimize.minimize_scalar(ratio, bounds=(0.0, 50.0), method="bounded")
    assert res.fun == pytest.approx(LINCHPIN_LAMBDA, rel=1e-9)
    grid = np.linspace(-50, 50, 20001)
    assert np.min(t_pdf(3, grid) / t_pdf(4, grid)) >= LINCHPIN_LAMBDA - 1e-12


def test_config_validation_and_json_roundtrip(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="nope")
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="coverage", quantiles=(1.5,))
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="coverage", methods=("BM", "XX"))
    with pytest.raises(ConfigurationError):
        ExperimentConfig(kind="coverage", workers=0)

    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"kind": "coverage", "quantiles": [0.5, 0.75], "tours": 40}))
    cfg = ExperimentConfig.from_json(path, replications=5)
    assert cfg.quantiles == (0.5, 0.75)
    assert cfg.tours == 40
    assert cfg.replications == 5
    path.write_text(json.dumps({"kind": "coverage", "bogus_field": 1}))
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_json(path)


def test_coverage_experiment_small_run(tmp_path):
    cfg = ExperimentConfig(
        kind="coverage", df=30, sigma=2.5, quantiles=(0.5,), tours=60,
        replications=25, seed=3,
    )
    report = run_coverage_experiment(cfg)
    assert [r["method"] for r in report.rows] == ["BM", "SBM", "RS"]
    for row in report.rows:
        assert row["reps"] + row["failures"] == 25
        assert 0.0 <= row["coverage"] <= 1.0
        assert row["mean_halfwidth"] > 0
        assert row["truth"] == 0.0
    out = tmp_path / "cov.csv"
    report.write_csv(out)
    header = out.read_text().splitlines()[0]
    assert header.split(",") == report.columns
    sidecar = json.loads((tmp_path / "cov.csv.config.json").read_text())
    assert sidecar["tours"] == 60


def test_coverage_deterministic_across_worker_counts():
    base = dict(kind="coverage", df=30, sigma=2.5, quantiles=(0.5, 0.75),
                tours=50, replications=16, seed=11)
    r1 = run_coverage_experiment(ExperimentConfig(workers=1, **base))
    r3 = run_coverage_experiment(ExperimentConfig(workers=3, **base))
    assert r1.rows == r3.rows


def test_linchpin_bound_experiment_small_run(tmp_path):
    cfg = ExperimentConfig(
        kind="linchpin-bound", sampler="linchpin", lengths=(500, 4700),
        replications=40, seed=5,
    )
    report = run_linchpin_bound_experiment(cfg)
    assert [r["length"] for r in report.rows] == [500, 4700]
    short, long_ = report.rows
    assert short["bound_vacuous"] is True
    assert long_["bound_vacuous"] is False
    assert long_["bound"] == pytest.approx(0.10148, abs=1e-4)
    # empirical exceedance never above the bound where it is non-vacuous
    assert long_["exceed_prop"] <= long_["bound"]
    hist = report.extras["histogram"]
    assert sum(h["count"] for h in hist if h["length"] == 500) <= 40
    widths = {round(hist[i + 1]["bin_left"] - hist[i]["bin_left"], 10)
              for i in range(3)}
    assert widths == {0.02}


def test_linchpin_deterministic_across_worker_counts():
    base = dict(kind="linchpin-bound", sampler="linchpin", lengths=(300,),
                replications=12, seed=9)
    r1 = run_linchpin_bound_experiment(ExperimentConfig(workers=1, **base))
    r2 = run_linchpin_bound_experiment(ExperimentConfig(workers=4, **base))
    assert r1.rows == r2.rows


def test_tour_stats_report():
    cfg = ExperimentConfig(kind="tour-stats", df=30, sigma=2.5, tours=4000, seed=1)
    report = run_tour_stats(cfg)
    row = report.rows[0]
    assert row["tours"] == 4000
    assert row["mean_tour_length"] == pytest.approx(3.58, abs=0.25)
    assert row["total_steps"] == pytest.approx(row["mean_tour_length"] * 4000)
    assert 0.3 < row["acceptance_rate"] < 0.55


def test_quantile_report_from_csv(tmp_path):
    trace = run_regenerative_rw(30, 2.5, tours=400, seed=8)
    path = tmp_path / "trace.csv"
    write_trace_csv(path, trace.values, trace.flags)
    rows = quantile_report(path, quantiles=(0.5, 0.9))
    assert len(rows) == 6
    by_key = {(r["q"], r["method"]): r for r in rows}
    assert by_key[(0.5, "RS")]["tours"] == 400
    for r in rows:
        assert r["ci_low"] <= r["point"] <= r["ci_high"]
    # same point estimate for all methods at a given q
    assert len({r["point"] for r in rows if r["q"] == 0.5}) == 1

    # two-column file: RS must be rejected
    path2 = tmp_path / "plain.csv"
    write_trace_csv(path2, trace.values)
    with pytest.raises(Exception):
        quantile_report(path2, quantiles=(0.5,), methods=("RS",))
    assert len(quantile_report(path2, quantiles=(0.5,), methods=("BM", "SBM"))) == 2
