import math

import numpy as np
import pytest

import tripcast


def test_haversine_one_degree():
    assert tripcast.haversine_m(0, 0, 0, 1) == pytest.approx(111195.0802, abs=1e-3)


def test_gravity_spot_value():
    p = np.array([100.0, 0.0, 0.0])
    a = np.array([2.0, 1.0, 1.0])
    d = np.array([[1.0, 2.0, 4.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
    n = tripcast.gravity_distribute(p, a, d, 1.0)
    assert n.shape == (3, 3)
    np.testing.assert_allclose(n[0], [72.7273, 18.1818, 9.0909], atol=1e-3)
    assert n[1].sum() == 0


def test_calibrate_recovers_beta():
    rng = np.random.default_rng(0)
    p = rng.uniform(1, 100, 20)
    a = rng.uniform(0.5, 5, 20)
    d = rng.uniform(100, 10000, (20, 20))
    observed = tripcast.gravity_distribute(p, a, d, 1.5)
    result = tripcast.calibrate_beta(p, a, d, observed, workers=2)
    assert result["beta"] == pytest.approx(1.5)
    assert len(result["grid"]) == len(result["mse"]) == 30
    assert tripcast.distribution_mse(observed, observed) == 0


def test_fit_ols_exact_line():
    m = tripcast.fit_ols(np.array([[0.0], [1.0], [2.0]]), np.array([1.0, 3.0, 5.0]))
    assert m["terms"] == ["const", "x1"]
    np.testing.assert_allclose(m["coefficients"], [1, 2], atol=1e-12)
    assert m["r_squared"] == 1.0


def test_stays_and_mean_shift():
    ts = [0, 300, 600, 900]
    stays = tripcast.detect_stay_points([-86.1] * 4, [39.7] * 4, ts)
    assert len(stays) == 1
    assert stays[0]["ping_count"] == 4
    assert stays[0]["departure"] - stays[0]["arrival"] == 900
    modes = tripcast.mean_shift([10.0] * 5, [50.0] * 5)
    assert modes == [(10.0, 50.0, 5)]


def test_unknown_config_key_raises():
    with pytest.raises(tripcast.ConfigError):
        tripcast.run_stage("config-check", overrides=["quality.bogus=1"])


def test_missing_dependency(tmp_path):
    with pytest.raises(tripcast.MissingArtifactError, match="odm"):
        tripcast.run_stage("calibrate", overrides=[f"paths.output_dir='{tmp_path}'"])


def test_pipeline_smoke(tmp_path):
    overrides = [
        f"paths.output_dir='{tmp_path}'",
        "synth.residents=1500",
        "synth.days=7",
        "general.workers=2",
    ]
    tripcast.run_stage("synth", overrides=overrides)
    tripcast.run_stage("all", overrides=overrides)
    assert (tmp_path / "forecast" / "forecast.csv").exists()
    assert "synth" in tripcast.stage_names()
    beta = (tmp_path / "calibrate" / "gravity_weekday.json").read_text()
    assert math.isfinite(float(beta.split('"beta":')[1].split(",")[0]))
