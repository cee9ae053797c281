import math

import numpy as np
import pytest

import occlab


def test_simulate_is_deterministic():
    t1, x1 = occlab.simulate("bm", 64, seed=3, replicate=2)
    t2, x2 = occlab.simulate({"kind": "bm"}, 64, seed=3, replicate=2)
    assert t1.shape == (65,) and x1.shape == (65, 1)
    assert np.array_equal(x1, x2)
    assert x1[0, 0] == 0.0


def test_estimators_on_a_linear_path():
    x = np.array([0.0, 0.5, 1.0])
    assert occlab.riemann_sum(x, "identity:10") == pytest.approx(0.25)
    assert occlab.trapezoid(x, "identity:10") == pytest.approx(0.5)
    fine = np.linspace(0.0, 1.0, 4097)
    assert occlab.occupation_oracle(fine, "identity:10") == pytest.approx(0.5)


def test_rates_and_norms():
    r = occlab.theoretical_rate({"kind": "fbm", "hurst": 0.3}, 0.49)
    assert r["delta_exponent"] == pytest.approx(0.647)
    assert occlab.theoretical_rate("bm", 0.49)["delta_exponent"] == pytest.approx(0.745)
    assert occlab.sobolev_norm("indicator:0:1", 0.6) is None
    assert occlab.sobolev_norm("gauss:0:1", 1.0) > 0
    with pytest.raises(occlab.OcclabError):
        occlab.theoretical_rate("bm", 1.5)


def test_evaluate_and_bound():
    y = occlab.evaluate("gauss:0:1", [0.0])
    assert y[0] == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert occlab.fourier_bound("bm", "gauss:0:1", 8) > 0


def test_small_rate_study():
    summary = occlab.run_experiment({
        "experiment": "rate-study", "process": "bm", "function": "gauss:0:1",
        "n_ladder": [16, 32, 64, 128], "replications": 20, "oracle_factor": 8, "seed": 1,
    })
    assert len(summary["ladder"]) == 4
    assert summary["prediction"]["delta_exponent"] == pytest.approx(1.0)
    errors = [row["l2_error"] for row in summary["ladder"]]
    assert all(e > 0 for e in errors)
