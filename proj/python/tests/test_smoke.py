import math

import numpy as np
import pytest

import vqrate


def test_uniform_closed_form():
    u = vqrate.Measure("uniform:0,1")
    r = vqrate.solve(u, 4, method="newton")
    assert r["converged"]
    np.testing.assert_allclose(r["grid"][:, 0], [(2 * i + 1) / 8 for i in range(4)], atol=1e-10)
    assert abs(r["distortion"] - 1 / (12 * 16)) < 1e-12


def test_gaussian_k2_and_certificate():
    g = vqrate.Measure("gauss:0,1")
    r = vqrate.solve(g, 2, method="newton")
    np.testing.assert_allclose(r["grid"][:, 0], [-math.sqrt(2 / math.pi), math.sqrt(2 / math.pi)], atol=1e-9)
    c = vqrate.pd_certificate(r["grid"], g)
    assert c["positive_definite"] and c["lambda_star"] > 0
    H = vqrate.hessian_1d(r["grid"], g)
    assert H.shape == (2, 2)
    assert np.allclose(H, H.T)


def test_distortion_and_gradient():
    u = vqrate.Measure("uniform:0,1")
    d, se = vqrate.distortion(np.array([0.25, 0.75]), u)
    assert abs(d - 1 / 48) < 1e-15 and se == 0
    assert np.abs(vqrate.gradient(np.array([0.25, 0.75]), u)).max() < 1e-12


def test_w2_and_empirical():
    g = vqrate.Measure("gauss:0,1")
    dist, method = vqrate.w2(g, vqrate.Measure("gauss:1.5,1"))
    assert abs(dist - 1.5) < 1e-8 and method == "quantile1d"
    a = vqrate.Measure.empirical(g.sample(64, seed=1))
    b = vqrate.Measure.empirical(g.sample(64, seed=2))
    assert vqrate.w2(a, b)[0] > 0


def test_bounds():
    r = vqrate.evaluate_bound("thm21", {"e_star": 0.5, "w2": 0.1, "measured": 0.1})
    assert abs(r["bound"] - 0.24) < 1e-15
    assert abs(r["slack"] - 0.14) < 1e-15


def test_experiment_and_fit():
    rows, timeouts = vqrate.run_experiment(
        {"experiment": "thm21-slack", "distribution": "gauss:0,1", "K": [2], "n": [16, 64, 256], "seeds": 3}
    )
    assert timeouts == 0 and len(rows) == 9
    assert all(float(r["slack"]) >= 0 for r in rows)
    slope, _, r2 = vqrate.fit_rate([16, 64, 256], [0.25, 0.125, 0.0625])
    assert abs(slope + 0.5) < 1e-12 and abs(r2 - 1) < 1e-12


def test_errors_map_to_python():
    with pytest.raises(vqrate.ParseError):
        vqrate.Measure("bogus:1")
    with pytest.raises(vqrate.InvalidQuantizer):
        vqrate.distortion(np.array([0.1, 0.1]), vqrate.Measure("uniform:0,1"))
    with pytest.raises(ValueError):
        vqrate.run_experiment('{"experiment": "nope"}')
