import json

import numpy as np
import pytest

import nnghmc


def test_banana_gradient_matches_finite_differences():
    t = nnghmc.BananaTarget(1.0, 0.1, 1.0)
    q = np.array([0.3, -0.4])
    h = 1e-6
    fd = np.array([(t.potential(q + h * e) - t.potential(q - h * e)) / (2 * h) for e in np.eye(2)])
    assert np.allclose(t.gradient(q), fd, rtol=1e-5, atol=1e-8)


def test_exact_chain_recovers_gaussian_moments():
    t = nnghmc.DiagonalGaussianTarget(np.array([1.0, 4.0]))
    r = nnghmc.run_hmc(t, np.zeros(2), leapfrog_steps=10, step_size=0.3, iterations=4000, seed=1)
    draws = r["draws"]
    assert draws.shape == (4000, 2)
    assert 0.5 < r["acceptance"] <= 1.0
    var = draws[400:].var(axis=0)
    assert np.all(np.abs(var - [1.0, 4.0]) < [0.2, 0.8])


def test_network_run_is_deterministic_and_exports_the_net():
    t = nnghmc.BananaTarget(1.0, 0.1, 1.0)
    kw = dict(leapfrog_steps=5, step_size=0.1, iterations=600, collect_iterations=300, hidden=20, epochs=5, seed=2)
    a = nnghmc.run_nnghmc(t, np.zeros(2), **kw)
    b = nnghmc.run_nnghmc(t, np.zeros(2), **kw)
    assert a["adopted"]
    assert np.array_equal(a["draws"], b["draws"])
    assert nnghmc.net_forward(a["net"], np.zeros(2)).shape == (2,)


def test_config_round_trip_and_errors():
    resolved = json.loads(nnghmc.resolve_config('{"sampler": {"iterations": 50}}'))
    assert resolved["sampler"]["iterations"] == 50
    assert "oracle" in resolved
    with pytest.raises(ValueError, match="unknown key"):
        nnghmc.resolve_config('{"sampler": {"stepsize": 0.1}}')
    run = nnghmc.run_config(
        '{"target": {"family": "banana"}, "oracle": {"kind": "exact"},'
        ' "sampler": {"leapfrog_steps": 5, "step_size": 0.1, "iterations": 200}}'
    )
    assert run["draws"].shape == (200, 2)
    assert "acceptance" in run["summary"]


def test_ess_and_ks():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2000, 2))
    report = nnghmc.ess(x)
    assert report["min"] > 1000
    assert nnghmc.ks_statistic(x[:, 0], x[:, 0]) == 0.0


def test_verify_passes():
    ok, text = nnghmc.verify(chi_square_draws=20000)
    assert ok, text
    assert "PASS reversibility" in text
