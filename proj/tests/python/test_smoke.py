import json

import numpy as np
import pytest

import rmtspec


def test_eigenvalues_match_numpy():
    rng = np.random.default_rng(0)
    w = rng.standard_normal((60, 20))
    ours = rmtspec.eigenvalues(w)
    ref = np.sort(np.linalg.eigvalsh(w.T @ w / 60))
    np.testing.assert_allclose(ours, ref, rtol=1e-9, atol=1e-12)


def test_transposed_input_gives_same_spectrum():
    w = rmtspec.synth("gaussian", seed=2, rows=80, cols=30)
    np.testing.assert_allclose(rmtspec.eigenvalues(w), rmtspec.eigenvalues(w.T), rtol=1e-10)


def test_gaussian_layer_is_random_like():
    w = rmtspec.synth("gaussian", seed=7)
    report = rmtspec.analyze(w, name="g")
    assert report["layer_name"] == "g"
    assert report["shape"] == [2000, 500]
    assert report["phase"]["label"] == "random_like"
    assert abs(report["mp_fit"]["sigma_sq"] - 1.0) < 0.03


def test_power_law_fit_on_pareto_sample():
    rng = np.random.default_rng(3)
    x = (1.0 - rng.random(5000)) ** (-1.0 / 1.5)
    fit = rmtspec.fit_power_law(x)
    assert 2.4 <= fit["alpha"] <= 2.6
    assert {a["model"] for a in fit["alternatives"]} == {
        "truncated_pl",
        "exponential",
        "lognormal",
        "stretched_exponential",
    }


def test_exporter_layout_round_trips(tmp_path):
    rng = np.random.default_rng(5)
    layers = {
        "fc1": rng.standard_normal((384, 96)),
        "fc2": rng.standard_normal((96, 48)),
        "conv": rng.standard_normal((3, 3, 4, 4)),
    }
    manifest = rmtspec.write_layers(tmp_path, layers)
    doc = json.load(open(manifest))
    assert [layer["name"] for layer in doc["layers"]] == ["fc1", "fc2"]
    assert doc["layers"][0]["shape"] == [384, 96]

    loaded = rmtspec.load_npy(tmp_path / "fc1.npy")
    np.testing.assert_allclose(loaded, layers["fc1"].astype(np.float32), rtol=0, atol=0)

    result = rmtspec.analyze_path(manifest)
    assert [layer["layer_name"] for layer in result["layers"]] == ["fc1", "fc2"]
    assert result["layers"][0]["q"] == pytest.approx(4.0)
    assert result["errors"] == []
    assert "generated_at" not in result


def test_errors_surface_as_exceptions():
    with pytest.raises(rmtspec.RmtspecError):
        rmtspec.eigenvalues(np.ones((1, 5)))
    with pytest.raises(rmtspec.RmtspecError):
        rmtspec.synth("no_such_kind", seed=1)
