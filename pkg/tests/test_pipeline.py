import json
import os

import numpy as np
import pytest

from micro_reynolds.__main__ import main

FLAT = {
    "fluid": {"N2": 0.25, "Rc": 1.0, "alpha": 1.0, "beta": 1.0, "s": [1.0, 0.0]},
    "roughness": {"kind": "constant", "h0": 1.0},
    "cell": {"n": 8},
    "macro": {"mx": 8, "my": 8},
    "oracle": {"sweep": "config"},
}

COSINE = {
    "fluid": {"N2": 0.25, "Rc": 1.0, "alpha": 1.0, "beta": 1.0, "s": [1.0, 0.0]},
    "roughness": {"kind": "cosine", "h0": 1.0, "a": [0.2, 0.1], "phase": [0.1, 0.0]},
    "cell": {"n": 16},
    "macro": {"Lx": 2.0, "Ly": 1.0, "mx": 16, "my": 8},
}


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch):
    monkeypatch.delenv("MICRO_REYNOLDS_LOG", raising=False)
    monkeypatch.delenv("MICRO_REYNOLDS_THREADS", raising=False)


def _run(tmp_path, doc: dict, subcommand: str, name: str = "out", *args: str) -> tuple[int, str]:
    config = tmp_path / f"{name}.json"
    config.write_text(json.dumps(doc))
    outdir = str(tmp_path / name)
    return main([subcommand, "--config", str(config), "--out", outdir, *args]), outdir


def _report(outdir: str) -> dict:
    with open(os.path.join(outdir, "run_report.json")) as f:
        return json.load(f)


def _table(outdir: str, name: str) -> np.ndarray:
    # comment line, then the header row
    return np.loadtxt(os.path.join(outdir, name), delimiter=",", skiprows=2, ndmin=2)


def test_full_flat_film(tmp_path):
    code, outdir = _run(tmp_path, FLAT, "full")
    assert code == 0
    for name in (
        "coefficients.csv",
        "correctors.csv",
        "flow_factors.json",
        "pressure.csv",
        "oracle_report.json",
        "run_report.json",
        "micro-reynolds.log",
    ):
        assert os.path.exists(os.path.join(outdir, name)), name
    with open(os.path.join(outdir, "flow_factors.json")) as f:
        factors = json.load(f)
    K1 = np.array(factors["K1"]).reshape(2, 2)
    assert abs(K1[0, 1]) <= 1e-12 and abs(K1[1, 0]) <= 1e-12
    assert factors["theta1_harmonic_mean"] == pytest.approx(K1[0, 0], rel=1e-12)

    report = _report(outdir)
    assert report["exit_code"] == 0
    assert report["oracle"]["max_relative_error"] <= 1e-6
    assert report["residuals"]["mass"] <= 1e-10
    assert report["phi2_variant"] == "A2"

    coefficients = _table(outdir, "coefficients.csv")
    assert coefficients.shape == (8 * 8, 7)
    np.testing.assert_allclose(coefficients[:, 3], K1[0, 0], rtol=1e-12)
    assert _table(outdir, "pressure.csv").shape == (9 * 9, 7)


def test_existence_violation_stops_before_solving(tmp_path, capsys):
    doc = json.loads(json.dumps(FLAT))
    doc["fluid"]["alpha"] = 0.1
    code, outdir = _run(tmp_path, doc, "solve")
    assert code == 3
    assert "existence condition violated" in capsys.readouterr().err
    assert not os.path.exists(os.path.join(outdir, "coefficients.csv"))
    assert os.path.exists(os.path.join(outdir, "exception.log"))
    report = _report(outdir)
    assert report["exit_code"] == 3
    assert "validate" in report["error"]


def test_invalid_config(tmp_path, capsys):
    doc = json.loads(json.dumps(FLAT))
    doc["fluid"]["N2"] = 1.5
    code, _ = _run(tmp_path, doc, "coeffs")
    assert code == 2
    assert "fluid.N2 must lie in (0,1)" in capsys.readouterr().err


def test_unparsable_config(tmp_path):
    config = tmp_path / "broken.json"
    config.write_text('{"fluid": ')
    assert main(["coeffs", "--config", str(config), "--out", str(tmp_path / "broken")]) == 2


def test_missing_config(tmp_path, capsys):
    code = main(["coeffs", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "absent")])
    assert code == 2
    assert "cannot read" in capsys.readouterr().err


def test_numerical_failure_is_reported(tmp_path, monkeypatch, capsys):
    def singular(*args, **kwargs):
        raise np.linalg.LinAlgError("singular matrix")

    monkeypatch.setattr("micro_reynolds.pipeline.solve_pressure", singular)
    code, outdir = _run(tmp_path, COSINE, "solve")
    assert code == 4
    assert "[solve] InternalError: LinAlgError: singular matrix" in capsys.readouterr().err
    with open(os.path.join(outdir, "exception.log")) as f:
        assert "LinAlgError" in f.read()
    assert os.path.exists(os.path.join(outdir, "flow_factors.json"))
    assert _report(outdir)["exit_code"] == 4


def test_still_wall_gives_zero_pressure(tmp_path):
    doc = json.loads(json.dumps(COSINE))
    doc["fluid"]["s"] = [0.0, 0.0]
    code, outdir = _run(tmp_path, doc, "solve")
    assert code == 0
    pressure = _table(outdir, "pressure.csv")
    assert np.abs(pressure[:, 2]).max() <= 1e-12
    assert np.abs(pressure[:, 3:5]).max() <= 1e-12


def test_thread_count_does_not_change_outputs(tmp_path):
    _, single = _run(tmp_path, COSINE, "solve", "single", "--threads", "1")
    _, multi = _run(tmp_path, COSINE, "solve", "multi", "--threads", "3")
    for name in ("coefficients.csv", "correctors.csv", "flow_factors.json", "pressure.csv"):
        with open(os.path.join(single, name), "rb") as a, open(os.path.join(multi, name), "rb") as b:
            assert a.read() == b.read(), name


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MICRO_REYNOLDS_THREADS", "2")
    code, outdir = _run(tmp_path, FLAT, "coeffs")
    assert code == 0
    assert _table(outdir, "coefficients.csv").shape == (8 * 8, 7)


def test_tolerance_breach(tmp_path):
    doc = json.loads(json.dumps(COSINE))
    doc["macro"].update(solver="gmres", tol=1e-4)
    code, outdir = _run(tmp_path, doc, "solve")
    assert code == 5
    report = _report(outdir)
    assert report["exit_code"] == 5
    assert any("reynolds_residual" in breach for breach in report["breaches"])
    # outputs of the completed stages are kept
    assert os.path.exists(os.path.join(outdir, "pressure.csv"))


def test_phi2_override(tmp_path):
    doc = json.loads(json.dumps(FLAT))
    doc["fluid"]["alpha"] = 2.0
    code, outdir = _run(tmp_path, doc, "coeffs", "out", "--phi2-variant", "A1")
    assert code == 0
    assert _report(outdir)["phi2_variant"] == "A1"


BENCHMARK = os.path.join(os.path.dirname(__file__), "..", "benchmark")


def test_cosine_benchmark_regression(tmp_path):
    # roughness varies along z1 only, the correctors reduce to a one-dimensional laminate
    outdir = str(tmp_path / "cosine")
    config = os.path.join(BENCHMARK, "cosine", "config.json")
    assert main(["solve", "--config", config, "--out", outdir]) == 0

    with open(os.path.join(outdir, "flow_factors.json")) as f:
        factors = json.load(f)
    K1, K2 = np.array(factors["K1"]), np.array(factors["K2"])
    np.testing.assert_allclose(K1[[0, 3]], [2.578701909572286e-01, 2.760458972193169e-01], rtol=1e-9)
    np.testing.assert_allclose(K1[[1, 2]], 0.0, atol=1e-12)
    np.testing.assert_allclose(K2[[0, 3]], [-3.775075336621835e-02, -3.496007391954856e-02], rtol=1e-9)
    np.testing.assert_allclose(K2[[1, 2]], 0.0, atol=1e-12)
    assert factors["L1"] == pytest.approx(2.454659685802756e-01, rel=1e-9)
    assert factors["L2"] == pytest.approx(-1.476867274191121e-01, rel=1e-9)

    table = _table(outdir, "pressure.csv")
    assert table.shape == (65 * 33, 7)
    # linear pressure, subsampled
    pressure = table[::7]
    x1, p, U, W = pressure[:, 0], pressure[:, 2], pressure[:, 3:5], pressure[:, 5:7]
    np.testing.assert_allclose(p, 9.518974165609922e-01 * (x1 - 1.0), atol=1e-10)
    np.testing.assert_allclose(U, 0.0, atol=1e-10)
    np.testing.assert_allclose(W[:, 0], 0.0, atol=1e-10)
    np.testing.assert_allclose(W[:, 1], -1.809651314659117e-01, rtol=1e-9)
