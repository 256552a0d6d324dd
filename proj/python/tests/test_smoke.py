import math
import pathlib

import pytest

import finslercomp as fc

SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "scenarios"


def test_zoo_has_nine_spaces():
    names = {e["name"] for e in fc.zoo()}
    assert len(names) == 9
    assert {"euclidean", "sphere", "minkowski", "beem"} <= names


def test_epsilon_range_constant():
    # N = inf: c = (1 - eps^2) / m
    assert fc.epsilon_range_constant(3, "positive", math.inf, 0.5) == pytest.approx(0.75 / 2)
    # N = n: c = 1/m regardless of eps
    assert fc.epsilon_range_constant(3, "positive", 3.0, 1.0) == pytest.approx(0.5)
    with pytest.raises(fc.HypothesisError):
        fc.epsilon_range_constant(3, "positive", 2.0, 0.0)


def test_minkowski_legendre_roundtrip():
    x, v = [0.0, 0.0], [1.0, 0.3]
    w = fc.legendre("minkowski", x, v)
    assert w == pytest.approx([-1.0, 0.3], abs=1e-12)
    assert fc.legendre_inverse("minkowski", x, w) == pytest.approx(v, abs=1e-10)


def test_run_scenario_dict():
    sc = {
        "id": "py_conjugate_sphere",
        "space": {"zoo": "sphere", "n": 2},
        "bundle": {"origin": [1, 0], "directions": [[0, 1]], "horizon": 4},
        "checks": [{"name": "conjugate_points", "tol": 1e-3, "expected": math.pi}],
    }
    code, report = fc.run_scenario(sc)
    assert code == 0
    assert report["checks"][0]["status"] == "pass"


def test_run_scenario_file_and_invalid():
    code, report = fc.run_scenario(SCENARIOS / "space_euclidean.json")
    assert code == 0
    assert report["scenario"] == "space_euclidean"
    with pytest.raises(fc.ScenarioError):
        fc.run_scenario({"id": "bad", "space": {"zoo": "no_such_space"}, "checks": []})
