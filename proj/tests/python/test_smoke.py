import json
import math
from pathlib import Path

import numpy as np
import pytest

import stlsynth

ROOT = Path(__file__).resolve().parents[2]
SCENARIO = ROOT / "scenarios" / "vehicle.scn.json"


@pytest.fixture(scope="module")
def scenario():
    return stlsynth.load_scenario(SCENARIO)


def test_set_membership_and_volume():
    box = stlsynth.Box(np.array([0.0, 0.0]), np.array([2.0, 1.0]))
    y = stlsynth.ConstrainedZonotope(box)
    assert stlsynth.contains_point(y, np.array([1.5, 0.5]))
    assert not stlsynth.contains_point(y, np.array([2.5, 0.5]))
    assert stlsynth.volume(y) == pytest.approx(2.0)
    assert len(stlsynth.vertices_2d(y)) == 4


def test_constrained_zonotope_emptiness():
    eye = np.eye(2)
    bad = stlsynth.ConstrainedZonotope(np.zeros(2), eye, np.array([[1.0, 0.0]]), np.array([2.0]))
    assert stlsynth.is_empty(bad)
    seg = stlsynth.ConstrainedZonotope(np.zeros(2), eye, np.array([[1.0, 0.0]]), np.array([0.5]))
    assert not stlsynth.is_empty(seg)
    big = stlsynth.expand(seg, 0.1)
    for y in np.linspace(-1, 1, 9):
        assert stlsynth.contains_point(big, np.array([0.5, y]))


def test_discretize_double_integrator():
    dt = 0.5
    ad, bd, ed = stlsynth.discretize(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]), np.eye(2), dt)
    np.testing.assert_allclose(ad, [[1, dt], [0, 1]], atol=1e-14)
    np.testing.assert_allclose(bd, [[dt * dt / 2], [dt]], atol=1e-14)


def test_dare_scalar_closed_form():
    # p = q + a^2 p - (a b p)^2 / (r + b^2 p) with a = b = q = r = 1:
    # p^2 - p - 1 = 0.
    p, k = stlsynth.dare(np.eye(1), np.eye(1), np.ones(1), np.ones(1))
    golden = (1 + math.sqrt(5)) / 2
    assert p[0, 0] == pytest.approx(golden, rel=1e-9)
    assert k[0, 0] == pytest.approx(golden / (1 + golden), rel=1e-9)


def test_partition_of_vehicle(scenario):
    cells = stlsynth.partition(scenario)
    assert [label for label, _ in cells] == [f"pi{i}" for i in range(1, 9)]


def test_run_and_artifacts(scenario, tmp_path):
    result = stlsynth.run(scenario, threads=1, out=tmp_path)
    assert result["satisfied"] is True
    assert (tmp_path / "result.json").exists()
    assert json.loads((tmp_path / "result.json").read_text())["satisfied"] is True
    svg = stlsynth.render_svg(result["scene"])
    assert svg.lstrip().startswith("<") and "</svg>" in svg


def test_monitor(scenario):
    times = np.arange(0.0, 7.75, 0.5)
    parked = np.tile([-1.6, 0.0, 1.6, 0.0], (len(times), 1))
    ok, witness = stlsynth.monitor(scenario, times, parked)
    assert not ok
    ok, _ = stlsynth.monitor(scenario, times, parked, formula="G[0,7] avoid(obstacles)")
    assert ok


def test_errors_carry_kind(scenario):
    with pytest.raises(stlsynth.StlsynthError) as info:
        stlsynth.monitor(scenario, [0.0, 0.5], np.zeros((2, 4)))
    assert info.value.args[1] == "HorizonTooShort"
    with pytest.raises(stlsynth.StlsynthError) as info:
        stlsynth.load_scenario(ROOT / "tests" / "data" / "malformed.scn.json")
    assert info.value.args[1] == "Parse"


def test_scenario_dict_round_trip(scenario):
    data = scenario.to_dict()
    again = stlsynth.scenario_from_dict(data)
    assert again.to_dict() == data
    assert again.formula == scenario.formula
