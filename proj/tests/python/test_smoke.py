import json
import math

import pytest

import cavsq


def test_squeezing_parameter():
    assert cavsq.squeezing_parameter(1.1) == pytest.approx(math.log(2.1 / 0.1), rel=1e-12)
    assert cavsq.photons_at_t_pi(1.1) == pytest.approx(109.7505669, rel=1e-9)
    assert cavsq.t_pi_from_theta(2 * math.pi * 10e3) == pytest.approx(50e-6)


def test_gaussian_matches_closed_form():
    theta = 2 * math.pi * 10e3
    tpi = math.pi / theta
    res = cavsq.evolve_gaussian(1.1, theta, [0.0, 0.5 * tpi, tpi])
    assert res["zeta12"][0] == 1.0
    assert res["zeta12"][2] < 1e-8
    ref = cavsq.occupations_closed_form(1.1, theta, tpi)
    assert res["n1"][2] == pytest.approx(ref["n1"], rel=1e-9)


def test_fock_route():
    res = cavsq.evolve_fock(3.0, 1.0, [0.0, math.pi], [24, 24, 10])
    assert res["target_fidelity"][1] > 1 - 1e-6
    assert res["n1"][1] == pytest.approx(cavsq.photons_at_t_pi(3.0), rel=1e-6)


def test_spectrum_and_errors():
    grid = cavsq.default_grid(10.0, 1.0, 2001)
    spec = cavsq.squeezing_spectrum(10.0 / math.sqrt(0.21), 11.0 / math.sqrt(0.21), 1.0, grid)
    assert spec["regime"] == "three-minima"
    shot = cavsq.squeezing_spectrum(0, 0, 1.0, grid[::10])
    assert max(abs(s - 1) for s in shot["s_plus"]) < 1e-10
    with pytest.raises(cavsq.StabilityError):
        cavsq.squeezing_spectrum(1.0, 0.0, 0.1, [-1.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        cavsq.squeezing_parameter(0.5)


def test_feasibility():
    p = cavsq.rb_preset()
    assert p["t_pi"] == pytest.approx(50e-6)
    assert cavsq.crossover_temperature(6.83e9) == pytest.approx(0.32779, rel=1e-4)
    assert cavsq.thermal_suppression(1.0, 99.0) == pytest.approx(0.01)


def test_cli_run(tmp_path):
    code = cavsq.run("feasibility", {"parameters": {}, "output_dir": str(tmp_path)})
    assert code == 0
    manifest = json.loads((tmp_path / "feasibility.manifest.json").read_text())
    assert manifest["command"] == "feasibility"
    with pytest.raises(ValueError):
        cavsq.run("evolve", {"parameters": {"kappa": 1.0}, "output_dir": str(tmp_path)})
