"""Shared fixtures: the reference configuration used by the frozen values."""

import json

import pytest

from compacta import CubicSpec, MaterialParams, SettlingScenario


@pytest.fixture
def base_materials():
    """Material set the symbolic reference values were computed for."""
    return MaterialParams(
        rho_s=2000.0,
        rho_f=1000.0,
        lambda_s=1.0e7,
        mu_s=1.0e7,
        mu_tilde_s=1.0e5,
        mu_tilde_f=1.0e3,
    )


@pytest.fixture
def base_spec():
    """Unit cell with split 1/2 and relative amplitude 1/4."""
    return CubicSpec(l0=1.0, g=0.5, h=0.25)


@pytest.fixture
def base_scenario():
    """Settlement ramp reaching 1 percent compression at t0 = 10 s."""
    return SettlingScenario(eta=0.01, t0=10.0, t_f=50.0, extents=(100.0, 100.0, 100.0))


@pytest.fixture
def base_config_dict():
    """JSON-shaped run description matching the fixtures above."""
    return {
        "materials": {
            "rho_s": 2000.0,
            "rho_f": 1000.0,
            "lambda_s": 1.0e7,
            "mu_s": 1.0e7,
            "mu_tilde_s": 1.0e5,
            "mu_tilde_f": 1.0e3,
        },
        "cell": {"l0": 1.0, "g": 0.5, "h": 0.25},
        "scenario": {
            "eta": 0.01,
            "t0": 10.0,
            "t_f": 50.0,
            "L1": 100.0,
            "L2": 100.0,
            "L3": 100.0,
        },
    }


@pytest.fixture
def write_config(tmp_path):
    """Factory dropping a config dict to disk and returning its path."""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2) + "\n")
        return str(path)

    return _write
