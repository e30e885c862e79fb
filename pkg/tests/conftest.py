import copy
import shutil

import pytest

from cies.config import bundled_config, bundled_config_dict, config_from_dict
from cies.problem import build_problem

try:
    import highspy  # noqa: F401
    HAVE_HIGHS = True
except ImportError:
    HAVE_HIGHS = False

needs_highs = pytest.mark.skipif(not HAVE_HIGHS, reason="highspy not installed")


def tiny_dict(alpha=0.0, scenario=2, n_evs=0, **changes):
    """Two 12-hour periods, no EVs: a small instance an exact solver and PSO can both handle."""
    d = copy.deepcopy(bundled_config_dict())
    d["horizon"] = {"periods": 2, "dt_h": 12.0}
    d["wind"]["scale_m_s"] = [11.0, 9.0]
    d["pv"]["p_max_kw"] = [0.0, 300.0]
    d["loads"] = {"p0_kw": [400.0, 650.0], "q0_m3": [22.0, 38.0], "t_out_c": [-14.0, -8.0]}
    d["prices"]["electricity_yuan_per_kwh"] = [0.35, 1.05]
    d["prices"]["gas_yuan_per_m3"] = [2.8, 3.2]
    d["ev"]["n_evs"] = n_evs
    # a larger air volume keeps the 12-hour thermal step stable
    d["building"]["volume"] = 720000.0
    d["solver"] = {"kind": "scipy"}
    d.update(scenario=scenario, alpha=alpha, **changes)
    return d


def tiny_config(alpha=0.0, scenario=2, n_evs=0, **changes):
    return config_from_dict(tiny_dict(alpha, scenario, n_evs, **changes))


@pytest.fixture(scope="session")
def bundled():
    return bundled_config()


@pytest.fixture(scope="session")
def problem3(bundled):
    return build_problem(bundled)


_SOLVED = {}


def solved(scenario=3, alpha=0.9):
    """Cached MILP solution on the bundled dataset."""
    from cies.pipeline import solve_and_audit

    key = (scenario, alpha)
    if key not in _SOLVED:
        cfg = bundled_config(scenario=scenario, alpha=alpha)
        _SOLVED[key] = solve_and_audit(build_problem(cfg))
    return _SOLVED[key]


@pytest.fixture
def solved_run():
    if not HAVE_HIGHS:
        pytest.skip("highspy not installed")
    return solved
