import numpy as np
import pytest

from cies import baseline_hia
from cies.baseline_hia import (COMPARISON_COLUMNS, GENES, HiaFailure, PsoParams, compare_methods,
                               decode, heuristic_genes, hia_solve)
from cies.milp import ScipyBackend
from cies.milp.audit import audit_feasibility, evaluate_objective
from cies.milp.solution import ScheduleSolution, solve
from cies.problem import build_problem
from cies.violation import Violation

from conftest import tiny_config

SMALL = PsoParams(population=30, iterations=60, mc_samples=1000, seed=7)


@pytest.fixture(scope="module")
def convex_tiny():
    # scenario 2 without EVs or reserve rows has no binaries at all
    return build_problem(tiny_config(alpha=0.0, scenario=2))


@pytest.fixture(scope="module")
def convex_result(convex_tiny):
    return hia_solve(convex_tiny, SMALL)


def test_convex_instance_close_to_milp(convex_tiny, convex_result):
    milp = solve(convex_tiny, ScipyBackend())
    assert milp.objective_reported == pytest.approx(evaluate_objective(milp).total)
    assert convex_result.cost >= milp.objective_reported - 1e-6
    assert convex_result.cost <= 1.01 * milp.objective_reported


def test_result_is_audited(convex_result):
    sol = convex_result.solution
    assert audit_feasibility(sol) == []
    assert convex_result.cost == pytest.approx(evaluate_objective(sol).total)
    assert convex_result.best_penalty == 0.0
    assert np.all(np.diff(convex_result.history) <= 0)


def test_fixed_seed_is_deterministic(convex_tiny):
    p = PsoParams(population=10, iterations=5, seed=3)
    a, b = hia_solve(convex_tiny, p), hia_solve(convex_tiny, p)
    assert a.cost == b.cost
    assert a.solution.values == b.solution.values


def test_chance_constrained_tiny_instance():
    problem = build_problem(tiny_config(alpha=0.9, scenario=3))
    res = hia_solve(problem, SMALL)
    milp = solve(problem, ScipyBackend())
    assert audit_feasibility(res.solution) == []
    assert res.cost >= milp.objective_reported - 1e-6
    np.testing.assert_array_less(problem.min_reserve() - problem.cfg.q - 1e-6, res.solution.reserve())


def test_alpha_override(convex_tiny):
    res = hia_solve(convex_tiny, PsoParams(population=10, iterations=3), alpha=0.9)
    assert res.alpha == 0.9 and res.solution.problem.alpha == 0.9


def test_decode_heuristic_is_repaired(convex_tiny):
    genes = heuristic_genes(convex_tiny)
    assert genes.shape == (len(GENES), convex_tiny.n_periods)
    series, ev_power, viol = decode(convex_tiny, genes)
    sol = ScheduleSolution.from_series(convex_tiny, series, ev_power)
    assert viol == pytest.approx(0.0, abs=1e-9)
    assert audit_feasibility(sol) == []
    # transferable loads stay conservative
    assert abs(series["p_tse"].sum()) < 1e-6 and abs(series["q_tsq"].sum()) < 1e-6


def test_no_feasible_particle_raises(convex_tiny, monkeypatch):
    monkeypatch.setattr(baseline_hia, "audit_feasibility", lambda sol: [Violation("x", 1, 1.0)])
    with pytest.raises(HiaFailure) as exc:
        hia_solve(convex_tiny, PsoParams(population=4, iterations=2))
    assert exc.value.best_penalty == 0.0


@pytest.mark.parametrize("kw", [dict(population=1), dict(iterations=0), dict(social=0), dict(mc_samples=10)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        PsoParams(**kw)


def test_compare_methods():
    table = compare_methods([(0.9, 100.0, 1.0, 100.0, 5.0), (0.95, 100.0, 1.0, 110.0, 5.0)])
    assert [tuple(r) for r in table] == [COMPARISON_COLUMNS] * 2
    assert table[0]["gap_percent"] == 0.0 and not table[0]["hia_beats_milp"]
    assert table[1]["gap_percent"] == pytest.approx(10.0)
