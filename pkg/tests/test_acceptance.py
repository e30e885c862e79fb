"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

The bundled-dataset criteria (4-6, 8-10) share solves through module fixtures,
and criterion 9 runs the PSO baseline with its default parameters, so the
whole file takes a few minutes.
"""

import json
import time

import numpy as np
import pytest
from scipy import integrate, stats

from cies import cli
from cies.baseline_hia import hia_solve
from cies.ccp import ReserveContext, build_chance_rows, build_sos2_min_rows, min_reserve, shift_cost_rows
from cies.config import bundled_config
from cies.devices import mt_outputs, p2g_gas_output
from cies.milp import ModelIR, ScipyBackend
from cies.milp.audit import audit_feasibility, evaluate_objective
from cies.pipeline import alpha_sweep
from cies.uncertainty import (ProbSeq, PvPowerModel, WindPowerModel, convolve, discretize, expectation,
                              pv_distribution, wt_distribution)
from cies.validate import monte_carlo_reserve_check

from conftest import needs_highs, solved

SWEEP = (0.80, 0.85, 0.90, 0.95, 1.00)
HIA_ALPHAS = (0.90, 0.95, 1.00)
SCIPY = ScipyBackend()


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {n} failed: {detail}"
    return report


# --- sequences and oracles ---------------------------------------------------------

def wind_mean_by_quadrature(m: WindPowerModel) -> float:
    pdf = stats.weibull_min(m.shape, scale=m.scale).pdf
    ramp, _ = integrate.quad(lambda v: m.p_rated * (v - m.v_in) / (m.v_r - m.v_in) * pdf(v), m.v_in, m.v_r,
                             epsabs=1e-12)
    return ramp + m.p_rated * stats.weibull_min(m.shape, scale=m.scale).sf(m.v_r)


def test_c01_sequence_correctness(verdict):
    q = 5.0
    wt = WindPowerModel(scale=10.0, shape=1.8, v_in=3.0, v_r=15.0, p_rated=600.0)
    pv = PvPowerModel(lambda1=3.0, lambda2=5.0, p_max=360.0)
    t0 = time.perf_counter()
    seqs = {"wt": discretize(wt_distribution(wt), q), "pv": discretize(pv_distribution(pv), q)}
    elapsed = time.perf_counter() - t0
    exact = {"wt": wind_mean_by_quadrature(wt), "pv": pv.p_max * pv.lambda1 / (pv.lambda1 + pv.lambda2)}
    sums = {k: abs(s.probs.sum() - 1.0) for k, s in seqs.items()}
    gaps = {k: abs(expectation(s) - exact[k]) for k, s in seqs.items()}
    ok = max(sums.values()) <= 1e-9 and max(gaps.values()) <= q / 2 and elapsed < 1.0
    verdict(1, ok, f"sum errors {max(sums.values()):.1e}, expectation gaps "
                   f"wt {gaps['wt']:.3f} pv {gaps['pv']:.3f} kW (limit {q / 2}), {elapsed:.3f} s")


def random_seq(rng, q):
    p = rng.random(int(rng.integers(1, 60)))
    p[rng.random(p.size) < 0.2] = 0.0
    p[0] += 1e-3
    return ProbSeq(q, p / p.sum())


def test_c02_convolution_linearity(verdict):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        q = float(rng.choice([0.5, 1.0, 5.0, 10.0]))
        a, b = random_seq(rng, q), random_seq(rng, q)
        worst = max(worst, abs(expectation(convolve(a, b)) - expectation(a) - expectation(b)))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-9 and elapsed < 5.0, f"worst error {worst:.1e} over 1000 pairs, {elapsed:.2f} s")


def test_c03_deterministic_equivalence(verdict):
    rng = np.random.default_rng(3)
    worst_err, worst_time = 0.0, 0.0
    for _ in range(100):
        seq = random_seq(rng, float(rng.choice([1.0, 5.0])))
        alpha = float(rng.random())
        r_max = seq.n * seq.q + 1.0
        t0 = time.perf_counter()
        m = ModelIR("oracle")
        r = m.add_var("R", 0.0, r_max)
        build_chance_rows(m, ReserveContext([seq], r_max, alpha), [r])
        m.minimize(r)
        raw = SCIPY.solve(m)
        worst_time = max(worst_time, time.perf_counter() - t0)
        worst_err = max(worst_err, abs(raw.values[m.index("R")] - min_reserve(seq, alpha)))
    # the solver reports R at its feasibility tolerance, not bit-exact
    verdict(3, worst_err <= 1e-6 and worst_time < 1.0,
            f"worst |R - min_reserve| {worst_err:.1e}, slowest solve {worst_time:.3f} s")


# --- bundled dataset ---------------------------------------------------------------

@pytest.fixture(scope="module")
def sweep():
    from cies.problem import build_problem
    problem = build_problem(bundled_config(scenario=3))
    t0 = time.perf_counter()
    results = alpha_sweep(problem, SWEEP)
    return dict(zip(SWEEP, results)), time.perf_counter() - t0


@needs_highs
def test_c04_monotone_in_confidence(sweep, verdict):
    runs, elapsed = sweep
    reserve = [float(runs[a].solution.reserve().sum() * runs[a].solution.problem.cfg.dt) for a in SWEEP]
    cost = [evaluate_objective(runs[a].solution).total for a in SWEEP]
    # ties allowed up to the solver's relative optimality gap
    ok_r = all(b >= a - 1e-6 for a, b in zip(reserve, reserve[1:]))
    ok_c = all(b >= a - 1e-6 * abs(a) for a, b in zip(cost, cost[1:]))
    verdict(4, ok_r and ok_c and elapsed < 600,
            "reserve " + ", ".join(f"{r:.1f}" for r in reserve) + " kWh; cost "
            + ", ".join(f"{c:.2f}" for c in cost) + f"; sweep {elapsed:.1f} s")


@needs_highs
def test_c05_scenario_ordering(verdict):
    cost = {s: evaluate_objective(solved(s).solution).total for s in (1, 2, 3)}
    curt = {s: solved(s).solution.curtailment_kwh() for s in (1, 2, 3)}
    ok = (cost[1] > cost[2] > cost[3] and abs(curt[2]) <= 1e-6 and abs(curt[3]) <= 1e-6
          and curt[1] >= -1e-6)
    verdict(5, ok, "cost S1 {:.2f} > S2 {:.2f} > S3 {:.2f}; curtailment {:.2f} / {:.2g} / {:.2g} kWh".format(
        cost[1], cost[2], cost[3], curt[1], curt[2], curt[3]))


@needs_highs
def test_c06_chance_constraint_validity(verdict):
    run = solved(3, 0.9)
    rates = monte_carlo_reserve_check(run.solution, run.solution.problem.seqs, 0.9, n_samples=10_000)
    low = int(np.argmin(rates))
    verdict(6, bool(np.all(rates >= 0.88)), f"lowest adequacy {rates[low]:.4f} in period {low + 1}")


def test_c07_linearization_equivalence(verdict):
    lo = hi = 50.0
    gamma = 0.37
    worst = 0.0
    for x in np.linspace(-lo, hi, 100):
        epi = ModelIR("epi")
        xv = epi.add_var("x", x, x)
        epi.minimize(shift_cost_rows(epi, xv, gamma, "s"))
        sos = ModelIR("sos2")
        xs = sos.add_var("x", x, x)
        enc = build_sos2_min_rows(sos, xs, lo, hi, "g")
        sos.minimize(-gamma * enc.g)
        worst = max(worst, abs(SCIPY.solve(epi).objective - SCIPY.solve(sos).objective))
    verdict(7, worst <= 1e-9, f"worst objective gap {worst:.1e} over 100 fixed-x LPs")


@needs_highs
def test_c08_end_to_end_audit(sweep, tmp_path, verdict):
    runs = [solved(s) for s in (1, 2, 3)] + list(sweep[0].values())
    counts = [len(audit_feasibility(r.solution, tol=1e-6)) for r in runs]
    code = cli.main(["run", "scenario3", "--out", str(tmp_path), "--mc-samples", "1000"])
    cli_count = json.loads((tmp_path / "audit.json").read_text())["count"]
    ok = sum(counts) == 0 and code == cli.EXIT_OK and cli_count == 0
    verdict(8, ok, f"{len(runs)} schedules and one CLI run (exit {code}): "
                   f"{sum(counts) + cli_count} violations at 1e-6")


@pytest.fixture(scope="module")
def hia_runs(sweep):
    runs = sweep[0]
    out = {}
    for a in HIA_ALPHAS:
        milp = runs[a].solution
        out[a] = (milp, hia_solve(milp.problem, alpha=a))
    return out


@needs_highs
def test_c09_baseline_dominance(hia_runs, verdict):
    lines, ok = [], True
    for a, (milp, hia) in hia_runs.items():
        m_cost = evaluate_objective(milp).total
        ok &= hia.cost >= m_cost - 1e-6 * abs(m_cost) and hia.wall_time > milp.wall_time
        ok &= milp.wall_time < 60.0 and not audit_feasibility(hia.solution)
        lines.append(f"a={a:.2f} MILP {m_cost:.2f} ({milp.wall_time:.1f} s) HIA {hia.cost:.2f} "
                     f"({hia.wall_time:.1f} s)")
    verdict(9, ok, "; ".join(lines))


@needs_highs
def test_c10_idr_conservation(sweep, hia_runs, verdict):
    sols = [solved(s).solution for s in (1, 2, 3)] + [r.solution for r in sweep[0].values()]
    sols += [h.solution for _, h in hia_runs.values()]
    worst_sum, worst_ratio = 0.0, 0.0
    for sol in sols:
        cfg = sol.problem.cfg
        fx, lp = cfg.flex, cfg.loads
        worst_sum = max(worst_sum, abs(sol.series("p_tse").sum()), abs(sol.series("q_tsq").sum()))
        for key, ratio, base in (("p_tse", fx.a_tse, lp.p0), ("p_ie", fx.a_ie, lp.p0),
                                 ("q_tsq", fx.a_tsq, lp.q0), ("q_iq", fx.a_iq, lp.q0)):
            worst_ratio = max(worst_ratio, float(np.max(np.abs(sol.series(key)) - ratio * base)))
        worst_ratio = max(worst_ratio, -float(min(sol.series("p_ie").min(), sol.series("q_iq").min())))
    ok = worst_sum <= 1e-6 and worst_ratio <= 1e-6
    verdict(10, ok, f"{len(sols)} schedules: worst |sum| {worst_sum:.1e}, worst ratio excess {worst_ratio:.1e}")


def test_c11_device_path_identity(verdict):
    d = bundled_config().devices
    p_in = 250.0
    p_out, _ = mt_outputs(p2g_gas_output(p_in, d.p2g), d.mt)
    ratio = p_out / p_in
    expected = d.p2g.eta * d.mt.eta_e
    verdict(11, abs(ratio - 0.24) <= 1e-9 and abs(ratio - expected) <= 1e-9,
            f"path efficiency {ratio:.12f} (eta_p2g * eta_e = {expected:.12f})")
