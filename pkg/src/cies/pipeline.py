"""End-to-end run: build, solve, audit, validate, write reports."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .baseline_hia import COMPARISON_COLUMNS, PsoParams, compare_methods, hia_solve
from .config import CiesConfig
from .milp.audit import audit_feasibility, evaluate_objective
from .milp.backends import make_backend
from .milp.solution import ScheduleSolution, solve
from .problem import ProblemData, build_problem
from .validate import scenario_report
from .violation import Violation

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    solution: ScheduleSolution
    violations: List[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


def solve_and_audit(problem: ProblemData, backend=None) -> RunResult:
    sol = solve(problem, backend)
    return RunResult(sol, audit_feasibility(sol))


def with_alpha(problem: ProblemData, alpha: float) -> ProblemData:
    """Same sequences and fleet, different confidence level."""
    return replace(problem, cfg=problem.cfg.with_(alpha=alpha))


def alpha_sweep(problem: ProblemData, alphas: Sequence[float], backend=None, jobs: int = 1) -> List[RunResult]:
    backend = make_backend(backend if backend is not None else problem.cfg.solver)
    points = [with_alpha(problem, a) for a in alphas]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(lambda p: solve_and_audit(p, backend), points))


# --- report writers ---------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "0.000000" if abs(v) < 5e-7 else f"{v:.6f}"
    return str(v)


def _write_table(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _columns(path: Path, cols: Dict[str, np.ndarray]) -> None:
    n = len(next(iter(cols.values())))
    header = ["period"] + list(cols)
    rows = [[t + 1] + [cols[k][t] for k in cols] for t in range(n)]
    _write_table(path, header, rows)


def write_dispatch(sol: ScheduleSolution, out: Path) -> None:
    p = sol.problem
    cfg = p.cfg
    s = sol.series
    lp = cfg.loads
    _columns(out / "dispatch_electric.csv", {
        "price_yuan_per_kwh": lp.price_e, "base_load_kw": lp.p0,
        "load_kw": lp.p0 + s("p_tse") - s("p_ie") + s("p_ev"),
        "ev_kw": s("p_ev"), "tse_kw": s("p_tse"), "ie_kw": s("p_ie"),
        "grid_el_kw": s("pg_el"), "grid_eb_kw": s("pg_hl"), "grid_p2g_kw": s("pg_p2g"),
        "renewable_expected_kw": p.e_rg, "renewable_el_kw": s("prg_el"),
        "renewable_eb_kw": s("prg_hl"), "renewable_p2g_kw": s("prg_p2g"), "curtailed_kw": s("ps"),
        "esd_charge_kw": s("esd_ch"), "esd_discharge_kw": s("esd_dc"), "esd_energy_kwh": s("esd_c"),
        "mt_kw": s("p_mt"), "eb_kw": s("p_eb"), "p2g_kw": s("p_p2g"),
        "reserve_grid_kw": s("r_grid"), "reserve_esd_kw": s("r_esd"),
        "reserve_required_kw": p.min_reserve(),
    })
    _columns(out / "dispatch_gas.csv", {
        "price_yuan_per_m3": lp.price_g, "base_load_m3": lp.q0,
        "load_m3": lp.q0 + s("q_tsq") - s("q_iq"), "tsq_m3": s("q_tsq"), "iq_m3": s("q_iq"),
        "grid_gas_m3": s("qg_gl"), "p2g_gas_m3": s("q_p2g"), "mt_fuel_m3": s("q_mt"),
        "mt_fuel_grid_m3": s("qg_mt"), "mt_fuel_p2g_m3": s("qp2g_mt"),
        "p2g_on": s("theta"), "mt_on": s("psi"),
    })
    _columns(out / "dispatch_heat.csv", {
        "base_load_kw": p.h0, "curtailed_kw": s("h_ch"), "load_kw": p.h0 - s("h_ch"),
        "eb_kw": s("h_eb"), "mt_kw": s("h_mt"), "hsd_charge_kw": s("hsd_ch"),
        "hsd_discharge_kw": s("hsd_dc"), "hsd_energy_kwh": s("hsd_c"),
        "t_outdoor_c": lp.t_out, "t_indoor_c": s("t_in"),
        "t_min_c": p.bands[:, 0], "t_max_c": p.bands[:, 1],
    })


def write_costs(sol: ScheduleSolution, out: Path) -> None:
    c = evaluate_objective(sol).as_dict()
    rows = [(k, c[k]) for k in ("energy_purchase", "spinning_reserve", "maintenance", "environmental",
                                "idr_compensation", "total")]
    rows.append(("curtailment_kwh", max(0.0, sol.curtailment_kwh())))
    _write_table(out / "costs.csv", ["item", "value"], rows)


SWEEP_COLUMNS = ("alpha", "total_reserve_kwh", "total_cost", "energy_purchase", "spinning_reserve",
                 "maintenance", "environmental", "idr_compensation", "violations")


def sweep_rows(alphas, results: Sequence[RunResult]):
    rows = []
    for a, r in zip(alphas, results):
        c = evaluate_objective(r.solution).as_dict()
        reserve = float(r.solution.reserve().sum() * r.solution.problem.cfg.dt)
        rows.append([a, reserve, c["total"]] + [c[k] for k in SWEEP_COLUMNS[3:8]] + [len(r.violations)])
    return rows


def write_sweep(rows, out: Path) -> None:
    _write_table(out / "reserve_sweep.csv", SWEEP_COLUMNS, rows)


def write_comparison(table: List[dict], out: Path) -> None:
    _write_table(out / "comparison.csv", COMPARISON_COLUMNS, [[r[c] for c in COMPARISON_COLUMNS] for r in table])


def write_audit(violations: Sequence[Violation], out: Path, extra: Optional[dict] = None) -> None:
    doc = {"violations": [v.as_dict() for v in violations], "count": len(violations)}
    if extra:
        doc.update(extra)
    (out / "audit.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def hia_comparison(problem: ProblemData, alphas: Sequence[float], params: PsoParams, backend=None):
    """MILP and HIA at each confidence level; both schedules are audited."""
    rows, audits = [], []
    for a in alphas:
        pa = with_alpha(problem, a)
        milp = solve_and_audit(pa, backend)
        hia = hia_solve(pa, params)
        audits.append((a, milp.violations, audit_feasibility(hia.solution)))
        rows.append((a, evaluate_objective(milp.solution).total, milp.solution.wall_time,
                     hia.cost, hia.wall_time))
    return compare_methods(rows), audits
