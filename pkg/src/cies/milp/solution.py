"""Solved schedules and the solve entry point."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from ..problem import ProblemData
from .backends import make_backend
from .ir import ModelIR
from .model import build_model, ev_blocks

# Per-period series every schedule carries, whatever produced it.
SERIES_KEYS = (
    "pg_el", "pg_hl", "pg_p2g", "prg_el", "prg_hl", "prg_p2g", "ps",
    "esd_ch", "esd_dc", "esd_c", "hsd_ch", "hsd_dc", "hsd_c",
    "p_eb", "h_eb", "p_p2g", "q_p2g", "theta",
    "q_mt", "qg_mt", "qp2g_mt", "p_mt", "h_mt", "psi", "qg_gl",
    "r_grid", "r_esd", "p_tse", "p_ie", "q_tsq", "q_iq", "h_ch", "t_in", "p_ev",
)


@dataclass
class ScheduleSolution:
    """A day-ahead schedule as raw per-period values.

    ``values`` maps variable names (``key_t`` with 1-based ``t``) to numbers.
    ``ev_power`` holds each EV's charging power per period (kW).
    """

    problem: ProblemData
    values: Dict[str, float]
    ev_power: Dict[int, np.ndarray]
    status: str = "unknown"
    objective_reported: Optional[float] = None
    method: str = "milp"
    wall_time: float = 0.0
    meta: Dict[str, str] = field(default_factory=dict)

    @property
    def n_periods(self) -> int:
        return self.problem.n_periods

    def series(self, key: str) -> np.ndarray:
        return np.array([self.values.get(f"{key}_{t}", 0.0) for t in range(1, self.n_periods + 1)])

    def schedule(self) -> Dict[str, np.ndarray]:
        return {k: self.series(k) for k in SERIES_KEYS}

    def reserve(self) -> np.ndarray:
        return self.series("r_grid") + self.series("r_esd")

    def curtailment_kwh(self) -> float:
        return float(self.series("ps").sum() * self.problem.cfg.dt)

    @classmethod
    def from_series(cls, problem: ProblemData, series: Mapping[str, np.ndarray],
                    ev_power: Mapping[int, np.ndarray], **kw) -> "ScheduleSolution":
        values = {}
        for key, arr in series.items():
            for t, v in enumerate(np.asarray(arr, dtype=float), start=1):
                values[f"{key}_{t}"] = float(v)
        return cls(problem, values, {k: np.asarray(v, dtype=float) for k, v in ev_power.items()}, **kw)


def ev_power_from_values(problem: ProblemData, values: Mapping[str, float]) -> Dict[int, np.ndarray]:
    """Per-EV charging power implied by the on/partial binaries."""
    T = problem.n_periods
    rated = problem.cfg.ev.p_ch_rated
    out = {}
    for s in problem.sessions:
        _, partial = ev_blocks(problem, s)
        p = np.zeros(T)
        for k in range(1, T + 1):
            p[k - 1] = rated * values.get(f"ev_on_{s.ev_id}_{k}", 0.0) + partial * values.get(f"ev_part_{s.ev_id}_{k}", 0.0)
        out[s.ev_id] = p
    return out


def solution_from_raw(problem: ProblemData, m: ModelIR, raw, method: str = "milp",
                      wall_time: float = 0.0) -> ScheduleSolution:
    values = {name: float(v) for name, v in zip(m.names(), raw.values)}
    if not problem.cfg.idr_enabled:
        ev_power = {}
    else:
        ev_power = ev_power_from_values(problem, values)
    return ScheduleSolution(problem, values, ev_power, status=raw.status,
                            objective_reported=raw.objective, method=method,
                            wall_time=wall_time, meta=dict(raw.meta))


def solve(problem: ProblemData, backend=None, tmin_encoding: str = "epigraph",
          ordering_cuts: bool = True) -> ScheduleSolution:
    """Assemble, solve and wrap the result.  Wall time covers assembly and solve."""
    backend = make_backend(backend if backend is not None else problem.cfg.solver)
    t0 = time.perf_counter()
    m = build_model(problem, tmin_encoding, ordering_cuts)
    raw = backend.solve(m)
    elapsed = time.perf_counter() - t0
    return solution_from_raw(problem, m, raw, "milp", elapsed)
