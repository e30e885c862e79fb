"""Independent recomputation of costs and constraint checks on raw schedule values.

Nothing here reads the model rows: every quantity is rebuilt from the
per-period series so a wrong row in the assembly shows up as a violation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from ..demand import FlexDecision, check_flex_bounds
from ..devices import check_device_limits
from ..violation import Violation
from .solution import ScheduleSolution

AUDIT_TOL = 1e-6
COST_FIELDS = ("energy_purchase", "spinning_reserve", "maintenance", "environmental",
               "idr_compensation")


@dataclass(frozen=True)
class CostBreakdown:
    energy_purchase: float  # C1
    spinning_reserve: float  # C2
    maintenance: float  # C3
    environmental: float  # C4
    idr_compensation: float  # C5

    @property
    def total(self) -> float:
        return sum(getattr(self, f) for f in COST_FIELDS)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        return d


def evaluate_objective(sol: ScheduleSolution, cfg=None) -> CostBreakdown:
    """Five cost terms from raw values; compensation uses ``min(x, 0)`` directly."""
    p = sol.problem
    cfg = cfg or p.cfg
    dt = cfg.dt
    s = sol.series
    lp, mc, comp = cfg.loads, cfg.maintenance, cfg.compensation
    grid = s("pg_el") + s("pg_hl") + s("pg_p2g")
    c1 = dt * float(np.sum(lp.price_e * grid) + np.sum(lp.price_g * s("qg_gl")))
    c2 = dt * float(np.sum(cfg.reserve_price_grid * s("r_grid")) + cfg.reserve_price_esd * np.sum(s("r_esd")))
    c3 = dt * float(np.sum(mc.pv * p.e_pv + mc.wt * p.e_wt + mc.eb * s("p_eb") + mc.mt * s("p_mt")
                           + mc.esd * (s("esd_ch") + s("esd_dc")) + mc.hsd * (s("hsd_ch") + s("hsd_dc"))
                           + mc.p2g * s("p_p2g")))
    c4 = 0.0
    for pol in cfg.pollutants:
        kg = (pol.grid_kg_per_kwh * (grid + s("r_grid")) + pol.gas_kg_per_kwh * cfg.hhv * s("qg_gl")
              - pol.p2g_absorb_kg_per_kwh * s("p_p2g"))
        c4 += pol.penalty_yuan_per_kg * dt * float(np.sum(kg))
    c5 = dt * float(np.sum(comp.ie * s("p_ie") + comp.ch * s("h_ch") + comp.iq * s("q_iq")
                           - comp.tse * np.minimum(s("p_tse"), 0.0)
                           - comp.tsq * np.minimum(s("q_tsq"), 0.0)))
    return CostBreakdown(c1, c2, c3, c4, c5)


def _check_zero(out, name, resid, tol):
    for t, r in enumerate(np.asarray(resid, dtype=float), start=1):
        if abs(r) > tol:
            out.append(Violation(name, t, abs(r), f"residual {r:.6g}"))


def _check_le(out, name, x, cap, tol):
    x = np.asarray(x, dtype=float)
    cap = np.broadcast_to(np.asarray(cap, dtype=float), x.shape)
    for t, (v, c) in enumerate(zip(x, cap), start=1):
        if v > c + tol:
            out.append(Violation(name, t, v - c, f"{v:.6g} > {c:.6g}"))


def audit_feasibility(sol: ScheduleSolution, cfg=None, tol: float = AUDIT_TOL) -> List[Violation]:
    """All constraint families rechecked on raw values; empty iff feasible at ``tol``."""
    p = sol.problem
    cfg = cfg or p.cfg
    d, dt, T = cfg.devices, cfg.dt, cfg.n_periods
    s = sol.series
    lp = cfg.loads
    hhv = cfg.hhv
    out: List[Violation] = []

    # sign of every quantity that is non-negative by definition
    for key in ("pg_el", "pg_hl", "pg_p2g", "prg_el", "prg_hl", "prg_p2g", "ps", "p_eb", "q_p2g",
                "qg_mt", "qp2g_mt", "p_mt", "h_mt", "qg_gl", "r_grid", "r_esd", "p_ev", "h_ch",
                "p_ie", "q_iq"):
        _check_le(out, f"{key}_nonneg", -s(key), 0.0, tol)
    for key in ("theta", "psi"):
        x = s(key)
        bad = np.minimum(np.abs(x), np.abs(x - 1.0))
        _check_le(out, f"{key}_integral", bad, 0.0, tol)

    # energy balances
    p_load = lp.p0 + s("p_tse") - s("p_ie") + s("p_ev")
    _check_zero(out, "electric_balance",
                s("pg_el") + s("prg_el") + s("esd_dc") + s("p_mt") - s("esd_ch") - p_load, tol)
    h_load = p.h0 - s("h_ch")
    _check_zero(out, "heat_balance", s("h_eb") + s("hsd_dc") - s("hsd_ch") + s("h_mt") - h_load, tol)
    q_load = lp.q0 + s("q_tsq") - s("q_iq")
    _check_zero(out, "gas_balance", s("qg_gl") + s("q_p2g") - s("q_mt") - q_load, tol)
    _check_zero(out, "renewable_allocation",
                s("prg_el") + s("prg_hl") + s("prg_p2g") + s("ps") - p.e_rg, tol)

    # conversion devices
    _check_zero(out, "eb_input", s("p_eb") - s("pg_hl") - s("prg_hl"), tol)
    _check_zero(out, "eb_output", s("h_eb") - d.eb.eta * s("p_eb"), tol)
    _check_zero(out, "p2g_input", s("p_p2g") - s("pg_p2g") - s("prg_p2g"), tol)
    _check_zero(out, "p2g_output", s("q_p2g") - d.p2g.eta * s("p_p2g") / hhv, tol)
    _check_zero(out, "mt_fuel_split", s("q_mt") - s("qg_mt") - s("qp2g_mt"), tol)
    _check_le(out, "mt_p2g_fuel", s("qp2g_mt") - s("q_p2g"), 0.0, tol)
    _check_le(out, "mt_grid_fuel", s("qg_mt") - s("qg_gl"), 0.0, tol)
    _check_zero(out, "mt_electric", s("p_mt") - d.mt.eta_e * hhv * s("q_mt"), tol)
    _check_zero(out, "mt_heat", s("h_mt") - d.mt.eta_h * hhv * s("q_mt"), tol)
    out += check_device_limits(sol.schedule(), d, dt, tol,
                               p2g_enabled=cfg.coupling_enabled, mt_enabled=cfg.coupling_enabled)

    # grid limits and reserve
    _check_le(out, "grid_headroom", s("pg_el") + s("pg_hl") + s("pg_p2g") + s("r_grid"), cfg.p_grid_max, tol)
    _check_le(out, "gas_purchase_cap", s("qg_gl"), cfg.q_grid_max, tol)
    _check_le(out, "esd_reserve_energy", s("r_esd"), d.esd.eta_dc * (s("esd_c") - d.esd.c_min) / dt, tol)
    _check_le(out, "esd_reserve_power", s("r_esd") + s("esd_dc"), d.esd.p_dc_max, tol)
    if cfg.alpha > 0:
        need = p.min_reserve() - cfg.q
        _check_le(out, "reserve_adequacy", need - sol.reserve(), 0.0, tol)

    # demand response
    flex = FlexDecision(s("p_tse"), s("p_ie"), s("q_tsq"), s("q_iq"), s("h_ch"))
    ratios = cfg.flex if cfg.idr_enabled else cfg.flex.scaled(0.0)
    out += check_flex_bounds(lp, flex, ratios, tol)
    _check_le(out, "curtailed_heat", s("h_ch") - (p.h0 if cfg.idr_enabled else 0.0), 0.0, tol)

    # indoor temperature recursion and comfort band
    b = cfg.building
    t_in = s("t_in")
    prev = np.concatenate(([p.t_in0], t_in[:-1]))
    expected = prev + dt * (h_load - b.conductance_kw * (prev - lp.t_out)) / b.capacitance_kwh
    _check_zero(out, "thermal_recursion", t_in - expected, tol)
    _check_le(out, "comfort_upper", t_in, p.bands[:, 1], tol)
    _check_le(out, "comfort_lower", -t_in, -p.bands[:, 0], tol)

    out += _audit_ev(sol, tol)
    return out


def _audit_ev(sol: ScheduleSolution, tol: float) -> List[Violation]:
    p = sol.problem
    cfg = p.cfg
    ev, T, dt = cfg.ev, cfg.n_periods, cfg.dt
    out: List[Violation] = []
    p_ev = sol.series("p_ev")
    if not cfg.idr_enabled:
        _check_zero(out, "ev_fixed_profile", p_ev - p.ev_disorderly, tol)
        return out
    total = np.zeros(T)
    for s in p.sessions:
        power = sol.ev_power.get(s.ev_id, np.zeros(T))
        total += power
        name = f"ev_{s.ev_id}"
        _check_le(out, f"{name}_rated", power, ev.p_ch_rated, tol)
        _check_le(out, f"{name}_nonneg", -power, 0.0, tol)
        early = power[: s.arrival_period - 1]
        if early.size and np.max(np.abs(early)) > tol:
            out.append(Violation(f"{name}_before_arrival", int(np.argmax(np.abs(early))) + 1,
                                 float(np.max(np.abs(early)))))
        delivered = float(power.sum() * ev.eta_ch * dt)
        want = p.scheduled_energy(s)
        if abs(delivered - want) > tol * max(1.0, want):
            out.append(Violation(f"{name}_energy", None, abs(delivered - want),
                                 f"delivered {delivered:.6g} kWh, need {want:.6g}"))
    _check_zero(out, "ev_station_sum", p_ev - total, tol)
    _check_le(out, "ev_station_cap", p_ev, ev.p_station_max, tol)
    return out
