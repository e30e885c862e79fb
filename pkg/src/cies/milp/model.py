"""Assembly of the day-ahead scheduling MILP."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import ccp
from ..config import CiesConfig
from ..evfleet import EvSession
from ..problem import ProblemData, build_problem
from ..uncertainty import ProbSeq
from .ir import INF, Expr, ModelIR, lsum

EV_ENERGY_TOL = 1e-9


class InfeasibleConfig(ValueError):
    pass


def ev_blocks(problem: ProblemData, session) -> Tuple[int, float]:
    """Split a session's energy into whole rated-power periods plus one partial period.

    Returns ``(n_full, partial_kw)``; ``partial_kw`` is 0 when the energy is
    an exact multiple of one rated period.
    """
    spec, dt = problem.cfg.ev, problem.cfg.dt
    per_period = spec.p_ch_rated * spec.eta_ch * dt
    energy = problem.scheduled_energy(session)
    n_full = int(math.floor(energy / per_period + EV_ENERGY_TOL))
    rest = energy - n_full * per_period
    if rest <= EV_ENERGY_TOL * max(1.0, per_period):
        return n_full, 0.0
    return n_full, rest / (spec.eta_ch * dt)


def precheck(problem: ProblemData) -> None:
    """Reject configurations whose aggregate bounds cannot meet demand."""
    cfg = problem.cfg
    d = cfg.devices
    mt_e = d.mt.eta_e * d.mt.q_max * d.mt.hhv if cfg.coupling_enabled else 0.0
    mt_h = d.mt.eta_h * d.mt.q_max * d.mt.hhv if cfg.coupling_enabled else 0.0
    p2g_q = d.p2g.eta * d.p2g.p_max / d.p2g.hhv if cfg.coupling_enabled else 0.0
    ev = problem.ev_disorderly if not cfg.idr_enabled else np.zeros(cfg.n_periods)
    flex = cfg.flex if cfg.idr_enabled else None
    e_rg = problem.e_rg
    r_need = problem.min_reserve()
    for t in range(cfg.n_periods):
        p_min_load = cfg.loads.p0[t] * (1 - (flex.a_tse + flex.a_ie if flex else 0.0)) + ev[t]
        supply = cfg.p_grid_max + e_rg[t] + d.esd.p_dc_max + mt_e
        if p_min_load > supply + 1e-9:
            raise InfeasibleConfig(f"period {t + 1}: electric load {p_min_load:.1f} kW exceeds supply {supply:.1f} kW")
        heat_supply = d.eb.h_max + d.hsd.p_dc_max + mt_h
        if problem.h0[t] > heat_supply + 1e-9 and not cfg.idr_enabled:
            raise InfeasibleConfig(f"period {t + 1}: heat load exceeds supply")
        q_min_load = cfg.loads.q0[t] * (1 - (flex.a_tsq + flex.a_iq if flex else 0.0))
        if q_min_load > cfg.q_grid_max + p2g_q + 1e-9:
            raise InfeasibleConfig(f"period {t + 1}: gas load exceeds supply")
        if r_need[t] > cfg.r_max + 1e-9:
            raise InfeasibleConfig(f"period {t + 1}: required reserve {r_need[t]:.1f} kW above {cfg.r_max:.1f} kW")
    if cfg.idr_enabled:
        total_ev = sum(problem.scheduled_energy(s) for s in problem.sessions) / (cfg.ev.eta_ch * cfg.dt)
        if total_ev > cfg.ev.p_station_max * cfg.n_periods + 1e-9:
            raise InfeasibleConfig("EV energy exceeds station capacity over the day")


@dataclass
class CostTerms:
    """Objective pieces kept separately so the breakdown can be reported."""

    c1: Expr
    c2: Expr
    c3: Expr
    c4: Expr
    c5: Expr

    def total(self) -> Expr:
        return lsum([self.c1, self.c2, self.c3, self.c4, self.c5])


def assemble_model(cfg: CiesConfig, seqs: Optional[Sequence[ProbSeq]] = None,
                   sessions: Optional[Sequence[EvSession]] = None, scenario: Optional[int] = None,
                   tmin_encoding: str = "epigraph", ordering_cuts: bool = True) -> ModelIR:
    """Build the MILP straight from a configuration.

    ``seqs`` replaces the joint renewable sequences derived from ``cfg`` and
    ``sessions`` the sampled EV fleet; ``scenario`` overrides ``cfg.scenario``.
    """
    if scenario is not None:
        cfg = cfg.with_(scenario=scenario)
    return build_model(build_problem(cfg, sessions=sessions, seqs=seqs), tmin_encoding, ordering_cuts)


def build_model(problem: ProblemData, tmin_encoding: str = "epigraph",
                ordering_cuts: bool = True) -> ModelIR:
    """Build the MILP for ``problem.cfg.scenario``.

    ``tmin_encoding`` selects how ``-gamma * min(x, 0)`` compensation terms
    are linearised: ``"epigraph"`` (no binaries) or ``"sos2"``.
    ``ordering_cuts`` adds ``Z_u <= Z_{u+1}`` to the reserve indicator rows;
    the feasible reserves are unchanged and branch-and-bound gets much faster.
    """
    precheck(problem)
    cfg = problem.cfg
    d = cfg.devices
    T, dt = cfg.n_periods, cfg.dt
    lp = cfg.loads
    flex = cfg.flex
    idr = cfg.idr_enabled
    coupled = cfg.coupling_enabled
    hhv = cfg.hhv
    e_rg = problem.e_rg

    m = ModelIR(name=f"cies_s{cfg.scenario}")
    V: Dict[str, List[Expr]] = {}

    def per_period(key, lb=0.0, ub=INF, binary=False):
        lbs = np.broadcast_to(lb, (T,))
        ubs = np.broadcast_to(ub, (T,))
        V[key] = [m.add_var(f"{key}_{t + 1}", float(lbs[t]), float(ubs[t]), binary) for t in range(T)]
        return V[key]

    # grid and renewable allocation
    pg_el, pg_hl, pg_p2g = per_period("pg_el"), per_period("pg_hl"), per_period("pg_p2g", ub=d.p2g.p_max if coupled else 0.0)
    prg_el, prg_hl, prg_p2g = per_period("prg_el"), per_period("prg_hl"), per_period("prg_p2g", ub=d.p2g.p_max if coupled else 0.0)
    ps = per_period("ps")
    # storage
    esd_ch, esd_dc = per_period("esd_ch", ub=d.esd.p_ch_max), per_period("esd_dc", ub=d.esd.p_dc_max)
    esd_c = per_period("esd_c", d.esd.c_min, d.esd.c_max)
    hsd_ch, hsd_dc = per_period("hsd_ch", ub=d.hsd.p_ch_max), per_period("hsd_dc", ub=d.hsd.p_dc_max)
    hsd_c = per_period("hsd_c", d.hsd.c_min, d.hsd.c_max)
    # conversion
    p_eb, h_eb = per_period("p_eb", ub=d.eb.p_max), per_period("h_eb", ub=d.eb.h_max)
    cap = 1.0 if coupled else 0.0
    p_p2g = per_period("p_p2g", ub=d.p2g.p_max * cap)
    q_p2g = per_period("q_p2g")
    theta = per_period("theta", ub=cap, binary=True)
    q_mt = per_period("q_mt", ub=d.mt.q_max * cap)
    qg_mt, qp2g_mt = per_period("qg_mt"), per_period("qp2g_mt")
    p_mt, h_mt = per_period("p_mt"), per_period("h_mt")
    psi = per_period("psi", ub=cap, binary=True)
    qg_gl = per_period("qg_gl", ub=cfg.q_grid_max)
    # reserve
    r_grid, r_esd = per_period("r_grid"), per_period("r_esd")
    # demand response
    on = 1.0 if idr else 0.0
    p_tse = per_period("p_tse", -flex.a_tse * lp.p0 * on, flex.a_tse * lp.p0 * on)
    p_ie = per_period("p_ie", 0.0, flex.a_ie * lp.p0 * on)
    q_tsq = per_period("q_tsq", -flex.a_tsq * lp.q0 * on, flex.a_tsq * lp.q0 * on)
    q_iq = per_period("q_iq", 0.0, flex.a_iq * lp.q0 * on)
    h_ch = per_period("h_ch", 0.0, problem.h0 * on)
    t_in = per_period("t_in", problem.bands[:, 0], problem.bands[:, 1])
    # EV station load
    if idr:
        p_ev = per_period("p_ev", 0.0, cfg.ev.p_station_max)
    else:
        p_ev = per_period("p_ev", problem.ev_disorderly, problem.ev_disorderly)

    for t in range(T):
        k = t + 1
        # electric balance (curtailment kept in the renewable allocation only)
        m.add_constraint(f"bal_e_{k}",
                         pg_el[t] + prg_el[t] + esd_dc[t] + p_mt[t]
                         - p_tse[t] + p_ie[t] - p_ev[t] - esd_ch[t], "=", float(lp.p0[t]))
        m.add_constraint(f"bal_h_{k}",
                         h_eb[t] + hsd_dc[t] - hsd_ch[t] + h_mt[t] + h_ch[t], "=", float(problem.h0[t]))
        m.add_constraint(f"bal_g_{k}",
                         qg_gl[t] + q_p2g[t] - q_mt[t] - q_tsq[t] + q_iq[t], "=", float(lp.q0[t]))
        m.add_constraint(f"rg_{k}", prg_el[t] + prg_hl[t] + prg_p2g[t] + ps[t], "=", float(e_rg[t]))
        # electric boiler
        m.add_constraint(f"eb_in_{k}", p_eb[t] - pg_hl[t] - prg_hl[t], "=", 0.0)
        m.add_constraint(f"eb_out_{k}", h_eb[t] - d.eb.eta * p_eb[t], "=", 0.0)
        # storage dynamics, C_0 = C_min
        for key, spec, c, ch, dc in (("esd", d.esd, esd_c, esd_ch, esd_dc),
                                     ("hsd", d.hsd, hsd_c, hsd_ch, hsd_dc)):
            prev = c[t - 1] * (1 - spec.k_loss) if t > 0 else Expr(const=(1 - spec.k_loss) * spec.c_min)
            m.add_constraint(f"{key}_dyn_{k}",
                             c[t] - prev - spec.eta_ch * dt * ch[t] + (dt / spec.eta_dc) * dc[t], "=", 0.0)
        # P2G
        m.add_constraint(f"p2g_in_{k}", p_p2g[t] - pg_p2g[t] - prg_p2g[t], "=", 0.0)
        m.add_constraint(f"p2g_out_{k}", q_p2g[t] - (d.p2g.eta / hhv) * p_p2g[t], "=", 0.0)
        m.add_constraint(f"p2g_min_{k}", p_p2g[t] - d.p2g.p_min * theta[t], ">=", 0.0)
        m.add_constraint(f"p2g_max_{k}", p_p2g[t] - d.p2g.p_max * theta[t], "<=", 0.0)
        # MT
        m.add_constraint(f"mt_split_{k}", q_mt[t] - qg_mt[t] - qp2g_mt[t], "=", 0.0)
        m.add_constraint(f"mt_p2g_{k}", qp2g_mt[t] - q_p2g[t], "<=", 0.0)
        m.add_constraint(f"mt_e_{k}", p_mt[t] - d.mt.eta_e * hhv * q_mt[t], "=", 0.0)
        m.add_constraint(f"mt_h_{k}", h_mt[t] - d.mt.eta_h * hhv * q_mt[t], "=", 0.0)
        m.add_constraint(f"mt_min_{k}", q_mt[t] - d.mt.q_min * psi[t], ">=", 0.0)
        m.add_constraint(f"mt_max_{k}", q_mt[t] - d.mt.q_max * psi[t], "<=", 0.0)
        m.add_constraint(f"mt_gridgas_{k}", qg_mt[t] - qg_gl[t], "<=", 0.0)
        if t > 0:
            # ramps bind only while the unit is on in both periods
            for key, x, s, lo, hi, big in (("p2g", p_p2g, theta, d.p2g.ramp_min, d.p2g.ramp_max, d.p2g.p_max),
                                           ("mt", q_mt, psi, d.mt.ramp_min, d.mt.ramp_max, d.mt.q_max)):
                both_off = 2.0 - s[t] - s[t - 1]
                m.add_constraint(f"{key}_rup_{k}", x[t] - x[t - 1] - big * both_off, "<=", hi)
                m.add_constraint(f"{key}_rdn_{k}", x[t] - x[t - 1] + big * both_off, ">=", lo)
        # grid headroom and ESD reserve headroom
        m.add_constraint(f"grid_cap_{k}", pg_el[t] + pg_hl[t] + pg_p2g[t] + r_grid[t], "<=", cfg.p_grid_max)
        m.add_constraint(f"esd_res_e_{k}",
                         r_esd[t] - (d.esd.eta_dc / dt) * esd_c[t], "<=", -d.esd.eta_dc * d.esd.c_min / dt)
        m.add_constraint(f"esd_res_p_{k}", r_esd[t] + esd_dc[t], "<=", d.esd.p_dc_max)
        # building thermal state, T_in,0 fixed
        g, cth = cfg.building.conductance_kw, cfg.building.capacitance_kwh
        decay = 1.0 - dt * g / cth
        prev_t = t_in[t - 1] * decay if t > 0 else Expr(const=problem.t_in0 * decay)
        m.add_constraint(f"thermal_{k}", t_in[t] - prev_t + (dt / cth) * h_ch[t], "=",
                         dt / cth * (problem.h0[t] + g * lp.t_out[t]))

    # cyclic storage: C_T,end = C_0 = C_min
    m.add_constraint("esd_cyclic", esd_c[-1], "=", d.esd.c_min)
    m.add_constraint("hsd_cyclic", hsd_c[-1], "=", d.hsd.c_min)
    if idr:
        m.add_constraint("tse_zero_sum", lsum(p_tse), "=", 0.0)
        m.add_constraint("tsq_zero_sum", lsum(q_tsq), "=", 0.0)
        _ev_rows(m, problem, p_ev)

    # chance-constrained spinning reserve
    ctx = ccp.ReserveContext(problem.seqs, cfg.r_max, cfg.alpha)
    if cfg.alpha > 0:
        ccp.build_chance_rows(m, ctx, [r_grid[t] + r_esd[t] for t in range(T)],
                              ordering_cuts=ordering_cuts)

    costs = _cost_terms(m, problem, V, tmin_encoding)
    m.minimize(costs.total())
    m.cost_terms = costs  # type: ignore[attr-defined]
    return m


def _ev_rows(m: ModelIR, problem: ProblemData, p_ev: List[Expr]) -> None:
    cfg = problem.cfg
    T = cfg.n_periods
    station = [Expr() for _ in range(T)]
    for s in problem.sessions:
        n_full, partial = ev_blocks(problem, s)
        if n_full == 0 and partial == 0.0:
            continue
        periods = range(s.arrival_period, T + 1)
        full = {k: m.add_var(f"ev_on_{s.ev_id}_{k}", binary=True) for k in periods} if n_full else {}
        part = {k: m.add_var(f"ev_part_{s.ev_id}_{k}", binary=True) for k in periods} if partial else {}
        if full:
            m.add_constraint(f"ev_full_{s.ev_id}", lsum(full.values()), "=", n_full)
        if part:
            m.add_constraint(f"ev_partial_{s.ev_id}", lsum(part.values()), "=", 1)
        if full and part:
            for k in periods:
                m.add_constraint(f"ev_one_{s.ev_id}_{k}", full[k] + part[k], "<=", 1)
        for k in periods:
            if k in full:
                station[k - 1].add(full[k], cfg.ev.p_ch_rated)
            if k in part:
                station[k - 1].add(part[k], partial)
    for t in range(T):
        m.add_constraint(f"ev_station_{t + 1}", p_ev[t] - station[t], "=", 0.0)


def _cost_terms(m: ModelIR, problem: ProblemData, V, tmin_encoding: str) -> CostTerms:
    cfg = problem.cfg
    T, dt = cfg.n_periods, cfg.dt
    lp, mc, comp = cfg.loads, cfg.maintenance, cfg.compensation
    hhv = cfg.hhv
    c1, c2, c3, c4, c5 = Expr(), Expr(), Expr(), Expr(), Expr()
    for t in range(T):
        grid = V["pg_el"][t] + V["pg_hl"][t] + V["pg_p2g"][t]
        c1.add(grid, lp.price_e[t] * dt)
        c1.add(V["qg_gl"][t], lp.price_g[t] * dt)
        c2.add(V["r_grid"][t], cfg.reserve_price_grid[t] * dt)
        c2.add(V["r_esd"][t], cfg.reserve_price_esd * dt)
        c3.add(mc.pv * problem.e_pv[t] * dt + mc.wt * problem.e_wt[t] * dt)
        c3.add(V["p_eb"][t], mc.eb * dt)
        c3.add(V["p_mt"][t], mc.mt * dt)
        c3.add(V["esd_ch"][t] + V["esd_dc"][t], mc.esd * dt)
        c3.add(V["hsd_ch"][t] + V["hsd_dc"][t], mc.hsd * dt)
        c3.add(V["p_p2g"][t], mc.p2g * dt)
        for pol in cfg.pollutants:
            w = pol.penalty_yuan_per_kg * dt
            c4.add(grid + V["r_grid"][t], w * pol.grid_kg_per_kwh)
            c4.add(V["qg_gl"][t], w * pol.gas_kg_per_kwh * hhv)
            c4.add(V["p_p2g"][t], -w * pol.p2g_absorb_kg_per_kwh)
        c5.add(V["p_ie"][t], comp.ie * dt)
        c5.add(V["h_ch"][t], comp.ch * dt)
        c5.add(V["q_iq"][t], comp.iq * dt)
        if cfg.idr_enabled:
            k = t + 1
            for key, gamma, ratio, base in (("tse", comp.tse, cfg.flex.a_tse, lp.p0[t]),
                                            ("tsq", comp.tsq, cfg.flex.a_tsq, lp.q0[t])):
                x = V[f"p_{key}" if key == "tse" else f"q_{key}"][t]
                if tmin_encoding == "epigraph":
                    c5.add(ccp.shift_cost_rows(m, x, gamma * dt, f"s_{key}_{k}"))
                elif tmin_encoding == "sos2":
                    enc = ccp.build_sos2_min_rows(m, x, ratio * base, ratio * base, f"g_{key}_{k}")
                    c5.add(enc.g, -gamma * dt)
                else:
                    raise ValueError(f"unknown encoding {tmin_encoding!r}")
    return CostTerms(c1, c2, c3, c4, c5)
