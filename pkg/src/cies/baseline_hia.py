"""Particle swarm baseline with Monte Carlo reserve checking.

Each particle is a matrix of per-period genes in [0, 1].  A decoder turns
the genes into a complete schedule, repairing as it goes so that balances,
storage cycles, comfort bands, ramps and the zero-sum shifts hold by
construction.  What the repairs cannot fix (grid headroom overflow, EVs that
do not fit) is returned as a violation amount and penalised.  The reserve
level is a gene too; its adequacy is estimated by sampling the joint
renewable sequences and penalised when clearly short of ``alpha``.

The best particle that also passes the deterministic audit is returned.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .demand import neutral_temperature
from .devices import StorageSpec, storage_step
from .milp.audit import audit_feasibility, evaluate_objective
from .milp.model import ev_blocks
from .milp.solution import SERIES_KEYS, ScheduleSolution
from .problem import ProblemData

GENES = ("tse", "ie", "tsq", "iq", "h_ch", "ev_weight", "hsd", "mt", "p2g", "esd",
         "r_level", "r_share")
G = {name: i for i, name in enumerate(GENES)}
PENALTY = 1e4  # yuan per unit of unrepaired violation
MC_Z = 2.58  # binomial slack before a sampled shortfall counts


class HiaFailure(RuntimeError):
    def __init__(self, msg: str, best_penalty: float):
        super().__init__(msg)
        self.best_penalty = best_penalty


@dataclass(frozen=True)
class PsoParams:
    population: int = 100
    iterations: int = 200
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    cognitive: float = 2.0
    social: float = 2.0
    mc_samples: int = 1000
    v_max: float = 0.2
    seed_spread: float = 0.05
    seed: int = 2021

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if min(self.cognitive, self.social, self.inertia_start, self.inertia_end, self.v_max) <= 0:
            raise ValueError("coefficients must be positive")
        if self.mc_samples < 100:
            raise ValueError("mc_samples must be at least 100")


@dataclass
class HiaResult:
    solution: ScheduleSolution
    cost: float
    wall_time: float
    alpha: float
    best_penalty: float
    history: List[float]


# --- decoding ------------------------------------------------------------------

def _zero_sum(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Shift ``x`` by a common offset (then clip) so that it sums to zero."""
    def total(lam):
        return float(np.clip(x + lam, lo, hi).sum())

    a, b = float(np.min(lo - x)), float(np.max(hi - x))
    for _ in range(200):
        mid = 0.5 * (a + b)
        if total(mid) > 0:
            b = mid
        else:
            a = mid
        if b - a < 1e-13:
            break
    y = np.clip(x + 0.5 * (a + b), lo, hi)
    # put the last rounding residue on the entry with the most room
    r = y.sum()
    room = (y - lo) if r > 0 else (hi - y)
    k = int(np.argmax(room))
    y[k] -= r
    return y


def _storage_schedule(genes: np.ndarray, spec: StorageSpec, dt: float,
                      dc_cap: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Charge/discharge series that start and end at ``c_min``.

    ``dc_cap`` limits discharge per period (on top of the power rating).
    """
    T = len(genes)
    keep = 1.0 - spec.k_loss
    dc_max = np.minimum(spec.p_dc_max, np.maximum(dc_cap, 0.0))
    # highest energy at the end of period t from which c_min is still reachable at T
    upper = np.empty(T)
    upper[-1] = spec.c_min
    for t in range(T - 1, 0, -1):
        upper[t - 1] = min(spec.c_max, (upper[t] + dc_max[t] * dt / spec.eta_dc) / keep)
    ch, dc, c = np.zeros(T), np.zeros(T), np.zeros(T)
    prev = spec.c_min
    for t in range(T):
        base = keep * prev
        lo_reach = base - dc_max[t] * dt / spec.eta_dc
        hi_reach = base + spec.p_ch_max * spec.eta_ch * dt
        net = 2.0 * genes[t] - 1.0
        want = base + (net * spec.p_ch_max * spec.eta_ch * dt if net > 0 else net * dc_max[t] * dt / spec.eta_dc)
        lo = max(spec.c_min, lo_reach)
        hi = min(upper[t], hi_reach)
        target = spec.c_min if t == T - 1 else min(max(want, lo), hi)
        delta = target - base
        if delta >= 0:
            ch[t] = min(delta / (spec.eta_ch * dt), spec.p_ch_max)
        else:
            dc[t] = min(-delta * spec.eta_dc / dt, dc_max[t])
        c[t] = storage_step(prev, ch[t], dc[t], spec, dt)
        prev = c[t]
    return ch, dc, c


def _unit(genes, lo, hi, rmin, rmax, cap):
    """Semi-continuous unit with ramps between consecutive on-periods.

    ``cap`` is a per-period ceiling from the surrounding balances; the unit
    turns off where no admissible level fits under it.
    """
    T = len(genes)
    x, on = np.zeros(T), np.zeros(T)
    for t in range(T):
        if genes[t] <= 0.5 or cap[t] < lo:
            continue
        level = lo + (genes[t] - 0.5) / 0.5 * (hi - lo)
        floor_, ceil_ = lo, min(hi, cap[t])
        if t > 0 and on[t - 1]:
            floor_ = max(floor_, x[t - 1] + rmin)
            ceil_ = min(ceil_, x[t - 1] + rmax)
        if ceil_ < floor_:
            continue
        x[t] = min(max(level, floor_), ceil_)
        on[t] = 1.0
    return x, on


def _assign_evs(problem: ProblemData, weights: np.ndarray):
    cfg = problem.cfg
    T = cfg.n_periods
    rated = cfg.ev.p_ch_rated
    left = np.full(T, cfg.ev.p_station_max)
    power: Dict[int, np.ndarray] = {}
    missing = 0.0
    jobs = []
    for s in problem.sessions:
        n_full, partial = ev_blocks(problem, s)
        slack = (T - s.arrival_period + 1) - n_full - (1 if partial else 0)
        jobs.append((slack, s.ev_id, s, n_full, partial))
    for _, _, s, n_full, partial in sorted(jobs, key=lambda j: (j[0], j[1])):
        p = np.zeros(T)
        order = sorted(range(s.arrival_period - 1, T), key=lambda t: (-weights[t], t))
        need_full = n_full
        for t in order:
            if need_full == 0:
                break
            if left[t] >= rated - 1e-9:
                p[t] = rated
                left[t] -= rated
                need_full -= 1
        missing += need_full * rated
        if partial:
            for t in order:
                if p[t] == 0.0 and left[t] >= partial - 1e-9:
                    p[t] = partial
                    left[t] -= partial
                    break
            else:
                missing += partial
        power[s.ev_id] = p
    return power, missing


def decode(problem: ProblemData, genes: np.ndarray):
    """Schedule series, per-EV power and the unrepaired violation amount."""
    cfg = problem.cfg
    d, dt, T = cfg.devices, cfg.dt, cfg.n_periods
    lp, fx = cfg.loads, cfg.flex
    hhv = cfg.hhv
    g = np.clip(genes, 0.0, 1.0)
    z = np.zeros(T)
    out = {k: z.copy() for k in SERIES_KEYS}
    viol = 0.0

    # demand response
    if cfg.idr_enabled:
        lo_e, hi_e = -fx.a_tse * lp.p0, fx.a_tse * lp.p0
        out["p_tse"] = _zero_sum((2 * g[G["tse"]] - 1) * hi_e, lo_e, hi_e)
        out["p_ie"] = g[G["ie"]] * fx.a_ie * lp.p0
        lo_q, hi_q = -fx.a_tsq * lp.q0, fx.a_tsq * lp.q0
        out["q_tsq"] = _zero_sum((2 * g[G["tsq"]] - 1) * hi_q, lo_q, hi_q)
        out["q_iq"] = g[G["iq"]] * fx.a_iq * lp.q0
    # heat curtailment, kept above the lowest temperature path that still meets every later band
    b = cfg.building
    a = dt * b.conductance_kw / b.capacitance_kwh
    t_neutral = neutral_temperature(cfg.comfort)
    lower = problem.bands[:, 0].copy()
    for t in range(T - 2, -1, -1):
        lower[t] = max(lower[t], (lower[t + 1] - a * t_neutral) / (1 - a))
    t_prev = problem.t_in0
    for t in range(T):
        h_ch = 0.0
        if cfg.idr_enabled:
            room = (problem.h0[t] - b.conductance_kw * (t_prev - lp.t_out[t])
                    - (lower[t] - t_prev) * b.capacitance_kwh / dt)
            h_ch = g[G["h_ch"], t] * min(problem.h0[t], max(room, 0.0))
        out["h_ch"][t] = h_ch
        t_prev = t_prev + dt * (problem.h0[t] - h_ch - b.conductance_kw * (t_prev - lp.t_out[t])) / b.capacitance_kwh
        out["t_in"][t] = t_prev

    # EVs
    if cfg.idr_enabled:
        ev_power, missing = _assign_evs(problem, g[G["ev_weight"]])
        viol += missing
        out["p_ev"] = sum(ev_power.values()) if ev_power else z.copy()
    else:
        ev_power = {}
        out["p_ev"] = problem.ev_disorderly.copy()

    # heat side: HSD, then MT under the remaining heat need and the gas cap
    h_load = problem.h0 - out["h_ch"]
    out["hsd_ch"], out["hsd_dc"], out["hsd_c"] = _storage_schedule(g[G["hsd"]], d.hsd, dt, h_load)
    q_load = lp.q0 + out["q_tsq"] - out["q_iq"]
    if cfg.coupling_enabled:
        p2g, theta = _unit(g[G["p2g"]], d.p2g.p_min, d.p2g.p_max, d.p2g.ramp_min, d.p2g.ramp_max,
                           np.full(T, d.p2g.p_max))
        q_p2g = d.p2g.eta * p2g / hhv
        heat_room = h_load - out["hsd_dc"] + out["hsd_ch"]
        gas_room = cfg.q_grid_max - q_load + q_p2g
        mt_cap = np.minimum(heat_room / (d.mt.eta_h * hhv), gas_room)
        q_mt, psi = _unit(g[G["mt"]], d.mt.q_min, d.mt.q_max, d.mt.ramp_min, d.mt.ramp_max, mt_cap)
        out.update(p_p2g=p2g, theta=theta, q_p2g=q_p2g, q_mt=q_mt, psi=psi)
        out["qp2g_mt"] = np.minimum(q_mt, q_p2g)
        out["qg_mt"] = q_mt - out["qp2g_mt"]
        out["p_mt"] = d.mt.eta_e * hhv * q_mt
        out["h_mt"] = d.mt.eta_h * hhv * q_mt
    out["qg_gl"] = q_load + out["q_mt"] - out["q_p2g"]
    viol += float(np.sum(np.maximum(out["qg_gl"] - cfg.q_grid_max, 0.0)))
    viol += float(np.sum(np.maximum(-out["qg_gl"], 0.0)))
    out["qg_gl"] = np.maximum(out["qg_gl"], 0.0)
    out["h_eb"] = h_load - out["hsd_dc"] + out["hsd_ch"] - out["h_mt"]
    viol += float(np.sum(np.maximum(out["h_eb"] - d.eb.h_max, 0.0)))
    out["p_eb"] = out["h_eb"] / d.eb.eta

    # electric side: ESD may only discharge into load not already met by the MT
    p_load = lp.p0 + out["p_tse"] - out["p_ie"] + out["p_ev"]
    out["esd_ch"], out["esd_dc"], out["esd_c"] = _storage_schedule(
        g[G["esd"]], d.esd, dt, p_load - out["p_mt"])
    need_el = p_load + out["esd_ch"] - out["esd_dc"] - out["p_mt"]
    viol += float(np.sum(np.maximum(-need_el, 0.0)))
    need_el = np.maximum(need_el, 0.0)
    # renewables go to loads first, then the boiler, then P2G; the rest is curtailed
    rg = problem.e_rg.copy()
    for key, need in (("el", need_el), ("hl", out["p_eb"]), ("p2g", out["p_p2g"])):
        take = np.minimum(rg, need)
        out[f"prg_{key}"] = take
        out[f"pg_{key}"] = need - take
        rg = rg - take
    out["ps"] = rg

    # reserve
    level = problem.min_reserve() * (0.9 + 0.2 * g[G["r_level"]])
    level = np.minimum(level, cfg.r_max)
    esd_room = np.maximum(np.minimum(d.esd.eta_dc * (out["esd_c"] - d.esd.c_min) / dt,
                                     d.esd.p_dc_max - out["esd_dc"]), 0.0)
    grid_room = cfg.p_grid_max - (out["pg_el"] + out["pg_hl"] + out["pg_p2g"])
    r_esd = np.minimum(g[G["r_share"]] * esd_room, level)
    r_esd = np.maximum(r_esd, np.minimum(level - grid_room, esd_room))
    r_esd = np.clip(r_esd, 0.0, np.minimum(esd_room, level))
    r_grid = level - r_esd
    viol += float(np.sum(np.maximum(r_grid - np.maximum(grid_room, 0.0), 0.0)))
    out["r_esd"], out["r_grid"] = r_esd, np.minimum(r_grid, np.maximum(grid_room, 0.0))
    return out, ev_power, viol


def heuristic_genes(problem: ProblemData) -> np.ndarray:
    """A neutral particle: no shifting, idle storage, units off, reserve at the deterministic minimum."""
    g = np.full((len(GENES), problem.n_periods), 0.5)
    for k in ("ie", "iq", "h_ch", "mt", "p2g", "r_share"):
        g[G[k]] = 0.0
    g[G["ev_weight"]] = -problem.cfg.loads.price_e / problem.cfg.loads.price_e.max() + 1.0
    return g


# --- search --------------------------------------------------------------------

def _mc_shortfall(problem: ProblemData, reserve: np.ndarray, alpha: float, n: int,
                  rng: np.random.Generator) -> float:
    if alpha <= 0:
        return 0.0
    e = problem.e_rg
    slack = MC_Z * math.sqrt(max(alpha * (1 - alpha), 0.0) / n)
    short = 0.0
    for t, seq in enumerate(problem.seqs):
        x = seq.sample(rng, n)
        rate = float(np.mean(reserve[t] >= e[t] - x - 1e-9))
        short += max(0.0, alpha - slack - rate)
    return short


def _fitness(problem, genes, params, rng):
    series, ev_power, viol = decode(problem, genes)
    sol = ScheduleSolution.from_series(problem, series, ev_power, method="hia")
    cost = evaluate_objective(sol).total
    short = _mc_shortfall(problem, series["r_grid"] + series["r_esd"], problem.alpha, params.mc_samples, rng)
    return cost + PENALTY * (viol + 100.0 * short), cost, viol + short, sol


def hia_solve(problem: ProblemData, params: Optional[PsoParams] = None,
              alpha: Optional[float] = None) -> HiaResult:
    """Search for a low-cost schedule with PSO; raises :class:`HiaFailure` if none passes the audit."""
    params = params or PsoParams(seed=problem.cfg.seed)
    if alpha is not None and alpha != problem.alpha:
        from dataclasses import replace
        problem = replace(problem, cfg=problem.cfg.with_(alpha=alpha))
    t0 = time.perf_counter()
    shape = (len(GENES), problem.n_periods)
    n = params.population

    def rng_for(it, i):
        return np.random.default_rng([params.seed, it, i])

    pos = np.empty((n,) + shape)
    vel = np.zeros((n,) + shape)
    # half the swarm starts around the neutral particle, half uniformly
    base = heuristic_genes(problem)
    for i in range(n):
        r = rng_for(0, i)
        pos[i] = r.random(shape) if i % 2 else np.clip(base + params.seed_spread * r.standard_normal(shape), 0, 1)
    pos[0] = base

    pbest = pos.copy()
    pbest_f = np.full(n, np.inf)
    best_f, best_sol, best_cost, best_pen = np.inf, None, np.inf, np.inf
    history = []

    def consider(i, f, cost, pen, sol, x):
        nonlocal best_f, best_sol, best_cost, best_pen
        if f < pbest_f[i]:
            pbest_f[i] = f
            pbest[i] = x
        best_pen = min(best_pen, pen)
        if pen == 0.0 and cost < best_cost and not audit_feasibility(sol):
            best_cost, best_sol = cost, sol

    for it in range(params.iterations + 1):
        if it > 0:
            w = params.inertia_start + (params.inertia_end - params.inertia_start) * (it - 1) / max(1, params.iterations - 1)
            gbest = pbest[int(np.argmin(pbest_f))]
            for i in range(n):
                r = rng_for(it, i)
                r1, r2 = r.random(shape), r.random(shape)
                vel[i] = (w * vel[i] + params.cognitive * r1 * (pbest[i] - pos[i])
                          + params.social * r2 * (gbest - pos[i]))
                np.clip(vel[i], -params.v_max, params.v_max, out=vel[i])
                pos[i] = np.clip(pos[i] + vel[i], 0.0, 1.0)
        for i in range(n):
            f, cost, pen, sol = _fitness(problem, pos[i], params, rng_for(it, n + i))
            consider(i, f, cost, pen, sol, pos[i].copy())
        history.append(float(best_cost))

    elapsed = time.perf_counter() - t0
    if best_sol is None:
        raise HiaFailure(f"no particle passed the audit (best penalty {best_pen:.6g})", best_pen)
    best_sol.wall_time = elapsed
    best_sol.status = "hia"
    return HiaResult(best_sol, best_cost, elapsed, problem.alpha, best_pen, history)


# --- comparison ------------------------------------------------------------------

COMPARISON_COLUMNS = ("confidence_level", "proposed_cost", "proposed_time_s", "hia_cost",
                      "hia_time_s", "gap_percent", "hia_beats_milp")


def compare_methods(rows) -> List[dict]:
    """One table row per confidence level from ``(alpha, milp_cost, milp_time, hia_cost, hia_time)``."""
    table = []
    for alpha, mc, mt, hc, ht in rows:
        gap = 100.0 * (hc - mc) / mc if mc else 0.0
        table.append(dict(zip(COMPARISON_COLUMNS,
                              (alpha, mc, mt, hc, ht, gap, bool(hc < mc - 1e-6 * (1 + abs(mc)))))))
    return table
