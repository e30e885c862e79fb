"""Flexible loads, building thermal inertia and user satisfaction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .violation import Violation

PMV_NUMERATOR_OFFSET = 2.43
PMV_COEF = 3.76


class InfeasibleDecision(ValueError):
    pass


@dataclass
class LoadProfiles:
    p0: np.ndarray  # kW
    q0: np.ndarray  # m3 per period
    t_out: np.ndarray  # degC
    price_e: np.ndarray  # yuan/kWh
    price_g: np.ndarray  # yuan/m3

    def __post_init__(self):
        for name in ("p0", "q0", "t_out", "price_e", "price_g"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.p0.size
        if any(getattr(self, k).size != n for k in ("q0", "t_out", "price_e", "price_g")):
            raise ValueError("profile lengths differ")
        if np.any(self.p0 < 0) or np.any(self.q0 < 0):
            raise ValueError("baseline loads must be non-negative")

    @property
    def n_periods(self) -> int:
        return self.p0.size


@dataclass(frozen=True)
class FlexRatios:
    a_tse: float = 0.1
    a_ie: float = 0.1
    a_tsq: float = 0.1
    a_iq: float = 0.1

    def __post_init__(self):
        for v in (self.a_tse, self.a_ie, self.a_tsq, self.a_iq):
            if not 0 <= v <= 1:
                raise ValueError("flexibility ratios must lie in [0, 1]")

    def scaled(self, factor: float) -> "FlexRatios":
        return FlexRatios(self.a_tse * factor, self.a_ie * factor,
                          self.a_tsq * factor, self.a_iq * factor)


@dataclass(frozen=True)
class BuildingThermal:
    k_ht: float = 0.5  # W/(m2 degC)
    f_area: float = 2400.0  # m2
    volume: float = 36000.0  # m3
    c_air: float = 1.007  # kJ/(kg degC)
    rho_air: float = 1.2  # kg/m3

    def __post_init__(self):
        if min(self.k_ht, self.f_area, self.volume, self.c_air, self.rho_air) <= 0:
            raise ValueError("building parameters must be positive")

    @property
    def capacitance_kwh(self) -> float:
        """Air heat capacitance in kWh/degC."""
        return self.c_air * self.rho_air * self.volume / 3600.0

    @property
    def conductance_kw(self) -> float:
        """Envelope loss in kW/degC."""
        return self.k_ht * self.f_area / 1000.0


@dataclass(frozen=True)
class ComfortParams:
    m_met: float = 80.0  # W/m2
    i_cl: float = 0.15  # m2 degC/W
    t_skin: float = 33.5  # degC
    pmv_relaxed: float = 0.9
    pmv_strict: float = 0.5
    strict_hours: tuple = (8, 19)  # inclusive, by the hour that ends the period

    def __post_init__(self):
        if self.m_met <= 0 or self.t_skin <= 0 or self.i_cl < 0:
            raise ValueError("comfort parameters must be positive")

    def pmv_limit(self, t: int, dt: float = 1.0) -> float:
        """|PMV| bound of 1-based period ``t``."""
        hour = t * dt
        lo, hi = self.strict_hours
        return self.pmv_strict if lo <= hour <= hi else self.pmv_relaxed


@dataclass
class FlexDecision:
    p_tse: np.ndarray
    p_ie: np.ndarray
    q_tsq: np.ndarray
    q_iq: np.ndarray
    h_ch: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "FlexDecision":
        return cls(*(np.zeros(n) for _ in range(5)))


def pmv(t_in: float, cp: ComfortParams) -> float:
    return PMV_NUMERATOR_OFFSET - PMV_COEF * (cp.t_skin - t_in) / (cp.m_met * (cp.i_cl + 0.1))


def temp_for_pmv(value: float, cp: ComfortParams) -> float:
    return cp.t_skin - (PMV_NUMERATOR_OFFSET - value) * cp.m_met * (cp.i_cl + 0.1) / PMV_COEF


def neutral_temperature(cp: ComfortParams) -> float:
    return temp_for_pmv(0.0, cp)


def comfort_band(t: int, cp: ComfortParams, dt: float = 1.0) -> tuple:
    lim = cp.pmv_limit(t, dt)
    return temp_for_pmv(-lim, cp), temp_for_pmv(lim, cp)


def comfort_bands(n_periods: int, cp: ComfortParams, dt: float = 1.0) -> np.ndarray:
    """(n_periods, 2) array of indoor temperature bounds."""
    return np.array([comfort_band(t, cp, dt) for t in range(1, n_periods + 1)])


def indoor_temp_step(t_in: float, t_out: float, h: float, b: BuildingThermal, dt: float) -> float:
    if dt <= 0:
        raise ValueError("dt must be positive")
    return t_in + dt * (h - b.conductance_kw * (t_in - t_out)) / b.capacitance_kwh


def baseline_heat_demand(t_target, t_out, b: BuildingThermal):
    """Heat input (kW) that holds ``t_target`` against ``t_out``."""
    h = b.conductance_kw * (np.asarray(t_target, dtype=float) - np.asarray(t_out, dtype=float))
    h = np.maximum(h, 0.0)
    return float(h) if h.ndim == 0 else h


def simulate_indoor(t0: float, t_out, h_load, b: BuildingThermal, dt: float) -> np.ndarray:
    """Indoor temperature at the end of each period."""
    temps = []
    t = t0
    for to, h in zip(t_out, h_load):
        t = indoor_temp_step(t, to, h, b, dt)
        temps.append(t)
    return np.array(temps)


def aggregate_flexible_loads(profiles: LoadProfiles, d: FlexDecision, h0):
    p_load = profiles.p0 + d.p_tse - d.p_ie
    q_load = profiles.q0 + d.q_tsq - d.q_iq
    h_load = np.asarray(h0, dtype=float) - d.h_ch
    for name, arr in (("electric", p_load), ("gas", q_load), ("heat", h_load)):
        if np.any(arr < -1e-9):
            t = int(np.argmin(arr)) + 1
            raise InfeasibleDecision(f"{name} load negative in period {t}: {arr[t - 1]:.6g}")
    return p_load, q_load, h_load


def check_flex_bounds(profiles: LoadProfiles, d: FlexDecision, r: FlexRatios,
                      tol: float = 1e-6) -> List[Violation]:
    out: List[Violation] = []

    def box(name, x, lo, hi):
        for t, (xv, l, h) in enumerate(zip(x, lo, hi), start=1):
            if xv > h + tol:
                out.append(Violation(name, t, xv - h, f"{xv:.6g} > {h:.6g}"))
            elif xv < l - tol:
                out.append(Violation(name, t, l - xv, f"{xv:.6g} < {l:.6g}"))

    p0, q0 = profiles.p0, profiles.q0
    box("tse_bound", d.p_tse, -r.a_tse * p0, r.a_tse * p0)
    box("ie_bound", d.p_ie, np.zeros_like(p0), r.a_ie * p0)
    box("tsq_bound", d.q_tsq, -r.a_tsq * q0, r.a_tsq * q0)
    box("iq_bound", d.q_iq, np.zeros_like(q0), r.a_iq * q0)
    for name, x in (("tse_zero_sum", d.p_tse), ("tsq_zero_sum", d.q_tsq)):
        s = float(np.sum(x))
        if abs(s) > tol:
            out.append(Violation(name, None, abs(s), f"sum {s:.6g}"))
    return out


def satisfaction_index(baseline: Sequence, actual: Sequence) -> np.ndarray:
    """Per-period comprehensive satisfaction in percent.

    ``baseline`` and ``actual`` are sequences of per-carrier arrays (electric,
    heat, gas).  Carriers with zero baseline in a period are left out of that
    period's mean.
    """
    base = np.atleast_2d(np.asarray(baseline, dtype=float))
    act = np.atleast_2d(np.asarray(actual, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = 1.0 - np.abs(act - base) / base
    valid = base > 0
    terms = np.where(valid, terms, 0.0)
    count = valid.sum(axis=0)
    score = np.where(count > 0, terms.sum(axis=0) / np.maximum(count, 1), 1.0)
    return 100.0 * score
