"""EV fleet: Monte Carlo arrivals, mileage, arrival SOC and charging load."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, asdict
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy import special, stats


@dataclass(frozen=True)
class EvFleetSpec:
    n_evs: int = 60
    w_100: float = 15.0  # kWh per 100 km
    c_max: float = 30.0  # kWh
    c_min: float = 3.0
    p_ch_rated: float = 15.0  # kW
    eta_ch: float = 0.9
    s_expected: float = 0.9
    p_station_max: float = 225.0
    mu_s: float = 17.6  # return time, h
    sigma_s: float = 3.4
    mu_d: float = 3.2  # log-mileage
    sigma_d: float = 0.88

    def __post_init__(self):
        if not 0 < self.c_min < self.c_max:
            raise ValueError("need 0 < c_min < c_max")
        if not 0 < self.eta_ch <= 1:
            raise ValueError("eta_ch must lie in (0, 1]")
        if not 0 < self.s_expected <= 1:
            raise ValueError("s_expected must lie in (0, 1]")
        if self.p_station_max < self.p_ch_rated:
            raise ValueError("station cap below a single charger's rating")
        if self.sigma_s <= 0 or self.sigma_d <= 0:
            raise ValueError("standard deviations must be positive")
        if self.n_evs < 0:
            raise ValueError("n_evs must be non-negative")

    @property
    def soc_floor(self) -> float:
        return self.c_min / self.c_max

    @property
    def energy_per_period_full(self) -> float:
        """Stored energy gained per hour at rated power (kWh/h)."""
        return self.p_ch_rated * self.eta_ch


@dataclass(frozen=True)
class EvSession:
    ev_id: int
    arrival_period: int  # 1-based
    soc_arrival: float
    required_energy: float  # kWh to be stored
    charging_duration: float  # h at rated power
    clamped: bool = False
    truncated: bool = False

    def scheduled_energy(self, spec: EvFleetSpec, n_periods: int, dt: float) -> float:
        """Energy the scheduler must deliver; capped by what fits before the horizon ends."""
        available = (n_periods - self.arrival_period + 1) * dt * spec.energy_per_period_full
        return min(self.required_energy, available)


def return_time_pdf(t, mu_s: float, sigma_s: float, normalized: bool = True):
    """Density of the final return time on (0, 24], wrapped around midnight."""
    t = np.asarray(t, dtype=float)
    shifted = np.where(t <= mu_s - 12.0, t + 24.0, t)
    d = stats.norm.pdf(shifted, mu_s, sigma_s)
    d = np.where((t > 0) & (t <= 24.0), d, 0.0)
    if normalized:
        d = d / _return_time_mass(sigma_s)
    return d


def _return_time_mass(sigma_s: float) -> float:
    # The wrapped window spans mu_s +/- 12 h.
    return float(stats.norm.cdf(12.0 / sigma_s) - stats.norm.cdf(-12.0 / sigma_s))


def sample_return_time(rng: np.random.Generator, spec: EvFleetSpec, size=None):
    """Hour of final return in (0, 24]; exact draw from the renormalised density."""
    lo, hi = -12.0 / spec.sigma_s, 12.0 / spec.sigma_s
    u = rng.random(size)
    # Inverse CDF of the normal truncated to mu_s +/- 12 h; 1 - u keeps the
    # draw inside the half-open window.
    cdf_lo, cdf_hi = special.ndtr(lo), special.ndtr(hi)
    z = special.ndtri(cdf_hi - (1.0 - u) * (cdf_hi - cdf_lo))
    x = spec.mu_s + spec.sigma_s * np.minimum(z, hi)
    x = np.where(x > 24.0, x - 24.0, x)
    x = np.where(x <= 0.0, x + 24.0, x)
    return float(x) if np.ndim(x) == 0 else x


def sample_mileage(rng: np.random.Generator, spec: EvFleetSpec, size=None):
    return rng.lognormal(spec.mu_d, spec.sigma_d, size)


def arrival_soc(x: float, spec: EvFleetSpec) -> Tuple[float, bool]:
    """Arrival SOC after driving ``x`` km, and whether it hit the floor."""
    if x < 0:
        raise ValueError("mileage must be non-negative")
    soc = spec.s_expected - spec.w_100 * x / (100.0 * spec.c_max)
    if soc < spec.soc_floor:
        return spec.soc_floor, True
    return soc, False


def charging_duration(soc_arrival: float, spec: EvFleetSpec) -> float:
    if soc_arrival > spec.s_expected + 1e-12:
        raise ValueError(f"arrival SOC {soc_arrival} above target {spec.s_expected}")
    return max(spec.s_expected - soc_arrival, 0.0) * spec.c_max / (spec.p_ch_rated * spec.eta_ch)


def arrival_period(t_hour: float, n_periods: int, dt: float) -> int:
    """1-based period containing ``t_hour``; hour 24 wraps to period 1."""
    return int(math.floor(t_hour / dt + 1e-9)) % n_periods + 1


def sample_sessions(spec: EvFleetSpec, seed: int, n_periods: int = 24, dt: float = 1.0) -> List[EvSession]:
    """One charging session per EV; each EV draws from its own (seed, ev_id) stream."""
    if not math.isclose(n_periods * dt, 24.0):
        raise ValueError("horizon must cover 24 h")
    sessions = []
    for n in range(spec.n_evs):
        rng = np.random.default_rng([seed, n])
        t = sample_return_time(rng, spec)
        x = float(sample_mileage(rng, spec))
        soc, clamped = arrival_soc(x, spec)
        energy = (spec.s_expected - soc) * spec.c_max
        duration = charging_duration(soc, spec)
        k = arrival_period(t, n_periods, dt)
        remaining = (n_periods - k + 1) * dt
        sessions.append(EvSession(n, k, soc, energy, duration, clamped, duration > remaining + 1e-9))
    return sessions


def disorderly_profile(sessions: Iterable[EvSession], spec: EvFleetSpec,
                       n_periods: int = 24, dt: float = 1.0) -> np.ndarray:
    """Aggregate load when every EV charges at rated power from the start of its arrival period.

    Charging that runs past the end of the day continues into the first
    periods (cyclic day), so the profile carries every session's full energy.
    """
    load = np.zeros(n_periods)
    for s in sessions:
        left = s.charging_duration
        k = s.arrival_period - 1
        while left > 1e-12:
            span = min(left, dt)
            load[k % n_periods] += spec.p_ch_rated * span / dt
            left -= span
            k += 1
    return load


def simulate_fleet(spec: EvFleetSpec, seed: int, dt: float = 1.0) -> Tuple[np.ndarray, List[EvSession]]:
    n_periods = int(round(24.0 / dt))
    sessions = sample_sessions(spec, seed, n_periods, dt)
    return disorderly_profile(sessions, spec, n_periods, dt), sessions


SESSION_COLUMNS = ("ev_id", "arrival_period", "soc_arrival", "required_energy_kwh", "duration_h")


def write_sessions_csv(path, sessions: Sequence[EvSession]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SESSION_COLUMNS)
        for s in sessions:
            w.writerow([s.ev_id, s.arrival_period, f"{s.soc_arrival:.12g}",
                        f"{s.required_energy:.12g}", f"{s.charging_duration:.12g}"])


def read_sessions_csv(path, spec: EvFleetSpec, n_periods: int = 24, dt: float = 1.0) -> List[EvSession]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            k = int(row["arrival_period"])
            dur = float(row["duration_h"])
            soc = float(row["soc_arrival"])
            out.append(EvSession(
                ev_id=int(row["ev_id"]),
                arrival_period=k,
                soc_arrival=soc,
                required_energy=float(row["required_energy_kwh"]),
                charging_duration=dur,
                clamped=soc <= spec.soc_floor + 1e-12,
                truncated=dur > (n_periods - k + 1) * dt + 1e-9,
            ))
    return out


def session_dict(s: EvSession) -> dict:
    return asdict(s)
