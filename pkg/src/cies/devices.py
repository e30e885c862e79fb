"""Conversion and storage devices: EB, ESD/HSD, P2G, MT."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np

from .violation import Violation

DEFAULT_HHV = 9.7  # kWh/m3


class DeviceDomainError(ValueError):
    pass


@dataclass(frozen=True)
class EbSpec:
    eta: float = 0.99
    h_max: float = 300.0

    def __post_init__(self):
        if not 0 < self.eta <= 1 or self.h_max <= 0:
            raise ValueError("invalid electric boiler parameters")

    @property
    def p_max(self) -> float:
        return self.h_max / self.eta


@dataclass(frozen=True)
class StorageSpec:
    c_min: float
    c_max: float
    p_ch_max: float
    p_dc_max: float
    eta_ch: float
    eta_dc: float
    k_loss: float

    def __post_init__(self):
        if not 0 <= self.c_min < self.c_max:
            raise ValueError("need 0 <= c_min < c_max")
        if not (0 < self.eta_ch <= 1 and 0 < self.eta_dc <= 1):
            raise ValueError("storage efficiencies must lie in (0, 1]")
        if not 0 <= self.k_loss < 1:
            raise ValueError("k_loss must lie in [0, 1)")
        if self.p_ch_max < 0 or self.p_dc_max < 0:
            raise ValueError("power limits must be non-negative")


ESD_DEFAULT = StorageSpec(40.0, 200.0, 60.0, 60.0, 0.9, 0.9, 0.001)
HSD_DEFAULT = StorageSpec(0.0, 160.0, 60.0, 60.0, 1.0, 1.0, 0.01)


@dataclass(frozen=True)
class P2gSpec:
    p_min: float = 100.0
    p_max: float = 500.0
    ramp_min: float = -200.0
    ramp_max: float = 200.0
    eta: float = 0.6
    hhv: float = DEFAULT_HHV

    def __post_init__(self):
        if not 0 < self.p_min < self.p_max:
            raise ValueError("need 0 < p_min < p_max")
        if not self.ramp_min < 0 < self.ramp_max:
            raise ValueError("need ramp_min < 0 < ramp_max")
        if not 0 < self.eta <= 1 or self.hhv <= 0:
            raise ValueError("invalid P2G efficiency or HHV")


@dataclass(frozen=True)
class MtSpec:
    q_min: float = 10.0
    q_max: float = 40.0
    ramp_min: float = -10.0
    ramp_max: float = 10.0
    eta_e: float = 0.4
    eta_loss: float = 0.1
    hhv: float = DEFAULT_HHV

    def __post_init__(self):
        if not 0 < self.q_min < self.q_max:
            raise ValueError("need 0 < q_min < q_max")
        if self.eta_e + self.eta_loss >= 1:
            raise ValueError("eta_e + eta_loss must be below 1")
        if self.hhv <= 0:
            raise ValueError("HHV must be positive")

    @property
    def eta_h(self) -> float:
        return 1.0 - self.eta_e - self.eta_loss


def eb_output(p_in: float, spec: EbSpec) -> float:
    if p_in < 0:
        raise DeviceDomainError("EB input must be non-negative")
    return spec.eta * p_in


def storage_step(c: float, p_ch: float, p_dc: float, spec: StorageSpec, dt: float) -> float:
    if not 0 <= p_ch <= spec.p_ch_max + 1e-12:
        raise DeviceDomainError(f"charge power {p_ch} outside [0, {spec.p_ch_max}]")
    if not 0 <= p_dc <= spec.p_dc_max + 1e-12:
        raise DeviceDomainError(f"discharge power {p_dc} outside [0, {spec.p_dc_max}]")
    return (1.0 - spec.k_loss) * c + (spec.eta_ch * p_ch - p_dc / spec.eta_dc) * dt


def storage_trajectory(c0: float, p_ch, p_dc, spec: StorageSpec, dt: float) -> np.ndarray:
    """Energy at the end of each period; no bound checks."""
    out = np.empty(len(p_ch))
    c = c0
    for t, (a, b) in enumerate(zip(p_ch, p_dc)):
        c = (1.0 - spec.k_loss) * c + (spec.eta_ch * a - b / spec.eta_dc) * dt
        out[t] = c
    return out


def _semi_continuous(x: float, lo: float, hi: float, what: str, tol: float = 1e-9) -> None:
    if x < -tol or (tol < x < lo - tol) or x > hi + tol:
        raise DeviceDomainError(f"{what} {x} must be 0 or within [{lo}, {hi}]")


def p2g_gas_output(p_in: float, spec: P2gSpec) -> float:
    _semi_continuous(p_in, spec.p_min, spec.p_max, "P2G input")
    return spec.eta * p_in / spec.hhv


def mt_outputs(q_gas: float, spec: MtSpec) -> tuple:
    _semi_continuous(q_gas, spec.q_min, spec.q_max, "MT gas")
    fuel = q_gas * spec.hhv
    return spec.eta_e * fuel, spec.eta_h * fuel


@dataclass(frozen=True)
class DeviceSpecs:
    eb: EbSpec = EbSpec()
    esd: StorageSpec = ESD_DEFAULT
    hsd: StorageSpec = HSD_DEFAULT
    p2g: P2gSpec = P2gSpec()
    mt: MtSpec = MtSpec()


def _is_on(x: float, tol: float) -> bool:
    return x > tol


def check_device_limits(schedule: Mapping[str, np.ndarray], specs: DeviceSpecs,
                        dt: float = 1.0, tol: float = 1e-6,
                        p2g_enabled: bool = True, mt_enabled: bool = True) -> List[Violation]:
    """Check storage, EB, P2G and MT limits on a per-period schedule.

    ``schedule`` keys (arrays of length T): ``esd_ch, esd_dc, esd_c, hsd_ch,
    hsd_dc, hsd_c, h_eb, p_p2g, q_mt``; optional ``theta``/``psi`` on-state
    arrays (derived from the power when absent).  Storage energies are
    end-of-period values and the cycle starts at ``c_min``.
    """
    out: List[Violation] = []

    def upper(name, x, cap):
        for t, v in enumerate(x, start=1):
            if v > cap + tol:
                out.append(Violation(name, t, v - cap, f"{v:.6g} > {cap:.6g}"))

    def lower(name, x, floor):
        for t, v in enumerate(x, start=1):
            if v < floor - tol:
                out.append(Violation(name, t, floor - v, f"{v:.6g} < {floor:.6g}"))

    for key, spec in (("esd", specs.esd), ("hsd", specs.hsd)):
        ch = np.asarray(schedule.get(f"{key}_ch", ()), dtype=float)
        dc = np.asarray(schedule.get(f"{key}_dc", ()), dtype=float)
        c = np.asarray(schedule.get(f"{key}_c", ()), dtype=float)
        if ch.size == 0:
            continue
        lower(f"{key}_charge_power", ch, 0.0)
        upper(f"{key}_charge_power", ch, spec.p_ch_max)
        lower(f"{key}_discharge_power", dc, 0.0)
        upper(f"{key}_discharge_power", dc, spec.p_dc_max)
        lower(f"{key}_capacity", c, spec.c_min)
        upper(f"{key}_capacity", c, spec.c_max)
        expected = storage_trajectory(spec.c_min, ch, dc, spec, dt)
        for t, (a, b) in enumerate(zip(c, expected), start=1):
            if abs(a - b) > tol * max(1.0, abs(b)):
                out.append(Violation(f"{key}_dynamics", t, abs(a - b), f"{a:.6g} vs {b:.6g}"))
        if c.size and abs(c[-1] - spec.c_min) > tol:
            out.append(Violation(f"{key}_cyclic", len(c), abs(c[-1] - spec.c_min),
                                 f"end {c[-1]:.6g} != start {spec.c_min:.6g}"))

    if "h_eb" in schedule:
        h = np.asarray(schedule["h_eb"], dtype=float)
        lower("eb_heat", h, 0.0)
        upper("eb_heat", h, specs.eb.h_max)

    def unit(name, x, on, lo, hi, rmin, rmax, enabled):
        x = np.asarray(x, dtype=float)
        on = np.asarray(on if on is not None else x > tol, dtype=float) > 0.5
        for t, (v, o) in enumerate(zip(x, on), start=1):
            if not enabled and abs(v) > tol:
                out.append(Violation(f"{name}_disabled", t, abs(v), f"{v:.6g} while unit absent"))
            elif o and v < lo - tol:
                out.append(Violation(f"{name}_min", t, lo - v, f"{v:.6g} < {lo:.6g}"))
            elif v > (hi if o else 0.0) + tol:
                out.append(Violation(f"{name}_max", t, v - (hi if o else 0.0), f"{v:.6g} > {hi:.6g}"))
            elif v < -tol:
                out.append(Violation(f"{name}_min", t, -v, f"{v:.6g} < 0"))
        for t in range(1, len(x)):
            if on[t] and on[t - 1]:
                step = x[t] - x[t - 1]
                if step > rmax + tol:
                    out.append(Violation(f"{name}_ramp", t + 1, step - rmax, f"+{step:.6g} > {rmax:.6g}"))
                elif step < rmin - tol:
                    out.append(Violation(f"{name}_ramp", t + 1, rmin - step, f"{step:.6g} < {rmin:.6g}"))

    if "p_p2g" in schedule:
        p = specs.p2g
        unit("p2g", schedule["p_p2g"], schedule.get("theta"), p.p_min, p.p_max,
             p.ramp_min, p.ramp_max, p2g_enabled)
    if "q_mt" in schedule:
        m = specs.mt
        unit("mt", schedule["q_mt"], schedule.get("psi"), m.q_min, m.q_max,
             m.ramp_min, m.ramp_max, mt_enabled)
    return out
