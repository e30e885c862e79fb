"""Scenario configuration (JSON) for the scheduling pipeline."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .demand import BuildingThermal, ComfortParams, FlexRatios, LoadProfiles
from .devices import DEFAULT_HHV, DeviceSpecs, EbSpec, MtSpec, P2gSpec, StorageSpec
from .evfleet import EvFleetSpec
from .uncertainty import PvPowerModel, WindPowerModel, sequence_length


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Pollutant:
    name: str
    grid_kg_per_kwh: float
    gas_kg_per_kwh: float  # per kWh of gas calorific value
    p2g_absorb_kg_per_kwh: float
    penalty_yuan_per_kg: float


@dataclass(frozen=True)
class Maintenance:
    pv: float = 0.025
    wt: float = 0.025
    eb: float = 0.032
    mt: float = 0.012
    esd: float = 0.002
    hsd: float = 0.005
    p2g: float = 0.007


@dataclass(frozen=True)
class Compensation:
    ie: float = 0.5  # yuan/kWh
    tse: float = 0.3
    ch: float = 0.4
    iq: float = 3.5  # yuan/m3
    tsq: float = 0.7


@dataclass
class CiesConfig:
    n_periods: int
    dt: float
    wind_scale: np.ndarray  # per period, m/s
    wind_shape: float
    v_in: float
    v_r: float
    p_rated_wt: float
    pv_lambda1: float
    pv_lambda2: float
    pv_p_max: np.ndarray  # per period, kW
    ev: EvFleetSpec
    loads: LoadProfiles
    flex: FlexRatios
    building: BuildingThermal
    comfort: ComfortParams
    devices: DeviceSpecs
    p_grid_max: float
    q_grid_max: float
    reserve_price_grid: np.ndarray  # per period, yuan/kWh
    reserve_price_esd: float
    maintenance: Maintenance
    compensation: Compensation
    pollutants: List[Pollutant]
    alpha: float = 0.9
    q: float = 5.0
    scenario: int = 3
    seed: int = 2021
    solver: Dict[str, Any] = field(default_factory=dict)
    name: str = "cies"
    synthetic: bool = False

    # scenario switches ---------------------------------------------------
    @property
    def idr_enabled(self) -> bool:
        return self.scenario >= 2

    @property
    def coupling_enabled(self) -> bool:
        """P2G and MT present."""
        return self.scenario >= 3

    @property
    def hhv(self) -> float:
        return self.devices.mt.hhv

    @property
    def r_max(self) -> float:
        return self.p_grid_max + self.devices.esd.p_dc_max

    def wind_model(self, t: int) -> WindPowerModel:
        return WindPowerModel(float(self.wind_scale[t]), self.wind_shape, self.v_in, self.v_r,
                              self.p_rated_wt)

    def pv_model(self, t: int) -> Optional[PvPowerModel]:
        pmax = float(self.pv_p_max[t])
        return PvPowerModel(self.pv_lambda1, self.pv_lambda2, pmax) if pmax > 0 else None

    def with_(self, **changes) -> "CiesConfig":
        return replace(self, **changes)

    def validate(self) -> None:
        t = self.n_periods
        if t <= 0 or self.dt <= 0:
            raise ConfigError("horizon must be positive")
        if abs(t * self.dt - 24.0) > 1e-9:
            raise ConfigError(f"horizon covers {t * self.dt} h, expected 24 h")
        for name in ("wind_scale", "pv_p_max", "reserve_price_grid"):
            arr = getattr(self, name)
            if arr.shape != (t,):
                raise ConfigError(f"{name} has length {arr.size}, expected {t}")
        if self.loads.n_periods != t:
            raise ConfigError(f"load profiles have length {self.loads.n_periods}, expected {t}")
        if self.scenario not in (1, 2, 3):
            raise ConfigError("scenario must be 1, 2 or 3")
        if not 0 <= self.alpha <= 1:
            raise ConfigError("alpha must lie in [0, 1]")
        if self.q <= 0:
            raise ConfigError("q must be positive")
        positive_pv = self.pv_p_max[self.pv_p_max > 0]
        smallest = min([self.p_rated_wt] + list(positive_pv))
        if self.q >= smallest:
            raise ConfigError(f"q={self.q} must be below every maximum output ({smallest})")
        if np.any(self.pv_p_max < 0):
            raise ConfigError("PV p_max must be non-negative")
        if self.devices.p2g.hhv != self.devices.mt.hhv:
            raise ConfigError("P2G and MT must share one HHV")
        for k in range(t):
            self.wind_model(k)

    def chance_binary_count(self) -> int:
        n_wt = sequence_length(self.p_rated_wt, self.q)
        total = 0
        for pmax in self.pv_p_max:
            n_pv = sequence_length(pmax, self.q) if pmax > 0 else 0
            total += n_wt + n_pv + 1
        return total


# --- JSON <-> config -------------------------------------------------------

def _arr(v, n: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        a = np.full(n, float(a))
    if a.shape != (n,):
        raise ConfigError(f"{name}: expected a scalar or {n} values, got {a.size}")
    return a


def _pick(d: dict, key: str, default=None, required: bool = False):
    if key in d:
        return d[key]
    if required:
        raise ConfigError(f"missing field {key!r}")
    return default


def _storage(d: dict) -> StorageSpec:
    return StorageSpec(
        c_min=d["c_min_kwh"], c_max=d["c_max_kwh"], p_ch_max=d["p_ch_max_kw"],
        p_dc_max=d["p_dc_max_kw"], eta_ch=d["eta_ch"], eta_dc=d["eta_dc"], k_loss=d["k_loss"])


def config_from_dict(doc: Dict[str, Any]) -> CiesConfig:
    try:
        return _config_from_dict(doc)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def _config_from_dict(doc: Dict[str, Any]) -> CiesConfig:
    hz = doc["horizon"]
    n, dt = int(hz["periods"]), float(hz["dt_h"])
    w, pv, ev = doc["wind"], doc["pv"], doc.get("ev", {})
    loads, prices, dev = doc["loads"], doc["prices"], doc["devices"]
    hhv = float(dev.get("hhv_kwh_per_m3", DEFAULT_HHV))
    p2g, mt, eb = dev["p2g"], dev["mt"], dev["eb"]
    comfort = doc.get("comfort", {})
    cfg = CiesConfig(
        n_periods=n,
        dt=dt,
        wind_scale=_arr(w["scale_m_s"], n, "wind.scale_m_s"),
        wind_shape=float(w["shape"]),
        v_in=float(w["v_in_m_s"]),
        v_r=float(w["v_r_m_s"]),
        p_rated_wt=float(w["p_rated_kw"]),
        pv_lambda1=float(pv["lambda1"]),
        pv_lambda2=float(pv["lambda2"]),
        pv_p_max=_arr(pv["p_max_kw"], n, "pv.p_max_kw"),
        ev=EvFleetSpec(
            n_evs=int(ev.get("n_evs", 60)),
            w_100=ev.get("w_100_kwh", 15.0),
            c_max=ev.get("c_max_kwh", 30.0),
            c_min=ev.get("c_min_kwh", 3.0),
            p_ch_rated=ev.get("p_ch_rated_kw", 15.0),
            eta_ch=ev.get("eta_ch", 0.9),
            s_expected=ev.get("s_expected", 0.9),
            p_station_max=ev.get("p_station_max_kw", 225.0),
            mu_s=ev.get("mu_s_h", 17.6),
            sigma_s=ev.get("sigma_s_h", 3.4),
            mu_d=ev.get("mu_d", 3.2),
            sigma_d=ev.get("sigma_d", 0.88),
        ),
        loads=LoadProfiles(
            p0=_arr(loads["p0_kw"], n, "loads.p0_kw"),
            q0=_arr(loads["q0_m3"], n, "loads.q0_m3"),
            t_out=_arr(loads["t_out_c"], n, "loads.t_out_c"),
            price_e=_arr(prices["electricity_yuan_per_kwh"], n, "prices.electricity"),
            price_g=_arr(prices["gas_yuan_per_m3"], n, "prices.gas"),
        ),
        flex=FlexRatios(**doc.get("flex_ratios", {})),
        building=BuildingThermal(**{k: v for k, v in doc.get("building", {}).items()}),
        comfort=ComfortParams(
            m_met=comfort.get("m_met_w_m2", 80.0),
            i_cl=comfort.get("i_cl_m2c_w", 0.15),
            t_skin=comfort.get("t_skin_c", 33.5),
            pmv_relaxed=comfort.get("pmv_relaxed", 0.9),
            pmv_strict=comfort.get("pmv_strict", 0.5),
            strict_hours=tuple(comfort.get("strict_hours", (8, 19))),
        ),
        devices=DeviceSpecs(
            eb=EbSpec(eta=eb["eta"], h_max=eb["h_max_kw"]),
            esd=_storage(dev["esd"]),
            hsd=_storage(dev["hsd"]),
            p2g=P2gSpec(p_min=p2g["p_min_kw"], p_max=p2g["p_max_kw"], ramp_min=p2g["ramp_min_kw"],
                        ramp_max=p2g["ramp_max_kw"], eta=p2g["eta"], hhv=hhv),
            mt=MtSpec(q_min=mt["q_min_m3"], q_max=mt["q_max_m3"], ramp_min=mt["ramp_min_m3"],
                      ramp_max=mt["ramp_max_m3"], eta_e=mt["eta_e"], eta_loss=mt["eta_loss"], hhv=hhv),
        ),
        p_grid_max=float(doc["grid"]["p_max_kw"]),
        q_grid_max=float(doc["grid"]["q_max_m3"]),
        reserve_price_grid=_arr(prices.get("reserve_grid_yuan_per_kwh", 0.2), n, "prices.reserve_grid"),
        reserve_price_esd=float(prices.get("reserve_esd_yuan_per_kwh", 0.14)),
        maintenance=Maintenance(**prices.get("maintenance_yuan_per_kwh", {})),
        compensation=Compensation(**prices.get("compensation", {})),
        pollutants=[Pollutant(**p) for p in prices.get("pollutants", [])],
        alpha=float(doc.get("alpha", 0.9)),
        q=float(doc.get("q_kw", 5.0)),
        scenario=int(doc.get("scenario", 3)),
        seed=int(doc.get("seed", 2021)),
        solver=dict(doc.get("solver", {})),
        name=str(doc.get("name", "cies")),
        synthetic=bool(doc.get("synthetic", False)),
    )
    cfg.validate()
    return cfg


def load_config(path: Union[str, Path]) -> CiesConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(doc)


def bundled_config_dict(name: str = "scenario3") -> Dict[str, Any]:
    text = resources.files("cies.data").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def bundled_config(name: str = "scenario3", **overrides) -> CiesConfig:
    """The bundled SYNTHETIC dataset, optionally with top-level overrides."""
    doc = copy.deepcopy(bundled_config_dict(name))
    doc.update(overrides)
    return config_from_dict(doc)
