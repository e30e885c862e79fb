"""Regenerate the bundled SYNTHETIC scenario (src/cies/data/scenario3.json).

Profiles imitate a cold-day community in North China: valley/flat/peak
tariff bands, morning and evening electric peaks, a windy night and a
daytime PV bell.  None of the numbers are measurements.
"""

import json
import math
from pathlib import Path

HOURS = range(1, 25)

wind_scale = [11.5, 11.8, 12.0, 12.0, 11.8, 11.5, 11.0, 10.5, 10.0, 9.5, 9.0, 8.5,
              8.2, 8.0, 8.2, 8.5, 9.0, 9.5, 10.0, 10.5, 11.0, 11.2, 11.4, 11.5]
pv_p_max = [0] * 6 + [20, 80, 160, 240, 300, 345, 360, 345, 300, 240, 160, 80] + [0] * 6
p0 = [330, 310, 300, 295, 300, 330, 400, 520, 640, 700, 690, 650,
      610, 600, 640, 700, 760, 800, 780, 720, 640, 560, 460, 380]
q0 = [22, 20, 19, 19, 20, 24, 34, 44, 42, 36, 32, 34,
      36, 32, 30, 32, 38, 46, 48, 44, 38, 32, 28, 24]
t_out = [round(-12.0 + 6.0 * math.cos(2 * math.pi * (h - 15) / 24), 2) for h in HOURS]

VALLEY, FLAT, PEAK = 0.35, 0.68, 1.05
price_e = []
for h in HOURS:
    if h <= 7 or h >= 23:
        price_e.append(VALLEY)
    elif 9 <= h <= 11 or 15 <= h <= 21:
        price_e.append(PEAK)
    else:
        price_e.append(FLAT)
price_g = [2.8 if (h <= 7 or h >= 23) else 3.2 for h in HOURS]

doc = {
    "name": "synthetic-north-china-winter",
    "synthetic": True,
    "_note": "SYNTHETIC dataset: profiles and emission data are invented; "
             "device parameters follow the published parameter table.",
    "horizon": {"periods": 24, "dt_h": 1.0},
    "wind": {"scale_m_s": wind_scale, "shape": 1.8, "v_in_m_s": 3.0, "v_r_m_s": 15.0,
             "p_rated_kw": 600.0},
    "pv": {"lambda1": 3.0, "lambda2": 5.0, "p_max_kw": pv_p_max},
    "ev": {"n_evs": 60, "w_100_kwh": 15.0, "c_max_kwh": 30.0, "c_min_kwh": 3.0,
           "p_ch_rated_kw": 15.0, "eta_ch": 0.9, "s_expected": 0.9, "p_station_max_kw": 225.0,
           "mu_s_h": 17.6, "sigma_s_h": 3.4, "mu_d": 3.2, "sigma_d": 0.88},
    "loads": {"p0_kw": p0, "q0_m3": q0, "t_out_c": t_out},
    "prices": {
        "electricity_yuan_per_kwh": price_e,
        "gas_yuan_per_m3": price_g,
        "reserve_grid_yuan_per_kwh": 0.2,
        "reserve_esd_yuan_per_kwh": 0.14,
        "maintenance_yuan_per_kwh": {"pv": 0.025, "wt": 0.025, "eb": 0.032, "mt": 0.012,
                                     "esd": 0.002, "hsd": 0.005, "p2g": 0.007},
        "compensation": {"ie": 0.5, "tse": 0.3, "ch": 0.4, "iq": 3.5, "tsq": 0.7},
        "pollutants": [
            {"name": "CO2", "grid_kg_per_kwh": 0.889, "gas_kg_per_kwh": 0.184,
             "p2g_absorb_kg_per_kwh": 0.2, "penalty_yuan_per_kg": 0.03},
            {"name": "SO2", "grid_kg_per_kwh": 0.0018, "gas_kg_per_kwh": 0.0,
             "p2g_absorb_kg_per_kwh": 0.0, "penalty_yuan_per_kg": 6.0},
            {"name": "NOx", "grid_kg_per_kwh": 0.0016, "gas_kg_per_kwh": 0.0002,
             "p2g_absorb_kg_per_kwh": 0.0, "penalty_yuan_per_kg": 8.0},
        ],
    },
    "flex_ratios": {"a_tse": 0.1, "a_ie": 0.1, "a_tsq": 0.1, "a_iq": 0.1},
    "building": {"k_ht": 0.5, "f_area": 2400.0, "volume": 36000.0, "c_air": 1.007, "rho_air": 1.2},
    "comfort": {"m_met_w_m2": 80.0, "i_cl_m2c_w": 0.15, "t_skin_c": 33.5,
                "pmv_relaxed": 0.9, "pmv_strict": 0.5, "strict_hours": [8, 19]},
    "devices": {
        "hhv_kwh_per_m3": 9.7,
        "eb": {"eta": 0.99, "h_max_kw": 300.0},
        "esd": {"c_min_kwh": 40.0, "c_max_kwh": 200.0, "p_ch_max_kw": 60.0, "p_dc_max_kw": 60.0,
                "eta_ch": 0.9, "eta_dc": 0.9, "k_loss": 0.001},
        "hsd": {"c_min_kwh": 0.0, "c_max_kwh": 160.0, "p_ch_max_kw": 60.0, "p_dc_max_kw": 60.0,
                "eta_ch": 1.0, "eta_dc": 1.0, "k_loss": 0.01},
        "p2g": {"p_min_kw": 100.0, "p_max_kw": 500.0, "ramp_min_kw": -200.0, "ramp_max_kw": 200.0,
                "eta": 0.6},
        "mt": {"q_min_m3": 10.0, "q_max_m3": 40.0, "ramp_min_m3": -10.0, "ramp_max_m3": 10.0,
               "eta_e": 0.4, "eta_loss": 0.1},
    },
    "grid": {"p_max_kw": 1000.0, "q_max_m3": 80.0},
    "alpha": 0.9,
    "q_kw": 5.0,
    "scenario": 3,
    "seed": 2021,
    "solver": {"kind": "command", "timeout_s": 600},
}

out = Path(__file__).resolve().parents[1] / "src" / "cies" / "data" / "scenario3.json"
out.write_text(json.dumps(doc, indent=1) + "\n")
print(f"wrote {out}")
