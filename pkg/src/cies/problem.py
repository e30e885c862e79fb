"""Per-run data derived from a configuration: renewable sequences, EV sessions, heat baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import ccp
from .config import CiesConfig
from .demand import baseline_heat_demand, comfort_bands, neutral_temperature
from .evfleet import EvSession, disorderly_profile, sample_sessions
from .uncertainty import (ProbSeq, convolve, discretize, expectation, pv_distribution,
                          wt_distribution)


@dataclass
class ProblemData:
    cfg: CiesConfig
    seqs_wt: List[ProbSeq]
    seqs_pv: List[ProbSeq]
    seqs: List[ProbSeq]  # joint renewable output per period
    e_wt: np.ndarray
    e_pv: np.ndarray
    sessions: List[EvSession]
    ev_disorderly: np.ndarray
    h0: np.ndarray
    bands: np.ndarray  # (T, 2) indoor temperature bounds
    t_in0: float

    @property
    def n_periods(self) -> int:
        return self.cfg.n_periods

    @property
    def scenario(self) -> int:
        return self.cfg.scenario

    @property
    def alpha(self) -> float:
        return self.cfg.alpha

    @property
    def e_rg(self) -> np.ndarray:
        return np.array([expectation(s) for s in self.seqs])

    def min_reserve(self, alpha: Optional[float] = None) -> np.ndarray:
        a = self.alpha if alpha is None else alpha
        return np.array([ccp.min_reserve(s, a) for s in self.seqs])

    def scheduled_energy(self, s: EvSession) -> float:
        return s.scheduled_energy(self.cfg.ev, self.n_periods, self.cfg.dt)


def renewable_sequences(cfg: CiesConfig):
    """Discretise wind and PV per period and convolve them."""
    wt, pv, joint = [], [], []
    for t in range(cfg.n_periods):
        a = discretize(wt_distribution(cfg.wind_model(t)), cfg.q)
        model = cfg.pv_model(t)
        b = discretize(pv_distribution(model), cfg.q) if model is not None else ProbSeq.point_mass(cfg.q)
        wt.append(a)
        pv.append(b)
        joint.append(convolve(a, b))
    return wt, pv, joint


def build_problem(cfg: CiesConfig, sessions: Optional[List[EvSession]] = None,
                  seqs: Optional[List[ProbSeq]] = None) -> ProblemData:
    """Steps 4-6 of the pipeline plus the EV fleet and heat baseline.

    ``seqs`` overrides the joint renewable sequences (the per-source ones are
    still derived from ``cfg`` for the maintenance terms).
    """
    cfg.validate()
    wt, pv, joint = renewable_sequences(cfg)
    if seqs is not None:
        if len(seqs) != cfg.n_periods:
            raise ValueError(f"need {cfg.n_periods} sequences, got {len(seqs)}")
        joint = list(seqs)
    if sessions is None:
        sessions = sample_sessions(cfg.ev, cfg.seed, cfg.n_periods, cfg.dt)
    t_neutral = neutral_temperature(cfg.comfort)
    bands = comfort_bands(cfg.n_periods, cfg.comfort, cfg.dt)
    return ProblemData(
        cfg=cfg,
        seqs_wt=wt,
        seqs_pv=pv,
        seqs=joint,
        e_wt=np.array([expectation(s) for s in wt]),
        e_pv=np.array([expectation(s) for s in pv]),
        sessions=list(sessions),
        ev_disorderly=disorderly_profile(sessions, cfg.ev, cfg.n_periods, cfg.dt),
        h0=baseline_heat_demand(t_neutral, cfg.loads.t_out, cfg.building),
        bands=bands,
        t_in0=float(bands[0].mean()),
    )
