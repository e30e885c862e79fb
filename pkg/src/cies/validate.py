"""Monte Carlo check of the reserve chance constraint and per-scenario reports."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import CiesConfig
from .demand import satisfaction_index
from .milp.audit import AUDIT_TOL, CostBreakdown, evaluate_objective
from .milp.solution import ScheduleSolution
from .uncertainty import ProbSeq, expectation

CHUNK = 4096  # samples per substream; fixed so results do not depend on batching


def _chunks(n: int):
    k = 0
    while k * CHUNK < n:
        yield k, min(CHUNK, n - k * CHUNK)
        k += 1


def wind_power(speed, scale_model) -> np.ndarray:
    """Turbine output for wind speeds under the cut-in / rated / linear curve."""
    m = scale_model
    v = np.asarray(speed, dtype=float)
    p = m.p_rated * (v - m.v_in) / (m.v_r - m.v_in)
    return np.where(v < m.v_in, 0.0, np.where(v >= m.v_r, m.p_rated, p))


def sample_continuous(cfg: CiesConfig, t: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Joint renewable output drawn from the continuous models (no quantisation)."""
    wm = cfg.wind_model(t)
    x = wind_power(wm.scale * rng.weibull(wm.shape, size), wm)
    pm = cfg.pv_model(t)
    if pm is not None:
        x = x + pm.p_max * rng.beta(pm.lambda1, pm.lambda2, size)
    return x


def monte_carlo_reserve_check(sol_or_reserve, seqs: Sequence[ProbSeq], alpha: float = None,
                              n_samples: int = 10_000, seed: int = 0,
                              cfg: Optional[CiesConfig] = None) -> np.ndarray:
    """Fraction of sampled outputs with ``R_t >= E_t - sample`` in each period.

    Samples come from the discretised ``seqs``; pass ``cfg`` to sample the
    continuous models instead (``E_t`` still comes from ``seqs``).  ``alpha``
    is accepted for symmetry with the constraint and is not used.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be at least 1000")
    if isinstance(sol_or_reserve, ScheduleSolution):
        reserve = sol_or_reserve.reserve()
    else:
        reserve = np.asarray(sol_or_reserve, dtype=float)
    rates = np.empty(len(seqs))
    for t, seq in enumerate(seqs):
        e = expectation(seq)
        hits = 0
        for k, size in _chunks(n_samples):
            rng = np.random.default_rng([seed, t, k])
            x = sample_continuous(cfg, t, rng, size) if cfg is not None else seq.sample(rng, size)
            hits += int(np.count_nonzero(reserve[t] >= e - x - AUDIT_TOL))
        rates[t] = hits / n_samples
    return rates


@dataclass
class ValidationReport:
    rates: List[float]
    min_rate: float
    alpha: float
    curtailment_kwh: float
    satisfaction: List[float]
    costs: Dict[str, float]
    n_samples: int
    scenario: int
    continuous_rates: Optional[List[float]] = None
    notes: List[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def write_json(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    def write_rates_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["period", "adequacy_rate", "satisfaction_percent"])
            for t, (r, s) in enumerate(zip(self.rates, self.satisfaction), start=1):
                w.writerow([t, f"{r:.6f}", f"{s:.6f}"])


def satisfaction_series(sol: ScheduleSolution) -> np.ndarray:
    """Per-period satisfaction of the flexible electric, heat and gas loads (percent)."""
    p = sol.problem
    lp = p.cfg.loads
    s = sol.series
    base = [lp.p0, p.h0, lp.q0]
    actual = [lp.p0 + s("p_tse") - s("p_ie"), p.h0 - s("h_ch"), lp.q0 + s("q_tsq") - s("q_iq")]
    return satisfaction_index(base, actual)


def scenario_report(sol: ScheduleSolution, cfg: Optional[CiesConfig] = None, n_samples: int = 10_000,
                    seed: Optional[int] = None, continuous: bool = False) -> ValidationReport:
    cfg = cfg or sol.problem.cfg
    seed = cfg.seed if seed is None else seed
    costs: CostBreakdown = evaluate_objective(sol, cfg)
    rates = monte_carlo_reserve_check(sol, sol.problem.seqs, cfg.alpha, n_samples, seed)
    cont = None
    if continuous:
        cont = monte_carlo_reserve_check(sol, sol.problem.seqs, cfg.alpha, n_samples, seed, cfg=cfg).tolist()
    return ValidationReport(
        rates=rates.tolist(),
        min_rate=float(rates.min()),
        alpha=cfg.alpha,
        curtailment_kwh=max(0.0, sol.curtailment_kwh()),
        satisfaction=satisfaction_series(sol).tolist(),
        costs=costs.as_dict(),
        n_samples=n_samples,
        scenario=cfg.scenario,
        continuous_rates=cont,
    )
