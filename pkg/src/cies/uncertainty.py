"""Renewable output distributions and probabilistic-sequence arithmetic.

Wind and PV output are modelled as mixed distributions on ``[0, p_max]``:
a point mass at zero, a point mass at full output and a continuous density
in between.  :func:`discretize` turns such a distribution into a
:class:`ProbSeq` on a fixed power step ``q``; sequences with the same step
add by discrete convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

SUM_TOL = 1e-9


class ParameterError(ValueError):
    """Invalid model or discretization parameter."""


@dataclass(frozen=True)
class WindPowerModel:
    scale: float  # Weibull scale, m/s
    shape: float  # Weibull shape
    v_in: float
    v_r: float
    p_rated: float

    def __post_init__(self):
        if self.scale <= 0 or self.shape <= 0:
            raise ParameterError("Weibull scale and shape must be positive")
        if not 0 < self.v_in < self.v_r:
            raise ParameterError(f"need 0 < v_in < v_r, got v_in={self.v_in}, v_r={self.v_r}")
        if self.p_rated <= 0:
            raise ParameterError("rated power must be positive")

    @property
    def h(self) -> float:
        return self.v_r / self.v_in - 1.0

    def speed_cdf(self, v):
        v = np.maximum(np.asarray(v, dtype=float), 0.0)
        return -np.expm1(-((v / self.scale) ** self.shape))

    def speed_for_power(self, p):
        """Wind speed that produces power ``p`` on the linear part of the curve."""
        return self.v_in * (1.0 + self.h * np.asarray(p, dtype=float) / self.p_rated)


@dataclass(frozen=True)
class PvPowerModel:
    lambda1: float
    lambda2: float
    p_max: float

    def __post_init__(self):
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ParameterError("Beta shape factors must be positive")
        if self.p_max <= 0:
            raise ParameterError("p_max must be positive")


@dataclass(frozen=True)
class MixedPowerDistribution:
    """Point masses at 0 and ``p_max`` plus a density on ``(0, p_max)``.

    ``cdf``, when given, is the integral of ``density`` from 0 to ``p`` and
    is used for exact bin masses; otherwise bins are integrated numerically.
    """

    mass_at_zero: float
    mass_at_max: float
    density: Callable[[float], float]
    p_max: float
    cdf: Optional[Callable] = None

    def continuous_mass(self, a: float, b: float) -> float:
        a = min(max(a, 0.0), self.p_max)
        b = min(max(b, 0.0), self.p_max)
        if b <= a:
            return 0.0
        if self.cdf is not None:
            return float(self.cdf(b) - self.cdf(a))
        val, _ = integrate.quad(self.density, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)
        return float(val)

    def total_mass(self) -> float:
        """Total probability with the continuous part integrated by quadrature."""
        cont, _ = integrate.quad(self.density, 0.0, self.p_max, epsabs=1e-12, limit=200)
        return self.mass_at_zero + self.mass_at_max + cont

    def mean(self) -> float:
        """Expected power, continuous part by quadrature."""
        cont, _ = integrate.quad(lambda p: p * self.density(p), 0.0, self.p_max,
                                 epsabs=1e-10, limit=200)
        return cont + self.p_max * self.mass_at_max


def wt_distribution(model: WindPowerModel) -> MixedPowerDistribution:
    """Output distribution of a turbine under Weibull wind, no cut-out speed."""
    k, c, v_in, pr, h = model.shape, model.scale, model.v_in, model.p_rated, model.h
    f_in = float(model.speed_cdf(v_in))

    def density(p):
        p = np.asarray(p, dtype=float)
        x = (1.0 + h * p / pr) * v_in / c
        d = (k * h * v_in / (c * pr)) * x ** (k - 1.0) * np.exp(-(x ** k))
        d = np.where((p > 0) & (p < pr), d, 0.0)
        return float(d) if d.ndim == 0 else d

    def cdf(p):
        return model.speed_cdf(model.speed_for_power(p)) - f_in

    return MixedPowerDistribution(
        mass_at_zero=f_in,
        mass_at_max=float(1.0 - model.speed_cdf(model.v_r)),
        density=density,
        p_max=pr,
        cdf=cdf,
    )


def pv_density(p: float, model: PvPowerModel) -> float:
    if not 0 < p < model.p_max:
        raise ParameterError(f"PV power {p} outside (0, {model.p_max})")
    x = p / model.p_max
    a, b = model.lambda1, model.lambda2
    log_norm = special.gammaln(a + b) - special.gammaln(a) - special.gammaln(b)
    return float(np.exp(log_norm + (a - 1) * np.log(x) + (b - 1) * np.log1p(-x)) / model.p_max)


def pv_distribution(model: PvPowerModel) -> MixedPowerDistribution:
    def density(p):
        if 0 < p < model.p_max:
            return pv_density(p, model)
        return 0.0

    def cdf(p):
        return special.betainc(model.lambda1, model.lambda2,
                               np.clip(np.asarray(p, dtype=float) / model.p_max, 0.0, 1.0))

    return MixedPowerDistribution(0.0, 0.0, density, model.p_max, cdf=cdf)


@dataclass(frozen=True)
class ProbSeq:
    """Probabilities ``probs[u]`` of power ``u * q``."""

    q: float
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ParameterError("probs must be a non-empty 1-D array")
        if self.q <= 0:
            raise ParameterError("step q must be positive")
        if np.any(p < 0):
            raise ParameterError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ParameterError(f"probabilities sum to {p.sum():.12f}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def point_mass(cls, q: float, index: int = 0) -> "ProbSeq":
        p = np.zeros(index + 1)
        p[index] = 1.0
        return cls(q, p)

    @property
    def n(self) -> int:
        """Highest state index (sequence length minus one)."""
        return self.probs.size - 1

    @property
    def powers(self) -> np.ndarray:
        return self.q * np.arange(self.probs.size)

    def tail(self) -> np.ndarray:
        """``tail()[u]`` is the probability of a state index >= u."""
        return np.cumsum(self.probs[::-1])[::-1]

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw power values (kW) by inverse-CDF lookup."""
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return self.q * np.minimum(idx, self.n)

    def __len__(self):
        return self.probs.size


def sequence_length(p_max: float, q: float) -> int:
    """Highest index N = ceil(p_max / q)."""
    return int(math.ceil(round(p_max / q, 9)))


def discretize(dist: MixedPowerDistribution, q: float) -> ProbSeq:
    """Bin a mixed distribution onto the grid ``0, q, ..., N q``.

    Bin ``u`` collects ``[u q - q/2, u q + q/2)``, clipped to ``[0, p_max]``;
    the zero mass goes to bin 0 and the full-output mass to bin N.
    """
    if q <= 0 or q >= dist.p_max:
        raise ParameterError(f"step q={q} must lie in (0, p_max={dist.p_max})")
    n = sequence_length(dist.p_max, q)
    edges = np.concatenate(([0.0], (np.arange(1, n + 1) - 0.5) * q, [dist.p_max]))
    edges = np.minimum(edges, dist.p_max)
    if dist.cdf is not None:
        cum = np.asarray(dist.cdf(edges), dtype=float)
        masses = np.maximum(np.diff(cum), 0.0)
    else:
        masses = np.array([dist.continuous_mass(a, b) for a, b in zip(edges[:-1], edges[1:])])
    masses[0] += dist.mass_at_zero
    masses[-1] += dist.mass_at_max
    total = masses.sum()
    if abs(total - 1.0) > 1e-6:
        raise ParameterError(f"distribution mass {total:.9f} is not 1")
    # Remove residual quadrature/rounding error so the sequence is exactly normalised.
    return ProbSeq(q, masses / total)


def convolve(a: ProbSeq, b: ProbSeq) -> ProbSeq:
    """Sequence of the sum of two independent outputs."""
    if not math.isclose(a.q, b.q, rel_tol=1e-12):
        raise ParameterError(f"step mismatch: {a.q} vs {b.q}")
    return ProbSeq(a.q, np.convolve(a.probs, b.probs))


def expectation(s: ProbSeq) -> float:
    return float(np.dot(s.powers, s.probs))
