"""Deterministic spinning-reserve rows and min-operator encodings.

The reserve requirement ``P(R >= E - X) >= alpha`` for the joint renewable
output ``X`` (a :class:`ProbSeq`) is expressed with one indicator per
sequence state: ``Z_u = 1`` exactly when ``R >= E - u q``.  The indicator is
pinned by a pair of big-M rows and the probability of covered states is
summed against ``alpha``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .milp.ir import Expr, ModelIR, lsum
from .uncertainty import ProbSeq, expectation

log = logging.getLogger(__name__)

# Tail sums are compared against alpha with this slack so that alpha = 1 is
# attainable despite rounding in the sequence.
TAIL_EPS = 1e-12
# States less likely than this are left out of the coverage sum and counted
# as covered (solvers drop such coefficients anyway).  critical_index applies
# the same rule so the rows and the closed form agree exactly.
COVER_MIN_PROB = 1e-9


def critical_index(c: ProbSeq, alpha: float) -> int:
    """Largest u with P(state >= u) >= alpha, negligible states counted as covered."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    small = c.probs < COVER_MIN_PROB
    kept = np.where(small, 0.0, c.probs)
    tail = np.cumsum(kept[::-1])[::-1] + float(c.probs[small].sum())
    ok = np.flatnonzero(tail >= alpha - TAIL_EPS)
    return int(ok[-1])


def min_reserve(c: ProbSeq, alpha: float) -> float:
    """Smallest non-negative reserve meeting the chance requirement."""
    if alpha == 0:
        return 0.0
    u = critical_index(c, alpha)
    return max(0.0, expectation(c) - u * c.q)


@dataclass
class ReserveContext:
    seqs: Sequence[ProbSeq]
    r_max: np.ndarray
    alpha: float
    expectations: np.ndarray = field(default=None)

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        self.r_max = np.broadcast_to(np.asarray(self.r_max, dtype=float), (len(self.seqs),)).copy()
        if self.expectations is None:
            self.expectations = np.array([expectation(s) for s in self.seqs])


@dataclass
class ChanceRowSet:
    z_names: List[List[str]]
    row_names: List[List[str]]
    chi: np.ndarray

    def rows_per_period(self) -> List[int]:
        return [len(r) for r in self.row_names]

    def binaries_per_period(self) -> List[int]:
        return [len(z) for z in self.z_names]


def big_m(e: float, r_max: float, c: ProbSeq) -> float:
    """Per-period big-M that keeps both indicator rows valid.

    With R = r_max and u = N the lower fraction must not exceed 1, and with
    R = 0, u = 0 the upper one must not drop below 0.
    """
    return max(e + r_max, r_max + c.n * c.q - e) + c.q


def build_chance_rows(m: ModelIR, ctx: ReserveContext, reserve: Sequence[Expr],
                      prefix: str = "cc", ordering_cuts: bool = False) -> ChanceRowSet:
    """Add indicator variables and rows for every period to ``m``.

    ``reserve[t]`` is the linear expression of the total reserve in period t.
    ``ordering_cuts`` adds the valid rows ``Z_u <= Z_{u+1}`` (a reserve that
    covers state u also covers u+1); they tighten the relaxation without
    changing the feasible reserves.
    """
    z_names, row_names, chis = [], [], []
    for t, (c, r) in enumerate(zip(ctx.seqs, reserve), start=1):
        e = float(ctx.expectations[t - 1])
        if ctx.alpha > float(c.probs.sum()) + TAIL_EPS:
            warnings.warn(f"period {t}: alpha exceeds total probability; rows are infeasible")
        chi = big_m(e, float(ctx.r_max[t - 1]), c)
        zs, rows, cover = [], [], []
        dropped = float(c.probs[c.probs < COVER_MIN_PROB].sum())
        for u in range(c.n + 1):
            zn = f"Z_{t}_{u}"
            z = m.add_var(zn, binary=True)
            # (R + u q - E) / chi <= Z <= 1 + (R + u q - E) / chi, scaled by chi
            lhs = r + (u * c.q - e)
            m.add_constraint(f"{prefix}lo_{t}_{u}", lhs - chi * z, "<=", 0.0)
            m.add_constraint(f"{prefix}hi_{t}_{u}", chi * z - lhs, "<=", chi)
            zs.append(zn)
            rows += [f"{prefix}lo_{t}_{u}", f"{prefix}hi_{t}_{u}"]
            if c.probs[u] >= COVER_MIN_PROB:
                cover.append(float(c.probs[u]) * z)
        m.add_constraint(f"{prefix}prob_{t}", lsum(cover), ">=", ctx.alpha - TAIL_EPS - dropped)
        rows.append(f"{prefix}prob_{t}")
        if ordering_cuts:
            for u in range(c.n):
                m.add_constraint(f"{prefix}ord_{t}_{u}", m.v(zs[u]) - m.v(zs[u + 1]), "<=", 0.0)
                rows.append(f"{prefix}ord_{t}_{u}")
        z_names.append(zs)
        row_names.append(rows)
        chis.append(chi)
    return ChanceRowSet(z_names, row_names, np.array(chis))


def shift_cost_rows(m: ModelIR, x: Expr, gamma: float, name: str) -> Expr:
    """Epigraph of ``-gamma * min(x, 0)``: returns the objective term ``gamma * s``.

    ``s >= 0`` and ``s >= -x``; any cost-minimising solution has
    ``s = max(-x, 0)``.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    s = m.add_var(name)
    m.add_constraint(f"{name}_epi", s + x, ">=", 0.0)
    return gamma * s


@dataclass
class Sos2Encoding:
    g: Expr  # expression equal to min(x, 0)
    w: List[str]
    z: List[str]


def build_sos2_min_rows(m: ModelIR, x: Expr, lo: float, hi: float, name: str,
                        literal: bool = False) -> Sos2Encoding:
    """Piecewise encoding of ``g = min(x, 0)`` on breakpoints ``(-lo, 0, hi)``.

    Two segments, a binary per segment, and the usual adjacency rows
    ``w1 <= z1, w2 <= z1 + z2, w3 <= z2``.  ``literal=True`` instead pairs
    one binary with each weight (``w_i <= z_i``, ``sum z = 1``), which only
    admits the breakpoints themselves.
    """
    if lo < 0 or hi < 0:
        raise ValueError("breakpoint distances must be non-negative")
    w = [m.add_var(f"{name}_w{i}", 0.0, 1.0) for i in (1, 2, 3)]
    m.add_constraint(f"{name}_wsum", lsum(w), "=", 1.0)
    m.add_constraint(f"{name}_x", x - (-lo * w[0] + hi * w[2]), "=", 0.0)
    if literal:
        z = [m.add_var(f"{name}_z{i}", binary=True) for i in (1, 2, 3)]
        m.add_constraint(f"{name}_zsum", lsum(z), "=", 1.0)
        for i in range(3):
            m.add_constraint(f"{name}_adj{i + 1}", w[i] - z[i], "<=", 0.0)
        znames = [f"{name}_z{i}" for i in (1, 2, 3)]
    else:
        z = [m.add_var(f"{name}_z{i}", binary=True) for i in (1, 2)]
        m.add_constraint(f"{name}_zsum", z[0] + z[1], "=", 1.0)
        m.add_constraint(f"{name}_adj1", w[0] - z[0], "<=", 0.0)
        m.add_constraint(f"{name}_adj2", w[1] - z[0] - z[1], "<=", 0.0)
        m.add_constraint(f"{name}_adj3", w[2] - z[1], "<=", 0.0)
        znames = [f"{name}_z{i}" for i in (1, 2)]
    return Sos2Encoding(-lo * w[0], [f"{name}_w{i}" for i in (1, 2, 3)], znames)
