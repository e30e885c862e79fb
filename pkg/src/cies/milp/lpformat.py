"""LP text export and name/value solution parsing.

Grammar written by :func:`export_lp`::

    \\ <comment>
    Minimize
     obj: <terms> [+ constant]
    Subject To
     <row>: <terms> (<=|=|>=) <rhs>
    Bounds
     <lb> <= <var> <= <ub> | <var> free | <var> = <value> | ...
    Binary
     <var> ...
    End

Terms are ``+ <coef> <var>`` with coefficients printed to 12 significant
digits.  Continuous variables default to ``[0, +inf)`` and are omitted from
``Bounds`` in that case.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import numpy as np

from .ir import INF, ModelError, ModelIR

log = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-5
BOUND_TOL = 1e-6
TERMS_PER_LINE = 6

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_BAD_START = re.compile(r"^[eE][0-9eE+\-]")
_KEYWORDS = {"free", "inf", "infinity", "st", "end", "bounds", "binary", "binaries",
             "general", "generals", "minimize", "maximize", "subject", "to", "bin", "int"}


class ExportError(ModelError):
    pass


class SolutionParseError(ValueError):
    pass


def fmt(x: float) -> str:
    if not math.isfinite(x):
        raise ExportError(f"non-finite number {x}")
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _check_name(name: str) -> None:
    if not _NAME_RE.match(name) or _BAD_START.match(name) or name.lower() in _KEYWORDS:
        raise ExportError(f"name {name!r} is not valid in LP format")


def _terms(items: Iterable, names: List[str]) -> List[str]:
    out = []
    for i, c in items:
        if math.isnan(c) or not math.isfinite(c):
            raise ExportError(f"non-finite coefficient for {names[i]}")
        sign = "-" if c < 0 else "+"
        out.append(f"{sign} {fmt(abs(c))} {names[i]}")
    return out


def _wrap(head: str, parts: List[str]) -> List[str]:
    lines = []
    for k in range(0, max(len(parts), 1), TERMS_PER_LINE):
        chunk = " ".join(parts[k:k + TERMS_PER_LINE])
        lines.append((head if k == 0 else "   ") + chunk)
    return lines


def export_lp(m: ModelIR) -> str:
    m.validate()
    names = m.names()
    seen = set()
    for nm in names:
        _check_name(nm)
        key = nm.lower()
        if key in seen:
            raise ExportError(f"variable name collision on {nm!r}")
        seen.add(key)
    seen_rows = set()
    for con in m.constraints:
        _check_name(con.name)
        if con.name in seen_rows or con.name.lower() in seen:
            raise ExportError(f"constraint name collision on {con.name!r}")
        seen_rows.add(con.name)

    lines = [f"\\ model {m.name}", "Minimize"]
    obj_parts = _terms(sorted(m.objective.terms.items()), names)
    if m.objective.const != 0.0 or not obj_parts:
        c = m.objective.const
        obj_parts.append(f"{'-' if c < 0 else '+'} {fmt(abs(c))}")
    lines += _wrap(" obj: ", obj_parts)

    lines.append("Subject To")
    for con in m.constraints:
        parts = _terms(sorted(con.terms.items()), names)
        if not parts:
            parts = [f"+ 0 {names[0]}"]
        body = _wrap(f" {con.name}: ", parts)
        body[-1] += f" {con.sense} {fmt(con.rhs)}"
        lines += body

    lines.append("Bounds")
    for v in m.variables:
        if v.binary:
            continue
        if v.lb == v.ub:
            lines.append(f" {v.name} = {fmt(v.lb)}")
        elif v.lb == -INF and v.ub == INF:
            lines.append(f" {v.name} free")
        elif v.lb == 0.0 and v.ub == INF:
            continue
        else:
            lo = "-inf" if v.lb == -INF else fmt(v.lb)
            hi = "+inf" if v.ub == INF else fmt(v.ub)
            lines.append(f" {lo} <= {v.name} <= {hi}")

    binaries = [v.name for v in m.variables if v.binary]
    if binaries:
        lines.append("Binary")
        for k in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[k:k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass
class RawSolution:
    """Variable values bound to a model, plus whatever the solver reported."""

    values: np.ndarray
    status: str = "unknown"
    objective: Optional[float] = None
    meta: Dict[str, str] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


def parse_solution(text: str, m: ModelIR, partial_output: bool = False) -> RawSolution:
    """Parse ``name value`` lines; ``# key value`` comments carry solver metadata."""
    values = np.full(m.n_vars, np.nan)
    meta: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            kv = line[1:].strip().split(None, 1)
            if len(kv) == 2:
                meta[kv[0].lower()] = kv[1].strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionParseError(f"line {lineno}: expected 'name value', got {raw!r}")
        name, val = parts
        if not m.has_var(name):
            raise SolutionParseError(f"line {lineno}: unknown variable {name!r}")
        try:
            x = float(val)
        except ValueError:
            raise SolutionParseError(f"line {lineno}: bad value {val!r}") from None
        if not math.isfinite(x):
            raise SolutionParseError(f"line {lineno}: non-finite value for {name}")
        values[m.index(name)] = x

    warnings: List[str] = []
    missing = np.flatnonzero(np.isnan(values))
    if missing.size:
        if not partial_output:
            raise SolutionParseError(f"no value for variable {m.variables[missing[0]].name!r}"
                                     + (f" and {missing.size - 1} more" if missing.size > 1 else ""))
        msg = f"{missing.size} variables missing from solution; set to 0"
        log.warning(msg)
        warnings.append(msg)
        values[missing] = 0.0

    for i, var in enumerate(m.variables):
        x = values[i]
        if var.binary:
            r = round(x)
            if abs(x - r) > INTEGRALITY_TOL or r not in (0, 1):
                raise SolutionParseError(f"binary {var.name} has value {x}")
            values[i] = r
            continue
        if x < var.lb - BOUND_TOL or x > var.ub + BOUND_TOL:
            raise SolutionParseError(f"{var.name}={x} outside [{var.lb}, {var.ub}]")
        values[i] = min(max(x, var.lb), var.ub)

    objective = None
    if "objective" in meta:
        try:
            objective = float(meta["objective"])
        except ValueError:
            pass
    return RawSolution(values, meta.get("status", "unknown"), objective, meta, warnings)


def format_solution(names: Iterable[str], values: Iterable[float], status: str = "",
                    objective: Optional[float] = None) -> str:
    lines = []
    if status:
        lines.append(f"# status {status}")
    if objective is not None:
        lines.append(f"# objective {objective!r}")
    for n, v in zip(names, values):
        lines.append(f"{n} {float(v)!r}")
    return "\n".join(lines) + "\n"
