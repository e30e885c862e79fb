"""Solver backends.

A backend takes a :class:`ModelIR` and returns a :class:`RawSolution` whose
values respect the declared bounds.  :class:`CommandBackend` writes the
model as LP text and shells out to a configured executable;
:class:`ScipyBackend` solves in-process through ``scipy.optimize.milp``.
"""

from __future__ import annotations

import logging
import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .ir import ModelIR
from .lpformat import RawSolution, export_lp, parse_solution

log = logging.getLogger(__name__)

DEFAULT_COMMAND = "{python} -m cies.milp.highs_adapter {model} {solution}"


class SolverError(RuntimeError):
    def __init__(self, msg: str, log_text: str = ""):
        super().__init__(msg)
        self.log_text = log_text


@dataclass(frozen=True)
class Capabilities:
    name: str
    integer: bool = True
    partial_output: bool = False
    reports_objective: bool = True


class CommandBackend:
    """Run an external solver through a command template.

    The template receives ``{model}`` (LP file path), ``{solution}`` (path the
    solver must write ``name value`` lines to) and ``{python}`` (the current
    interpreter).
    """

    def __init__(self, command: str = DEFAULT_COMMAND, timeout: float = 600.0,
                 partial_output: bool = False, keep_files: Optional[str] = None):
        if "{model}" not in command or "{solution}" not in command:
            raise ValueError("command template needs {model} and {solution} placeholders")
        self.command = command
        self.timeout = timeout
        self.capabilities = Capabilities("command", partial_output=partial_output)
        self.keep_files = keep_files

    def solve(self, m: ModelIR) -> RawSolution:
        text = export_lp(m)
        with tempfile.TemporaryDirectory(prefix="cies_") as tmp:
            workdir = self.keep_files or tmp
            os.makedirs(workdir, exist_ok=True)
            model_path = os.path.join(workdir, f"{m.name}.lp")
            sol_path = os.path.join(workdir, f"{m.name}.sol")
            with open(model_path, "w") as fh:
                fh.write(text)
            if os.path.exists(sol_path):
                os.remove(sol_path)
            cmd = self.command.format(model=shlex.quote(model_path), solution=shlex.quote(sol_path),
                                      python=shlex.quote(sys.executable))
            t0 = time.perf_counter()
            try:
                proc = subprocess.run(cmd, shell=True, capture_output=True, text=True,
                                      timeout=self.timeout)
            except subprocess.TimeoutExpired as exc:
                raise SolverError(f"solver timed out after {self.timeout} s",
                                  (exc.stdout or "") + (exc.stderr or "")) from None
            elapsed = time.perf_counter() - t0
            solver_log = proc.stdout + proc.stderr
            if proc.returncode != 0 or not os.path.exists(sol_path):
                raise SolverError(f"solver exited with status {proc.returncode}", solver_log)
            with open(sol_path) as fh:
                raw = parse_solution(fh.read(), m, self.capabilities.partial_output)
        raw.meta["wall_time"] = repr(elapsed)
        raw.meta["log"] = solver_log
        return raw


class ScipyBackend:
    """In-process HiGHS via :func:`scipy.optimize.milp`."""

    capabilities = Capabilities("scipy-highs")

    def __init__(self, time_limit: Optional[float] = None, mip_rel_gap: float = 1e-7):
        self.time_limit = time_limit
        self.mip_rel_gap = mip_rel_gap

    def solve(self, m: ModelIR) -> RawSolution:
        m.validate()
        c, a, lo, hi, lb, ub, integ = m.to_arrays()
        options = {"mip_rel_gap": self.mip_rel_gap}
        if self.time_limit:
            options["time_limit"] = self.time_limit
        cons = optimize.LinearConstraint(a, lo, hi) if a.shape[0] else None
        t0 = time.perf_counter()
        res = optimize.milp(c, constraints=cons, integrality=integ,
                            bounds=optimize.Bounds(lb, ub), options=options)
        elapsed = time.perf_counter() - t0
        if res.x is None:
            raise SolverError(f"scipy milp failed: {res.message}")
        x = np.clip(res.x, lb, ub)
        x[integ == 1] = np.round(x[integ == 1])
        status = "Optimal" if res.status == 0 else res.message
        return RawSolution(x, status, float(res.fun) + m.objective.const,
                           {"wall_time": repr(elapsed)})


def make_backend(spec) -> object:
    """Build a backend from a config mapping or return ``spec`` if already one."""
    if hasattr(spec, "solve"):
        return spec
    spec = dict(spec or {})
    kind = spec.get("kind", "command")
    if kind == "scipy":
        return ScipyBackend(spec.get("time_limit_s"), spec.get("mip_rel_gap", 1e-7))
    if kind == "command":
        return CommandBackend(spec.get("command", DEFAULT_COMMAND), spec.get("timeout_s", 600.0),
                              spec.get("partial_output", False))
    raise ValueError(f"unknown solver backend kind {kind!r}")
