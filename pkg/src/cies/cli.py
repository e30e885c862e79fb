"""Command line entry point.

``cies run CONFIG [options]`` runs the full pipeline and writes CSV/JSON
reports.  Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 audit violations.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import pipeline
from .baseline_hia import HiaFailure, PsoParams
from .config import ConfigError, bundled_config, load_config
from .milp.backends import SolverError, make_backend
from .milp.model import InfeasibleConfig
from .problem import build_problem
from .validate import scenario_report

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_AUDIT = 0, 2, 3, 4
log = logging.getLogger("cies")


def _alphas(text: str) -> List[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals or any(not 0 <= a <= 1 for a in vals):
        raise argparse.ArgumentTypeError("confidence levels must lie in [0, 1]")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cies", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="solve one configuration and write reports")
    run.add_argument("config", help="JSON config path, or the name of a bundled dataset (scenario3)")
    run.add_argument("--alpha", type=float, help="confidence level of the reserve constraint")
    run.add_argument("--q", type=float, help="sequence step in kW")
    run.add_argument("--scenario", type=int, choices=(1, 2, 3))
    run.add_argument("--sweep-alpha", type=_alphas, metavar="LIST",
                     help="comma-separated confidence levels for reserve_sweep.csv")
    run.add_argument("--with-hia", action="store_true", help="also run the PSO baseline and write comparison.csv")
    run.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    run.add_argument("--seed", type=int)
    run.add_argument("--solver-cmd", metavar="TEMPLATE",
                     help="external solver command with {model} and {solution} placeholders")
    run.add_argument("--timeout", type=float, help="solver timeout in seconds")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--mc-samples", type=int, default=10_000)
    run.add_argument("--hia-population", type=int, default=100)
    run.add_argument("--hia-iterations", type=int, default=200)
    run.add_argument("-v", "--verbose", action="store_true")
    return ap


def _load(args):
    path = Path(args.config)
    if not path.exists() and path.suffix == "" and "/" not in args.config:
        cfg = bundled_config(args.config)
    else:
        cfg = load_config(path)
    changes = {k: v for k, v in (("alpha", args.alpha), ("q", args.q), ("scenario", args.scenario),
                                 ("seed", args.seed)) if v is not None}
    cfg = cfg.with_(**changes)
    cfg.validate()
    return cfg


def _backend(args, cfg):
    spec = dict(cfg.solver)
    if args.solver_cmd:
        spec.update(kind="command", command=args.solver_cmd)
    if args.timeout:
        spec["timeout_s"] = args.timeout
        spec["time_limit_s"] = args.timeout
    try:
        return make_backend(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run(args) -> int:
    out = Path(args.out)
    try:
        cfg = _load(args)
        backend = _backend(args, cfg)
        problem = build_problem(cfg)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.synthetic:
        log.info("dataset %s is SYNTHETIC", cfg.name)

    try:
        result = pipeline.solve_and_audit(problem, backend)
    except InfeasibleConfig as exc:
        print(f"config error: infeasible: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        (out / "solver.log").write_text(exc.log_text)
        print(f"solver failure: {exc}\n{exc.log_text}", file=sys.stderr)
        return EXIT_SOLVER
    sol = result.solution
    log.info("scenario %d alpha %.3f: status %s, objective %.6f, %.2f s",
             cfg.scenario, cfg.alpha, sol.status, sol.objective_reported or float("nan"), sol.wall_time)
    pipeline.write_audit(result.violations, out, {"status": sol.status, "scenario": cfg.scenario,
                                                  "alpha": cfg.alpha})
    if not result.ok:
        for v in result.violations[:20]:
            print(f"violation: {v.constraint} period={v.period} margin={v.margin:.3g} {v.detail}",
                  file=sys.stderr)
        return EXIT_AUDIT

    pipeline.write_dispatch(sol, out)
    pipeline.write_costs(sol, out)
    report = scenario_report(sol, cfg, n_samples=args.mc_samples)
    report.write_json(out / "validation.json")
    report.write_rates_csv(out / "satisfaction.csv")

    if args.sweep_alpha:
        try:
            results = pipeline.alpha_sweep(problem, args.sweep_alpha, backend, args.jobs)
        except (SolverError, InfeasibleConfig) as exc:
            print(f"solver failure in sweep: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        pipeline.write_sweep(pipeline.sweep_rows(args.sweep_alpha, results), out)
        if any(not r.ok for r in results):
            print("audit violations in alpha sweep; see reserve_sweep.csv", file=sys.stderr)
            return EXIT_AUDIT

    if args.with_hia:
        params = PsoParams(population=args.hia_population, iterations=args.hia_iterations, seed=cfg.seed)
        try:
            table, audits = pipeline.hia_comparison(problem, args.sweep_alpha or [cfg.alpha], params, backend)
        except (SolverError, HiaFailure) as exc:
            print(f"comparison failed: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        pipeline.write_comparison(table, out)
        if any(m or h for _, m, h in audits):
            print("audit violations in method comparison", file=sys.stderr)
            return EXIT_AUDIT
    print(f"wrote reports to {out}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
