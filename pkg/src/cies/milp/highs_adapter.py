"""Solve an LP-format model with HiGHS and write ``name value`` lines.

Usage::

    python -m cies.milp.highs_adapter MODEL.lp SOLUTION.txt [--time-limit S] [--mip-gap G]

Exit status is 0 when a feasible point was written, 1 otherwise.
"""

from __future__ import annotations

import argparse
import sys


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="highs_adapter")
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--mip-gap", type=float, default=1e-7)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)

    try:
        import highspy
    except ImportError:
        print("highspy is not installed (pip install highspy)", file=sys.stderr)
        return 1

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", args.mip_gap)
    h.setOptionValue("threads", args.threads)
    if args.time_limit:
        h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(args.model) == highspy.HighsStatus.kError:
        print(f"could not read {args.model}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    sol = h.getSolution()
    lp = h.getLp()
    status_name = h.modelStatusToString(status)
    print(f"status {status_name}; objective {info.objective_function_value!r}", file=sys.stderr)
    if info.primal_solution_status != 2:  # 2 == feasible
        return 1
    with open(args.solution, "w") as fh:
        fh.write(f"# status {status_name}\n")
        fh.write(f"# objective {info.objective_function_value!r}\n")
        fh.write(f"# mip_gap {info.mip_gap!r}\n")
        for name, val in zip(lp.col_names_, sol.col_value):
            fh.write(f"{name} {float(val)!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
