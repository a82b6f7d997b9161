#!/usr/bin/env python3
"""Solve an exported LP file with HiGHS and write a mirrorvlc solution file.

usage: highs_solve.py MODEL.lp SOLUTION.txt [--time-limit SECONDS]
"""

import argparse
import sys

import highspy


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--time-limit", type=float, default=None)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    if args.time_limit is not None:
        h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print(f"{args.model}: HiGHS could not read the model", file=sys.stderr)
        return 1
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    info = h.getInfo()
    if info.primal_solution_status != 2:  # no feasible point
        print(f"no feasible solution: {status}", file=sys.stderr)
        return 2
    lp = h.getLp()
    values = h.getSolution().col_value
    with open(args.solution, "w") as out:
        out.write(f"# HiGHS {status}, objective {info.objective_function_value!r}\n")
        for name, value in zip(lp.col_names_, values):
            out.write(f"{name} = {value!r}\n")
    print(f"{status}: objective {info.objective_function_value!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
