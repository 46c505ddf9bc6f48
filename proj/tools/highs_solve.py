#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and write "name value" lines.

usage: highs_solve.py MODEL.lp SOLUTION.sol [TIME_LIMIT_S]
"""
import sys

import highspy


def main():
    if len(sys.argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    model_path, solution_path = sys.argv[1], sys.argv[2]
    time_limit = float(sys.argv[3]) if len(sys.argv) > 3 else None

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    if time_limit:
        h.setOptionValue("time_limit", time_limit)
    if h.readModel(model_path) != highspy.HighsStatus.kOk:
        print(f"cannot read {model_path}", file=sys.stderr)
        return 1
    h.run()
    info = h.getInfo()
    if info.primal_solution_status != 2:
        print(f"no feasible solution: {h.modelStatusToString(h.getModelStatus())}", file=sys.stderr)
        return 1
    lp = h.getLp()
    values = h.getSolution().col_value
    with open(solution_path, "w") as out:
        out.write(f"# status {h.modelStatusToString(h.getModelStatus())}\n")
        out.write(f"# gap {max(0.0, info.mip_gap) if info.mip_gap < 1e30 else 1.0}\n")
        for name, value in zip(lp.col_names_, values):
            out.write(f"{name} {value:.10g}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
