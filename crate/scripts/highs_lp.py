#!/usr/bin/env python3
"""Solve an LP file with HiGHS and write status and objective.

Usage: highs_lp.py MODEL.lp SOLUTION.txt
Example: TTP_EXT_SOLVER='python3 scripts/highs_lp.py {lp} {sol}'
"""
import sys

import highspy


def main():
    lp_path, sol_path = sys.argv[1], sys.argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("solver", "simplex")
    h.readModel(lp_path)
    h.run()
    status = h.modelStatusToString(h.getModelStatus()).lower()
    with open(sol_path, "w") as f:
        f.write(f"status {status}\n")
        if status == "optimal":
            f.write(f"objective {h.getInfo().objective_function_value!r}\n")


if __name__ == "__main__":
    main()
