#!/usr/bin/env python3
"""Cross-check an exported MPS model against scipy's HiGHS MILP solver.

Usage: check_mps.py model.mps [expected_objective]

Parses the MPS document written by `edge-placer solve --export-mps`, solves it
with scipy.optimize.milp, prints the optimum, and (optionally) compares it to
an expected objective within 1e-6 relative tolerance.
"""
import sys

import numpy as np
from scipy.optimize import LinearConstraint, milp


def parse_mps(path):
    section = None
    rows = {}          # name -> sense
    row_order = []
    cols = {}          # name -> {row: coef}
    col_order = []
    rhs = {}
    maximize = False
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            head = line.split()
            if not line.startswith(" "):
                section = head[0]
                continue
            if section == "OBJSENSE":
                maximize = head[0] == "MAX"
            elif section == "ROWS":
                sense, name = head
                rows[name] = sense
                row_order.append(name)
            elif section == "COLUMNS":
                name = head[0]
                if name not in cols:
                    cols[name] = {}
                    col_order.append(name)
                for i in range(1, len(head), 2):
                    cols[name][head[i]] = float(head[i + 1])
            elif section == "RHS":
                for i in range(1, len(head), 2):
                    rhs[head[i]] = float(head[i + 1])
            elif section == "BOUNDS":
                pass  # all BV
    return rows, row_order, cols, col_order, rhs, maximize


def main():
    path = sys.argv[1]
    rows, row_order, cols, col_order, rhs, maximize = parse_mps(path)
    n = len(col_order)
    col_index = {name: k for k, name in enumerate(col_order)}
    obj = np.zeros(n)
    constraint_rows = [r for r in row_order if rows[r] != "N"]
    row_index = {name: k for k, name in enumerate(constraint_rows)}
    a = np.zeros((len(constraint_rows), n))
    for name, entries in cols.items():
        k = col_index[name]
        for row, coef in entries.items():
            if rows[row] == "N":
                obj[k] = coef
            else:
                a[row_index[row], k] = coef
    upper = np.array([rhs.get(r, 0.0) for r in constraint_rows])
    lower = np.full(len(constraint_rows), -np.inf)

    c = -obj if maximize else obj
    res = milp(
        c=c,
        constraints=LinearConstraint(a, lower, upper),
        integrality=np.ones(n),
        bounds=(0, 1),
    )
    if not res.success:
        print(f"FAIL: milp did not solve: {res.message}")
        sys.exit(1)
    optimum = -res.fun if maximize else res.fun
    print(f"highs optimum: {optimum:.9f} ({n} binaries, {len(constraint_rows)} rows)")
    if len(sys.argv) > 2:
        expected = float(sys.argv[2])
        rel = abs(optimum - expected) / max(1.0, abs(expected))
        if rel > 1e-6:
            print(f"FAIL: expected {expected:.9f}, relative error {rel:.2e}")
            sys.exit(1)
        print(f"match: expected {expected:.9f}, relative error {rel:.2e}")


if __name__ == "__main__":
    main()
