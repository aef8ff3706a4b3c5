#!/usr/bin/env python3
"""Run every independence test on the bundled chronicity table."""

import argparse
from pathlib import Path

from catstats import (
    dcov_independence_test,
    fisher_mc,
    g_test,
    pearson_independence_test,
    permutation_test,
    read_table_csv,
)

DEFAULT_TABLE = Path(__file__).resolve().parent.parent / "data" / "chronicity.csv"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", default=str(DEFAULT_TABLE))
    parser.add_argument("--B", type=int, default=99_999)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    table = read_table_csv(args.input)
    print(f"table {table.shape[0]}x{table.shape[1]}, n={table.n}")
    rows = [
        ("dcov (asymptotic)", dcov_independence_test(table).p_value),
        ("dcov (permutation)",
         dcov_independence_test(table, method="permutation", B=999,
                                rng=args.seed).p_value),
        ("pearson", pearson_independence_test(table).p_value),
        ("pearson (permutation)",
         permutation_test(table, "pearson", B=999, rng=args.seed).p_value),
        ("g-test", g_test(table).p_value),
        ("fisher (monte carlo)", fisher_mc(table, B=args.B, rng=args.seed).p_value),
    ]
    for name, p in rows:
        print(f"{name:24s} p = {p:.4f}")


if __name__ == "__main__":
    main()
