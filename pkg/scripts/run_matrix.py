"""Run every attack against both verifiers and print the outcome table."""

import argparse

from tspa.lab import EXPECTED_MATRIX, LabConfig, format_matrix, matrix_table, run_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bits", type=int, default=64)
    ap.add_argument("--toy-f", type=int, default=16)
    ap.add_argument("--seeds", type=int, default=5, help="number of seeds to sweep")
    args = ap.parse_args()
    for seed in range(1, args.seeds + 1):
        results = run_matrix(LabConfig(bits=args.bits, toy_bound=args.toy_f, seed=seed))
        match = matrix_table(results) == EXPECTED_MATRIX
        print(f"seed={seed} matches_expected={match}")
        print(format_matrix(results))
        print()


if __name__ == "__main__":
    main()
