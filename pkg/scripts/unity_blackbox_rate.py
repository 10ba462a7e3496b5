"""Measure how often the unity attack works when a is inverted modulo n.

The exponents only cancel when the inverse is taken modulo the group order,
so with a random-looking f the literal variant is expected to almost never
succeed. This script counts accepts over many fresh sessions.
"""

import argparse

from tspa.lab import LabConfig, measure_unity_blackbox


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bits", type=int, default=128)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--toy-f", type=int, default=None)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    config = LabConfig(bits=args.bits, toy_bound=args.toy_f, seed=args.seed)
    accepted, trials = measure_unity_blackbox(config, args.trials)
    f = f"toy{args.toy_f}" if args.toy_f else "hash"
    print(f"bits={args.bits} f={f} trials={trials} accepted={accepted} "
          f"rate={accepted / trials:.4f}")


if __name__ == "__main__":
    main()
