"""How many timestamps does each attack's search need under toy and hash f?

For each one-way function range, count the candidates in one freshness
window that make each attack usable against a fixed intercepted login.
"""

import argparse
import math

from tspa.codec import OneWayConfig, f_pair
from tspa.lab import Lab, LabConfig
from tspa.messages import Scheme


def usable(cid, t_orig, e, phi, n, f, window):
    a_orig = f_pair(cid, t_orig, f, n)
    counts = {"euclid": 0, "scale": 0, "unity": 0}
    for t in window:
        a = f_pair(cid, t, f, n)
        counts["euclid"] += math.gcd(e, a) == 1
        counts["scale"] += t != t_orig and a_orig % a == 0
        counts["unity"] += math.gcd(a, phi) == 1
    return counts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bits", type=int, default=128)
    ap.add_argument("--sessions", type=int, default=50)
    args = ap.parse_args()
    print(f"{'f':<10}{'euclid':>10}{'scale':>10}{'unity':>10}   (mean usable timestamps per window)")
    for bound in (16, 256, 65536, None):
        f = OneWayConfig.toy(bound) if bound else OneWayConfig()
        lab = Lab.build(LabConfig(bits=args.bits, toy_bound=bound), Scheme.SHEN)
        p = lab.kic.params
        totals = {"euclid": 0, "scale": 0, "unity": 0}
        for _ in range(args.sessions):
            lab.honest_login()
            m = lab.intercepted().message
            window = range(m.t - 58, m.t + 6)
            for k, v in usable(m.cid, m.t, p.e, p.phi, p.n, f, window).items():
                totals[k] += v
            lab.clock.advance(67)
        label = f"toy{bound}" if bound else "hash"
        print(f"{label:<10}" + "".join(f"{totals[k] / args.sessions:>10.2f}" for k in totals))


if __name__ == "__main__":
    main()
