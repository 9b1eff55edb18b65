"""Mixing time of equal-neighbor averaging on the m-butterfly.

Prints one CSV row per m plus the growth ratio T(m)/T(m-1) of the number of
rounds until delta(W^k) <= epsilon.
"""
import argparse
import csv
import sys

from dynagree import analysis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m-min", type=int, default=3)
    ap.add_argument("--m-max", type=int, default=10)
    ap.add_argument("--epsilon", type=float, default=1e-3)
    args = ap.parse_args()

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["m", "n", "time_to_epsilon", "growth", "spectral_gap", "bottleneck_half", "perron_error"])
    prev = None
    for m in range(args.m_min, args.m_max + 1):
        r = analysis.butterfly_experiment(m, args.epsilon)
        growth = "" if prev is None else f"{r.time_to_epsilon / prev:.3f}"
        out.writerow([m, 2 * m, r.time_to_epsilon, growth, f"{r.spectral_gap:.6g}",
                      f"{r.bottleneck_half:.6g}", f"{r.perron_error:.2e}"])
        prev = r.time_to_epsilon


if __name__ == "__main__":
    main()
