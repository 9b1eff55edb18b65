"""Sweep the number of faulty senders for equal neighbor, Reduce and Center.

For every f and rule: decision bound, worst observed convergence round over
the seeds, the largest per-round matrix coefficient and the largest
per-round spread ratio, next to the per-round contraction bound.
"""
import argparse
import csv
import sys

from dynagree import analysis, scenario


def cell(n, f, rule, seeds, epsilon, strategy):
    worst = coeff = ratio = 0.0
    bound = None
    ok = True
    for seed in range(seeds):
        s = scenario.from_dict({"n": n, "epsilon": epsilon, "seed": seed, "rule": {"kind": rule},
                                "model": {"kind": "sender_faulty", "f": f, "strategy": strategy}})
        rep, _ = analysis.bound_suite(s)
        bound = rep.theorem_bound
        ok &= bool(rep.bound_satisfied)
        worst = max(worst, rep.observed_round)
        coeff = max(coeff, rep.matrix_delta_max)
        ratio = max(ratio, rep.spread_ratio_max)
    return [n, f, rule, bound, worst, f"{coeff:.4f}", f"{ratio:.4f}", f"{rep.matrix_delta_bound:.4f}", ok]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=7)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--epsilon", type=float, default=1e-6)
    ap.add_argument("--strategy", default="random")
    args = ap.parse_args()

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["n", "f", "rule", "bound", "worst_round", "max_matrix_coeff", "max_spread_ratio",
                  "contraction_bound", "bound_satisfied"])
    for f in range(args.n):
        out.writerow(cell(args.n, f, "equal_neighbor", args.seeds, args.epsilon, args.strategy))
        if args.n > 2 * f:
            out.writerow(cell(args.n, f, "reduce", args.seeds, args.epsilon, args.strategy))
        if 0 < f and 3 * f < 2 * args.n:  # otherwise f/(2(n-f)) >= 1 and no bound exists
            out.writerow(cell(args.n, f, "center", args.seeds, args.epsilon, args.strategy))


if __name__ == "__main__":
    main()
