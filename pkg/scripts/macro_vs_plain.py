"""Rounds to epsilon for plain equal-neighbor averaging versus macro rounds.

Macro rounds flood start values for n-1 rounds and then average once; on
the butterfly this removes the exponential bottleneck.
"""
import argparse

from dynagree import analysis, models


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m-max", type=int, default=8)
    ap.add_argument("--epsilon", type=float, default=1e-3)
    args = ap.parse_args()

    print("m,n,plain_rounds,macro_rounds,products_match")
    for m in range(3, args.m_max + 1):
        c = analysis.macro_vs_plain_comparison(models.ConstantPattern(models.butterfly(m)), 2 * m, args.epsilon)
        print(f"{m},{2 * m},{c.plain_rounds},{c.macro_rounds},{c.products_match}")


if __name__ == "__main__":
    main()
