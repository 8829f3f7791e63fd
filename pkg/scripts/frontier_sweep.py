"""Sweep the one-round vs limit-point efficiency trade-off for set covering.

Usage: python scripts/frontier_sweep.py [out_csv] [j_trunc]
"""
import math
import sys

from resgames import frontier_setcov


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "frontier.csv"
    j_trunc = int(sys.argv[2]) if len(sys.argv) > 2 else 10_000
    lines = ["q,one_round"]
    q = 0.5
    while q <= 1 - 1 / math.e + 1e-12:
        pt = frontier_setcov(q, j_trunc)
        lines.append(f"{pt.q!r},{pt.one_round!r}")
        q = round(q + 0.005, 10)
    with open(out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(lines) - 1} points, truncation {j_trunc})")


if __name__ == "__main__":
    main()
