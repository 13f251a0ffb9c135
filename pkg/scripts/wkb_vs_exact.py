"""Semiclassical versus exact ground splitting in a quartic double well, swept over barrier height.

    python3 scripts/wkb_vs_exact.py [--a-angstrom 0.3] [--heights 4 8 12 20 30 45]
"""

import argparse

from qtrigger.constants import ANGSTROM, HBAR, M_H
from qtrigger.potentials import DoubleWell
from qtrigger.tunneling1d import wkb_vs_exact_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a-angstrom", type=float, default=0.3)
    ap.add_argument("--heights", type=float, nargs="+", default=[4, 8, 12, 20, 30, 45],
                    help="barrier heights in units of hbar^2/(M a^2)")
    args = ap.parse_args()

    a = args.a_angstrom * ANGSTROM
    eps = HBAR**2 / (M_H * a * a)
    print(f"{'height':>7s} {'action':>8s} {'exact/eps':>11s} {'wkb/eps':>11s} {'ratio':>7s}  note")
    for h in args.heights:
        r = wkb_vs_exact_report(DoubleWell.from_height(h * eps, a))
        print(f"{h:7.1f} {r.action:8.3f} {r.exact_splitting / eps:11.4e} {r.wkb_splitting / eps:11.4e} {r.ratio:7.3f}  {r.note}")


if __name__ == "__main__":
    main()
