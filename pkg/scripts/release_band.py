"""Calibrate the gate to a target release probability, then measure it over many impulses.

    python3 scripts/release_band.py [--targets 0.1 0.22 0.3] [--impulses 100000] [--workers 4]
"""

import argparse

from qtrigger.bouton import BoutonConfig, GateModel, calibrate_gate, run_trials
from qtrigger.constants import ANGSTROM, EV
from qtrigger.potentials import RectangularBarrier

TAU = 12.5e-12


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--targets", type=float, nargs="+", default=[0.1, 0.22, 0.3])
    ap.add_argument("--impulses", type=int, default=100_000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    print(f"{'target':>6s} {'width/A':>8s} {'action':>7s} {'rate/s':>10s} {'p_hat':>8s} {'+-':>7s} viol")
    for target in args.targets:
        cal = calibrate_gate(target, lambda L: RectangularBarrier(0.3 * EV, L), (0.1 * ANGSTROM, 2 * ANGSTROM),
                             E0=0.1 * EV, tau=TAU)
        stats = run_trials(BoutonConfig(GateModel(cal.rate, TAU), 40, seed=args.seed), args.impulses,
                           workers=args.workers)
        print(f"{target:6.3f} {cal.parameter / ANGSTROM:8.4f} {cal.action:7.3f} {cal.rate:10.3e} "
              f"{stats.p_hat:8.5f} {stats.ci95:7.5f} {stats.multi_release_violations}")


if __name__ == "__main__":
    main()
