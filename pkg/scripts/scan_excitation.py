"""Splitting series and verdict for every model in the shipped scan grid.

    python3 scripts/scan_excitation.py [--points 128] [--tol 0.01]
"""

import argparse
import time

from qtrigger.constants import HBAR
from qtrigger.potentials import natural_model
from qtrigger.tunneling2d import excitation_effect, scan_grid, solve_spectrum_2d


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=128)
    ap.add_argument("--tol", type=float, default=1e-2)
    args = ap.parse_args()

    print(f"{'kind':9s} {'g':>5s} {'s':>5s}  {'dE0/eps':>11s} {'dE1/eps':>11s} {'dE2/eps':>11s}  verdict")
    for kind, g, s in scan_grid():
        t0 = time.perf_counter()
        m = natural_model(kind, g, s)
        spec = solve_spectrum_2d(m, args.points, 24)
        eff = excitation_effect(m, 3, args.tol, spectrum=spec)
        eps = HBAR**2 / (m.masses[0] * m.a**2)
        cols = " ".join(f"{x / eps:11.4e}" for x in eff.series)
        print(f"{kind.name:9s} {g:5.2f} {s:5.2f}  {cols}  {eff.verdict.name:10s} ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
