"""Fitted kink velocity and energy drift for a range of launch velocities.

    python3 scripts/soliton_velocity.py [--steps 6000] [--dt 0.05]
"""

import argparse

from qtrigger.soliton import init_kink, measure_velocity, run_trace, to_physical


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--velocities", type=float, nargs="+", default=[0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9])
    ap.add_argument("--steps", type=int, default=6000)
    ap.add_argument("--dt", type=float, default=0.05)
    args = ap.parse_args()

    print(f"{'v':>5s} {'fit':>9s} {'rel err':>9s} {'drift':>9s} {'m/s':>7s}")
    for v in args.velocities:
        _, trace = run_trace(init_kink(v, (8192, 0.1), x0=100.0), args.dt, args.steps, 100)
        fit = measure_velocity([(p.t, p.center) for p in trace])
        e0 = trace[0].energy
        drift = max(abs(p.energy - e0) for p in trace) / e0
        print(f"{v:5.2f} {fit.velocity:9.5f} {abs(fit.velocity - v) / v:9.2e} {drift:9.2e} {to_physical(fit.velocity):7.1f}")


if __name__ == "__main__":
    main()
