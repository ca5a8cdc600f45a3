#!/usr/bin/env python3
"""Pipeline relaxation study: distances to the steady state over time.

Marches the friction/heat-exchange pipeline until stationary and prints
the L2 distances of the three solution components at doubling times,
together with the fitted exponential decay rate of the tail and the total
mass (which stays at its initial value to roundoff).
"""

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from pipeflow.diagnostics import distance_to_steady, total_mass
from pipeflow.scenario import parse_scenario
from pipeflow.solver import steady_state

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(SCENARIOS / "pipeline.cfg"))
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--times", type=float, nargs="*",
                    default=[1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    args = ap.parse_args()

    scenario = parse_scenario(args.config)
    result = steady_state(scenario, tol=args.tol, checkpoint_times=args.times)
    steady = result.final_state
    system = scenario.build_system()

    print(f"steady state reached at t = {steady.t:g}")
    print(f"total mass of the limit: {total_mass(system, steady):.12f}")
    print(f"flux range: [{steady.m_hat.min():.10f}, {steady.m_hat.max():.10f}]")
    print(f"{'t':>6} {'d_rho':>10} {'d_m':>10} {'d_theta':>10}")
    history = []
    for target in sorted(args.times):
        state = min(result.snapshots, key=lambda s: abs(s.t - target))
        d = distance_to_steady(system, state, steady)
        history.append((target, d))
        print(f"{target:6g} {d[0]:10.4f} {d[1]:10.4f} {d[2]:10.4f}")
    if len(history) >= 2:
        (t0, d0), (t1, d1) = history[-2], history[-1]
        rate = math.log(d0[0] / d1[0]) / (t1 - t0)
        print(f"tail decay rate of d_rho: {rate:.4f} per unit time")


if __name__ == "__main__":
    main()
