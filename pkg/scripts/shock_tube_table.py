#!/usr/bin/env python3
"""Refinement study for the shock tube: mass/energy/entropy increments.

Runs the closed-pipe shock tube for h = tau in {1/20, ..., 1/320} and
prints the total increments between t = 1 and t = 0, together with the
worst per-step violation of the energy/entropy monotonicity (which should
be zero up to Newton tolerance).
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from pipeflow.diagnostics import series_deltas
from pipeflow.scenario import parse_scenario
from pipeflow.solver import SolverConfig, run

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=5)
    ap.add_argument("--config", default=str(SCENARIOS / "sod.cfg"))
    args = ap.parse_args()

    base = parse_scenario(args.config)
    print(f"{'h=tau':>8} {'dM':>12} {'dE':>12} {'dS':>12} {'E viol':>9} {'S viol':>9}")
    for level in range(args.levels):
        inv = 20 * 2**level
        sc = base.with_overrides(tau=1.0 / inv, n_elems=5 * inv)
        result = run(sc, cfg=SolverConfig(tau=1.0 / inv, t_end=sc.time.t_end))
        dM, dE, dS = series_deltas(result.reports)
        e_viol = max(
            (b.E - a.E for a, b in zip(result.reports, result.reports[1:])), default=0.0
        )
        s_viol = max(
            (a.S - b.S for a, b in zip(result.reports, result.reports[1:])), default=0.0
        )
        print(
            f"   1/{inv:<4} {dM:+12.2e} {dE:+12.6f} {dS:+12.6f} "
            f"{max(e_viol, 0):9.1e} {max(s_viol, 0):9.1e}"
        )


if __name__ == "__main__":
    main()
