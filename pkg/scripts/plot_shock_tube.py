#!/usr/bin/env python3
"""Plot shock tube profiles against the exact Riemann solution.

Runs the shock tube scenario and draws the simulated density, flux,
temperature, pressure, velocity and entropy at the final time, overlaying
the exact self-similar solution.  Requires matplotlib.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from pipeflow.riemann import RiemannState, solve_star
from pipeflow.scenario import parse_scenario
from pipeflow.solver import run

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(SCENARIOS / "sod.cfg"))
    ap.add_argument("--n-elems", type=int, default=500)
    ap.add_argument("--tau", type=float, default=0.01)
    ap.add_argument("--out", default="shock_tube.png")
    args = ap.parse_args()

    scenario = parse_scenario(args.config).with_overrides(
        tau=args.tau, n_elems=args.n_elems
    )
    result = run(scenario)
    state = result.final_state
    t = state.t

    mesh = scenario.build_mesh()
    model = scenario.eos
    initial = scenario.initial_state()
    left = RiemannState(
        float(initial.rho_hat[0]),
        float(initial.m_hat[0] / initial.rho_hat[0]),
        float(model.pressure(initial.rho_hat[0], initial.theta_hat[0])),
    )
    right = RiemannState(
        float(initial.rho_hat[-1]),
        float(initial.m_hat[-1] / initial.rho_hat[-1]),
        float(model.pressure(initial.rho_hat[-1], initial.theta_hat[-1])),
    )
    sol = solve_star(left, right, model.gamma)

    xs = mesh.midpoints
    exact = [sol.sample(x / t) for x in xs]
    rho_e = np.array([s.rho for s in exact])
    u_e = np.array([s.u for s in exact])
    p_e = np.array([s.p for s in exact])
    th_e = p_e / rho_e  # ideal gas with R = 1

    rho = state.rho_hat
    m_mid = 0.5 * (state.m_hat[:-1] + state.m_hat[1:])
    th_mid = 0.5 * (state.theta_hat[:-1] + state.theta_hat[1:])
    u = m_mid / rho
    p = np.asarray(model.pressure(rho, th_mid))
    s_spec = np.asarray(model.entropy(rho, th_mid))
    s_exact = np.asarray(model.entropy(rho_e, th_e))

    panels = [
        ("density", rho, rho_e),
        ("mass flux", m_mid, rho_e * u_e),
        ("temperature", th_mid, th_e),
        ("pressure", p, p_e),
        ("velocity", u, u_e),
        ("specific entropy", s_spec, s_exact),
    ]
    fig, axes = plt.subplots(3, 2, figsize=(10, 10), sharex=True)
    for ax, (label, sim, ex) in zip(axes.T.flat, panels):
        ax.plot(xs, ex, "k--", lw=1, label="exact")
        ax.plot(xs, sim, "C0", lw=1.2, label="simulated")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[0, 0].legend(loc="best", fontsize="small")
    for ax in axes[-1]:
        ax.set_xlabel("x")
    fig.suptitle(f"shock tube at t = {t:g}, n_elems = {mesh.n_elems}")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
