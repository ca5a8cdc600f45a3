"""Command-line front end: batch runs, refinement studies, verification.

Subcommands
-----------
run        march a scenario, write snapshot and balance CSVs
refine     repeat a run while simultaneously halving mesh size and time
           step, tabulating the mass/energy/entropy increments
verify-sod compare a shock tube run against the exact Riemann solution
steady     march to the steady state, write its snapshot and the decay
           history of the distances to it

Exit codes: 0 success, 1 usage or configuration error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import diagnostics
from .assembly import State, System
from .eos import IdealGas
from .riemann import RiemannState, compare_profile, solve_star
from .scenario import ConfigError, Scenario, parse_scenario
from .solver import (
    NoConvergenceError,
    PositivityLossError,
    RunResult,
    SolverConfig,
    run,
    steady_state,
)

__all__ = ["main", "write_snapshot_csv"]

USAGE_ERROR = 1
SOLVER_ERROR = 2


def write_snapshot_csv(path, system: System, state: State):
    """Write one snapshot with both sampling grids.

    The midpoint block carries the density on its native grid; the node
    block carries flux and temperature on theirs.  Derived columns use the
    local (rho, theta): p = rho^2 P_rho, u = m/rho, plus internal energy
    and entropy.
    """
    mesh, model = system.mesh, system.model

    def rows(xs, rho, m, th):
        p = model.pressure(rho, th)
        u = m / rho
        e = model.internal_energy(rho, th)
        s = model.entropy(rho, th)
        return np.column_stack([xs, rho, m, th, p, u, e, s])

    mid = mesh.midpoints
    m_mid = 0.5 * (state.m_hat[:-1] + state.m_hat[1:])
    th_mid = 0.5 * (state.theta_hat[:-1] + state.theta_hat[1:])
    nodes = mesh.nodes
    rho_nodes = state.rho_hat[mesh.element_of(nodes)]

    with open(path, "w", newline="") as fh:
        fh.write(f"# t = {state.t:.12g}\n")
        fh.write("# midpoints\n")
        writer = csv.writer(fh)
        writer.writerow(["x", "rho", "m", "theta", "p", "u", "e", "s"])
        for row in rows(mid, state.rho_hat, m_mid, th_mid):
            writer.writerow([f"{v:.17g}" for v in row])
        fh.write("# nodes\n")
        writer.writerow(["x", "rho", "m", "theta", "p", "u", "e", "s"])
        for row in rows(nodes, rho_nodes, state.m_hat, state.theta_hat):
            writer.writerow([f"{v:.17g}" for v in row])


def _plot_snapshots(out_dir: Path, system: System, states):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    mesh = system.mesh
    fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    for state in states:
        axes[0].step(mesh.nodes, np.append(state.rho_hat, state.rho_hat[-1]),
                     where="post", label=f"t={state.t:g}")
        axes[1].plot(mesh.nodes, state.m_hat)
        axes[2].plot(mesh.nodes, state.theta_hat)
    axes[0].set_ylabel("rho")
    axes[1].set_ylabel("m")
    axes[2].set_ylabel("theta")
    axes[2].set_xlabel("x")
    axes[0].legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(out_dir / "fields.png", dpi=150)
    plt.close(fig)


def _out_dir(scenario: Scenario, args) -> Path:
    out = Path(args.out_dir) if args.out_dir else Path(scenario.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> Scenario:
    scenario = parse_scenario(args.config)
    return scenario.with_overrides(
        tau=args.tau, n_elems=args.n_elems, t_end=args.t_end
    )


def _write_run_outputs(out: Path, system: System, result: RunResult, plot: bool):
    diagnostics.write_balance_csv(result.reports, out / "balance.csv")
    for state in result.snapshots:
        write_snapshot_csv(out / f"snapshot_t{state.t:g}.csv", system, state)
    if plot:
        _plot_snapshots(out, system, result.snapshots)


def cmd_run(args) -> int:
    scenario = _load(args)
    system = scenario.build_system()
    result = run(scenario)
    out = _out_dir(scenario, args)
    _write_run_outputs(out, system, result, args.plot)
    last = result.reports[-1]
    dM, dE, dS = diagnostics.series_deltas(result.reports)
    print(f"completed t={last.t:g} in {len(result.stats)} steps")
    print(f"dM={dM:+.6e}  dE={dE:+.6e}  dS={dS:+.6e}")
    print(f"outputs in {out}")
    return 0


def cmd_refine(args) -> int:
    if args.levels < 2:
        print("error: refinement needs at least 2 levels", file=sys.stderr)
        return USAGE_ERROR
    scenario = _load(args)
    out = _out_dir(scenario, args)
    span = scenario.mesh.x_right - scenario.mesh.x_left
    rows = []
    for level in range(args.levels):
        sc = scenario.with_overrides(
            tau=scenario.time.tau / 2**level,
            n_elems=scenario.mesh.n_elems * 2**level,
        )
        result = run(sc)
        dM, dE, dS = diagnostics.series_deltas(result.reports)
        h = span / sc.mesh.n_elems
        rows.append((h, sc.time.tau, dM, dE, dS))
        print(
            f"h={h:.6g} tau={sc.time.tau:.6g}  "
            f"dM={dM:+.3e}  dE={dE:+.6f}  dS={dS:+.6f}"
        )
    with open(out / "refine.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "tau", "dM", "dE", "dS"])
        for row in rows:
            writer.writerow([f"{v:.16e}" for v in row])
    print(f"outputs in {out}")
    return 0


def cmd_verify_sod(args) -> int:
    scenario = _load(args)
    c = scenario.coeffs
    if (c.a, c.b, c.c, c.d) != (0.0, 0.0, 0.0, 0.0):
        print("error: verification needs an inviscid run (a=b=c=d=0)", file=sys.stderr)
        return USAGE_ERROR
    if not isinstance(scenario.eos, IdealGas):
        print("error: verification oracle covers the ideal gas only", file=sys.stderr)
        return USAGE_ERROR
    if scenario.time.t_end <= 0.0:
        print("error: verification needs t_end > 0", file=sys.stderr)
        return USAGE_ERROR

    system = scenario.build_system()
    model: IdealGas = scenario.eos
    initial = scenario.initial_state()
    # two-state Riemann data with the jump at x = 0: sample the projected
    # fields at the outermost element/node of each side
    left = RiemannState(
        rho=float(initial.rho_hat[0]),
        u=float(initial.m_hat[0] / initial.rho_hat[0]),
        p=float(model.pressure(initial.rho_hat[0], initial.theta_hat[0])),
    )
    right = RiemannState(
        rho=float(initial.rho_hat[-1]),
        u=float(initial.m_hat[-1] / initial.rho_hat[-1]),
        p=float(model.pressure(initial.rho_hat[-1], initial.theta_hat[-1])),
    )
    solution = solve_star(left, right, model.gamma)
    result = run(scenario)
    report = compare_profile(
        result.final_state, system.mesh, solution, scenario.time.t_end
    )
    out = _out_dir(scenario, args)
    with open(out / "verify.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "norm", "field_error", "shock_offset",
                         "shock_exact", "shock_simulated"])
        writer.writerow(
            [
                f"{scenario.time.t_end:.12g}",
                report.norm,
                f"{report.field_error:.12e}",
                f"{report.shock_offset:.12e}",
                f"{report.shock_position_exact:.12e}",
                f"{report.shock_position_simulated:.12e}",
            ]
        )
    h = system.mesh.elem_width
    print(f"density error ({report.norm}): {report.field_error:.6e}")
    print(f"shock offset: {report.shock_offset:.6e} ({report.shock_offset / h:.2f} h)")
    print(f"outputs in {out}")
    return 0


def cmd_steady(args) -> int:
    scenario = _load(args)
    if not scenario.bc.is_open:
        print("error: steady marching needs in/out boundary conditions", file=sys.stderr)
        return USAGE_ERROR
    system = scenario.build_system()
    checkpoints = tuple(args.times)
    result = steady_state(
        scenario, tol=args.tol, checkpoint_times=checkpoints
    )
    steady = result.final_state
    out = _out_dir(scenario, args)
    write_snapshot_csv(out / "steady_snapshot.csv", system, steady)
    with open(out / "steady_history.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "dist_rho", "dist_m", "dist_theta"])
        for target in sorted(set(checkpoints)):
            if target >= steady.t:
                continue
            state = min(result.snapshots, key=lambda s: abs(s.t - target))
            drho, dm, dth = diagnostics.distance_to_steady(system, state, steady)
            writer.writerow(
                [f"{target:.12g}", f"{drho:.12e}", f"{dm:.12e}", f"{dth:.12e}"]
            )
            print(f"t={target:8g}  drho={drho:.4e}  dm={dm:.4e}  dtheta={dth:.4e}")
    mass = diagnostics.total_mass(system, steady)
    print(f"steady state reached at t={steady.t:g}, total mass {mass:.12g}")
    if args.plot:
        _plot_snapshots(out, system, result.snapshots)
    print(f"outputs in {out}")
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("config", help="scenario configuration file")
    p.add_argument("--tau", type=float, default=None, help="override time step")
    p.add_argument("--n-elems", type=int, default=None, help="override element count")
    p.add_argument("--t-end", type=float, default=None, help="override final time")
    p.add_argument("--out-dir", default=None, help="override output directory")
    p.add_argument("--plot", action="store_true", help="also write PNG line plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipeflow",
        description="1D compressible pipe flow with discrete conservation audits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="march a scenario and write CSV outputs")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_ref = sub.add_parser("refine", help="simultaneous mesh/step refinement study")
    _add_common(p_ref)
    p_ref.add_argument("--levels", type=int, default=5, help="number of levels")
    p_ref.set_defaults(func=cmd_refine)

    p_ver = sub.add_parser("verify-sod", help="compare against the exact Riemann solution")
    _add_common(p_ver)
    p_ver.set_defaults(func=cmd_verify_sod)

    p_st = sub.add_parser("steady", help="march to the steady state")
    _add_common(p_st)
    p_st.add_argument("--tol", type=float, default=1e-10, help="stationarity tolerance")
    p_st.add_argument(
        "--times",
        type=float,
        nargs="*",
        default=(1.0, 2.0, 4.0, 8.0, 16.0, 32.0),
        help="checkpoint times for the decay history",
    )
    p_st.set_defaults(func=cmd_steady)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return USAGE_ERROR
    except (NoConvergenceError, PositivityLossError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return SOLVER_ERROR


if __name__ == "__main__":
    sys.exit(main())
