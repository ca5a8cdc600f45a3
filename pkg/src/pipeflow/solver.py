"""Implicit Euler time stepping with damped Newton iteration.

Each step solves the fully implicit system with Newton's method on the
banded finite difference Jacobian, starting from the previous time level.
An update is halved whenever it would make a density or temperature dof
non-positive or fails to reduce the residual norm.  Steps that exhaust the
iteration budget are rejected; the driver then halves the step size and
restores the nominal step after two consecutive accepted steps.

After convergence the density coefficients are recomputed from the discrete
mass equation, which is linear in the unknowns; this keeps the total-mass
bookkeeping at roundoff level over arbitrarily long runs instead of
accumulating Newton-tolerance-sized drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .assembly import KL, KU, PositivityError, State, System
from .diagnostics import BalanceReport, balance_report
from .scenario import Scenario

__all__ = [
    "SolverConfig",
    "StepStats",
    "NoConvergenceError",
    "PositivityLossError",
    "RunResult",
    "step",
    "run",
    "steady_state",
]


@dataclass(frozen=True)
class SolverConfig:
    """Newton and step-control parameters."""

    tau: float = 0.05
    t_end: float = 1.0
    newton_tol_abs: float = 1e-11
    newton_tol_rel: float = 1e-9
    max_newton_iters: int = 50
    max_damping_halvings: int = 12
    max_step_rejections: int = 8

    def __post_init__(self):
        if min(self.tau, self.newton_tol_abs, self.newton_tol_rel) <= 0.0:
            raise ValueError("step size and tolerances must be positive")
        if self.t_end < 0.0:
            raise ValueError("t_end must be non-negative")
        if max(self.newton_tol_abs, self.newton_tol_rel) >= 1.0:
            raise ValueError("tolerances must be < 1")
        if min(self.max_newton_iters, self.max_damping_halvings, self.max_step_rejections) < 1:
            raise ValueError("iteration budgets must be at least 1")


@dataclass
class StepStats:
    newton_iters: int = 0
    final_residual_norm: float = 0.0
    damping_events: int = 0
    rejected: bool = False


class NoConvergenceError(RuntimeError):
    """Newton iteration budget exhausted."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class PositivityLossError(RuntimeError):
    """No amount of damping restored positivity."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


def _resolve_density(system: System, y: np.ndarray, old: State, tau: float) -> np.ndarray:
    """Exact solve of the (linear) discrete mass equation for the densities."""
    lay = system.layout
    new = system.unpack(y, old.t + tau)
    rho = old.rho_hat - (tau / system.mesh.elem_width) * np.diff(new.m_hat)
    if np.any(rho <= 0.0):
        raise PositivityLossError(
            "density lost positivity in the mass update", old.t + tau
        )
    out = y.copy()
    out[lay.flat_of_q] = rho
    return out


def step(
    system: System, state_old: State, tau: float, cfg: SolverConfig
) -> tuple[State, StepStats]:
    """One implicit Euler step; returns the new state and iteration stats.

    Raises NoConvergenceError when the Newton or damping budget runs out and
    PositivityLossError when damping cannot restore positive dofs.
    """
    state_old.require_positive()
    stats = StepStats()
    t_new = state_old.t + tau

    y = system.pack(state_old)
    r = system.residual_flat(y, state_old, tau)
    norm = float(np.linalg.norm(r))
    target = max(cfg.newton_tol_abs, cfg.newton_tol_rel * norm)

    while norm > target:
        if stats.newton_iters >= cfg.max_newton_iters:
            raise NoConvergenceError(
                f"Newton did not reach {target:.3e} within "
                f"{cfg.max_newton_iters} iterations (residual {norm:.3e})",
                t_new,
            )
        ab = system.jacobian_banded(y, state_old, tau, r0=r)
        dy = solve_banded((KL, KU), ab, -r)
        stats.newton_iters += 1

        lam = 1.0
        accepted = False
        positivity_blocked = False
        for _ in range(cfg.max_damping_halvings + 1):
            y_try = y + lam * dy
            if not system.positive_dofs(y_try):
                positivity_blocked = True
                lam *= 0.5
                stats.damping_events += 1
                continue
            try:
                r_try = system.residual_flat(y_try, state_old, tau)
            except PositivityError:
                positivity_blocked = True
                lam *= 0.5
                stats.damping_events += 1
                continue
            norm_try = float(np.linalg.norm(r_try))
            if norm_try < norm or norm_try <= target:
                y, r, norm = y_try, r_try, norm_try
                accepted = True
                break
            positivity_blocked = False
            lam *= 0.5
            stats.damping_events += 1
        if not accepted:
            if positivity_blocked:
                raise PositivityLossError(
                    "damping could not restore positive density/temperature", t_new
                )
            raise NoConvergenceError(
                f"line search stalled at residual {norm:.3e} (target {target:.3e})",
                t_new,
            )

    y = _resolve_density(system, y, state_old, tau)
    stats.final_residual_norm = norm
    return system.unpack(y, t_new), stats


@dataclass
class RunResult:
    """Trajectory snapshots, per-step balance reports, per-step stats."""

    snapshots: list[State]
    reports: list[BalanceReport]
    stats: list[StepStats] = field(default_factory=list)

    @property
    def final_state(self) -> State:
        return self.snapshots[-1]


class _SnapshotCollector:
    """Picks, for each requested time, the nearest completed step."""

    def __init__(self, times, initial: State):
        self.remaining = sorted(set(float(t) for t in times))
        self.states: list[State] = [initial]
        self._taken = {0.0}

    def offer(self, prev: State, new: State):
        while self.remaining and new.t >= self.remaining[0] - 1e-12:
            target = self.remaining.pop(0)
            pick = prev if abs(prev.t - target) < abs(new.t - target) else new
            self._push(pick)

    def finish(self, final: State):
        # unreached targets (early stop) and the final time both map to the
        # last completed step
        self.remaining.clear()
        self._push(final)

    def _push(self, state: State):
        if state.t not in self._taken:
            self._taken.add(state.t)
            self.states.append(state)


def _march(
    system: System,
    initial: State,
    cfg: SolverConfig,
    snapshot_times=(),
    on_step=None,
    stop_when=None,
):
    """Shared time-marching loop for run() and steady_state()."""
    state = system.bc.apply(initial)
    state.require_positive()

    reports = [balance_report(system, state)]
    stats_log: list[StepStats] = []
    collector = _SnapshotCollector(snapshot_times, state)

    tau_cur = cfg.tau
    consecutive_accepts = 0
    rejections = 0
    t_end = cfg.t_end
    # stop once the remaining gap is a roundoff artifact of accumulating t
    eps = max(1e-10 * max(1.0, t_end), 1e-6 * cfg.tau)

    while state.t < t_end - eps:
        tau_step = min(tau_cur, t_end - state.t)
        try:
            new, st = step(system, state, tau_step, cfg)
        except (NoConvergenceError, PositivityLossError) as exc:
            rejections += 1
            if rejections > cfg.max_step_rejections:
                raise type(exc)(
                    f"step at t={state.t:.6g} rejected "
                    f"{cfg.max_step_rejections} times: {exc}",
                    state.t,
                ) from exc
            tau_cur *= 0.5
            consecutive_accepts = 0
            stats_log.append(StepStats(rejected=True))
            continue
        rejections = 0
        consecutive_accepts += 1
        if tau_cur < cfg.tau and consecutive_accepts >= 2:
            tau_cur = cfg.tau
        collector.offer(state, new)
        reports.append(balance_report(system, new, prev=reports[-1], newton_iters=st.newton_iters))
        stats_log.append(st)
        prev, state = state, new
        if stop_when is not None and stop_when(prev, state, tau_step):
            break
        if on_step is not None:
            on_step(state)

    collector.finish(state)
    return RunResult(collector.states, reports, stats_log)


def run(scenario: Scenario, cfg: SolverConfig | None = None, n_quad: int = 3) -> RunResult:
    """March a scenario from t=0 to t_end recording diagnostics every step."""
    system = scenario.build_system(n_quad=n_quad)
    if cfg is None:
        cfg = SolverConfig(tau=scenario.time.tau, t_end=scenario.time.t_end)
    initial = scenario.initial_state()
    return _march(system, initial, cfg, snapshot_times=scenario.time.snapshot_times)


def steady_state(
    scenario: Scenario,
    tol: float = 1e-10,
    max_time: float = 1000.0,
    checkpoint_times=(),
    n_quad: int = 3,
) -> RunResult:
    """March until the discrete time derivative of every dof drops below tol.

    The criterion is max_i |y_i^n - y_i^{n-1}| / (tau * (1 + |y_i^n|)) < tol,
    i.e. step increments measured per unit time, so the returned state is a
    tight approximation of the discrete steady state.  Requires open
    boundary conditions with matching in/outflow; mass conservation then
    pins the steady state reached from the initial data.  The result's
    snapshots hold any requested checkpoint states followed by the steady
    state itself.
    """
    if not scenario.bc.is_open:
        raise ValueError("steady state marching expects open boundary conditions")
    if not np.isclose(scenario.bc.m_in, scenario.bc.m_out):
        raise ValueError("steady state needs matching inflow and outflow flux")
    system = scenario.build_system(n_quad=n_quad)
    cfg = SolverConfig(tau=scenario.time.tau, t_end=max_time)
    initial = scenario.initial_state()

    def _stationary(prev: State, new: State, tau_step: float) -> bool:
        num = max(
            np.max(np.abs(new.rho_hat - prev.rho_hat) / (1.0 + np.abs(new.rho_hat))),
            np.max(np.abs(new.m_hat - prev.m_hat) / (1.0 + np.abs(new.m_hat))),
            np.max(np.abs(new.theta_hat - prev.theta_hat) / (1.0 + np.abs(new.theta_hat))),
        )
        return bool(num / tau_step < tol)

    result = _march(
        system, initial, cfg, snapshot_times=checkpoint_times, stop_when=_stationary
    )
    if result.final_state.t >= max_time - scenario.time.tau:
        raise NoConvergenceError(
            f"no steady state reached within t={max_time}", result.final_state.t
        )
    return result
