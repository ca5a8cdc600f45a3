"""1D non-isothermal compressible pipe flow with conservation audits.

A mixed finite element discretization (piecewise constant density,
piecewise linear flux and temperature) combined with implicit Euler time
stepping.  The discrete scheme conserves total mass exactly and changes
total energy and entropy monotonically; the diagnostics module audits these
balances every step.
"""

from .assembly import BoundarySpec, PhysCoeffs, PositivityError, Residual, State, System
from .diagnostics import (
    BalanceReport,
    balance_report,
    balance_series,
    distance_to_steady,
    series_deltas,
    total_energy,
    total_entropy,
    total_mass,
)
from .eos import (
    AdmissibilityReport,
    EOSDomainError,
    GasModel,
    IdealGas,
    PowerLawGas,
    ThermoPoint,
    check_admissibility,
)
from .mesh import Mesh1D, QuadratureRule, SpaceLayout, build_mesh, project_initial
from .riemann import RiemannSolution, RiemannState, compare_profile, solve_riemann, solve_star
from .scenario import ConfigError, Scenario, parse_scenario, serialize_scenario
from .solver import (
    NoConvergenceError,
    PositivityLossError,
    RunResult,
    SolverConfig,
    StepStats,
    run,
    steady_state,
    step,
)

__version__ = "0.1.0"
