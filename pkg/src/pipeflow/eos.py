"""Gas models defined through a pressure potential and a thermal potential.

A fluid is described by two scalar functions: a pressure potential P(rho,
theta) and a thermal potential Q(theta).  Pressure, internal energy,
enthalpy, entropy and every derivative the discretization needs are
generated from these two potentials, which keeps all thermodynamic
consistency relations (Gibbs relation, entropy relations) exact by
construction.

Two families are provided:

* :class:`IdealGas` with P = R*theta*log(rho), Q = c_v*theta.
* :class:`PowerLawGas`, a polytropic/ideal hybrid whose pressure potential
  combines a power of density with a density-dependent coefficient times
  temperature.  It covers polytropic gases and barotropic flow as special
  cases.

All evaluation methods accept scalars or numpy arrays (broadcasting) and
raise :class:`EOSDomainError` for non-positive density or temperature
rather than returning NaN, so positivity failures surface at the solver
level instead of propagating silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EOSDomainError",
    "ThermoPoint",
    "GasModel",
    "IdealGas",
    "PowerLawGas",
    "AdmissibilityReport",
    "check_admissibility",
]


class EOSDomainError(ValueError):
    """A thermodynamic function was evaluated at rho <= 0 or theta <= 0."""


def _require_positive(rho, theta):
    # np.all(x > 0) is False for NaN entries as well, which we also reject.
    if not (np.all(np.asarray(rho) > 0.0) and np.all(np.asarray(theta) > 0.0)):
        raise EOSDomainError("density and temperature must be strictly positive")


@dataclass(frozen=True)
class ThermoPoint:
    """A single admissible thermodynamic state (rho > 0, theta > 0)."""

    rho: float
    theta: float

    def __post_init__(self):
        _require_positive(self.rho, self.theta)


class GasModel:
    """Base class: derived quantities expressed through the two potentials.

    Subclasses implement the potentials and their partial derivatives;
    everything else follows from the standard relations

        p = rho^2 * P_rho
        e = P - theta*P_theta + Q
        h = (rho*P)_rho - theta*P_theta + Q
        s = int_1^theta Q'(t)/t dt - P_theta.

    Instances are immutable; all methods are pure functions of their
    arguments and safe for concurrent use.
    """

    # -- potentials and derivatives (implemented by subclasses) ------------

    def potential_P(self, rho, theta):
        raise NotImplementedError

    def potential_Q(self, theta):
        raise NotImplementedError

    def dQ_dtheta(self, theta):
        raise NotImplementedError

    def dP_drho(self, rho, theta):
        raise NotImplementedError

    def d2P_drhorho(self, rho, theta):
        raise NotImplementedError

    def dP_dtheta(self, rho, theta):
        raise NotImplementedError

    def d2P_dthetatheta(self, rho, theta):
        raise NotImplementedError

    def d2P_dthetarho(self, rho, theta):
        raise NotImplementedError

    def _entropy_thermal(self, theta):
        """Closed form of int_1^theta Q'(t)/t dt."""
        raise NotImplementedError

    # -- derived quantities -------------------------------------------------

    def d_rhoP_drho(self, rho, theta):
        """(rho*P)_rho = P + rho*P_rho."""
        return self.potential_P(rho, theta) + rho * self.dP_drho(rho, theta)

    def d_rhoPrho_drho(self, rho, theta):
        """(rho*P_rho)_rho; subclasses override with a grouped closed form
        so structural sign properties survive floating point exactly."""
        return self.dP_drho(rho, theta) + rho * self.d2P_drhorho(rho, theta)

    def pressure(self, rho, theta):
        return rho * rho * self.dP_drho(rho, theta)

    def internal_energy(self, rho, theta):
        return (
            self.potential_P(rho, theta)
            - theta * self.dP_dtheta(rho, theta)
            + self.potential_Q(theta)
        )

    def enthalpy(self, rho, theta):
        return (
            self.d_rhoP_drho(rho, theta)
            - theta * self.dP_dtheta(rho, theta)
            + self.potential_Q(theta)
        )

    def entropy(self, rho, theta):
        _require_positive(rho, theta)
        return self._entropy_thermal(theta) - self.dP_dtheta(rho, theta)

    def heat_capacity(self, rho, theta):
        """Q_theta - theta*P_thetatheta, the effective specific heat."""
        return self.dQ_dtheta(theta) - theta * self.d2P_dthetatheta(rho, theta)


@dataclass(frozen=True)
class IdealGas(GasModel):
    """Ideal gas: P = R*theta*log(rho), Q = c_v*theta.

    The derived quantities reduce to p = R*theta*rho, e = c_v*theta,
    h = (R + c_v)*theta, s = c_v*log(theta) - R*log(rho).
    """

    R: float
    c_v: float

    def __post_init__(self):
        if not (self.R > 0.0 and self.c_v > 0.0):
            raise ValueError("IdealGas requires R > 0 and c_v > 0")

    @property
    def c_p(self) -> float:
        return self.R + self.c_v

    @property
    def gamma(self) -> float:
        """Adiabatic exponent c_p / c_v."""
        return self.c_p / self.c_v

    def potential_P(self, rho, theta):
        _require_positive(rho, theta)
        return self.R * theta * np.log(rho)

    def potential_Q(self, theta):
        _require_positive(1.0, theta)
        return self.c_v * theta

    def dQ_dtheta(self, theta):
        _require_positive(1.0, theta)
        return np.full(np.shape(theta), self.c_v) if np.ndim(theta) else self.c_v

    def dP_drho(self, rho, theta):
        _require_positive(rho, theta)
        return self.R * theta / rho

    def d2P_drhorho(self, rho, theta):
        _require_positive(rho, theta)
        return -self.R * theta / (rho * rho)

    def dP_dtheta(self, rho, theta):
        _require_positive(rho, theta)
        return self.R * np.log(rho)

    def d2P_dthetatheta(self, rho, theta):
        _require_positive(rho, theta)
        return np.zeros(np.broadcast_shapes(np.shape(rho), np.shape(theta)))

    def d2P_dthetarho(self, rho, theta):
        _require_positive(rho, theta)
        return self.R / rho + np.zeros(np.shape(theta))

    def d_rhoPrho_drho(self, rho, theta):
        # rho*P_rho = R*theta is density-independent
        _require_positive(rho, theta)
        return np.zeros(np.broadcast_shapes(np.shape(rho), np.shape(theta)))

    def _entropy_thermal(self, theta):
        return self.c_v * np.log(theta)


def _polyval_ascending(coeffs, x):
    """Evaluate sum_k coeffs[k] * x**k."""
    acc = 0.0
    for k, a in enumerate(coeffs):
        if a != 0.0 or k == 0:
            acc = acc + a * x**k
    return acc


@dataclass(frozen=True)
class PowerLawGas(GasModel):
    """Polytropic/ideal hybrid gas.

    P(rho, theta) = c_gamma/(gamma-1) * (rho^(gamma-1) - 1) + C(rho)*theta + c1
    Q(theta)      = int_1^theta c_v(t) dt + c2

    with C(rho) = c_log*log(rho) + sum_j kappa_j * (rho^alpha_j - 1) given by
    ``c_log`` and the (kappa, alpha) pairs in ``c_terms``, and c_v a
    polynomial in theta with ascending coefficients ``c_v_coeffs`` (a single
    constant in the baseline).  The potentials are normalized to vanish at
    rho = 1 and theta = 1 (definite integrals from the reference state);
    only the absolute values of e and s depend on this choice, which the
    offsets c1, c2 can shift further.  The pressure is

        p = c_gamma * rho^gamma + rho^2*C'(rho) * theta.

    Construction does not verify the admissibility inequalities (P_rho >= 0,
    (rho*P_rho)_rho >= 0, positive heat capacity); use
    :func:`check_admissibility` to probe a parameter set over a state range.
    """

    c_gamma: float
    gamma: float
    c_v_coeffs: tuple[float, ...] = (1.0,)
    c_terms: tuple[tuple[float, float], ...] = ()
    c_log: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("PowerLawGas requires gamma > 1")
        if len(self.c_v_coeffs) == 0:
            raise ValueError("c_v polynomial needs at least one coefficient")
        object.__setattr__(self, "c_v_coeffs", tuple(float(a) for a in self.c_v_coeffs))
        object.__setattr__(
            self, "c_terms", tuple((float(k), float(a)) for k, a in self.c_terms)
        )

    # -- the density coefficient C(rho) and its derivatives -----------------

    def _C(self, rho):
        acc = self.c_log * np.log(rho) if self.c_log != 0.0 else 0.0
        for kappa, alpha in self.c_terms:
            acc = acc + kappa * (rho**alpha - 1.0)
        return acc + np.zeros(np.shape(rho))

    def _C_rho(self, rho):
        acc = self.c_log / rho if self.c_log != 0.0 else 0.0
        for kappa, alpha in self.c_terms:
            acc = acc + kappa * alpha * rho ** (alpha - 1.0)
        return acc + np.zeros(np.shape(rho))

    def _C_rhorho(self, rho):
        acc = -self.c_log / (rho * rho) if self.c_log != 0.0 else 0.0
        for kappa, alpha in self.c_terms:
            acc = acc + kappa * alpha * (alpha - 1.0) * rho ** (alpha - 2.0)
        return acc + np.zeros(np.shape(rho))

    # -- potentials ----------------------------------------------------------

    def potential_P(self, rho, theta):
        _require_positive(rho, theta)
        g = self.gamma
        return (
            self.c_gamma / (g - 1.0) * (rho ** (g - 1.0) - 1.0)
            + self._C(rho) * theta
            + self.c1
        )

    def potential_Q(self, theta):
        _require_positive(1.0, theta)
        acc = self.c2 + np.zeros(np.shape(theta))
        for k, a in enumerate(self.c_v_coeffs):
            acc = acc + a * (theta ** (k + 1) - 1.0) / (k + 1)
        return acc

    def dQ_dtheta(self, theta):
        _require_positive(1.0, theta)
        return _polyval_ascending(self.c_v_coeffs, theta) + np.zeros(np.shape(theta))

    def dP_drho(self, rho, theta):
        _require_positive(rho, theta)
        return self.c_gamma * rho ** (self.gamma - 2.0) + self._C_rho(rho) * theta

    def d2P_drhorho(self, rho, theta):
        _require_positive(rho, theta)
        g = self.gamma
        return self.c_gamma * (g - 2.0) * rho ** (g - 3.0) + self._C_rhorho(rho) * theta

    def dP_dtheta(self, rho, theta):
        _require_positive(rho, theta)
        return self._C(rho) + np.zeros(np.shape(theta))

    def d2P_dthetatheta(self, rho, theta):
        _require_positive(rho, theta)
        return np.zeros(np.broadcast_shapes(np.shape(rho), np.shape(theta)))

    def d2P_dthetarho(self, rho, theta):
        _require_positive(rho, theta)
        return self._C_rho(rho) + np.zeros(np.shape(theta))

    def d_rhoPrho_drho(self, rho, theta):
        # grouped form: rho*P_rho = c_gamma*rho^(gamma-1) + rho*C'(rho)*theta,
        # and (rho*C')' telescopes per term (log term drops out exactly)
        _require_positive(rho, theta)
        g = self.gamma
        acc = self.c_gamma * (g - 1.0) * rho ** (g - 2.0)
        for kappa, alpha in self.c_terms:
            acc = acc + kappa * alpha * alpha * rho ** (alpha - 1.0) * theta
        return acc + np.zeros(np.broadcast_shapes(np.shape(rho), np.shape(theta)))

    def _entropy_thermal(self, theta):
        acc = self.c_v_coeffs[0] * np.log(theta)
        for k, a in enumerate(self.c_v_coeffs[1:], start=1):
            acc = acc + a * (theta**k - 1.0) / k
        return acc


@dataclass(frozen=True)
class AdmissibilityReport:
    """Worst-case margins of the three structural inequalities on a grid."""

    min_dP_drho: float
    min_d_rhoPrho_drho: float
    min_heat_capacity: float
    c_v_lower: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return (
            self.min_dP_drho >= 0.0
            and self.min_d_rhoPrho_drho >= 0.0
            and self.min_heat_capacity > 0.0
            and self.min_heat_capacity >= self.c_v_lower
        )


def check_admissibility(
    model: GasModel,
    rho_range: tuple[float, float],
    theta_range: tuple[float, float],
    n_samples: int = 20,
    c_v_lower: float = 0.0,
) -> AdmissibilityReport:
    """Sample the structural inequalities over a rectangle of states.

    Reports the minimum over the sample grid of P_rho, (rho*P_rho)_rho and
    the effective heat capacity Q_theta - theta*P_thetatheta.  The check
    passes when the first two minima are non-negative and the third is
    strictly positive (and at least ``c_v_lower``).  Report-only: never
    raises for an inadmissible model.
    """
    if not (rho_range[0] > 0.0 and theta_range[0] > 0.0):
        raise ValueError("ranges must be strictly positive")
    if not (rho_range[0] <= rho_range[1] and theta_range[0] <= theta_range[1]):
        raise ValueError("ranges must be non-empty")
    if n_samples < 2:
        raise ValueError("need at least 2 samples per axis")

    rho = np.geomspace(rho_range[0], rho_range[1], n_samples)[:, None]
    theta = np.geomspace(theta_range[0], theta_range[1], n_samples)[None, :]

    p_rho = model.dP_drho(rho, theta) + np.zeros((n_samples, n_samples))
    rho_prho_rho = model.d_rhoPrho_drho(rho, theta) + np.zeros((n_samples, n_samples))
    heat_cap = model.heat_capacity(rho, theta) + np.zeros((n_samples, n_samples))

    return AdmissibilityReport(
        min_dP_drho=float(p_rho.min()),
        min_d_rhoPrho_drho=float(rho_prho_rho.min()),
        min_heat_capacity=float(heat_cap.min()),
        c_v_lower=float(c_v_lower),
        n_samples=n_samples,
    )
