"""Fully discrete nonlinear residual and its banded Jacobian.

One implicit Euler step from state (rho^{n-1}, m^{n-1}, th^{n-1}) to the
unknown state (rho^n, m^n, th^n) is characterized by a residual with three
blocks, one per test space:

  mass (piecewise constant tests q):
      (d_t rho + dx m, q)

  momentum (hat tests v, zero at both endpoints):
      (d_t m / rho_old - m/(2 rho^2) d_t rho, v)
      - (m^2/(2 rho^2) + (rho P)_rho, dx v)
      + (m/(2 rho^2) dx m - P_th dx th, v)
      + (a/rho^2 dx m, dx v) + (b |m| m / rho^2, v)

  temperature (hat tests w, zero at the inflow node for open boundaries):
      (rho_old d_t e - p/rho d_t rho, w/th)
      - (Q - th P_th, dx(m w/th)) + (m P_th dx th, w/th)
      + (c dx th, dx(w/th)) - (d (th_ext - th), w/th)
      [+ outflow boundary term for open pipes]

where d_t is the backward difference over the step, all coefficient fields
are evaluated at the new time level except the density weighting rho_old of
the flux/energy rates, and d_t e compares the internal energy of new and
old states pointwise.  This precise arrangement is what makes total energy
non-increasing and total entropy non-decreasing step by step, with total
mass conserved exactly.

The Jacobian uses one-sided finite differences.  Every residual entry
couples only to unknowns of adjacent elements, so in the position-
interleaved dof order the matrix has half-bandwidth 4 and all columns of
equal index modulo (bandwidth sum + 1) can be perturbed in a single
residual evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import EOSDomainError, GasModel
from .mesh import Mesh1D, QuadratureRule, SpaceLayout

__all__ = [
    "KL",
    "KU",
    "PositivityError",
    "State",
    "PhysCoeffs",
    "BoundarySpec",
    "Residual",
    "System",
]

# Half-bandwidths of the Jacobian in the interleaved dof order: a residual
# row at node/element position p couples to dofs at positions p-1..p+1,
# which are at most 4 slots away.
KL = 4
KU = 4


class PositivityError(RuntimeError):
    """A candidate state has non-positive density or temperature."""


@dataclass
class State:
    """Coefficient vectors of the three fields at one time level."""

    rho_hat: np.ndarray
    m_hat: np.ndarray
    theta_hat: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(
            self.rho_hat.copy(), self.m_hat.copy(), self.theta_hat.copy(), self.t
        )

    def is_positive(self) -> bool:
        return bool(np.all(self.rho_hat > 0.0) and np.all(self.theta_hat > 0.0))

    def require_positive(self):
        if not self.is_positive():
            raise PositivityError(
                f"state at t={self.t} has non-positive density or temperature dofs"
            )


@dataclass(frozen=True)
class PhysCoeffs:
    """Viscosity a, friction b, heat conduction c, heat transfer d.

    ``theta_ext`` is the ambient temperature driving the heat exchange.
    """

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    theta_ext: float = 1.0

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0.0:
            raise ValueError("physical coefficients must be non-negative")
        if not self.theta_ext > 0.0:
            raise ValueError("ambient temperature must be positive")


CLOSED = "closed"
IN_OUT = "in_out"


@dataclass(frozen=True)
class BoundarySpec:
    """Closed pipe (m = 0 at both ends) or sub-sonic inflow/outflow.

    The open configuration prescribes the mass flux at both ends plus the
    temperature at the inflow (left) end; both fluxes must be positive so
    the left end is genuinely an inflow and the right end an outflow.
    """

    mode: str = CLOSED
    m_in: float | None = None
    theta_in: float | None = None
    m_out: float | None = None

    def __post_init__(self):
        if self.mode not in (CLOSED, IN_OUT):
            raise ValueError(f"unknown boundary mode {self.mode!r}")
        if self.mode == IN_OUT:
            if self.m_in is None or self.m_out is None or self.theta_in is None:
                raise ValueError("open boundaries need m_in, theta_in and m_out")
            if not (self.m_in > 0.0 and self.m_out > 0.0):
                raise ValueError("sub-sonic in/out configuration needs positive fluxes")
            if not self.theta_in > 0.0:
                raise ValueError("inflow temperature must be positive")

    @property
    def is_open(self) -> bool:
        return self.mode == IN_OUT

    def apply(self, state: State) -> State:
        """Write the prescribed dof values into a state (lifting)."""
        out = state.copy()
        if self.is_open:
            out.m_hat[0] = self.m_in
            out.m_hat[-1] = self.m_out
            out.theta_hat[0] = self.theta_in
        else:
            out.m_hat[0] = 0.0
            out.m_hat[-1] = 0.0
        return out


@dataclass
class Residual:
    """Residual values per free test function of each space."""

    r_Q: np.ndarray
    r_V: np.ndarray
    r_W: np.ndarray

    def norm(self) -> float:
        return float(
            np.sqrt(
                np.dot(self.r_Q, self.r_Q)
                + np.dot(self.r_V, self.r_V)
                + np.dot(self.r_W, self.r_W)
            )
        )


class System:
    """Discretization of one pipe: residual, Jacobian, dof packing.

    Bundles mesh, spaces, quadrature, gas model, physical coefficients and
    boundary conditions.  All evaluation methods are pure functions of
    their arguments.
    """

    def __init__(
        self,
        mesh: Mesh1D,
        model: GasModel,
        coeffs: PhysCoeffs | None = None,
        bc: BoundarySpec | None = None,
        n_quad: int = 3,
    ):
        self.mesh = mesh
        self.model = model
        self.coeffs = coeffs if coeffs is not None else PhysCoeffs()
        self.bc = bc if bc is not None else BoundarySpec()
        self.layout = SpaceLayout(mesh.n_elems, constrain_theta_left=self.bc.is_open)
        self.quad = QuadratureRule.gauss(n_quad)
        # reference-element shape data used by every assembly call
        self._xi = self.quad.points[None, :]
        self._w = self.quad.weights[None, :]
        self._n0 = 1.0 - self._xi
        self._n1 = self._xi

    # -- field evaluation at quadrature points ------------------------------

    def fields_at_quad(self, state: State):
        """(rho, m, th, dx m, dx th) at the quadrature points.

        rho and the derivatives are constant per element and returned with
        shape (n_elems, 1); m and th have shape (n_elems, npoints).
        """
        h = self.mesh.elem_width
        rho = state.rho_hat[:, None]
        m = state.m_hat[:-1, None] * self._n0 + state.m_hat[1:, None] * self._n1
        th = (
            state.theta_hat[:-1, None] * self._n0
            + state.theta_hat[1:, None] * self._n1
        )
        dm = ((state.m_hat[1:] - state.m_hat[:-1]) / h)[:, None]
        dth = ((state.theta_hat[1:] - state.theta_hat[:-1]) / h)[:, None]
        return rho, m, th, dm, dth

    def integrate(self, values) -> float:
        """Integral over the pipe of a quadrature-sampled quantity."""
        values = values + np.zeros((self.mesh.n_elems, self.quad.npoints))
        return float(self.mesh.elem_width * (values * self._w).sum())

    # -- residual ------------------------------------------------------------

    def residual(self, new: State, old: State, tau: float) -> Residual:
        """Residual of the implicit step old -> new with step size tau.

        ``old`` must be positive; ``new`` is a candidate and only needs to
        be positive at the quadrature points, otherwise PositivityError is
        raised so the caller can damp its update.
        """
        if tau <= 0.0:
            raise ValueError("time step must be positive")
        mesh, model, c = self.mesh, self.model, self.coeffs
        h = mesh.elem_width
        w, n0, n1 = self._w, self._n0, self._n1

        rho, m, th, dm, dth = self.fields_at_quad(new)
        if not (np.all(rho > 0.0) and np.all(th > 0.0)):
            raise PositivityError("candidate state non-positive at quadrature points")
        rho_o, m_o, th_o, _, _ = self.fields_at_quad(old)

        try:
            p_th = model.dP_dtheta(rho, th)
            rhoP_r = model.d_rhoP_drho(rho, th)
            q_pot = model.potential_Q(th)
            p = model.pressure(rho, th)
            de = (model.internal_energy(rho, th) - model.internal_energy(rho_o, th_o)) / tau
        except EOSDomainError as exc:  # pragma: no cover - guarded above
            raise PositivityError(str(exc)) from exc

        drho = (rho - rho_o) / tau
        dmdt = (m - m_o) / tau
        rho2 = rho * rho

        # mass block: integrand constant per element
        r_q = h * ((drho + dm) * w).sum(axis=1)

        # momentum block: A multiplies v, B multiplies dx v
        A = (
            dmdt / rho_o
            - m / (2.0 * rho2) * drho
            + m / (2.0 * rho2) * dm
            - p_th * dth
        )
        if c.b != 0.0:
            A = A + c.b * np.abs(m) * m / rho2
        B = -(m * m / (2.0 * rho2) + rhoP_r)
        if c.a != 0.0:
            B = B + c.a / rho2 * dm
        ea0 = h * (w * n0 * A).sum(axis=1)
        ea1 = h * (w * n1 * A).sum(axis=1)
        eb = (w * B).sum(axis=1)
        r_v = np.zeros(mesh.n_nodes)
        r_v[:-1] += ea0 - eb
        r_v[1:] += ea1 + eb

        # temperature block: C multiplies w, D multiplies dx w
        q_minus = q_pot - th * p_th
        C = (
            (rho_o * de - (p / rho) * drho) / th
            - q_minus * (dm / th - m * dth / (th * th))
            + m * p_th * dth / th
            - c.d * (c.theta_ext - th) / th
        )
        if c.c != 0.0:
            C = C - c.c * dth * dth / (th * th)
        D = -q_minus * m / th
        if c.c != 0.0:
            D = D + c.c * dth / th
        ec0 = h * (w * n0 * C).sum(axis=1)
        ec1 = h * (w * n1 * C).sum(axis=1)
        ed = (w * D).sum(axis=1)
        r_w = np.zeros(mesh.n_nodes)
        r_w[:-1] += ec0 - ed
        r_w[1:] += ec1 + ed

        if self.bc.is_open:
            # outflow boundary term from integration by parts of the
            # enthalpy-transport integral; only the last test hat is nonzero
            # at the right endpoint
            rho_r = new.rho_hat[-1]
            th_r = new.theta_hat[-1]
            q_r = float(self.model.potential_Q(th_r))
            pth_r = float(self.model.dP_dtheta(rho_r, th_r))
            r_w[-1] += (q_r - th_r * pth_r) * self.bc.m_out / th_r

        lay = self.layout
        return Residual(r_q, r_v[lay.v_free], r_w[lay.w_free])

    # -- flat vector packing ---------------------------------------------------

    def pack(self, state: State) -> np.ndarray:
        """Free dofs of a state in the interleaved global order."""
        lay = self.layout
        y = np.empty(lay.n_free)
        y[lay.flat_of_q] = state.rho_hat
        y[lay.flat_of_v[lay.v_free]] = state.m_hat[lay.v_free]
        y[lay.flat_of_w[lay.w_free]] = state.theta_hat[lay.w_free]
        return y

    def unpack(self, y: np.ndarray, t: float) -> State:
        """State from free dofs, with prescribed boundary values filled in."""
        lay, bc = self.layout, self.bc
        rho = y[lay.flat_of_q].copy()
        m = np.empty(lay.n_V)
        th = np.empty(lay.n_W)
        m[lay.v_free] = y[lay.flat_of_v[lay.v_free]]
        th[lay.w_free] = y[lay.flat_of_w[lay.w_free]]
        if bc.is_open:
            m[0], m[-1] = bc.m_in, bc.m_out
            th[0] = bc.theta_in
        else:
            m[0] = m[-1] = 0.0
        return State(rho, m, th, t)

    def flatten_residual(self, res: Residual) -> np.ndarray:
        lay = self.layout
        r = np.empty(lay.n_free)
        r[lay.flat_of_q] = res.r_Q
        r[lay.flat_of_v[lay.v_free]] = res.r_V
        r[lay.flat_of_w[lay.w_free]] = res.r_W
        return r

    def residual_flat(self, y: np.ndarray, old: State, tau: float) -> np.ndarray:
        return self.flatten_residual(self.residual(self.unpack(y, old.t + tau), old, tau))

    def positive_dofs(self, y: np.ndarray) -> bool:
        """Positivity of all density and temperature dofs of a flat vector."""
        lay = self.layout
        if np.any(y[lay.flat_of_q] <= 0.0):
            return False
        return not np.any(y[lay.flat_of_w[lay.w_free]] <= 0.0)

    # -- Jacobian ---------------------------------------------------------------

    def jacobian_banded(
        self,
        y: np.ndarray,
        old: State,
        tau: float,
        r0: np.ndarray | None = None,
    ) -> np.ndarray:
        """Banded one-sided finite difference Jacobian at y.

        Returned in LAPACK band storage ab[KU + i - j, j] for use with
        ``scipy.linalg.solve_banded((KL, KU), ab, rhs)``.  Columns are
        perturbed in groups of stride KL + KU + 1: rows influenced by
        distinct columns of one group cannot overlap, so a full Jacobian
        costs KL + KU + 1 residual evaluations regardless of size.
        """
        if r0 is None:
            r0 = self.residual_flat(y, old, tau)
        n = len(y)
        ab = np.zeros((KL + KU + 1, n))
        stride = KL + KU + 1
        offsets = np.arange(-KL, KU + 1)
        for g in range(min(stride, n)):
            cols = np.arange(g, n, stride)
            deltas = np.maximum(1e-7, 1e-7 * np.abs(y[cols]))
            yp = y.copy()
            yp[cols] += deltas
            diff = self.residual_flat(yp, old, tau) - r0
            rows = cols[None, :] + offsets[:, None]
            ok = (rows >= 0) & (rows < n)
            vals = np.where(ok, diff[np.clip(rows, 0, n - 1)], 0.0) / deltas[None, :]
            ab[(KU + offsets)[:, None], cols[None, :]] = vals
        return ab
