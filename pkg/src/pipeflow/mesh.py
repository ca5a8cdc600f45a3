"""Uniform 1D mesh, finite element spaces, and the shared quadrature rule.

Three spaces live on the mesh: a piecewise constant space for density (one
degree of freedom per element), and two piecewise linear nodal spaces for
mass flux and temperature (one degree of freedom per node).  Boundary
conditions constrain selected flux/temperature nodes; the constrained
values are prescribed, never solved for.

A single Gauss rule is shared by residual assembly and by every diagnostic
functional: the discrete conservation statements cancel pointwise and
therefore survive any fixed positive-weight rule, but only if both sides of
the bookkeeping use the same rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Mesh1D",
    "QuadratureRule",
    "SpaceLayout",
    "build_mesh",
    "eval_Q",
    "eval_W",
    "eval_W_dx",
    "project_initial",
]


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of [x_left, x_right] into n_elems elements."""

    x_left: float
    x_right: float
    n_elems: int

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise ValueError("mesh interval is empty or inverted")
        if self.n_elems < 2:
            raise ValueError("mesh needs at least 2 elements")

    @property
    def elem_width(self) -> float:
        return (self.x_right - self.x_left) / self.n_elems

    @property
    def n_nodes(self) -> int:
        return self.n_elems + 1

    @property
    def nodes(self) -> np.ndarray:
        return self.x_left + self.elem_width * np.arange(self.n_nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return self.x_left + self.elem_width * (np.arange(self.n_elems) + 0.5)

    def element_of(self, x):
        """Element index containing x.

        On interior element boundaries the element to the left is used; the
        left endpoint belongs to element 0.  Raises for x outside the mesh
        (up to a roundoff-sized tolerance at the endpoints).
        """
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * (abs(self.x_left) + abs(self.x_right) + self.elem_width)
        if np.any(x < self.x_left - tol) or np.any(x > self.x_right + tol):
            raise ValueError("evaluation point outside the mesh interval")
        k = np.ceil((x - self.x_left) / self.elem_width).astype(int) - 1
        return np.clip(k, 0, self.n_elems - 1)


def build_mesh(x_left: float, x_right: float, n_elems: int) -> Mesh1D:
    return Mesh1D(float(x_left), float(x_right), int(n_elems))


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on the reference element [0, 1].

    ``points`` are the reference abscissae, ``weights`` sum to one; the
    integral over a physical element of width h is h * sum(w * f(x_q)).
    Exact for polynomials up to degree 2*npoints - 1.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")

    @property
    def npoints(self) -> int:
        return len(self.points)

    @classmethod
    def gauss(cls, npoints: int = 3) -> "QuadratureRule":
        if npoints < 1:
            raise ValueError("need at least one quadrature point")
        x, w = np.polynomial.legendre.leggauss(npoints)
        return cls(points=(x + 1.0) / 2.0, weights=w / 2.0)

    def element_points(self, mesh: Mesh1D) -> np.ndarray:
        """Global quadrature coordinates, shape (n_elems, npoints)."""
        h = mesh.elem_width
        lefts = mesh.x_left + h * np.arange(mesh.n_elems)
        return lefts[:, None] + h * self.points[None, :]


@dataclass(frozen=True)
class SpaceLayout:
    """Degree-of-freedom bookkeeping for the three spaces.

    Free flux/temperature nodes are those not pinned by the boundary
    conditions: flux test functions vanish at both endpoints in every mode,
    and the temperature test space loses its left node when an inflow
    temperature is prescribed.  ``flat_of_*`` map every dof to its position
    in the interleaved global unknown vector (-1 for constrained dofs);
    interleaving by spatial position keeps the Jacobian tightly banded.
    """

    n_elems: int
    constrain_theta_left: bool = False
    flat_of_q: np.ndarray = field(init=False, repr=False)
    flat_of_v: np.ndarray = field(init=False, repr=False)
    flat_of_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_elems
        # Full interleaved order: m_0, th_0, rho_0, m_1, th_1, rho_1, ...,
        # rho_{n-1}, m_n, th_n.  Constrained entries are then removed.
        flat_of_v = np.full(n + 1, -1, dtype=int)
        flat_of_w = np.full(n + 1, -1, dtype=int)
        flat_of_q = np.full(n, -1, dtype=int)
        pos = 0
        for i in range(n + 1):
            if i not in (0, n):
                flat_of_v[i] = pos
                pos += 1
            if not (self.constrain_theta_left and i == 0):
                flat_of_w[i] = pos
                pos += 1
            if i < n:
                flat_of_q[i] = pos
                pos += 1
        object.__setattr__(self, "flat_of_q", flat_of_q)
        object.__setattr__(self, "flat_of_v", flat_of_v)
        object.__setattr__(self, "flat_of_w", flat_of_w)

    @property
    def n_Q(self) -> int:
        return self.n_elems

    @property
    def n_V(self) -> int:
        return self.n_elems + 1

    @property
    def n_W(self) -> int:
        return self.n_elems + 1

    @property
    def v_free(self) -> np.ndarray:
        return np.flatnonzero(self.flat_of_v >= 0)

    @property
    def w_free(self) -> np.ndarray:
        return np.flatnonzero(self.flat_of_w >= 0)

    @property
    def v_constrained(self) -> np.ndarray:
        return np.flatnonzero(self.flat_of_v < 0)

    @property
    def w_constrained(self) -> np.ndarray:
        return np.flatnonzero(self.flat_of_w < 0)

    @property
    def n_free(self) -> int:
        return self.n_Q + len(self.v_free) + len(self.w_free)


def eval_Q(mesh: Mesh1D, coeffs: np.ndarray, x):
    """Piecewise constant evaluation (left-element convention at nodes)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.n_elems,):
        raise ValueError("coefficient vector does not match the element count")
    return coeffs[mesh.element_of(x)]


def _local_coord(mesh: Mesh1D, x, k):
    return (np.asarray(x, dtype=float) - mesh.x_left) / mesh.elem_width - k


def eval_W(mesh: Mesh1D, coeffs: np.ndarray, x):
    """Piecewise linear (hat function) evaluation at x."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.n_nodes,):
        raise ValueError("coefficient vector does not match the node count")
    k = mesh.element_of(x)
    xi = _local_coord(mesh, x, k)
    return coeffs[k] * (1.0 - xi) + coeffs[k + 1] * xi


def eval_W_dx(mesh: Mesh1D, coeffs: np.ndarray, x):
    """Derivative of the piecewise linear interpolant (left-element at nodes)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.n_nodes,):
        raise ValueError("coefficient vector does not match the node count")
    k = mesh.element_of(x)
    return (coeffs[k + 1] - coeffs[k]) / mesh.elem_width


def project_initial(f, mesh: Mesh1D, space: str) -> np.ndarray:
    """Coefficients of initial data in one of the three spaces.

    The density space uses element-midpoint evaluation; the flux and
    temperature spaces use nodal interpolation.  ``f`` is a scalar function
    of position.
    """
    if space == "Q":
        pts = mesh.midpoints
    elif space in ("V", "W"):
        pts = mesh.nodes
    else:
        raise ValueError(f"unknown space {space!r}, expected 'Q', 'V' or 'W'")
    return np.array([float(f(x)) for x in pts])
