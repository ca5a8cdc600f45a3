"""Mesh construction, basis evaluation, quadrature, and projections."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipeflow.mesh import (
    Mesh1D,
    QuadratureRule,
    SpaceLayout,
    build_mesh,
    eval_Q,
    eval_W,
    eval_W_dx,
    project_initial,
)


def test_build_mesh_pipe_interval():
    mesh = build_mesh(-2.5, 2.5, 100)
    assert mesh.elem_width == pytest.approx(0.05)
    assert mesh.n_nodes == 101
    assert mesh.nodes[0] == -2.5 and mesh.nodes[-1] == 2.5


def test_build_mesh_two_elements():
    mesh = build_mesh(0.0, 1.0, 2)
    assert np.allclose(mesh.nodes, [0.0, 0.5, 1.0])
    assert np.allclose(mesh.midpoints, [0.25, 0.75])


def test_build_mesh_rejects_bad_input():
    with pytest.raises(ValueError):
        build_mesh(1.0, 0.0, 2)
    with pytest.raises(ValueError):
        build_mesh(0.0, 1.0, 1)


def test_element_of_left_convention():
    mesh = build_mesh(0.0, 1.0, 4)
    # interior nodes belong to the element on their left
    assert mesh.element_of(0.25) == 0
    assert mesh.element_of(0.5) == 1
    assert mesh.element_of(0.0) == 0
    assert mesh.element_of(1.0) == 3
    with pytest.raises(ValueError):
        mesh.element_of(1.5)
    with pytest.raises(ValueError):
        mesh.element_of(-0.1)


# -- evaluation ----------------------------------------------------------------


def test_eval_Q_constant_field():
    mesh = build_mesh(0.0, 1.0, 5)
    coeffs = np.full(5, 3.0)
    for x in [0.0, 0.13, 0.5, 0.99, 1.0]:
        assert eval_Q(mesh, coeffs, x) == 3.0


def test_eval_Q_jump_uses_left_element_at_nodes():
    mesh = build_mesh(0.0, 1.0, 2)
    coeffs = np.array([1.0, 3.0])
    assert eval_Q(mesh, coeffs, 0.5) == 1.0
    assert eval_Q(mesh, coeffs, 0.50001) == 3.0


def test_eval_W_linear_reproduction():
    mesh = build_mesh(0.0, 1.0, 4)
    coeffs = mesh.nodes.copy()  # nodal values of f(x) = x
    assert eval_W(mesh, coeffs, 0.25) == pytest.approx(0.25)
    assert eval_W(mesh, coeffs, 0.37) == pytest.approx(0.37)


def test_eval_W_dx_of_interpolated_parabola():
    # nodal x^2 on a single-span region [0, 1] has interpolant slope 1
    mesh = build_mesh(0.0, 2.0, 2)
    coeffs = mesh.nodes**2
    assert eval_W_dx(mesh, coeffs, 0.5) == pytest.approx(1.0)
    assert eval_W_dx(mesh, coeffs, 1.5) == pytest.approx(3.0)


def test_eval_validates_coefficient_length():
    mesh = build_mesh(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        eval_Q(mesh, np.ones(3), 0.5)
    with pytest.raises(ValueError):
        eval_W(mesh, np.ones(4), 0.5)


@given(x=st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=60, deadline=None)
def test_hat_functions_partition_of_unity(x):
    mesh = build_mesh(0.0, 1.0, 7)
    total = sum(
        eval_W(mesh, np.eye(mesh.n_nodes)[i], x) for i in range(mesh.n_nodes)
    )
    assert abs(total - 1.0) <= 1e-14


# -- quadrature ------------------------------------------------------------------


def test_quadrature_weights_positive_and_normalized():
    for npts in (1, 2, 3, 5):
        rule = QuadratureRule.gauss(npts)
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("npts", [1, 2, 3, 4])
def test_quadrature_polynomial_exactness(npts):
    rule = QuadratureRule.gauss(npts)
    mesh = build_mesh(0.3, 1.7, 4)
    h = mesh.elem_width
    xq = rule.element_points(mesh)
    for k in range(2 * npts):
        approx = h * (rule.weights[None, :] * xq**k).sum()
        exact = (mesh.x_right ** (k + 1) - mesh.x_left ** (k + 1)) / (k + 1)
        assert abs(approx - exact) <= 1e-13 * abs(exact)


def test_partition_of_unity_at_quadrature_points():
    mesh = build_mesh(-1.0, 2.0, 6)
    rule = QuadratureRule.gauss(3)
    xi = rule.points
    # on each element only two hats are active: 1-xi and xi
    assert np.all(np.abs((1.0 - xi) + xi - 1.0) <= 1e-14)


# -- layout ------------------------------------------------------------------------


def test_layout_closed_pipe():
    lay = SpaceLayout(4)
    assert lay.n_Q == 4 and lay.n_V == 5 and lay.n_W == 5
    assert list(lay.v_constrained) == [0, 4]
    assert list(lay.w_constrained) == []
    assert lay.n_free == 4 + 3 + 5


def test_layout_open_pipe():
    lay = SpaceLayout(4, constrain_theta_left=True)
    assert list(lay.v_constrained) == [0, 4]
    assert list(lay.w_constrained) == [0]
    assert lay.n_free == 4 + 3 + 4


def test_layout_flat_map_is_bijection():
    for open_bc in (False, True):
        lay = SpaceLayout(6, constrain_theta_left=open_bc)
        taken = np.concatenate(
            [
                lay.flat_of_q,
                lay.flat_of_v[lay.flat_of_v >= 0],
                lay.flat_of_w[lay.flat_of_w >= 0],
            ]
        )
        assert sorted(taken) == list(range(lay.n_free))


# -- projections ---------------------------------------------------------------------


def test_project_sod_density_splits_at_midline():
    mesh = build_mesh(-2.5, 2.5, 100)
    rho = project_initial(lambda x: 1.0 if x < 0 else 3.0, mesh, "Q")
    assert np.all(rho[:50] == 1.0)
    assert np.all(rho[50:] == 3.0)


def test_project_constants_reproduced_exactly():
    mesh = build_mesh(0.0, 1.0, 8)
    assert np.all(project_initial(lambda x: 0.0, mesh, "V") == 0.0)
    assert np.all(project_initial(lambda x: 1.0, mesh, "W") == 1.0)
    assert np.all(project_initial(lambda x: 7.25, mesh, "Q") == 7.25)


def test_project_rejects_unknown_space():
    mesh = build_mesh(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        project_initial(lambda x: x, mesh, "Z")
