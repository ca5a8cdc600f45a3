"""Global functionals and balance reports."""

import math

import numpy as np
import pytest

from pipeflow.assembly import PhysCoeffs, State, System
from pipeflow.diagnostics import (
    BALANCE_CSV_HEADER,
    balance_report,
    balance_series,
    distance_to_steady,
    series_deltas,
    total_energy,
    total_entropy,
    total_mass,
    write_balance_csv,
)
from pipeflow.eos import IdealGas
from pipeflow.mesh import build_mesh

IDEAL = IdealGas(R=1.0, c_v=2.5)


def make_system(n=10, coeffs=None):
    return System(build_mesh(-2.5, 2.5, n), IDEAL, coeffs)


def rest_state(n, rho=1.0, theta=1.0):
    return State(np.full(n, rho), np.zeros(n + 1), np.full(n + 1, theta), 0.0)


def test_totals_of_uniform_rest_state():
    system = make_system()
    st = rest_state(10)
    assert total_mass(system, st) == pytest.approx(5.0, abs=1e-14)
    assert total_energy(system, st) == pytest.approx(12.5, abs=1e-13)
    assert total_entropy(system, st) == pytest.approx(0.0, abs=1e-13)


def test_total_mass_of_split_initial_data():
    system = make_system(n=100)
    rho = np.where(system.mesh.midpoints < 0, 1.0, 3.0)
    st = State(rho, np.zeros(101), np.ones(101), 0.0)
    assert total_mass(system, st) == pytest.approx(10.0, abs=1e-13)


def test_total_entropy_of_compressed_state():
    system = make_system()
    st = rest_state(10, rho=3.0)
    assert total_entropy(system, st) == pytest.approx(-15.0 * math.log(3.0), rel=1e-13)


def test_kinetic_energy_contribution():
    system = make_system()
    st = rest_state(10, rho=2.0)
    st.m_hat[:] = 0.6  # uniform velocity 0.3
    expect = 5.0 * (0.6**2 / (2 * 2.0) + 2.0 * 2.5)
    assert total_energy(system, st) == pytest.approx(expect, rel=1e-13)


def test_balance_report_increments_and_dissipation_terms():
    coeffs = PhysCoeffs(a=0.5, b=2.0, c=0.3, d=1.5, theta_ext=1.2)
    system = make_system(coeffs=coeffs)
    st = rest_state(10, rho=2.0, theta=1.0)
    st.m_hat[:] = np.linspace(0.0, 1.0, 11)

    r0 = balance_report(system, st)
    assert r0.dM == 0.0 and r0.dE == 0.0 and r0.dS == 0.0

    # independent quadrature-free values for the uniform-slope flux field:
    # dx m = 0.2, m(x)^3 integrates in closed form on each element
    h = system.mesh.elem_width
    visc = 0.5 / 4.0 * 0.2**2 * 5.0
    assert r0.visc == pytest.approx(visc, rel=1e-12)
    assert r0.fric > 0.0
    assert r0.cond == 0.0  # uniform temperature
    assert r0.exch_E == pytest.approx(1.5 * (1.0 - 1.2) * 5.0, rel=1e-12)
    assert r0.exch_S == pytest.approx(1.5 * (1.2 - 1.0) / 1.0 * 5.0, rel=1e-12)

    st2 = rest_state(10, rho=2.0, theta=1.1)
    st2.t = 0.1
    r1 = balance_report(system, st2, prev=r0, newton_iters=4)
    assert r1.dM == pytest.approx(r1.M - r0.M)
    assert r1.dE == pytest.approx(r1.E - r0.E)
    assert r1.newton_iters == 4


def test_balance_series_and_deltas():
    system = make_system()
    states = [rest_state(10, theta=1.0 + 0.1 * k) for k in range(3)]
    reports = balance_series(system, states, newton_iters=[0, 3, 2])
    assert len(reports) == 3
    assert reports[1].dE == pytest.approx(reports[1].E - reports[0].E)
    dM, dE, dS = series_deltas(reports)
    assert dM == pytest.approx(0.0, abs=1e-14)
    assert dE == pytest.approx(reports[2].E - reports[0].E)
    with pytest.raises(ValueError):
        balance_series(system, [])


def test_distance_to_steady_zero_for_identical_states():
    system = make_system()
    st = rest_state(10, rho=2.0)
    assert distance_to_steady(system, st, st) == (0.0, 0.0, 0.0)


def test_distance_to_steady_uniform_offsets():
    system = make_system()
    a = rest_state(10, rho=2.0)
    b = rest_state(10, rho=2.5)
    b.theta_hat += 0.1
    drho, dm, dth = distance_to_steady(system, a, b)
    assert drho == pytest.approx(0.5 * math.sqrt(5.0), rel=1e-13)
    assert dm == 0.0
    assert dth == pytest.approx(0.1 * math.sqrt(5.0), rel=1e-12)


def test_distance_to_steady_rejects_layout_mismatch():
    system = make_system()
    with pytest.raises(ValueError):
        distance_to_steady(system, rest_state(10), rest_state(8))


def test_balance_csv_layout(tmp_path):
    system = make_system()
    reports = balance_series(system, [rest_state(10)])
    path = tmp_path / "balance.csv"
    write_balance_csv(reports, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == BALANCE_CSV_HEADER
    assert len(lines) == 2
    values = lines[1].split(",")
    assert float(values[1]) == pytest.approx(5.0)
    assert values[-1] == "0"
