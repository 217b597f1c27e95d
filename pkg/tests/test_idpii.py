import math

import numpy as np
import pytest

from rhkit import specfun
from rhkit.errors import ParameterError, RangeError
from rhkit.idpii import (boundary_start, det_sigma, discretize_measure, f_sigma_from_det,
                         f_sigma_from_u, fermi, gaussian, log_f_sigma_from_u, point_mass,
                         second_derivative_identity, solve_idpii)
from rhkit.measure import Custom
from rhkit.painleve2 import solve_as, tw_cdf_from_det

U_HM_0 = 0.36706155155


@pytest.fixture(scope="module")
def fermi1():
    m = discretize_measure(fermi(1.0), 200)
    return m, solve_idpii(m, s_end=-2.0)


def test_fermi_mass():
    m = discretize_measure(fermi(1.0), 200)
    assert 1 - 1e-10 <= m.t_weights.sum() <= 1
    assert abs(m.t_weights.sum() + m.mass_deficit - 1) <= 1e-12


def test_fermi_symmetric_first_moment():
    assert abs(discretize_measure(fermi(8.0), 200).moment(1)) <= 1e-6


def test_fermi_cdf_is_sigma():
    f = fermi(2.0)
    t = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(f.cdf(t), 1 / (1 + np.exp(-2 * t)), rtol=1e-14)


def test_narrow_gaussian_concentrates():
    m = discretize_measure(gaussian(0.0, 1e-4), 64)
    assert np.max(np.abs(m.t_nodes)) <= 6.5 * 0.01
    assert m.moment(2) == pytest.approx(1e-4, rel=1e-8)


@pytest.mark.parametrize("bad", [lambda: fermi(0.0), lambda: gaussian(0.0, -1.0),
                                 lambda: discretize_measure(fermi(1.0), 4)])
def test_measure_errors(bad):
    with pytest.raises(ParameterError):
        bad()


def test_custom_measure_without_cdf():
    c = Custom(lambda t: np.exp(-t * t) / math.sqrt(math.pi), -7.0, 7.0)
    m = discretize_measure(c, 64)
    assert m.t_weights.sum() == pytest.approx(1, abs=1e-10)


def test_boundary_start_fermi():
    assert boundary_start(discretize_measure(fermi(1.0), 200)) == 22.0
    assert boundary_start(point_mass(0.0)) == 8.0


def test_boundary_values(fermi1):
    m, sol = fermi1
    ai = specfun.airy_ai(sol.start_point + m.t_nodes)[0]
    assert np.max(np.abs(sol.u[0] - ai)) <= 1e-10


def test_point_mass_reduces_to_hastings_mcleod():
    sp = solve_idpii(point_mass(0.0), s0=8.0, s_end=-4.0)
    hm = solve_as(1.0, s0=8.0, s_end=-4.0)
    for s in np.linspace(-4, 7.9, 25):
        assert abs(sp.u_at(s)[0] - hm.u_at(s)) <= 1e-8


def test_sharp_fermi_coupling_near_hm():
    m = discretize_measure(fermi(8.0), 200)
    assert abs(solve_idpii(m, s_end=-1.0).coupling(0.0) - U_HM_0 ** 2) <= 5e-3


def test_coupled_residual(fermi1):
    assert fermi1[1].ode_residual() <= 1e-6


@pytest.mark.parametrize("kw", [dict(s0=5.0), dict(s_end=30.0), dict(tol=1e-2)])
def test_solve_preconditions(fermi1, kw):
    with pytest.raises(ParameterError):
        solve_idpii(fermi1[0], **kw)


def test_solve_rejects_deep_left():
    with pytest.raises(ParameterError):
        solve_idpii(point_mass(0.0), s0=8.0, s_end=-41.0)


def test_range_error_below_certified(fermi1):
    with pytest.raises(RangeError):
        f_sigma_from_u(fermi1[1], -3.0)


def test_right_tail_sharp_measures():
    p = point_mass(0.0)
    assert f_sigma_from_u(solve_idpii(p, s0=8.0, s_end=-1.0), 6.0) == pytest.approx(1, abs=1e-8)
    assert f_sigma_from_det(discretize_measure(fermi(8.0), 200), 10.0) == pytest.approx(1, abs=1e-10)


def test_right_tail_wide_fermi(fermi1):
    # e^{-|t|} tails keep F(6) visibly below 1; both routes agree on it.
    m, sol = fermi1
    v = f_sigma_from_u(sol, 6.0)
    assert 0.999 < v < 1 - 1e-4
    assert v == pytest.approx(f_sigma_from_det(m, 6.0), abs=1e-9)


def test_from_u_increasing(fermi1):
    vals = [f_sigma_from_u(fermi1[1], s) for s in np.linspace(-2, 6, 20)]
    assert all(0 < v < 1 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("s", [-1, 0, 1, 2, 3, 4])
def test_central_identity(fermi1, s):
    m, sol = fermi1
    assert abs(log_f_sigma_from_u(sol, s) - math.log(f_sigma_from_det(m, s))) <= 1e-4


def test_det_node_doubling(fermi1):
    m = fermi1[0]
    assert abs(f_sigma_from_det(m, 0.0, 80) - f_sigma_from_det(m, 0.0, 160)) <= 1e-8
    r = det_sigma(m, 0.0)
    assert 0 < np.real(r.value) < 1


def test_second_derivative_identity(fermi1):
    m, sol = fermi1
    lhs, rhs = second_derivative_identity(m, 1.0, sol)
    assert abs(lhs - rhs) <= 1e-4


def test_second_derivative_boundary(fermi1):
    m, sol = fermi1
    lhs, rhs = second_derivative_identity(m, 6.0, sol)
    ref = -m.t_weights @ specfun.airy_ai(6.0 + m.t_nodes)[0] ** 2
    # Leading order only: nodes reach t = -23 where u differs from Ai.
    assert rhs == pytest.approx(ref, rel=2e-3)
    assert abs(lhs - rhs) <= 1e-8


def test_second_derivative_point_mass():
    p = point_mass(0.0)
    lhs, rhs = second_derivative_identity(p, 0.0, solve_idpii(p, s0=8.0, s_end=-1.0))
    assert rhs == pytest.approx(-U_HM_0 ** 2, abs=1e-8)
    assert lhs == pytest.approx(rhs, abs=1e-6)


def test_sharp_fermi_limit_monotone():
    s_grid = np.linspace(-2, 3, 11)
    tw = np.array([tw_cdf_from_det(s) for s in s_grid])
    dist = []
    for a in (2.0, 4.0, 8.0):
        m = discretize_measure(fermi(a), 200)
        dist.append(max(abs(f_sigma_from_det(m, s) - t) for s, t in zip(s_grid, tw)))
    assert dist[0] > dist[1] > dist[2]


def test_det_smooth_in_s(fermi1):
    m = fermi1[0]
    h = 1e-3
    vals = np.array([f_sigma_from_det(m, 0.5 + k * h) for k in range(-5, 6)])
    second = np.abs(np.diff(vals, 2)) / h ** 2
    assert np.max(second) < 1.0
