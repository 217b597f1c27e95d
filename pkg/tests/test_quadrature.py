import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhkit import specfun
from rhkit.errors import ParameterError
from rhkit.quadrature import (CircularArc, Contour, HalfLine, Interval, Segment, arc_rule,
                              barycentric_eval, composite_rule, concatenate, diff_matrix,
                              gauss_legendre, half_line_rule, interval_rule, map_rule,
                              unit_circle)


def test_gl_one_point_is_midpoint():
    r = gauss_legendre(1)
    assert r.nodes.tolist() == [0.0]
    assert r.weights.tolist() == [2.0]


def test_gl_two_points_closed_form():
    r = gauss_legendre(2)
    np.testing.assert_allclose(r.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=0, atol=2e-16)
    np.testing.assert_allclose(r.weights, [1.0, 1.0], rtol=0, atol=1e-15)


def test_gl_40_integrates_x78():
    r = gauss_legendre(40)
    assert r.integrate(lambda x: x ** 78) == pytest.approx(2 / 79, rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 16, 64, 257, 1024, 4096])
def test_gl_structure(n):
    r = gauss_legendre(n)
    assert np.all(np.diff(r.nodes) > 0)
    assert np.all(np.abs(r.nodes) < 1)
    assert np.all(r.weights > 0)
    assert abs(r.weights.sum() - 2) <= 1e-13


@pytest.mark.parametrize("n", [0, -3, 4097])
def test_gl_out_of_range(n):
    with pytest.raises(ParameterError):
        gauss_legendre(n)


def test_gl_rejects_non_integer():
    with pytest.raises(ParameterError):
        gauss_legendre(2.5)


@given(n=st.integers(1, 60), data=st.data())
def test_gl_exact_for_degree_2n_minus_1(n, data):
    deg = data.draw(st.integers(0, 2 * n - 1))
    coef = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=deg + 1, max_size=deg + 1)))
    r = gauss_legendre(n)
    approx = np.polynomial.polynomial.polyval(r.nodes, coef) @ r.weights
    integ = np.polynomial.polynomial.polyint(coef)
    exact = np.polynomial.polynomial.polyval(1, integ) - np.polynomial.polynomial.polyval(-1, integ)
    scale = np.sum(np.abs(coef) * 2 / (np.arange(deg + 1) + 1))
    assert abs(approx - exact) <= 1e-13 * max(scale, 1e-300)


def test_exactness_table():
    # Monomial x^k on [0, 3] for every k <= 2n - 1.
    for n in (1, 2, 5, 10, 20):
        r = interval_rule(n, 0.0, 3.0)
        for k in range(2 * n):
            exact = 3.0 ** (k + 1) / (k + 1)
            assert r.integrate(lambda x: x ** k) == pytest.approx(exact, rel=1e-12)


def test_constant_on_interval():
    assert interval_rule(7, 0.0, 2.0).weights.sum() == pytest.approx(2.0, rel=1e-14)


def test_map_rule_interval():
    r = map_rule(gauss_legendre(9), Interval(0.0, 2.0))
    assert r.weights.sum() == pytest.approx(2.0, rel=1e-14)


def test_half_line_airy_square():
    # int_4^inf Ai^2 = Ai'(4)^2 - 4 Ai(4)^2
    r = half_line_rule(60, 4.0)
    ai, aip = specfun.airy_ai(4.0)
    vals = specfun.airy_ai_wide(r.nodes)[0] ** 2
    assert r.weights @ vals == pytest.approx(aip ** 2 - 4 * ai ** 2, rel=1e-10)


def test_half_line_algebraic_map():
    r = half_line_rule(40, 1.0, scale=2.0, map_kind="algebraic", panels=4)
    assert r.integrate(lambda x: 1 / x ** 2) == pytest.approx(1.0, rel=1e-10)


def test_arc_length_of_half_circle():
    c = Contour((CircularArc(0.0, 1.0, math.pi / 2, 3 * math.pi / 2),))
    r = arc_rule(20, c)
    assert np.sum(np.abs(r.weights)) == pytest.approx(math.pi, abs=1e-12)


def test_reversing_arc_negates_contour_integral():
    c = Contour((Segment(0j, 1 + 2j), CircularArc(2.0, 1.0, 0.3, 2.0)))
    f = lambda z: np.exp(z) / (z - 5)  # noqa: E731
    fwd = sum(arc_rule(16, c, k).integrate(f) for k in range(2))
    rev = c.reversed()
    back = sum(arc_rule(16, rev, k).integrate(f) for k in range(2))
    assert abs(fwd + back) <= 1e-15 * max(1.0, abs(fwd))


def test_geometric_convergence():
    f = lambda x: 1 / (1 + 4 * x * x)  # noqa: E731
    diffs = []
    for n in (4, 8, 16):
        a = interval_rule(n, -1, 1).integrate(f)
        b = interval_rule(2 * n, -1, 1).integrate(f)
        diffs.append(abs(a - b))
    assert diffs[1] < 0.9 * diffs[0]
    assert diffs[2] < 0.9 * diffs[1]


def test_closed_contour_gap_rejected():
    with pytest.raises(ParameterError):
        Contour((Segment(0j, 1 + 0j), Segment(1 + 0j, 1j)), closed=True)


def test_degenerate_arc_rejected():
    with pytest.raises(ParameterError):
        Contour((Segment(1j, 1j),))


def test_unit_circle_residue():
    r = arc_rule(32, unit_circle())
    assert r.integrate(lambda z: 1 / z) == pytest.approx(2j * math.pi, abs=1e-13)


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf)])
def test_bad_interval(a, b):
    with pytest.raises(ParameterError):
        Interval(a, b)


def test_bad_half_line():
    with pytest.raises(ParameterError):
        HalfLine(0.0, "cubic")
    with pytest.raises(ParameterError):
        HalfLine(0.0, "exp", -1.0)


def test_composite_breaks_must_increase():
    with pytest.raises(ParameterError):
        composite_rule(4, Interval(0, 1), breaks=(0, 0.5, 0.5, 1))


def test_resample_keeps_panels():
    r = composite_rule(8, Interval(0, 4), breaks=(0, 1, 4))
    r2 = r.resample(16)
    assert r2.breaks == r.breaks and r2.n == 32


def test_concatenate_pieces():
    r = concatenate([interval_rule(8, 0, 1), interval_rule(8, 1, 3)])
    assert r.integrate(lambda x: x) == pytest.approx(4.5, rel=1e-14)


def test_diff_matrix_differentiates_polynomials():
    u = gauss_legendre(12).nodes
    D = diff_matrix(12)
    np.testing.assert_allclose(D @ u ** 5, 5 * u ** 4, atol=1e-12)


def test_barycentric_reproduces_polynomial():
    u = gauss_legendre(10).nodes
    vals = u ** 7 - 2 * u
    assert barycentric_eval(u, vals, 0.3141) == pytest.approx(0.3141 ** 7 - 2 * 0.3141, abs=1e-13)
