import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhkit.errors import NumericError, ParameterError
from rhkit.kpz import (CrossoverParams, HankelContour, crossover_cdf, crossover_cdf_many,
                       gaussian_scaling, kappa_T, limit_scan, sigma_factor, sigma_factor_dt)


def test_kappa():
    assert kappa_T(2.0) == 1.0
    assert kappa_T(16.0) == pytest.approx(2.0, rel=1e-15)


def test_sigma_factor_arithmetic():
    assert sigma_factor(0.0, 1.0, -1.0) == pytest.approx(0.5, abs=1e-16)
    assert sigma_factor(0.0, CrossoverParams(2.0, 0.0), -1.0) == pytest.approx(0.5, abs=1e-16)


def test_sigma_factor_limits():
    z = 0.3 + 0.4j
    assert sigma_factor(60.0, 1.0, z) == pytest.approx(1.0, abs=1e-20)
    assert abs(sigma_factor(-60.0, 1.0, z)) < 1e-25
    # No overflow far out on either side.
    assert np.all(np.isfinite(sigma_factor(np.array([-1e4, 1e4]), 3.0, z)))


@given(st.floats(-20, 20), st.floats(0.1, 5), st.floats(0.2, 5), st.floats(0.3, 3.0))
def test_sigma_factor_matches_direct_formula(t, kappa, r, theta):
    z = r * complex(math.cos(theta), math.sin(theta))
    direct = z / (z - math.exp(-kappa * t))
    assert abs(sigma_factor(t, kappa, z) - direct) <= 1e-12 * max(1.0, abs(direct))


@given(st.floats(-5, 5), st.floats(0.3, 3.0))
def test_sigma_factor_derivative(t, theta):
    z = 0.7 * complex(math.cos(theta), math.sin(theta))
    h = 1e-6
    fd = (sigma_factor(t + h, 1.3, z) - sigma_factor(t - h, 1.3, z)) / (2 * h)
    assert abs(fd - sigma_factor_dt(t, 1.3, z)) <= 1e-6 * max(1.0, abs(fd))


def test_sigma_factor_pole():
    with pytest.raises(NumericError):
        sigma_factor(0.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        sigma_factor(0.0, 1.0, 0.0)


@pytest.mark.parametrize("T,s", [(1e-4, 0.0), (1e5, 0.0), (1.0, math.nan)])
def test_params_rejected(T, s):
    with pytest.raises(ParameterError):
        CrossoverParams(T, s)


@pytest.mark.parametrize("kw", [dict(inner_radius=0.0), dict(n_circle=5), dict(n_arm=4),
                                dict(orientation="clockwise"), dict(arm_reach=0.1)])
def test_contour_rejected(kw):
    with pytest.raises(ParameterError):
        HankelContour(**kw)


def test_contour_geometry():
    c = HankelContour()
    # The arms leave the circle at angle pi/4; Gauss nodes sit just past
    # that corner, so the closest node is slightly farther than r/sqrt(2).
    d = c.min_distance_to_positive_axis()
    assert c.inner_radius / math.sqrt(2) < d < 1.05 * c.inner_radius / math.sqrt(2)
    assert c.end_decay() <= 1e-18 * (1 + 1e-12)
    assert c.normalization_defect() <= 1e-10
    # Closure: the weights sum to the chord between the two truncated arm ends.
    z, w = c.nodes()
    chord = c.reach * (np.exp(-1j * math.pi / 4) - np.exp(1j * math.pi / 4))
    assert abs(np.sum(w) - chord) <= 1e-12 * c.reach


def test_contour_conjugate_symmetric():
    z, w = HankelContour().nodes()
    np.testing.assert_allclose(z, np.conj(z[::-1]), rtol=0, atol=0)
    np.testing.assert_allclose(w, -np.conj(w[::-1]), rtol=0, atol=0)


@pytest.mark.parametrize("T", [1e-3, 1.0, 1e4])
def test_kernel_off_normalization(T):
    for sym in (True, False):
        r = crossover_cdf_many(T, [0.0], kernel_off=True, symmetric=sym)[0]
        assert abs(r.value - 1) <= 1e-10


def test_right_tail_is_one():
    assert crossover_cdf(CrossoverParams(2.0, 12.0)) == pytest.approx(1, abs=1e-8)


def test_imaginary_part_small():
    r = crossover_cdf_many(1.0, [-1.0, 0.5], symmetric=False)
    assert all(abs(x.imag) <= 1e-8 for x in r)
    sym = crossover_cdf_many(1.0, [-1.0, 0.5])
    for a, b in zip(r, sym):
        assert a.value == pytest.approx(b.value, abs=1e-12)


def test_contour_independence():
    s = [-2.0, 0.0, 1.5]
    base = crossover_cdf_many(1.0, s)
    wide = crossover_cdf_many(1.0, s, contour=HankelContour(inner_radius=1.0))
    for a, b in zip(base, wide):
        assert abs(a.value - b.value) <= 1e-6


def test_monotone_in_s():
    vals = [r.value for r in crossover_cdf_many(1.0, np.linspace(-5, 4, 10))]
    assert all(0 < v < 1 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_det_nodes_floor():
    with pytest.raises(ParameterError):
        crossover_cdf_many(1.0, [0.0], det_nodes=10)


def test_gaussian_scaling_formula():
    T = 0.01
    sig = 2 ** -0.5 * (math.pi * T) ** 0.25
    assert gaussian_scaling(T, 0.7) == pytest.approx(sig * 0.7 - math.log(math.sqrt(2 * math.pi * T)),
                                                     rel=1e-15)


def test_limit_scan_flags_and_rows():
    rows = limit_scan([1.0], limit="gaussian")
    assert len(rows) == 1 and not rows[0].flagged
    with pytest.raises(ParameterError):
        limit_scan([1.0], limit="poisson")


def test_gaussian_distance_decreases_toward_zero_temperature():
    rows = limit_scan([1.0, 0.1], limit="gaussian", tol=1e-4)
    assert rows[1].distance < rows[0].distance
    assert not any(r.flagged for r in rows)
