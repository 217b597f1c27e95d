import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhkit.errors import ParameterError
from rhkit.rhp import cd_kernel_rhp, cd_kernel_sum, op_jump_residual, op_rhp_gaussian
from rhkit.rhp.op import cauchy_poly_gauss, hermite_monic, hermite_norm_sq

# (1/2 pi i) int p_n(x) e^{-x^2} dx/(x - z) by mpmath at 20 digits.
CAUCHY_ORACLE = [
    (3, 1 + 1j, -0.021167510202548656674 - 0.0061022987668490561647j),
    (8, 0.5 - 2j, -0.0010477366917215581747 + 0.0039612549570000578026j),
    (8, 4 + 4j, 6.7008437760542292998e-6 + 7.4555579541585734338e-7j),
]


@pytest.mark.parametrize("n,z,ref", CAUCHY_ORACLE)
def test_cauchy_oracle(n, z, ref):
    assert abs(cauchy_poly_gauss(n, z) - ref) <= 1e-9 * abs(ref)


def test_hermite_monic_low_orders():
    x = np.array([0.3, -1.2, 2.0])
    np.testing.assert_allclose(hermite_monic(2, x), x ** 2 - 0.5)
    np.testing.assert_allclose(hermite_monic(3, x), x ** 3 - 1.5 * x)


@pytest.mark.parametrize("j,k", [(0, 0), (2, 2), (3, 5), (6, 6), (4, 7)])
def test_orthogonality(j, k):
    x, w = np.polynomial.hermite.hermgauss(30)
    val = np.sum(w * np.real(hermite_monic(j, x) * hermite_monic(k, x)))
    expect = hermite_norm_sq(j) if j == k else 0.0
    assert val == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("n", range(9))
def test_det_is_one(n):
    assert abs(np.linalg.det(op_rhp_gaussian(n, 1 + 1j)) - 1) <= 1e-9


@given(st.integers(0, 8), st.floats(-3, 3), st.floats(0.1, 3))
def test_det_is_one_anywhere(n, x, y):
    for z in (complex(x, y), complex(x, -y)):
        assert abs(np.linalg.det(op_rhp_gaussian(n, z)) - 1) <= 1e-9


@pytest.mark.parametrize("n", range(9))
def test_jump(n):
    assert op_jump_residual(n, 0.7) <= 1e-8


@given(st.integers(0, 8), st.floats(-4, 4))
def test_jump_anywhere(n, x):
    assert op_jump_residual(n, x) <= 1e-8


def test_n_zero_second_row():
    X = op_rhp_gaussian(0, 0.5j)
    assert X[1, 0] == 0 and X[1, 1] == 1


@pytest.mark.parametrize("n", [1, 3, 6, 8])
def test_christoffel_darboux(n):
    assert abs(cd_kernel_rhp(n, 0.3, -0.4) - cd_kernel_sum(n, 0.3, -0.4)) <= 1e-10


@given(st.integers(1, 8), st.floats(-2, 2), st.floats(-2, 2))
def test_christoffel_darboux_anywhere(n, x, y):
    if abs(x - y) < 1e-3:
        return
    assert abs(cd_kernel_rhp(n, x, y) - cd_kernel_sum(n, x, y)) <= 1e-10


@pytest.mark.parametrize("n", [1, 4, 8, 12])
@pytest.mark.parametrize("theta", [0.7, math.pi / 2, 2.4])
def test_normalization_at_infinity(n, theta):
    # X22 z^n = 1 + n(n+1)/(4 z^2) + O(z^-4); the correction is 1e-5 at |z| = 1e3.
    z = 1e3 * complex(math.cos(theta), math.sin(theta))
    X = op_rhp_gaussian(n, z)
    assert abs(X[1, 1] * z ** n - 1 - n * (n + 1) / (4 * z * z)) <= 1e-6
    assert X[0, 0] / z ** n == pytest.approx(1, abs=n * n / 1e6)


@pytest.mark.parametrize("bad", [-1, 13, 2.5, True])
def test_bad_degree(bad):
    with pytest.raises(ParameterError):
        op_rhp_gaussian(bad, 1j)


def test_real_point_needs_side():
    with pytest.raises(ParameterError):
        op_rhp_gaussian(3, 0.5)


def test_cd_kernel_needs_distinct_points():
    with pytest.raises(ParameterError):
        cd_kernel_rhp(3, 0.2, 0.2)
