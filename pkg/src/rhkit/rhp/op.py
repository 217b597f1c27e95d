"""Orthogonal-polynomial Riemann-Hilbert problem for the weight e^{-x^2}.

X = [[p_n, C(p_n w)], [g p_{n-1}, g C(p_{n-1} w)]] with w(x) = e^{-x^2},
g h_{n-1}^2 = -2 pi i and C the Cauchy transform over R.  The Cauchy
transform of a polynomial times the Gaussian splits as

    C(p w)(z) = p(z) C(w)(z) + (1/2 pi i) int (p(x) - p(z))/(x - z) w(x) dx,

where C(w)(z) = Faddeeva(z)/2 for Im z > 0 and the second term is a
polynomial integral done exactly by Gauss-Hermite.  Far from the origin
that split cancels badly, so there the moment series in 1/z is used.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.special import gammaln, roots_hermite, wofz

from ..errors import ParameterError

N_MAX = 12
FAR = 3.0
OFF_AXIS = 2.0
DIRECT_NODES = 120


def hermite_monic(n: int, x) -> np.ndarray:
    """Monic orthogonal polynomial p_n for e^{-x^2}: p_{k+1} = x p_k - (k/2) p_{k-1}."""
    x = np.asarray(x, dtype=complex)
    p0, p1 = np.ones_like(x), x.copy()
    if n == 0:
        return p0
    for k in range(1, n):
        p0, p1 = p1, x * p1 - 0.5 * k * p0
    return p1


def hermite_norm_sq(k: int) -> float:
    """h_k^2 = int p_k^2 e^{-x^2} dx = sqrt(pi) k! / 2^k."""
    return math.sqrt(math.pi) * math.factorial(k) / 2.0 ** k


def _monic_coeffs(n: int) -> np.ndarray:
    """Coefficients of p_n, lowest degree first."""
    c0, c1 = np.array([1.0]), np.array([0.0, 1.0])
    if n == 0:
        return c0
    for k in range(1, n):
        nxt = np.zeros(k + 2)
        nxt[1:] = c1
        nxt[: k] -= 0.5 * k * c0
        c0, c1 = c1, nxt
    return c1


def _cauchy_gauss(z: complex, side: int = 0) -> complex:
    """(1/2 pi i) int e^{-x^2} dx/(x - z); side selects the boundary value on R."""
    if z.imag > 0 or (z.imag == 0 and side == 1):
        return 0.5 * complex(wofz(z))
    if z.imag < 0 or side == -1:
        return -0.5 * complex(wofz(-z))
    raise ParameterError("real z needs side=+1 or side=-1")


def _cauchy_poly_near(n: int, z: complex, side: int) -> complex:
    x, w = roots_hermite(16)
    pz = complex(hermite_monic(n, z))
    d = x - z
    near = np.abs(d) < 1e-12
    q = np.where(near, 0.0, (hermite_monic(n, x) - pz) / np.where(near, 1.0, d))
    if near.any():
        # (p(x) - p(z))/(x - z) -> p'(z) at coincident nodes.
        dp = np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(
            _monic_coeffs(n)))
        q = np.where(near, dp, q)
    return pz * _cauchy_gauss(z, side) + complex(np.dot(w, q)) / (2j * math.pi)


@functools.lru_cache(maxsize=None)
def _gauss_moment(j: int) -> float:
    # int x^j e^{-x^2} dx
    return 0.0 if j % 2 else math.exp(gammaln(0.5 * (j + 1)))


def _cauchy_poly_far(n: int, z: complex) -> complex | None:
    # 1/(x - z) = -sum_k x^k / z^{k+1}; moments of p_n vanish below k = n.
    # The series is asymptotic; None when its smallest term is not negligible.
    c = _monic_coeffs(n)
    total = 0.0 + 0.0j
    zk = z ** -(n + 1)
    prev = math.inf
    for k in range(n, 4000):
        m = sum(cj * _gauss_moment(j + k) for j, cj in enumerate(c))
        term = m * zk
        zk /= z
        if m == 0.0:
            continue
        if abs(term) > prev:
            return None
        total += term
        prev = abs(term)
        if abs(term) < 1e-17 * abs(total):
            return -total / (2j * math.pi)
    return None


def _cauchy_poly_direct(n: int, z: complex) -> complex:
    # Plain Gauss-Hermite; the pole sits at least OFF_AXIS from the real line.
    x, w = roots_hermite(DIRECT_NODES)
    return complex(np.dot(w, hermite_monic(n, x) / (x - z))) / (2j * math.pi)


def cauchy_poly_gauss(n: int, z: complex, side: int = 0) -> complex:
    """(1/2 pi i) int p_n(x) e^{-x^2} dx / (x - z).

    The split formula loses about log10(|z|^{2n}) digits to cancellation, so
    for |z| > 3 the moment series is used whenever it converges, and direct
    Gauss-Hermite quadrature when |Im z| >= OFF_AXIS.  Points with
    3 < |z| < 10 close to the real axis keep the split formula, whose
    accuracy degrades there for n near 12.
    """
    z = complex(z)
    if abs(z) > FAR:
        far = _cauchy_poly_far(n, z)
        if far is not None:
            return far
        if abs(z.imag) >= OFF_AXIS:
            return _cauchy_poly_direct(n, z)
    return _cauchy_poly_near(n, z, side)


def op_rhp_gaussian(n: int, z: complex, side: int = 0) -> np.ndarray:
    """X(z) for z off R, or X_side(z) for real z with side = +1 or -1."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not 0 <= n <= N_MAX:
        raise ParameterError(f"n must be an integer in [0, {N_MAX}]")
    z = complex(z)
    if z.imag == 0 and side not in (1, -1):
        raise ParameterError("real z needs side=+1 or side=-1")
    X = np.empty((2, 2), dtype=complex)
    X[0, 0] = hermite_monic(n, z)
    X[0, 1] = cauchy_poly_gauss(n, z, side)
    if n == 0:
        X[1, 0], X[1, 1] = 0.0, 1.0
        return X
    g = -2j * math.pi / hermite_norm_sq(n - 1)
    X[1, 0] = g * hermite_monic(n - 1, z)
    X[1, 1] = g * cauchy_poly_gauss(n - 1, z, side)
    return X


def op_jump_residual(n: int, x: float) -> float:
    """max |X_+(x) - X_-(x) [[1, e^{-x^2}], [0, 1]]|."""
    G = np.array([[1.0, math.exp(-x * x)], [0.0, 1.0]])
    return float(np.max(np.abs(op_rhp_gaussian(n, x, 1) - op_rhp_gaussian(n, x, -1) @ G)))


def cd_kernel_rhp(n: int, x: float, y: float) -> float:
    """e^{-x^2/2} [X_+(y)^{-1} X_+(x)]^{21} / (2 pi i (x - y)) e^{-y^2/2}."""
    if x == y:
        raise ParameterError("the kernel formula needs x != y")
    M = np.linalg.solve(op_rhp_gaussian(n, y, 1), op_rhp_gaussian(n, x, 1))
    val = math.exp(-0.5 * (x * x + y * y)) * M[1, 0] / (2j * math.pi * (x - y))
    return float(val.real)


def cd_kernel_sum(n: int, x: float, y: float) -> float:
    """e^{-(x^2+y^2)/2} sum_{k<n} p_k(x) p_k(y) / h_k^2."""
    s = sum(float(np.real(hermite_monic(k, x) * hermite_monic(k, y))) / hermite_norm_sq(k)
            for k in range(n))
    return math.exp(-0.5 * (x * x + y * y)) * s
