"""Emptiness formation probability of the XX0 spin chain.

P_n = det(1 - K_n) on the arc Gamma = {|z| = 1, arg z in (phi, 2 pi - phi)}
with the integrable kernel

    K_n(z, w) = (z^{n/2} w^{-n/2} - z^{-n/2} w^{n/2}) / (2 pi i (z - w)),

acting by int K_n(z, w) f(w) dw along Gamma oriented with increasing arg.
Half-integer powers use the branch cut along [0, inf), arg z in (0, 2 pi).
The same P_n is the determinant of U_n on (-Lambda, Lambda) with dx, which
serves as an independent route.  Since K_{n+1} = K_n + alpha (x) beta exactly,
P_{n+1}/P_n = 1 - int ((1 - K_n)^{-1} alpha)(z) z^{-n/2} dz/z, the (11)
entry of the IIKS solution at z = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError, ParameterError
from .quadrature import Interval, composite_rule

N_MAX = 60
NODES_PER_OSCILLATION = 6
PANEL_NODES = 16


@dataclass(frozen=True)
class XX0Params:
    """Field h in (0, 2) and block length n; Lambda and phi follow from h."""

    h: float
    n: int

    def __post_init__(self):
        if not 0.0 < self.h < 2.0:
            raise ParameterError("h must lie in (0, 2)")
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ParameterError("n must be an integer")
        if not 1 <= self.n <= N_MAX:
            raise ParameterError(f"n must lie in [1, {N_MAX}]")

    @property
    def Lambda(self) -> float:
        return 0.5 * math.acosh(2.0 / self.h)

    @property
    def phi(self) -> float:
        """Endpoint angle: e^{i phi} = z(-Lambda)."""
        return float(np.angle(z_of_lambda(-self.Lambda)))

    def with_n(self, n: int) -> "XX0Params":
        return XX0Params(self.h, n)


def z_of_lambda(lam):
    """z = -i (e^{2 lam} - i) / (e^{2 lam} + i), mapping R onto the unit circle."""
    e = np.exp(2.0 * np.asarray(lam, dtype=float))
    return -1j * (e - 1j) / (e + 1j)


def zpow(z, p: float) -> np.ndarray:
    """z^p with the cut along [0, inf), arg z in (0, 2 pi)."""
    z = np.asarray(z, dtype=complex)
    arg = np.mod(np.angle(z), 2.0 * math.pi)
    return np.abs(z) ** p * np.exp(1j * p * arg)


@dataclass(frozen=True, eq=False)
class ArcRule:
    """Gauss-Legendre panels in the angle on (phi + delta, 2 pi - phi - delta)."""

    nodes: np.ndarray
    weights: np.ndarray
    phi: float
    delta: float
    n_panels: int

    @property
    def n(self) -> int:
        return len(self.nodes)


def arc_rule(phi: float, n_panels: int, n_per_panel: int = PANEL_NODES,
             delta: float = 0.0) -> ArcRule:
    """``delta`` is an endpoint clearance as a fraction of the arc length.

    Gauss nodes never touch the endpoints and K_n is smooth up to them, so
    the default is no clearance.
    """
    if not math.pi / 2 < phi < math.pi:
        raise ParameterError("phi must lie in (pi/2, pi)")
    if not 0.0 <= delta < 0.5:
        raise ParameterError("delta must lie in [0, 1/2)")
    span = 2.0 * (math.pi - phi)
    a, b = phi + delta * span, 2.0 * math.pi - phi - delta * span
    r = composite_rule(n_per_panel, Interval(a, b), panels=n_panels)
    z = np.exp(1j * r.nodes)
    return ArcRule(z, r.weights * 1j * z, phi, delta, n_panels)


def default_rule(params: XX0Params, delta: float = 0.0) -> ArcRule:
    panels = max(2, math.ceil(params.n / 4))
    return arc_rule(params.phi, panels, delta=delta)


def _check_resolution(n: int, rule: ArcRule) -> None:
    # z^{n/2} w^{-n/2} turns through n (pi - phi) / pi oscillations on the arc.
    osc = max(1.0, n * (math.pi - rule.phi) / math.pi)
    if rule.n < NODES_PER_OSCILLATION * osc:
        raise ParameterError(
            f"{rule.n} nodes do not resolve {osc:.1f} oscillations "
            f"({NODES_PER_OSCILLATION} per oscillation needed)")


def kernel_matrix(n: int, rule: ArcRule) -> np.ndarray:
    """K_n(z_i, z_j) w_j on the rule."""
    z, w = rule.nodes, rule.weights
    a, b = zpow(z, 0.5 * n), zpow(z, -0.5 * n)
    d = z[:, None] - z[None, :]
    np.fill_diagonal(d, 1.0)
    K = (a[:, None] * b[None, :] - b[:, None] * a[None, :]) / (2j * math.pi * d)
    np.fill_diagonal(K, n / (2j * math.pi * z))
    return K * w[None, :]


def _complex_det(A: np.ndarray) -> tuple[complex, float]:
    """(det A, log |det A|) from an LU factorization."""
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    d = np.diag(lu)
    logabs = float(np.sum(np.log(np.abs(d))))
    phase = complex(np.prod(d / np.abs(d)))
    if int(np.sum(piv != np.arange(len(piv)))) % 2:
        phase = -phase
    return phase * math.exp(logabs), logabs


@dataclass(frozen=True)
class EfpDet:
    value: float
    imag: float
    log_value: float
    n_nodes: int
    sigma_min: float

    @property
    def relative_accuracy(self) -> float:
        """Rounding bound eps / sigma_min(1 - K_n); exceeds 1e-8 once P_n is
        below roughly 1e-35."""
        return float(np.finfo(float).eps / self.sigma_min)


def efp_det_full(params: XX0Params, rule: ArcRule | None = None) -> EfpDet:
    rule = default_rule(params) if rule is None else rule
    _check_resolution(params.n, rule)
    A = np.eye(rule.n) - kernel_matrix(params.n, rule)
    val, logabs = _complex_det(A)
    if abs(val.imag) > 1e-8:
        raise NumericError(f"determinant has imaginary part {val.imag:.3e}")
    smin = float(np.linalg.svd(A, compute_uv=False)[-1])
    return EfpDet(float(val.real), float(val.imag), logabs, rule.n, smin)


def efp_det(params: XX0Params, rule: ArcRule | None = None) -> float:
    """P_n by Nystrom on the arc."""
    return efp_det_full(params, rule).value


def efp_det_interval(params: XX0Params, n_panels: int | None = None) -> float:
    """P_n = det(1 - U_n) on (-Lambda, Lambda) with dx: the original form,
    before the change of variables to the arc."""
    L, n = params.Lambda, params.n
    panels = n_panels or max(2, math.ceil(n / 4))
    r = composite_rule(PANEL_NODES, Interval(-L, L), panels=panels)
    lam, w = r.nodes, r.weights
    e = np.exp(2.0 * lam)
    A = ((e + 1j) / (e - 1j)) ** n
    d = lam[:, None] - lam[None, :]
    np.fill_diagonal(d, 1.0)
    U = (1.0 - A[:, None] / A[None, :]) / (2j * math.pi * np.sinh(d))
    np.fill_diagonal(U, n / (math.pi * np.cosh(2.0 * lam)))
    val, _ = _complex_det(np.eye(len(lam)) - U * w[None, :])
    return float(val.real)


def efp_ratio_iiks(params: XX0Params, rule: ArcRule | None = None) -> complex:
    """X^{11}(0) = 1 - int F_1(w) g_1(w) dw / w with F_1 = (1 - K_n)^{-1} f_1."""
    rule = default_rule(params) if rule is None else rule
    _check_resolution(params.n, rule)
    n, z, w = params.n, rule.nodes, rule.weights
    A = np.eye(rule.n) - kernel_matrix(n, rule)
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    d = np.abs(np.diag(lu))
    if float(np.sum(np.log(d))) < math.log(1e-10) and np.min(d) < 1e-12 * np.max(d):
        raise NumericError("1 - K_n is numerically singular on this rule")
    f1 = zpow(z, 0.5 * n) / (2j * math.pi)
    F1 = scipy.linalg.lu_solve((lu, piv), f1, check_finite=False)
    return complex(1.0 - np.sum(w * F1 * zpow(z, -0.5 * n) / z))


@dataclass(frozen=True)
class AsymptoticFit:
    slope: float
    intercept: float
    theory: float

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.theory) / abs(self.theory)


def efp_asymptotic_check(h: float, n_list) -> AsymptoticFit:
    """Least-squares fit ln P_n = a n^2 + b; theory a = ln sin(phi/2)."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 2:
        raise ParameterError("the slope needs at least two values of n")
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[-1] > N_MAX:
        raise ParameterError(f"n_list must be increasing with max <= {N_MAX}")
    logs = [efp_det_full(XX0Params(h, n)).log_value for n in n_list]
    n2 = np.array(n_list, dtype=float) ** 2
    a, b = np.polyfit(n2, logs, 1)
    phi = XX0Params(h, 1).phi
    return AsymptoticFit(float(a), float(b), math.log(math.sin(0.5 * phi)))
