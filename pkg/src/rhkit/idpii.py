"""Integro-differential Painleve II and the finite-temperature Airy determinant.

For a probability measure d sigma(t) the functions u(s|t) solve

    u''(s|t) = (s + t + 2 int u(s|r)^2 d sigma(r)) u(s|t),   u(s|t) ~ Ai(s + t),

and F_sigma(s) = det(1 - K_sigma)_{L^2(s, inf)} satisfies
(ln F_sigma)'' = -int u(s|t)^2 d sigma(t).  The measure is replaced by a
MeasureGrid; the same grid enters the kernel, so both routes see identical
t-quadrature.  With a single node at t = 0 the system is u'' = s u + 2u^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import specfun
from .errors import NumericError, ParameterError, RangeError
from .fredholm import DetResult, det_nystrom, kernel_finite_temp_airy
from .measure import (Custom, Fermi, Gaussian, MeasureGrid, PointMass, discretize_measure,
                      fermi, gaussian, point_mass)
from .painleve2 import RTOL_CHECK, RTOL_FINE, airy_tail_moments
from .quadrature import Interval, composite_rule

__all__ = [
    "Custom", "Fermi", "Gaussian", "MeasureGrid", "PointMass", "discretize_measure", "fermi",
    "gaussian", "point_mass", "IdpiiSolution", "solve_idpii", "f_sigma_from_u",
    "f_sigma_from_det", "det_sigma", "second_derivative_identity", "boundary_start",
    "sigma_rule",
]

AIRY_FLOOR = -40.0
# Coupling sum_k w_k int_{s0}^inf Ai^2(x + t_k) dx allowed at the start point.
BOUNDARY_COUPLING = 1e-10


def _tail_q(b):
    q0, q1 = airy_tail_moments(np.asarray(b, dtype=float))
    return q0, q1


def boundary_start(measure: MeasureGrid, floor: float = 8.0) -> float:
    """Smallest s0 >= floor (on a 0.5 grid) where the neglected coupling
    sum_k w_k int_{s0}^inf Ai(x + t_k)^2 dx is below BOUNDARY_COUPLING.

    For measures with exponential tails toward -inf this sum decays only like
    the tail mass, so s0 can be well beyond 8.
    """
    s0 = floor
    while s0 < 200:
        q0, _ = _tail_q(np.clip(s0 + measure.t_nodes, -200, 200))
        if float(measure.t_weights @ q0) <= BOUNDARY_COUPLING:
            return s0
        s0 += 0.5
    raise ParameterError("no admissible start point below 200 for this measure")


@dataclass(frozen=True, eq=False)
class IdpiiSolution:
    s_grid: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    measure: MeasureGrid
    certified_s_min: float
    start_point: float = 0.0
    tol: float = 0.0
    segments: tuple = field(default=(), repr=False)

    def state(self, s: float) -> np.ndarray:
        if s > self.start_point:
            raise RangeError("point lies right of the start point", self.start_point)
        for sol, hi, lo in self.segments:
            if lo - 1e-12 <= s <= hi + 1e-12:
                return np.asarray(sol(s), dtype=float)
        raise RangeError(f"s={s} lies outside the integrated range", self.certified_s_min)

    def u_at(self, s: float) -> np.ndarray:
        return self.state(s)[: self.measure.n]

    def coupling(self, s: float) -> float:
        """int u(s|t)^2 d sigma(t) by the measure weights."""
        u = self.u_at(s)
        return float(self.measure.t_weights @ (u * u))

    def ode_residual(self, h: float = 0.01) -> float:
        """Sup over interior certified grid points of the 5-point residual."""
        t, w = self.measure.t_nodes, self.measure.t_weights
        hi = self.start_point - 2 * h
        lo = max(self.certified_s_min, float(self.s_grid[-1])) + 2 * h
        worst = 0.0
        for s in self.s_grid[(self.s_grid <= hi) & (self.s_grid >= lo)]:
            v = [self.u_at(s + k * h) for k in (-2, -1, 0, 1, 2)]
            d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
            c = w @ (v[2] * v[2])
            worst = max(worst, float(np.max(np.abs(d2 - (s + t + 2 * c) * v[2]))))
        return worst


def _initial_state(measure: MeasureGrid, s0: float) -> np.ndarray:
    b = s0 + measure.t_nodes
    ai, aip = specfun.airy_ai(b)
    q0, q1 = _tail_q(b)
    w = measure.t_weights
    return np.concatenate([ai, aip, [-(w @ q1), w @ q0]])


def _integrate(measure: MeasureGrid, s0: float, s_end: float, rtol: float):
    t, w, n = measure.t_nodes, measure.t_weights, measure.n

    def rhs(s, y):
        u = y[:n]
        c = w @ (u * u)
        return np.concatenate([y[n:2 * n], (s + t + 2 * c) * u, [y[-1], -c]])

    res = solve_ivp(rhs, (s0, s_end), _initial_state(measure, s0), method="DOP853",
                    rtol=rtol, atol=rtol * 1e-10, dense_output=True)
    if res.status != 0:
        raise NumericError(f"integration failed near s={res.t[-1]:.6g}: {res.message}")
    return res.sol


def solve_idpii(measure: MeasureGrid, s0: float | None = None, s_end: float = -2.0,
                tol: float = 1e-8, step: float = 0.05) -> IdpiiSolution:
    """Backward integration of the coupled system for all measure nodes.

    ``s0=None`` picks the start by :func:`boundary_start`.  Certification
    follows painleve2.solve_as: a run at 16x the tolerance must agree with
    the reported run to 10*tol*max(1, |u|) at every node.
    """
    measure.check_normalized()
    if s0 is None:
        s0 = boundary_start(measure)
    if not s0 >= 6:
        raise ParameterError("s0 must be at least 6")
    if not s_end < s0:
        raise ParameterError("s_end must lie left of s0")
    if s_end + float(np.min(measure.t_nodes)) < AIRY_FLOOR:
        raise ParameterError("s_end + t_min must stay above -40")
    if s0 + float(np.max(measure.t_nodes)) > specfun.X_MAX:
        raise ParameterError("s0 + t_max exceeds the Airy evaluation range")
    if not 1e-12 <= tol <= 1e-6:
        raise ParameterError("tol must lie in [1e-12, 1e-6]")
    n = measure.n
    sol = _integrate(measure, s0, s_end, RTOL_FINE)
    chk = _integrate(measure, s0, s_end, RTOL_CHECK)
    m = int(round((s0 - s_end) / step))
    grid = np.linspace(s0, s_end, m + 1)
    Y = sol(grid)
    Y2 = chk(grid)
    u, up = Y[:n].T, Y[n:2 * n].T
    diff = np.max(np.abs(Y2[:n].T - u) / np.maximum(1.0, np.abs(u)), axis=1)
    bad = diff > 10 * tol
    cert = float(grid[-1]) if not bad.any() else float(grid[max(0, int(np.argmax(bad)) - 1)])
    return IdpiiSolution(grid, u, up, measure, cert, s0, tol, ((sol, s0, s_end),))


def f_sigma_from_u(sol: IdpiiSolution, s: float) -> float:
    """F_sigma(s) = exp(-int_s^inf (x - s) int u^2 d sigma dx), carried as ln F."""
    return math.exp(log_f_sigma_from_u(sol, s))


def log_f_sigma_from_u(sol: IdpiiSolution, s: float) -> float:
    if s < sol.certified_s_min:
        raise RangeError(f"s={s} is below the certified range", sol.certified_s_min)
    if s >= sol.start_point:
        _, q1 = _tail_q(s + sol.measure.t_nodes)
        return -float(sol.measure.t_weights @ q1)
    return float(sol.state(s)[-2])


# --------------------------------------------------------------------------
# Determinant route


def sigma_right_end(measure: MeasureGrid, cutoff: float = 1e-18) -> float:
    """Point beyond which the kernel diagonal sum_k w_k K_Ai(x+t_k, x+t_k)
    stays below ``cutoff``; independent of s so rules vary smoothly in s."""
    x = 0.0
    while x < 200 - float(np.max(measure.t_nodes)):
        q = _diag(measure, np.array([x]))[0]
        if q < cutoff:
            return x
        x += 0.5
    raise ParameterError("kernel diagonal does not decay within the Airy range")


def _diag(measure, x):
    arg = np.clip(x[None, :] + measure.t_nodes[:, None], -200, 200)
    ai, aip = specfun.airy_ai(arg)
    return measure.t_weights @ (aip * aip - arg * ai * ai)


def sigma_rule(measure: MeasureGrid, s: float, n: int = 80, right: float | None = None):
    """Gauss-Legendre panels of about 8 units on (s, right)."""
    b = sigma_right_end(measure) if right is None else right
    if not b > s:
        return None
    panels = max(1, int(math.ceil((b - s) / 8.0)))
    return composite_rule(max(2, n // panels), Interval(s, b), panels=panels)


def det_sigma(measure: MeasureGrid, s: float, n: int = 80, right: float | None = None
              ) -> DetResult:
    if s + float(np.min(measure.t_nodes)) < -specfun.X_MAX:
        raise ParameterError("s + t_min is below the Airy evaluation range")
    rule = sigma_rule(measure, s, n, right)
    if rule is None:
        return DetResult(1.0, 0, 0.0, 0.0, 1.0)
    return det_nystrom(kernel_finite_temp_airy(measure, s), rule)


def f_sigma_from_det(measure: MeasureGrid, s: float, n: int = 80) -> float:
    return float(np.real(det_sigma(measure, s, n).value))


def second_derivative_identity(measure: MeasureGrid, s: float, sol: IdpiiSolution | None = None,
                               h: float = 1e-3, n: int = 80) -> tuple[float, float]:
    """(lhs, rhs) with lhs = (ln F_sigma)'' by Richardson-extrapolated central
    differences of the determinant and rhs = -int u^2 d sigma."""
    if sol is None:
        sol = solve_idpii(measure, s_end=min(s - 1.0, -1.0))
    if s < sol.certified_s_min:
        raise RangeError(f"s={s} is below the certified range", sol.certified_s_min)
    right = sigma_right_end(measure)
    L = {k: math.log(f_sigma_from_det_fixed(measure, s + k * h, n, right))
         for k in (-2, -1, 0, 1, 2)}
    d1 = (L[1] - 2 * L[0] + L[-1]) / h ** 2
    d2 = (L[2] - 2 * L[0] + L[-2]) / (2 * h) ** 2
    lhs = (4 * d1 - d2) / 3
    rhs = -sol.coupling(s) if s <= sol.start_point else -float(
        measure.t_weights @ specfun.airy_ai(s + measure.t_nodes)[0] ** 2)
    return lhs, rhs


def f_sigma_from_det_fixed(measure: MeasureGrid, s: float, n: int, right: float) -> float:
    return float(np.real(det_sigma(measure, s, n, right).value))
