"""Ablowitz-Segur solutions of u'' = s u + 2 u^3 and the Tracy-Widom law.

The boundary value problem u ~ sqrt(gamma) Ai(s) as s -> +inf is solved by
backward integration from s0 with an embedded 8(5,3) Runge-Kutta pair.
Alongside (u, u') the state carries L = ln F and L', where

    F(s) = exp(-int_s^inf (y - s) u(y)^2 dy),   L'' = -u^2,

so the distribution function is integrated to ODE accuracy.  For gamma > 1
the solution has real poles; they are stepped around on a small complex
semicircle (the ODE is analytic, u is meromorphic), which also locates them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from . import specfun
from .errors import NumericError, ParameterError, RangeError
from .fredholm import DetResult, airy_rule, det_nystrom, kernel_airy
from .quadrature import composite_rule, Interval

# |u| at which a pole is stepped around.  The free Laurent coefficient h
# enters u at relative size rho^4, so the radius must not be too small.
POLE_TRIGGER = 20.0
S0_DEFAULT = 8.0
# Tightest relative tolerance the integrator honours; the check run uses 16x
# this, i.e. steps about 1.4 times longer for an 8th-order pair.
RTOL_FINE = 2.5e-14
RTOL_CHECK = 16 * RTOL_FINE
POLE_GUARD = 0.1


@dataclass(frozen=True)
class ASParameters:
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ParameterError("gamma must be a finite non-negative number")

    @property
    def regime(self) -> str:
        if self.gamma < 1:
            return "sub"
        return "critical" if self.gamma == 1 else "super"

    @property
    def beta(self) -> float:
        """(1/2pi) ln(1 - gamma), sub-critical only."""
        if self.gamma >= 1:
            raise ParameterError("beta is defined for gamma < 1")
        return math.log1p(-self.gamma) / (2 * math.pi) if self.gamma > 0 else 0.0

    @property
    def beta_hat(self) -> float:
        """(1/2pi) ln(gamma - 1), super-critical only."""
        if self.gamma <= 1:
            raise ParameterError("beta_hat is defined for gamma > 1")
        return math.log(self.gamma - 1) / (2 * math.pi)


def phase_sub(beta: float) -> float:
    """pi/4 - arg Gamma(i beta)."""
    return math.pi / 4 - specfun.arg_gamma(1j * beta)


def phase_super(beta_hat: float) -> float:
    """pi/2 - arg Gamma(1/2 + i beta_hat)."""
    return math.pi / 2 - specfun.arg_gamma(0.5 + 1j * beta_hat)


@dataclass(frozen=True)
class ConnectionFit:
    beta_fit: float
    phase_fit: float
    beta_theory: float
    phase_theory: float
    fit_window: tuple[float, float]
    residual: float
    n_samples: int = 0
    sensitivity: float = 0.0

    @property
    def phase_error(self) -> float:
        """Phase misfit reduced to (-pi, pi]."""
        return _wrap(self.phase_fit - self.phase_theory)


def _wrap(a: float, period: float = 2 * math.pi) -> float:
    return (a + period / 2) % period - period / 2


def airy_tail_moments(b):
    """(int_b^inf Ai^2, int_b^inf (y - b) Ai(y)^2 dy) in closed form.

    Uses d/dy (Ai'^2 - y Ai^2) = -Ai^2 and
    d/dy [(y^2 Ai^2 - y Ai'^2 + Ai Ai')/3] = y Ai^2.
    """
    ai, aip = specfun.airy_ai(b)
    q0 = aip * aip - b * ai * ai
    q1 = (2.0 / 3.0) * b * b * ai * ai - (2.0 / 3.0) * b * aip * aip - ai * aip / 3.0
    return q0, q1


def _rhs(s, y):
    u, up = y[0], y[1]
    return np.array([up, s * u + 2 * u ** 3, y[3], -u * u])


@dataclass
class _Segment:
    s_hi: float
    s_lo: float
    sol: object


@dataclass(frozen=True, eq=False)
class PiiTrajectory:
    s_grid: np.ndarray
    u: np.ndarray
    u_prime: np.ndarray
    gamma: float
    start_point: float
    tol: float
    pole_locations: tuple[float, ...] = ()
    certified_s_min: float = -math.inf
    log_f: np.ndarray = field(default=None, repr=False)
    segments: tuple = field(default=(), repr=False)
    detour_radius: float = 0.0
    max_detour_imag: float = 0.0
    check_diff: np.ndarray = field(default=None, repr=False)

    def state(self, s: float) -> np.ndarray:
        """(u, u', ln F, (ln F)') at s by the stored dense output."""
        if s > self.start_point:
            raise RangeError("point lies right of the start point", self.start_point)
        for seg in self.segments:
            if seg.s_lo - 1e-12 <= s <= seg.s_hi + 1e-12:
                return np.asarray(seg.sol(s), dtype=float)
        raise RangeError(f"s={s} is outside the integrated range or inside a pole detour",
                         self.certified_s_min)

    def u_at(self, s: float) -> float:
        return float(self.state(s)[0])


def _initial_state(gamma: float, s0: float) -> np.ndarray:
    ai, aip = specfun.airy_ai(s0)
    g = math.sqrt(gamma)
    # Next term of the expansion: delta'' - s delta = 2 gamma^{3/2} Ai^3
    # has the decaying particular solution gamma^{3/2} Ai^3 / (4 s) to leading order.
    c = gamma * g / (4.0 * s0)
    u0 = g * ai + c * ai ** 3
    up0 = g * aip + c * (3 * ai * ai * aip - ai ** 3 / s0)
    q0, q1 = airy_tail_moments(s0)
    return np.array([u0, up0, -gamma * q1, gamma * q0])


def _integrate(gamma: float, s0: float, s_end: float, rtol: float, atol: float,
               detect_poles: bool):
    """Backward integration with complex detours around poles."""
    y = _initial_state(gamma, s0)
    s = s0
    segments: list[_Segment] = []
    poles: list[float] = []
    radius = 0.0
    max_imag = 0.0

    def blowup(t, yy):
        return abs(yy[0]) - POLE_TRIGGER

    blowup.terminal = True
    blowup.direction = 1
    while s > s_end:
        res = solve_ivp(_rhs, (s, s_end), y, method="DOP853", rtol=rtol, atol=atol,
                        dense_output=True, events=blowup if detect_poles else None)
        if res.status == -1:
            raise NumericError(f"integration failed near s={res.t[-1]:.6g}: {res.message}")
        segments.append(_Segment(s, float(res.t[-1]), res.sol))
        s = float(res.t[-1])
        y = res.y[:, -1]
        if res.status != 1:
            break
        p1 = _laurent_pole(s, y[0], y[1], 1.0)
        rho = s - p1
        if not rho > 0:
            raise NumericError(f"pole estimate inconsistent near s={s:.6g}")
        radius = max(radius, rho)
        yc = _detour(y, p1, rho, rtol, atol)
        max_imag = max(max_imag, float(np.max(np.abs(yc[:2].imag) / (1 + np.abs(yc[:2])))))
        y = yc.real.copy()
        s = p1 - rho
        poles.append(0.5 * (p1 + _laurent_pole(s, y[0], y[1], -1.0)))
    return segments, poles, radius, max_imag


def _laurent_pole(x: float, u: float, up: float, side: float) -> float:
    """Pole p nearest x from (u, u') at x, using

        u = e/t - e p t/6 - e t^2/4 + h t^3 + e p t^4/72 + O(t^5),  t = x - p,

    with e = +-1; ``side`` is the sign of t.  h is eliminated and the
    remaining equation in p is solved by secant steps."""
    e = math.copysign(1.0, u * side)

    def resid(p):
        t = x - p
        h = (u - e / t + e * p * t / 6 + e * t * t / 4 - e * p * t ** 4 / 72) / t ** 3
        return -e / t ** 2 - e * p / 6 - e * t / 2 + 3 * h * t * t + e * p * t ** 3 / 18 - up

    p = x + u / up
    for _ in range(30):
        d = 1e-7 * max(1.0, abs(x - p))
        f0 = resid(p)
        step = f0 * d / (resid(p + d) - f0)
        p -= step
        if abs(step) < 1e-14 * max(1.0, abs(p)):
            break
    return p


def _detour(y: np.ndarray, p: float, rho: float, rtol: float, atol: float) -> np.ndarray:
    """Carry (u, u') over the upper semicircle s = p + rho e^{i tau}, tau: 0 -> pi."""

    def f(tau, yy):
        s = p + rho * cmath.exp(1j * tau)
        ds = 1j * rho * cmath.exp(1j * tau)
        u, up = yy[0], yy[1]
        return np.array([up * ds, (s * u + 2 * u ** 3) * ds, 0.0, 0.0], dtype=complex)

    res = solve_ivp(f, (0.0, math.pi), y.astype(complex), method="DOP853",
                    rtol=rtol, atol=atol * 1e-3)
    if res.status != 0:
        raise NumericError(f"pole detour failed at s={p:.6g}")
    return res.y[:, -1]


def _grid_values(segments, grid):
    u = np.full(grid.shape, np.nan)
    up = np.full(grid.shape, np.nan)
    lf = np.full(grid.shape, np.nan)
    for seg in segments:
        m = (grid <= seg.s_hi + 1e-12) & (grid >= seg.s_lo - 1e-12)
        if m.any():
            vals = seg.sol(grid[m])
            u[m], up[m], lf[m] = vals[0], vals[1], vals[2]
    return u, up, lf


def solve_as(params: ASParameters | float, s0: float = S0_DEFAULT, s_end: float = -8.0,
             tol: float = 1e-8, step: float = 0.01) -> PiiTrajectory:
    """Integrate u'' = s u + 2u^3 from s0 down to s_end with u ~ sqrt(gamma) Ai.

    ``tol`` is the accuracy asked of the returned values.  The reported run
    uses rtol = RTOL_FINE; a check run at RTOL_CHECK = 16x that tolerance is
    compared against it, and the trajectory is certified down
    to the first grid point where the two differ by more than
    10*tol*max(1, |u|).  At gamma = 1 errors grow roughly tenfold per unit
    of -s, so the certified range shrinks as tol tightens.
    """
    if not isinstance(params, ASParameters):
        params = ASParameters(float(params))
    if not s0 >= 6:
        raise ParameterError("s0 must be at least 6")
    if not s_end < s0:
        raise ParameterError("s_end must lie left of s0")
    if not 1e-12 <= tol <= 1e-6:
        raise ParameterError("tol must lie in [1e-12, 1e-6]")
    gamma = params.gamma
    n = int(round((s0 - s_end) / step))
    grid = np.linspace(s0, s_end, n + 1)
    if gamma == 0:
        z = np.zeros_like(grid)
        return PiiTrajectory(grid, z, z.copy(), 0.0, s0, tol, (), s_end, z.copy(),
                             (_Segment(s0, s_end, lambda s: np.zeros((4,) + np.shape(s))),),
                             check_diff=z.copy())
    super_ = gamma > 1
    segs, poles, radius, max_imag = _integrate(gamma, s0, s_end, RTOL_FINE,
                                               RTOL_FINE * 1e-10, super_)
    segs2, poles2, _, _ = _integrate(gamma, s0, s_end, RTOL_CHECK, RTOL_CHECK * 1e-10, super_)
    if poles:
        keep = np.ones(grid.shape, dtype=bool)
        for p in poles:
            keep &= np.abs(grid - p) > 1.5 * radius
        grid = grid[keep]
    u, up, lf = _grid_values(segs, grid)
    u2, _, _ = _grid_values(segs2, grid)
    # Near a pole u is ill-conditioned in the pole position, so points within
    # POLE_GUARD of one are judged by the pole locations instead.
    scale = np.maximum(1.0, np.abs(u))
    near = np.zeros(grid.shape, dtype=bool)
    for p in poles:
        near |= np.abs(grid - p) < POLE_GUARD
    bad = ~(np.abs(u - u2) <= 10 * tol * scale) & ~near
    k = next((i for i, (a, b) in enumerate(zip(poles, poles2))
              if abs(a - b) > 10 * tol * max(1.0, abs(a))), min(len(poles), len(poles2)))
    if k < len(poles):
        bad |= grid <= poles[k] + POLE_GUARD
    if bad.any():
        first = int(np.argmax(bad))
        cert = float(grid[first - 1]) if first > 0 else s0
    else:
        cert = float(grid[-1])
    return PiiTrajectory(grid, u, up, gamma, s0, tol, tuple(poles), cert, lf, tuple(segs),
                         radius, max_imag, np.abs(u - u2))


def ode_residual(traj: PiiTrajectory, h: float = 0.002, margin: float = 0.5) -> float:
    """Sup of |u'' - s u - 2u^3| by 5-point differences of the dense output,
    over grid points at least ``margin`` from any pole."""
    s = traj.s_grid[(traj.s_grid < traj.start_point - 2 * h)
                    & (traj.s_grid > traj.s_grid[-1] + 2 * h)]
    for p in traj.pole_locations:
        s = s[np.abs(s - p) > margin + 2 * h]
    s = s[s >= traj.certified_s_min]
    worst = 0.0
    for si in s:
        try:
            v = [traj.u_at(si + k * h) for k in (-2, -1, 0, 1, 2)]
        except RangeError:
            continue
        d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
        worst = max(worst, abs(d2 - si * v[2] - 2 * v[2] ** 3))
    return worst


# --------------------------------------------------------------------------
# Connection formulas


def _trim_window(window, oscillations: float = 2.0):
    lo, hi = window
    if not lo < hi < 0:
        raise ParameterError("window must be an increasing pair of negative numbers")
    th = lambda x: (2.0 / 3.0) * (-x) ** 1.5
    span = th(lo) - th(hi)
    if span / (2 * math.pi) < 8:
        raise ParameterError("window holds fewer than 8 oscillations")
    cut = oscillations * 2 * math.pi
    # Move each end inward by the given number of oscillations.
    new_lo = -((th(lo) - cut) * 1.5) ** (2.0 / 3.0)
    new_hi = -((th(hi) + cut) * 1.5) ** (2.0 / 3.0)
    return new_lo, new_hi


def _model_sub(x, beta, phi):
    ax = -x
    amp = math.sqrt(max(-2 * beta, 0.0))
    return ax ** -0.25 * amp * np.cos((2.0 / 3.0) * ax ** 1.5
                                      + beta * np.log(8 * ax ** 1.5) + phi)


def fit_connection_sub(traj: PiiTrajectory, window=(-60.0, -30.0),
                       n_samples: int = 4000) -> ConnectionFit:
    """Least-squares fit of the oscillatory asymptotics for gamma < 1."""
    if not traj.gamma < 1:
        raise ParameterError("sub-critical fit needs gamma < 1")
    if traj.gamma == 0:
        raise ParameterError("zero amplitude: gamma = 0 gives the trivial solution")
    lo, hi = _trim_window(window)
    if lo < traj.certified_s_min:
        raise RangeError("fit window extends below the certified range", traj.certified_s_min)
    p = ASParameters(traj.gamma)
    b_th, ph_th = p.beta, phase_sub(p.beta)
    x = np.linspace(lo, hi, n_samples)
    u = np.array([traj.u_at(xi) for xi in x])

    def resid(v):
        return (_model_sub(x, v[0], v[1]) - u) * (-x) ** 0.25

    sol = least_squares(resid, [b_th, ph_th], x_scale=[0.01, 0.1], xtol=1e-14, ftol=1e-14)
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    # Sensitivity: refit on the left and right halves of the window.
    mid = len(x) // 2
    halves = []
    for sl in (slice(0, mid), slice(mid, None)):
        xs, us = x[sl], u[sl]
        r = least_squares(lambda v: (_model_sub(xs, v[0], v[1]) - us) * (-xs) ** 0.25,
                          sol.x, x_scale=[0.01, 0.1], xtol=1e-14, ftol=1e-14)
        halves.append(r.x[0])
    return ConnectionFit(float(sol.x[0]), float(_wrap(sol.x[1])), b_th, float(_wrap(ph_th)),
                         (lo, hi), rms, n_samples, float(abs(halves[0] - halves[1])))


def fit_connection_super(traj: PiiTrajectory, window=(-40.0, -20.0)) -> ConnectionFit:
    """Fit beta_hat and phi to pole positions, the zeros of
    sin((2/3)(-x)^{3/2} + beta_hat ln(8(-x)^{3/2}) + phi)."""
    if not traj.gamma > 1:
        raise ParameterError("super-critical fit needs gamma > 1")
    lo, hi = _trim_window(window)
    if lo < traj.certified_s_min:
        raise RangeError("fit window extends below the certified range", traj.certified_s_min)
    poles = np.array([q for q in traj.pole_locations if lo <= q <= hi])
    if len(poles) < 4:
        raise ParameterError(f"only {len(poles)} poles in the fit window; need 4")
    p = ASParameters(traj.gamma)
    bh_th, ph_th = p.beta_hat, phase_super(p.beta_hat)
    ax = -poles
    lead = (2.0 / 3.0) * ax ** 1.5
    lg = np.log(8 * ax ** 1.5)
    k = np.round((lead + bh_th * lg + ph_th) / math.pi)
    A = np.column_stack([lg, np.ones_like(lg)])
    rhs = k * math.pi - lead
    (bh, ph), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    res = A @ np.array([bh, ph]) - rhs
    # Poles fix phi modulo pi; the sign of u between poles fixes the rest.
    mids = 0.5 * (poles[1:] + poles[:-1])
    um = np.array([traj.u_at(m) for m in mids])
    th_m = (2.0 / 3.0) * (-mids) ** 1.5 + bh * np.log(8 * (-mids) ** 1.5) + ph
    if np.mean(np.sign(um) == np.sign(np.sin(th_m))) < 0.5:
        ph += math.pi
    half = len(poles) // 2
    sens = []
    for sl in (slice(0, half), slice(half, None)):
        (b_part, _), *_ = np.linalg.lstsq(A[sl], rhs[sl], rcond=None)
        sens.append(b_part)
    return ConnectionFit(float(bh), float(_wrap(ph)), bh_th, float(_wrap(ph_th)), (lo, hi),
                         float(np.sqrt(np.mean(res ** 2))), len(poles),
                         float(abs(sens[0] - sens[1])))


def count_poles(traj: PiiTrajectory, lo: float, hi: float) -> int:
    return sum(1 for q in traj.pole_locations if lo <= q <= hi)


# --------------------------------------------------------------------------
# Tracy-Widom distribution


def tw_cdf_from_pii(traj: PiiTrajectory, s: float) -> float:
    """F(s) = exp(-int_s^inf (y - s) u^2 dy) along the gamma = 1 trajectory."""
    if traj.gamma != 1:
        raise ParameterError("Tracy-Widom route needs the gamma = 1 trajectory")
    if s < traj.certified_s_min:
        raise RangeError(f"s={s} is below the certified range", traj.certified_s_min)
    if s >= traj.start_point:
        return math.exp(-airy_tail_moments(s)[1])
    return math.exp(traj.state(s)[2])


def _det_nodes(s: float) -> int:
    return 80 + 8 * int(math.ceil(max(0.0, -s)))


def tw_det(s: float, n: int | None = None) -> DetResult:
    """det(1 - K_Ai) on (s, inf) with its node-doubling error estimate."""
    if not s >= -10:
        raise ParameterError("tw_cdf_from_det needs s >= -10")
    n = _det_nodes(s) if n is None else n
    return det_nystrom(kernel_airy(s), airy_rule(s, n))


def tw_cdf_from_det(s: float, n: int | None = None) -> float:
    return float(np.real(tw_det(s, n).value))


def u_from_det(s: float, h: float = 1e-3) -> float:
    """u(s) = sqrt(-(ln F)'') by Richardson-extrapolated central differences."""
    if not -8 <= s <= 6:
        raise ParameterError("u_from_det needs s in [-8, 6]")
    n = _det_nodes(s - 2 * h)
    L = {k: math.log(tw_cdf_from_det(s + k * h, n)) for k in (-2, -1, 0, 1, 2)}
    d1 = (L[1] - 2 * L[0] + L[-1]) / h ** 2
    d2 = (L[2] - 2 * L[0] + L[-2]) / (2 * h) ** 2
    d = (4 * d1 - d2) / 3
    if d > 1e-8:
        raise NumericError(f"second difference {d:.3e} has the wrong sign beyond FD noise")
    return math.sqrt(max(0.0, -d))


def tw_moments(route: str = "det", traj: PiiTrajectory | None = None, a: float = -10.0,
               b: float = 8.0, n: int = 96) -> tuple[float, float]:
    """Mean and variance of the distribution F on [a, b] by integration by parts:
    E X = b - int F, E X^2 = b^2 - 2 int s F (tails beyond [a, b] negligible)."""
    rule = composite_rule(n // 4, Interval(a, b), panels=4)
    if route == "det":
        F = np.array([tw_cdf_from_det(si) for si in rule.nodes])
    elif route == "pii":
        if traj is None:
            traj = solve_as(1.0, s_end=max(a, -9.0))
        lo = traj.certified_s_min
        F = np.array([tw_cdf_from_pii(traj, si) if si >= lo else 0.0 for si in rule.nodes])
    else:
        raise ParameterError(f"unknown route {route!r}")
    m1 = b - rule.weights @ F
    m2 = b * b - 2 * rule.weights @ (rule.nodes * F)
    return float(m1), float(m2 - m1 * m1)
