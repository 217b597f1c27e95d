"""KPZ crossover distribution by Hankel-contour integration.

    F_T(s) = (1/2 pi i) int_Gamma e^{-z} det(1 - K_{sigma_{T,z}})_{L^2(s/kappa, inf)} dz / z

with kappa = (T/2)^{1/3}, sigma_{T,z}(t) = z / (z - e^{-kappa t}) and
K_sigma(x, y) = int sigma(t) Ai(x + t) Ai(y + t) dt.  Writing K_sigma = A^T S A
with (A f)(t) = int_a^inf Ai(x + t) f(x) dx gives the dual form

    det(1 - K_sigma)_{L^2(a, inf)} = det(1 - sigma(u - a) K_Ai(u, u'))_{L^2(R)},

because A A^T is the Airy kernel shifted by a.  The right side is used: its
kernel does not depend on z, so one Airy matrix serves every contour node
and every s, while the x-space kernel degenerates towards a multiplication
operator as T -> 0.

Gamma comes in from infinity along arg z = pi/4, circles the origin
counterclockwise at radius r0 and leaves along arg z = -pi/4.  The rays keep
the poles of sigma (t = (2 pi i k - log z)/kappa) at least pi/(4 kappa) from
the real t axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import ndtr

from . import specfun
from .errors import ConvergenceError, NumericError, ParameterError
from .quadrature import Interval, QuadratureRule, composite_rule, gauss_legendre

ARM_ANGLE = math.pi / 4
# |e^{-z}| at the truncated ends of the rays.
ARM_CUTOFF = 1e-18
U_RIGHT = 14.0
PANEL_NODES = 16
# Largest panel width for the oscillatory Airy kernel: h * sqrt(|u|) <= AIRY_PHASE.
AIRY_PHASE = 8.0
H_MAX = 3.0
T_RANGE = (1e-3, 1e4)


@dataclass(frozen=True)
class CrossoverParams:
    T: float
    s: float

    def __post_init__(self):
        if not T_RANGE[0] <= self.T <= T_RANGE[1]:
            raise ParameterError(f"T must lie in [{T_RANGE[0]:g}, {T_RANGE[1]:g}]")
        if not math.isfinite(self.s):
            raise ParameterError("s must be finite")

    @property
    def kappa(self) -> float:
        return kappa_T(self.T)


def kappa_T(T: float) -> float:
    return (T / 2.0) ** (1.0 / 3.0)


def sigma_factor(t, params: CrossoverParams | float, z: complex):
    """sigma_{T,z}(t) = z / (z - exp(-kappa t)), evaluated without overflow.

    ``params`` may also be kappa itself.
    """
    kappa = params.kappa if isinstance(params, CrossoverParams) else float(params)
    t = np.asarray(t, dtype=float)
    if z == 0:
        raise ParameterError("z = 0 is not on any Hankel contour")
    w = -kappa * t - np.log(complex(z))  # sigma = 1 / (1 - e^w)
    big = w.real > 0
    ew = np.exp(np.where(big, -w, w))
    gap = np.abs(1.0 - ew)
    if np.any(gap < 1e-12):
        raise NumericError("contour node sits on a pole of sigma_{T,z}")
    out = np.where(big, -ew / (1.0 - ew), 1.0 / (1.0 - ew))
    return out if out.ndim else complex(out)


def sigma_factor_dt(t, params: CrossoverParams | float, z: complex):
    """d sigma / dt = -kappa e^w / (1 - e^w)^2 with e^w = e^{-kappa t} / z."""
    kappa = params.kappa if isinstance(params, CrossoverParams) else float(params)
    sig = sigma_factor(t, kappa, z)
    return -kappa * sig * (sig - 1.0)


@dataclass(frozen=True)
class HankelContour:
    inner_radius: float = 0.5
    arm_reach: float | None = None
    n_circle: int = 24
    n_arm: int = 48
    orientation: str = "counterclockwise"

    def __post_init__(self):
        if not self.inner_radius > 0:
            raise ParameterError("inner_radius must be positive")
        if self.n_circle < 4 or self.n_circle % 2 or self.n_arm < 8:
            raise ParameterError("need an even n_circle >= 4 and n_arm >= 8")
        if self.orientation != "counterclockwise":
            raise ParameterError("only the counterclockwise Hankel contour is supported")
        if self.reach <= self.inner_radius:
            raise ParameterError("arm_reach must exceed inner_radius")

    @property
    def reach(self) -> float:
        if self.arm_reach is not None:
            return float(self.arm_reach)
        return -math.log(ARM_CUTOFF) / math.cos(ARM_ANGLE)

    def upper_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and complex weights dz on the upper half: the ray inward,
        then the circle from arg pi/4 to pi."""
        r0, R = self.inner_radius, self.reach
        panels = 4
        per = max(2, self.n_arm // panels)
        breaks = r0 * (R / r0) ** (np.arange(panels + 1) / panels)
        arm = composite_rule(per, Interval(r0, R), breaks=breaks)
        e = complex(math.cos(ARM_ANGLE), math.sin(ARM_ANGLE))
        z_arm = (arm.nodes * e)[::-1]
        w_arm = (-arm.weights * e)[::-1]
        circ = composite_rule(self.n_circle // 2, Interval(ARM_ANGLE, math.pi))
        z_c = r0 * np.exp(1j * circ.nodes)
        w_c = 1j * z_c * circ.weights
        return np.concatenate([z_arm, z_c]), np.concatenate([w_arm, w_c])

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """The full contour; the lower half mirrors the upper one with
        weights -conj(dz) so the orientation stays counterclockwise."""
        z, w = self.upper_nodes()
        return (np.concatenate([z, np.conj(z[::-1])]),
                np.concatenate([w, -np.conj(w[::-1])]))

    def min_distance_to_positive_axis(self) -> float:
        z, _ = self.nodes()
        d = np.where(z.real <= 0, np.abs(z), np.abs(z.imag))
        return float(np.min(d))

    def normalization_defect(self) -> float:
        """|(1/2 pi i) sum e^{-z} dz / z - 1|, the residue at 0 in discrete form."""
        z, w = self.nodes()
        return float(abs(np.sum(np.exp(-z) * w / z) / (2j * math.pi) - 1.0))

    def end_decay(self) -> float:
        return math.exp(-self.reach * math.cos(ARM_ANGLE))


# --------------------------------------------------------------------------
# The u-grid and the shared Airy matrix


def _u_left(a_min: float, kappa: float, tol: float) -> float:
    """Left end where the omitted |sigma| K_Ai(u, u) mass is below tol.

    |sigma(u - a)| <~ |z| e^{kappa (u - a)} and K_Ai(u, u) ~ sqrt(|u|)/pi, and
    on the contour |z| e^{-Re z} <= 1, so the tail is about
    sqrt(|u|) e^{kappa (u - a)} / (pi kappa)."""
    u = a_min - 10.0
    for _ in range(50):
        need = math.log(max(1.0, math.sqrt(abs(u))) / (math.pi * kappa * tol)) / kappa
        u_new = a_min - max(need, 3.0)
        if abs(u_new - u) < 1e-6:
            break
        u = u_new
    return u


def crossover_rule(a_values, kappa: float, contour: HankelContour, tol: float = 1e-9,
                   min_nodes: int = 40) -> QuadratureRule:
    """Composite Gauss-Legendre rule on [u_min, 14] shared by all a and z.

    Panel widths obey h sqrt(|u|) <= AIRY_PHASE (kernel oscillation) and
    h <= 2 max(d, distance to the band of Re poles of sigma), with
    d = pi / (4 kappa) the smallest imaginary distance of those poles.
    """
    a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
    lo = _u_left(float(np.min(a_values)), kappa, tol)
    if lo < -specfun.X_WIDE:
        raise ParameterError("kernel support exceeds the Airy range; increase T")
    hi = max(U_RIGHT, float(np.max(a_values)) + 1.0)
    d = ARM_ANGLE / kappa
    band_lo = float(np.min(a_values)) - math.log(contour.reach) / kappa
    band_hi = float(np.max(a_values)) - math.log(contour.inner_radius) / kappa

    def width(u):
        h_ai = AIRY_PHASE / math.sqrt(max(1.0, abs(u)))
        dist = max(0.0, band_lo - u, u - band_hi)
        return min(H_MAX, h_ai, 2.0 * max(d, dist))

    breaks = [lo]
    u = lo
    while u < hi:
        h = width(u)
        h = min(h, width(min(u + h, hi)))
        u = min(u + h, hi)
        if hi - u < 0.1 * h:
            u = hi
        breaks.append(u)
    per = PANEL_NODES
    if (len(breaks) - 1) * per < min_nodes:
        return composite_rule(max(2, -(-min_nodes // (len(breaks) - 1))), Interval(lo, hi),
                              breaks=breaks)
    return composite_rule(per, Interval(lo, hi), breaks=breaks)


def airy_matrix(rule: QuadratureRule) -> np.ndarray:
    """W^{1/2} K_Ai W^{1/2} on the rule nodes."""
    u = rule.nodes
    ai, aip = specfun.airy_ai_wide(u)
    num = ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]
    den = u[:, None] - u[None, :]
    np.fill_diagonal(den, 1.0)
    K = num / den
    np.fill_diagonal(K, aip * aip - u * ai * ai)
    sw = np.sqrt(rule.weights)
    return sw[:, None] * K * sw[None, :]


def _det(M: np.ndarray, sig: np.ndarray) -> complex:
    A = -sig[:, None] * M
    A[np.diag_indices_from(A)] += 1.0
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    d = np.diag(lu)
    swaps = int(np.sum(piv != np.arange(len(piv))))
    val = np.prod(d / np.abs(d)) * math.exp(float(np.sum(np.log(np.abs(d)))))
    return -val if swaps % 2 else val


@dataclass(frozen=True)
class CrossoverResult:
    T: float
    s: float
    value: float
    imag: float
    n_u: int
    n_z: int
    u_range: tuple[float, float]


def crossover_cdf_many(T: float, s_values, contour: HankelContour | None = None,
                       det_nodes: int = 40, tol: float = 1e-9, kernel_off: bool = False,
                       symmetric: bool = True) -> list[CrossoverResult]:
    """F_T at several s on one shared u-grid.

    With ``symmetric`` only the upper half of the contour is computed and
    det(conj z) = conj det(z) supplies the rest; otherwise every node is
    evaluated and the imaginary part of the sum is a genuine diagnostic.
    """
    if det_nodes < 40:
        raise ParameterError("det_nodes must be at least 40")
    s_values = [float(s) for s in np.atleast_1d(s_values)]
    for s in s_values:
        CrossoverParams(T, s)
    contour = contour or HankelContour()
    kappa = kappa_T(T)
    a = np.array(s_values) / kappa
    if kernel_off:
        rule, M = None, None
    else:
        rule = crossover_rule(a, kappa, contour, tol, det_nodes)
        M = airy_matrix(rule)
    z, w = contour.upper_nodes() if symmetric else contour.nodes()
    out = []
    for s, ai in zip(s_values, a):
        acc = 0.0 + 0.0j
        for zj, wj in zip(z, w):
            if M is None:
                dj = 1.0
            else:
                dj = _det(M, sigma_factor(rule.nodes - ai, kappa, zj))
            acc += np.exp(-zj) * dj * wj / zj
        if symmetric:
            val, imag = acc.imag / math.pi, 0.0
        else:
            F = acc / (2j * math.pi)
            val, imag = F.real, F.imag
            if abs(imag) > 1e-4:
                raise ConvergenceError(
                    f"crossover integral has imaginary part {imag:.3e} at T={T:g}, s={s:g}; "
                    "refine the contour or the u-grid")
        out.append(CrossoverResult(T, s, float(val), float(imag),
                                   0 if rule is None else rule.n, len(z),
                                   (0.0, 0.0) if rule is None else
                                   (float(rule.breaks[0]), float(rule.breaks[-1]))))
    return out


def crossover_cdf(params: CrossoverParams, contour: HankelContour | None = None,
                  det_nodes: int = 40, **kw) -> float:
    return crossover_cdf_many(params.T, [params.s], contour, det_nodes, **kw)[0].value


# --------------------------------------------------------------------------
# Limits


def gaussian_scaling(T: float, x):
    """s = sigma x - ln sqrt(2 pi T), sigma = 2^{-1/2} (pi T)^{1/4}.

    The logarithm is the centring of ln Z and sits outside the sigma factor.
    F_T(s) -> Phi(x) as T -> 0, but only like sigma: to leading order
    F_T(s) ~ Phi(x + sigma/2), the shift coming from E[Z] being the heat
    kernel.
    """
    return (2 ** -0.5 * (math.pi * T) ** 0.25 * np.asarray(x, dtype=float)
            - math.log(math.sqrt(2 * math.pi * T)))


def tw_distance(T: float, s_grid=(-2, -1, 0, 1, 2), **kw) -> float:
    """max |F_T(kappa s) - F_TW(s)| over s_grid."""
    from .painleve2 import tw_cdf_from_det
    kappa = kappa_T(T)
    res = crossover_cdf_many(T, [kappa * s for s in s_grid], **kw)
    return max(abs(r.value - tw_cdf_from_det(s)) for r, s in zip(res, s_grid))


def gaussian_distance(T: float, x_grid=(-1, 0, 1), **kw) -> float:
    """max |F_T(gaussian_scaling(T, x)) - Phi(x)| over x_grid."""
    res = crossover_cdf_many(T, gaussian_scaling(T, x_grid), **kw)
    return max(abs(r.value - float(ndtr(x))) for r, x in zip(res, x_grid))


@dataclass(frozen=True)
class LimitRow:
    T: float
    distance: float
    flagged: bool


def limit_scan(T_list, grid=None, limit: str = "tw", **kw) -> list[LimitRow]:
    """Distances to a limit law along T_list.  Rows are flagged when the
    distance fails to decrease (by more than 10%) towards the limit."""
    if limit not in ("tw", "gaussian"):
        raise ParameterError("limit must be 'tw' or 'gaussian'")
    fn = tw_distance if limit == "tw" else gaussian_distance
    T_list = [float(T) for T in T_list]
    dists = [fn(T, grid, **kw) if grid is not None else fn(T, **kw) for T in T_list]
    # Order by approach to the limit: increasing T for TW, decreasing for Gaussian.
    order = sorted(range(len(T_list)), key=lambda i: T_list[i], reverse=(limit == "gaussian"))
    flags = [False] * len(T_list)
    for prev, cur in zip(order, order[1:]):
        if dists[cur] > 1.1 * dists[prev]:
            flags[cur] = True
    return [LimitRow(T, d, f) for T, d, f in zip(T_list, dists, flags)]
