"""Airy function Ai, Ai' on the real line and the complex log-gamma function.

Ai is evaluated piecewise:

* ``taylor``     -7.5 <= x <= 2: the two Maclaurin series in x^3, summed in
  extended precision because the series cancel for negative x;
* ``integral``   2 < x < 7.5: Ai = sqrt(x/3) K_{1/3}(zeta) / pi with
  K_nu(zeta) = int_0^inf exp(-zeta cosh t) cosh(nu t) dt by the trapezoid rule
  (double-exponential decay, no cancellation);
* ``asymptotic`` |x| >= 7.5: the full Poincare expansions, oscillatory form
  for negative x.

Here zeta = (2/3)|x|^{3/2}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

X_SWITCH = 7.5
X_TAYLOR_POS = 2.0
X_MAX = 200.0
# Extended range for callers whose Airy arguments come from long grids
# (the small-T crossover kernel); the asymptotic branches only improve there.
X_WIDE = 2000.0

_LD = np.longdouble
# Ai(0) and -Ai'(0) to 30 digits.
_C1 = _LD("0.355028053887817239260063186004")
_C2 = _LD("0.258819403792806798405183560189")
_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class AiryValue:
    x: float
    ai: float
    ai_prime: float
    method_tag: str


def _method(x: np.ndarray) -> np.ndarray:
    tag = np.full(x.shape, "taylor", dtype=object)
    tag[(x > X_TAYLOR_POS) & (x < X_SWITCH)] = "integral"
    tag[np.abs(x) >= X_SWITCH] = "asymptotic"
    return tag


def _airy_taylor(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    xl = x.astype(_LD)
    x3 = xl ** 3
    f = np.ones_like(xl)
    g = xl.copy()
    fp = xl * xl / 2
    gp = np.ones_like(xl)
    tf, tg, tfp, tgp = f.copy(), g.copy(), fp.copy(), gp.copy()
    tiny = _LD(1e-22)
    for k in range(1, 200):
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        tfp = tfp * x3 / ((3 * k) * (3 * k + 2))
        tgp = tgp * x3 / ((3 * k - 2) * (3 * k))
        f += tf
        g += tg
        fp += tfp
        gp += tgp
        if k > 3 and np.all(np.abs(tf) + np.abs(tg) + np.abs(tfp) + np.abs(tgp)
                            <= tiny * (np.abs(f) + np.abs(g) + np.abs(fp) + np.abs(gp))):
            break
    ai = _C1 * f - _C2 * g
    aip = _C1 * fp - _C2 * gp
    return ai.astype(float), aip.astype(float)


_T_STEP = 0.125
_T_NODES = np.arange(0.0, 5.0 + 1e-12, _T_STEP)
_T_TRAP = np.full(_T_NODES.shape, _T_STEP)
_T_TRAP[0] *= 0.5


def _airy_integral(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zeta = (2.0 / 3.0) * x ** 1.5
    # exp(-zeta (cosh t - 1)) keeps the scaled integrand O(1).
    e = np.exp(-zeta[:, None] * (np.cosh(_T_NODES)[None, :] - 1.0))
    k13 = (e * np.cosh(_T_NODES / 3.0)[None, :]) @ _T_TRAP
    k23 = (e * np.cosh(2.0 * _T_NODES / 3.0)[None, :]) @ _T_TRAP
    scale = np.exp(-zeta)
    ai = np.sqrt(x / 3.0) / math.pi * k13 * scale
    aip = -x / (math.pi * math.sqrt(3.0)) * k23 * scale
    return ai, aip


def _uv_coefficients(kmax: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.ones(kmax + 1)
    v = np.ones(kmax + 1)
    for k in range(1, kmax + 1):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _uv_coefficients(60)


def _asym_sum(coef: np.ndarray, inv: np.ndarray, sign_alt: bool, start: int,
              step: int) -> np.ndarray:
    """Sum coef[k] (+-1)^j inv^k over k = start, start+step, ..., stopping at
    the smallest term."""
    total = np.zeros_like(inv)
    prev = np.full(inv.shape, np.inf)
    active = np.ones(inv.shape, dtype=bool)
    for j, k in enumerate(range(start, len(coef), step)):
        term = coef[k] * inv ** k
        if sign_alt and j % 2 == 1:
            term = -term
        mag = np.abs(term)
        active &= mag < prev
        total = total + np.where(active, term, 0.0)
        prev = np.where(active, mag, prev)
        active &= mag > 1e-18 * np.abs(total)
        if not active.any():
            break
    return total


def _airy_asym_pos(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zeta = (2.0 / 3.0) * x ** 1.5
    inv = -1.0 / zeta
    su = _asym_sum(_U, inv, False, 0, 1)
    sv = _asym_sum(_V, inv, False, 0, 1)
    e = np.exp(-zeta)
    q = x ** 0.25
    return e / (2 * _SQRT_PI * q) * su, -q * e / (2 * _SQRT_PI) * sv


def _airy_asym_neg(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ax = -x
    zeta = (2.0 / 3.0) * ax ** 1.5
    inv = 1.0 / zeta
    ue = _asym_sum(_U, inv, True, 0, 2)
    uo = _asym_sum(_U, inv, True, 1, 2)
    ve = _asym_sum(_V, inv, True, 0, 2)
    vo = _asym_sum(_V, inv, True, 1, 2)
    c = np.cos(zeta - math.pi / 4)
    s = np.sin(zeta - math.pi / 4)
    q = ax ** 0.25
    ai = (c * ue + s * uo) / (_SQRT_PI * q)
    aip = q / _SQRT_PI * (s * ve - c * vo)
    return ai, aip


def airy_ai(x):
    """Return (Ai(x), Ai'(x)); scalars in, scalars out; arrays in, arrays out."""
    return _airy(x, X_MAX)


def airy_ai_wide(x):
    """airy_ai on |x| <= X_WIDE; Ai underflows to 0 beyond x ~ 104."""
    return _airy(x, X_WIDE)


def _airy(x, limit: float):
    scalar = np.ndim(x) == 0
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(xa)):
        raise ParameterError("Airy argument must be finite")
    if np.any(np.abs(xa) > limit):
        raise ParameterError(f"Airy argument outside |x| <= {limit:g}")
    ai = np.empty_like(xa)
    aip = np.empty_like(xa)
    m_t = (xa >= -X_SWITCH) & (xa <= X_TAYLOR_POS)
    m_i = (xa > X_TAYLOR_POS) & (xa < X_SWITCH)
    m_p = xa >= X_SWITCH
    m_n = xa < -X_SWITCH
    for mask, fn in ((m_t, _airy_taylor), (m_i, _airy_integral),
                     (m_p, _airy_asym_pos), (m_n, _airy_asym_neg)):
        if mask.any():
            ai[mask], aip[mask] = fn(xa[mask])
    if scalar:
        return float(ai[0]), float(aip[0])
    return ai.reshape(np.shape(x)), aip.reshape(np.shape(x))


def airy_value(x: float) -> AiryValue:
    ai, aip = airy_ai(float(x))
    return AiryValue(float(x), ai, aip, str(_method(np.array([float(x)]))[0]))


def airy_taylor(x):
    """Maclaurin branch on its own (used for seam checks)."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    return _airy_taylor(xa)


def airy_asymptotic(x):
    """Asymptotic branch on its own (used for seam checks)."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = [np.empty_like(xa), np.empty_like(xa)]
    pos = xa > 0
    for mask, fn in ((pos, _airy_asym_pos), (~pos, _airy_asym_neg)):
        if mask.any():
            a, b = fn(xa[mask])
            out[0][mask], out[1][mask] = a, b
    return out[0], out[1]


def airy_integral(x):
    """Bessel-integral branch on its own (x > 0)."""
    return _airy_integral(np.atleast_1d(np.asarray(x, dtype=float)))


# --------------------------------------------------------------------------
# log Gamma

_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _lanczos(z: complex) -> complex:
    zm = z - 1.0
    acc = _LANCZOS_P[0]
    for i, p in enumerate(_LANCZOS_P[1:], start=1):
        acc += p / (zm + i)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma(z) (cut along the negative real axis).

    Lanczos approximation for Re z >= 0.5; for smaller real parts the
    recurrence log Gamma(z) = log Gamma(z+m) - sum log(z+j) carries the
    principal branch across.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParameterError("log_gamma argument must be finite")
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"Gamma has a pole at {z.real:g}")
    if z.real >= 0.5:
        return _lanczos(z)
    m = int(math.ceil(0.5 - z.real))
    acc = _lanczos(z + m)
    for j in range(m):
        acc -= cmath.log(z + j)
    return acc


def arg_gamma(z: complex) -> float:
    """arg Gamma(z) on the branch continuous from the positive real axis."""
    return log_gamma(z).imag
