"""Scalar Wiener-Hopf factorization for the Milne-Schwarzschild equation.

G(w) = (1 - L(w))(1 + 1/w^2), L(w) = arctan(w)/w, is analytic and zero-free
in the strip |Im w| < 1 and G -> 1 at infinity, so

    F(z) = exp[(1/2 pi i) int_R ln G(w) dw / (w - z)]

may be evaluated on any line R + i delta with |delta| < 1 lying on the far
side of z.  Boundary values F_+(x), F_-(x) come from lines below and above
the real axis respectively; no principal value is needed.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.special import exp1

from ..errors import ParameterError
from ..quadrature import HalfLine, Interval, composite_rule, concatenate

SHIFT = 0.5
NEAR_AXIS = 0.25


def _one_minus_L(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    small = np.abs(w) < 0.5
    if np.any(~small):
        wb = w[~small]
        out[~small] = 1.0 - np.arctan(wb) / wb
    if np.any(small):
        w2 = w[small] ** 2
        term = np.ones_like(w2)
        acc = np.zeros_like(w2)
        for k in range(1, 40):
            term = term * w2 if k > 1 else w2
            acc += (-1) ** (k + 1) * term / (2 * k + 1)
        out[small] = acc
    return out


def L_symbol(w) -> np.ndarray:
    """Fourier symbol of K(x) = E(|x|)/2."""
    return 1.0 - _one_minus_L(w)


def G_symbol(w) -> np.ndarray:
    """G(w) = (1 - L(w))(1 + 1/w^2), evaluated without cancellation near 0."""
    w = np.asarray(w, dtype=complex)
    oml = _one_minus_L(w)
    out = np.empty_like(w)
    small = np.abs(w) < 0.5
    # (1 - L)/w^2 = 1/3 - w^2/5 + ... for small w.
    w2 = w[small] ** 2
    q = np.zeros_like(w2)
    term = np.ones_like(w2)
    for k in range(1, 40):
        q += (-1) ** (k + 1) * term / (2 * k + 1)
        term = term * w2
    out[small] = q * (1.0 + w2)
    wb = w[~small]
    out[~small] = oml[~small] * (1.0 + 1.0 / wb ** 2)
    return out


def _geometric_breaks(center: float, reach: float, first: float = 0.25) -> list[float]:
    out, h = [center], first
    while h < reach:
        out += [center - h, center + h]
        h *= 2.0
    return out


@functools.lru_cache(maxsize=64)
def _line_rule(delta: float, center: float = 0.0, U: float = 8.0, n: int = 16):
    """Nodes on R + i delta, graded toward 0 (the branch points of ln G sit
    at +-i) and toward ``center`` (the real part of the evaluation point).
    Beyond |u| = U an algebraic map of scale U takes over."""
    br = _geometric_breaks(0.0, U) + [-U, U]
    if center != 0.0:
        br += _geometric_breaks(center, U)
    br = np.unique(np.clip(np.round(br, 12), -U, U))
    mid = composite_rule(n, Interval(-U, U), breaks=tuple(br))
    tail = composite_rule(n, HalfLine(U, "algebraic", U), panels=8)
    u = np.concatenate([mid.nodes, tail.nodes, -tail.nodes])
    du = np.concatenate([mid.weights, tail.weights, tail.weights])
    w = u + 1j * delta
    G = G_symbol(w)
    if np.any(np.real(G) <= 0) and np.any(np.abs(np.imag(G)[np.real(G) <= 0]) < 1e-3):
        raise ParameterError("ln G is not continuous along the integration line")
    return w, du, np.log(G)


def _log_F(z: complex, delta: float) -> complex:
    center = 0.0 if abs(z.real) <= 0.1 else round(z.real, 6)
    U = 8.0 * 2.0 ** math.ceil(math.log2(max(1.0, 2.0 * abs(z))))
    w, dw, g = _line_rule(delta, center, U)
    return complex(np.sum(dw * g / (w - z)) / (2j * math.pi))


def wiener_hopf(z: complex, side: int | None = None) -> complex:
    """F(z) off the real axis, or its boundary value F_side(z) for real z.

    Points with |Im z| < 0.25 and real points use a line shifted by 0.5
    into the opposite half-plane.
    """
    z = complex(z)
    if z.imag == 0.0:
        if side not in (1, -1):
            raise ParameterError("real z needs side=+1 or side=-1")
        return complex(np.exp(_log_F(z, -SHIFT * side)))
    if side is not None and np.sign(z.imag) != side:
        raise ParameterError("side disagrees with the half-plane of z")
    delta = 0.0 if abs(z.imag) >= NEAR_AXIS else -SHIFT * math.copysign(1.0, z.imag)
    return complex(np.exp(_log_F(z, delta)))


def wiener_hopf_line(z: complex, delta: float) -> complex:
    """F(z) using the explicit line R + i delta; delta must separate z from
    the opposite half-plane (used to cross-check the default choice)."""
    if not abs(delta) < 1.0:
        raise ParameterError("the line must stay inside the strip |Im w| < 1")
    return complex(np.exp(_log_F(complex(z), delta)))


# --------------------------------------------------------------------------
# Milne solution


def _graded_rule(lo: float, hi: float, toward: str, levels: int = 50, n: int = 12):
    """Panels refined geometrically toward one endpoint."""
    span = hi - lo
    cuts = span * 2.0 ** -np.arange(levels + 1)
    if toward == "lo":
        br = np.concatenate([[lo], lo + cuts[::-1]])
    else:
        br = np.concatenate([hi - cuts, [hi]])
    return composite_rule(n, Interval(lo, hi), breaks=tuple(np.unique(br)))


@functools.lru_cache(maxsize=1)
def _bracket_integral() -> float:
    """int_0^inf {1/(1 - L(w)) - 1 - 3/w^2} dw / (1 + w^2)."""
    ra = composite_rule(16, Interval(0.0, 4.0), panels=8)
    rb = composite_rule(16, HalfLine(4.0, "algebraic", 4.0), panels=16)
    r = concatenate([ra, rb])
    w = r.nodes.astype(complex)
    oml = _one_minus_L(w)
    small = np.abs(w) < 0.5
    br = np.empty_like(w)
    # 1/(1-L) - 3/w^2 expanded near 0 to avoid cancellation.
    w2 = w[small] ** 2
    q = np.zeros_like(w2)
    term = np.ones_like(w2)
    for k in range(1, 40):
        q += (-1) ** (k + 1) * term / (2 * k + 1)
        term = term * w2
    br[small] = (1.0 - 3.0 * q) / (w2 * q) - 1.0
    wb = w[~small]
    br[~small] = 1.0 / oml[~small] - 1.0 - 3.0 / wb ** 2
    return float(np.real(np.sum(r.weights * br / (1.0 + w ** 2))))


@functools.lru_cache(maxsize=1)
def _cut_rule():
    """Nodes w on (0, inf) for the branch-cut term, weights carrying all
    x-independent factors."""
    r0 = _graded_rule(0.0, 1.0, "lo", levels=60)
    r1 = composite_rule(16, Interval(1.0, 64.0), breaks=(1, 2, 4, 8, 16, 32, 64))
    r2 = composite_rule(16, HalfLine(64.0, "algebraic", 64.0), panels=8)
    r = concatenate([r0, r1, r2])
    w = r.nodes
    F = np.array([wiener_hopf(-1j - 1j * x) for x in w])
    a = 1.0 + w - 0.5 * np.log((2.0 + w) / w)
    return w, r.weights * (1.0 + w) / ((2.0 + w) * F * (a * a + 0.25 * math.pi ** 2))


def milne_solution(x, c: float = 1.0):
    """phi(x) for x > 0, normalized by the constant c.

    Residue at the double pole z = 0 plus the cut z = -i(1 + w) of L:

        phi/c = sqrt(3)[1 + x - I/pi]
                - (1/2) e^{-x} int_0^inf e^{-xw} (1 + w) dw
                  / ((2 + w) F(-i - iw) [(1 + w - ln((2 + w)/w)/2)^2 + pi^2/4]),

    with I = int_0^inf {1/(1 - L) - 1 - 3/w^2} dw/(1 + w^2).
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise ParameterError("milne_solution needs x > 0")
    if not c > 0:
        raise ParameterError("c must be positive")
    w, cw = _cut_rule()
    tail = np.real(np.exp(-xa[:, None] * w[None, :]) @ cw)
    phi = c * (math.sqrt(3.0) * (1.0 + xa - _bracket_integral() / math.pi)
               - 0.5 * np.exp(-xa) * tail)
    return float(phi[0]) if np.ndim(x) == 0 else phi


def milne_residual(x: float, c: float = 1.0) -> float:
    """|phi(x) - (1/2) int_0^inf E(|x - y|) phi(y) dy| / phi(x)."""
    if not x > 0:
        raise ParameterError("x must be positive")
    left = concatenate([_graded_rule(0.0, 0.5 * x, "lo", 40),
                        _graded_rule(0.5 * x, x, "hi", 40)])
    right = concatenate([_graded_rule(x, x + 1.0, "lo", 40),
                         composite_rule(16, Interval(x + 1.0, x + 60.0), panels=30)])
    total = 0.0
    for r in (left, right):
        y = r.nodes
        total += float(np.sum(r.weights * exp1(np.abs(x - y)) * milne_solution(y, c)))
    phi = milne_solution(x, c)
    return abs(phi - 0.5 * total) / phi
