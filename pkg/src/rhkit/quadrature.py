"""Quadrature rules on intervals, half-lines and oriented contour arcs.

Every rule remembers how it was built (domain tag, breakpoints and nodes
per panel) so that downstream code can resample it, differentiate
densities panel-wise, or interpolate between nodes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ParameterError

MAX_GL_NODES = 4096


# --------------------------------------------------------------------------
# Gauss-Legendre reference rule


@functools.lru_cache(maxsize=64)
def _gl_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Newton on P_n from Chebyshev-type initial guesses.
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        if n == 1:
            p0, p1 = np.ones_like(x), x.copy()
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    if n == 1:
        p0, p1 = np.ones_like(x), x.copy()
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1].copy()
    w = w[::-1].copy()
    # Enforce exact symmetry.
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@functools.lru_cache(maxsize=64)
def diff_matrix(n: int) -> np.ndarray:
    """Lagrange differentiation matrix on the n-point Gauss-Legendre nodes."""
    u, _ = _gl_arrays(n)
    bw = barycentric_weights(u)
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, 1.0)
    D = (bw[None, :] / bw[:, None]) / d
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    D.setflags(write=False)
    return D


def barycentric_weights(u: np.ndarray) -> np.ndarray:
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, 1.0)
    # Scale to keep the product in range for large n.
    d = d * (2.0 / max(1.0, np.ptp(u)))
    return 1.0 / np.prod(d, axis=1)


def barycentric_eval(u_nodes: np.ndarray, values: np.ndarray, u: float) -> complex:
    """Evaluate the interpolant through (u_nodes, values) at u."""
    bw = barycentric_weights(u_nodes)
    diff = u - u_nodes
    hit = np.flatnonzero(diff == 0.0)
    if hit.size:
        return values[hit[0]]
    c = bw / diff
    return np.tensordot(c, values, axes=(0, 0)) / c.sum()


# --------------------------------------------------------------------------
# Contours


class Arc:
    """Smooth parametrized arc gamma: [0, 1] -> C."""

    def point(self, tau):
        raise NotImplementedError

    def deriv(self, tau):
        raise NotImplementedError

    def reversed(self) -> "Arc":
        raise NotImplementedError

    @property
    def start(self) -> complex:
        return complex(self.point(np.array([0.0]))[0])

    @property
    def end(self) -> complex:
        return complex(self.point(np.array([1.0]))[0])

    def pv_log(self, z: complex) -> complex:
        """Principal value of the integral of dw/(w - z) for z on this arc."""
        raise NotImplementedError

    def log_integral(self, z: complex) -> complex:
        """Integral of dw/(w - z) along the arc for z off the arc."""
        taus = np.linspace(0.0, 1.0, 513)
        ang = np.unwrap(np.angle(self.point(taus) - z))
        a, b = self.start, self.end
        return complex(math.log(abs(b - z)) - math.log(abs(a - z)), ang[-1] - ang[0])


@dataclass(frozen=True)
class Segment(Arc):
    a: complex
    b: complex

    def point(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.a + (self.b - self.a) * tau

    def deriv(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.full(tau.shape, self.b - self.a, dtype=complex)

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)

    def pv_log(self, z: complex) -> complex:
        return complex(math.log(abs(self.b - z)) - math.log(abs(self.a - z)), 0.0)

    def log_integral(self, z: complex) -> complex:
        d = np.log(complex(self.b - z)) - np.log(complex(self.a - z))
        im = (d.imag + np.pi) % (2 * np.pi) - np.pi
        return complex(d.real, im)


@dataclass(frozen=True)
class CircularArc(Arc):
    """Arc c + r*exp(i*theta), theta running from theta0 to theta1."""

    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, tau):
        th = self.theta0 + (self.theta1 - self.theta0) * np.asarray(tau, dtype=float)
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, tau):
        dth = self.theta1 - self.theta0
        th = self.theta0 + dth * np.asarray(tau, dtype=float)
        return 1j * dth * self.radius * np.exp(1j * th)

    def reversed(self) -> "CircularArc":
        return CircularArc(self.center, self.radius, self.theta1, self.theta0)

    def pv_log(self, z: complex) -> complex:
        a, b = self.start, self.end
        re = 0.0 if abs(b - a) < 1e-15 * self.radius else (
            math.log(abs(b - z)) - math.log(abs(a - z)))
        return complex(re, 0.5 * (self.theta1 - self.theta0))


@dataclass(frozen=True)
class Contour:
    arcs: tuple[Arc, ...]
    closed: bool = False
    orientation: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.arcs:
            raise ParameterError("contour needs at least one arc")
        if not self.orientation:
            object.__setattr__(self, "orientation", (1,) * len(self.arcs))
        if len(self.orientation) != len(self.arcs):
            raise ParameterError("one orientation flag per arc")
        taus = np.linspace(0.0, 1.0, 65)
        for arc in self.oriented_arcs():
            if np.min(np.abs(arc.deriv(taus))) < 1e-12:
                raise ParameterError("degenerate arc parametrization")
        if self.closed:
            arcs = self.oriented_arcs()
            for k, arc in enumerate(arcs):
                nxt = arcs[(k + 1) % len(arcs)]
                if abs(arc.end - nxt.start) > 1e-12 * max(1.0, abs(arc.end)):
                    raise ParameterError("closed contour has a gap between arcs")

    def oriented_arcs(self) -> list[Arc]:
        return [a if o > 0 else a.reversed() for a, o in zip(self.arcs, self.orientation)]

    def arc(self, index: int) -> Arc:
        return self.oriented_arcs()[index]

    def reversed(self) -> "Contour":
        return Contour(self.arcs[::-1], self.closed,
                       tuple(-o for o in self.orientation[::-1]))


def unit_circle() -> Contour:
    return Contour((CircularArc(0.0, 1.0, 0.0, 2 * np.pi),), closed=True)


def real_segment(a: float, b: float) -> Contour:
    return Contour((Segment(complex(a), complex(b)),))


# --------------------------------------------------------------------------
# Domain tags


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ParameterError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ParameterError(f"interval needs a < b, got ({self.a}, {self.b})")

    def param_range(self):
        return self.a, self.b

    def param_map(self, p):
        return p, np.ones_like(p)


@dataclass(frozen=True)
class HalfLine:
    """Half-line (s, inf) via x = s + L ln(1/(1-v)) ("exp") or s + L v/(1-v)."""

    s: float
    map_kind: str = "exp"
    scale: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise ParameterError("half-line origin must be finite")
        if self.map_kind not in ("exp", "algebraic"):
            raise ParameterError(f"unknown half-line map {self.map_kind!r}")
        if not self.scale > 0:
            raise ParameterError("half-line scale must be positive")

    def param_range(self):
        return 0.0, 1.0

    def param_map(self, v):
        L = self.scale
        if self.map_kind == "exp":
            return self.s - L * np.log1p(-v), L / (1.0 - v)
        return self.s + L * v / (1.0 - v), L / (1.0 - v) ** 2


@dataclass(frozen=True)
class ArcTag:
    contour: Contour
    index: int

    def __post_init__(self):
        if not 0 <= self.index < len(self.contour.arcs):
            raise ParameterError("arc index out of range")

    def param_range(self):
        return 0.0, 1.0

    def param_map(self, tau):
        arc = self.contour.arc(self.index)
        return arc.point(tau), arc.deriv(tau)


DomainTag = Union[Interval, HalfLine, ArcTag, None]


# --------------------------------------------------------------------------
# Rules


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights plus the recipe that produced them.

    ``ref_nodes`` holds each node's reference abscissa in (-1, 1),
    ``panel`` its panel number and ``jacobian`` dx/du at the node, so a
    density sampled on the rule can be differentiated or interpolated
    panel by panel.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain_tag: DomainTag = None
    breaks: tuple[float, ...] = ()
    n_per_panel: int = 0
    ref_nodes: np.ndarray = field(default=None, repr=False)
    panel: np.ndarray = field(default=None, repr=False)
    jacobian: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.nodes) == 0 or len(self.nodes) != len(self.weights):
            raise ParameterError("rule needs matching, non-empty nodes and weights")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.nodes) or np.iscomplexobj(self.weights)

    def integrate(self, f: Callable) -> complex:
        return np.dot(self.weights, f(self.nodes))

    def panel_slices(self) -> list[slice]:
        m = self.n_per_panel
        return [slice(k * m, (k + 1) * m) for k in range(len(self.nodes) // m)]

    def resample(self, n_per_panel: int) -> "QuadratureRule":
        """The same domain and panels with a different node count per panel."""
        if self.domain_tag is None:
            raise ParameterError("rule has no recorded domain; cannot resample")
        return composite_rule(n_per_panel, self.domain_tag, self.breaks)


def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1]."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ParameterError("n must be an integer")
    if not 1 <= n <= MAX_GL_NODES:
        raise ParameterError(f"n must lie in [1, {MAX_GL_NODES}], got {n}")
    x, w = _gl_arrays(int(n))
    return QuadratureRule(x, w, Interval(-1.0, 1.0), (-1.0, 1.0), int(n),
                          x, np.zeros(n, dtype=int), np.ones(n))


def composite_rule(n: int, target: DomainTag, breaks: Sequence[float] | None = None,
                   panels: int = 1) -> QuadratureRule:
    """Gauss-Legendre panels on ``target``.

    ``breaks`` are panel boundaries in the target's parameter space (x for
    intervals, v in [0, 1) for half-lines, tau in [0, 1] for arcs).  Without
    them the parameter range is split into ``panels`` equal pieces.
    """
    ref = gauss_legendre(n)
    lo, hi = target.param_range()
    if breaks is None or len(breaks) == 0:
        if panels < 1:
            raise ParameterError("panels must be positive")
        breaks = tuple(np.linspace(lo, hi, panels + 1))
    breaks = tuple(float(b) for b in breaks)
    if len(breaks) < 2 or any(b1 <= b0 for b0, b1 in zip(breaks, breaks[1:])):
        raise ParameterError("panel breaks must be strictly increasing")
    if breaks[0] < lo - 1e-15 or breaks[-1] > hi + 1e-15:
        raise ParameterError("panel breaks leave the parameter range")
    u, wu = ref.nodes, ref.weights
    xs, ws, jac = [], [], []
    for p0, p1 in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (p1 - p0)
        p = p0 + half * (1.0 + u)
        x, dxdp = target.param_map(p)
        xs.append(x)
        ws.append(wu * half * dxdp)
        jac.append(half * dxdp)
    npan = len(breaks) - 1
    return QuadratureRule(
        np.concatenate(xs), np.concatenate(ws), target, breaks, n,
        np.tile(u, npan), np.repeat(np.arange(npan), n), np.concatenate(jac))


def map_rule(rule: QuadratureRule, target: DomainTag) -> QuadratureRule:
    """Transplant a reference rule on [-1, 1] onto ``target``."""
    if not isinstance(rule.domain_tag, Interval) or rule.domain_tag != Interval(-1.0, 1.0):
        raise ParameterError("map_rule expects a reference rule on [-1, 1]")
    lo, hi = target.param_range()
    return composite_rule(rule.n_per_panel, target, (lo, hi)) if len(rule.breaks) == 2 \
        else composite_rule(rule.n_per_panel, target, None, panels=len(rule.breaks) - 1)


def interval_rule(n: int, a: float, b: float, panels: int = 1) -> QuadratureRule:
    return composite_rule(n, Interval(a, b), panels=panels)


def half_line_rule(n: int, s: float, scale: float = 1.0, map_kind: str = "exp",
                   panels: int = 1) -> QuadratureRule:
    return composite_rule(n, HalfLine(s, map_kind, scale), panels=panels)


def arc_rule(n: int, contour: Contour, index: int = 0, panels: int = 1) -> QuadratureRule:
    return composite_rule(n, ArcTag(contour, index), panels=panels)


def concatenate(rules: Sequence[QuadratureRule]) -> QuadratureRule:
    """Union of rules on disjoint pieces (no recipe retained)."""
    m = rules[0].n_per_panel
    offs = np.cumsum([0] + [int(r.panel.max()) + 1 for r in rules[:-1]])
    return QuadratureRule(
        np.concatenate([r.nodes for r in rules]),
        np.concatenate([r.weights for r in rules]),
        None, (), m if all(r.n_per_panel == m for r in rules) else 0,
        np.concatenate([r.ref_nodes for r in rules]),
        np.concatenate([r.panel + o for r, o in zip(rules, offs)]),
        np.concatenate([r.jacobian for r in rules]))
