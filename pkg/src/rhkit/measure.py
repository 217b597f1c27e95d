"""Discretized probability measures d sigma(t) on the real line.

The same grid feeds the finite-temperature Airy kernel and the coupled
ODE system, so both routes to F_sigma see identical quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit, ndtr, ndtri

from .errors import ParameterError
from .quadrature import composite_rule, Interval

TAIL_TOL = 1e-10
PANEL_NODES = 16


@dataclass(frozen=True)
class Fermi:
    """sigma(t) = 1/(1 + exp(-alpha t)), density alpha e^{-alpha t}/(1+e^{-alpha t})^2."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError("Fermi factor needs alpha > 0")

    def density(self, t):
        a = self.alpha
        return a * expit(a * t) * expit(-a * t)

    def cdf(self, t):
        return expit(self.alpha * np.asarray(t, dtype=float))

    def support(self, tail: float) -> tuple[float, float]:
        # Each tail carries half the allowed mass: e^{-alpha T} ~ tail / 2.
        T = -math.log(tail / 2.0) / self.alpha
        return -T, T

    def sigma(self, t):
        return self.cdf(t)


@dataclass(frozen=True)
class Gaussian:
    mu: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise ParameterError("Gaussian measure needs var > 0")

    def density(self, t):
        sd = math.sqrt(self.var)
        z = (np.asarray(t, dtype=float) - self.mu) / sd
        return np.exp(-0.5 * z * z) / (sd * math.sqrt(2 * math.pi))

    def cdf(self, t):
        return ndtr((np.asarray(t, dtype=float) - self.mu) / math.sqrt(self.var))

    def support(self, tail: float) -> tuple[float, float]:
        k = -float(ndtri(tail / 2.0))
        sd = math.sqrt(self.var)
        return self.mu - k * sd, self.mu + k * sd

    def sigma(self, t):
        return self.cdf(t)


@dataclass(frozen=True)
class Custom:
    """User density on a finite support; ``cdf`` is optional."""

    density_fn: Callable
    lo: float
    hi: float
    cdf_fn: Callable | None = None

    def density(self, t):
        return self.density_fn(np.asarray(t, dtype=float))

    def cdf(self, t):
        if self.cdf_fn is None:
            raise ParameterError("custom measure has no closed-form CDF")
        return self.cdf_fn(np.asarray(t, dtype=float))

    def support(self, tail: float) -> tuple[float, float]:
        return self.lo, self.hi

    def sigma(self, t):
        return self.cdf(t)


@dataclass(frozen=True)
class PointMass:
    """Delta measure at t0; outside absolutely continuous hypotheses, used
    as a numerical stand-in for the classical step sigma."""

    t0: float = 0.0

    def sigma(self, t):
        return (np.asarray(t, dtype=float) >= self.t0).astype(float)


DensityTag = Fermi | Gaussian | Custom | PointMass


@dataclass(frozen=True, eq=False)
class MeasureGrid:
    t_nodes: np.ndarray
    t_weights: np.ndarray
    density_tag: DensityTag
    truncation: tuple[float, float]
    mass_deficit: float

    def __post_init__(self):
        if len(self.t_nodes) != len(self.t_weights) or len(self.t_nodes) == 0:
            raise ParameterError("measure grid needs matching non-empty nodes and weights")
        if np.any(self.t_weights < 0):
            raise ParameterError("measure weights must be non-negative")

    @property
    def n(self) -> int:
        return len(self.t_nodes)

    def check_normalized(self, tol: float = 1e-10) -> None:
        total = float(np.sum(self.t_weights)) + self.mass_deficit
        if abs(total - 1.0) > tol:
            raise ParameterError(f"measure mass {total!r} is not 1 within {tol:g}")
        if self.mass_deficit > 1e-8:
            raise ParameterError(f"mass deficit {self.mass_deficit:.3g} exceeds 1e-8")

    def moment(self, k: int) -> float:
        return float(np.dot(self.t_weights, self.t_nodes ** k))


def point_mass(t0: float = 0.0) -> MeasureGrid:
    return MeasureGrid(np.array([float(t0)]), np.array([1.0]), PointMass(t0),
                       (float(t0), float(t0)), 0.0)


def discretize_measure(spec: DensityTag, n: int, tail: float = TAIL_TOL) -> MeasureGrid:
    """Gauss-Legendre panels of 16 nodes on a support whose omitted tail mass
    is at most ``tail``; weights are density times quadrature weights."""
    if isinstance(spec, PointMass):
        return point_mass(spec.t0)
    if n < 8:
        raise ParameterError("need at least 8 measure nodes")
    lo, hi = spec.support(tail)
    per = next((m for m in (16, 20, 15, 18, 12, 14) if n % m == 0), min(PANEL_NODES, n))
    panels = max(1, n // per)
    rule = composite_rule(per, Interval(lo, hi), panels=panels)
    t = rule.nodes
    w = spec.density(t) * rule.weights
    if isinstance(spec, Custom) and spec.cdf_fn is None:
        deficit = max(0.0, 1.0 - float(np.sum(w)))
    else:
        deficit = float(spec.cdf(lo) + (1.0 - spec.cdf(hi)))
    grid = MeasureGrid(t, w, spec, (lo, hi), deficit)
    quad_err = abs(float(np.sum(w)) + deficit - 1.0)
    if quad_err > 1e-12:
        raise ParameterError(
            f"n={n} resolves the density only to {quad_err:.2e}; use a larger n")
    return grid


def fermi(alpha: float) -> Fermi:
    return Fermi(float(alpha))


def gaussian(mu: float, var: float) -> Gaussian:
    return Gaussian(float(mu), float(var))
