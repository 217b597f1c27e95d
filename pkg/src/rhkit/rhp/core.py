"""Cauchy operators on contours and the singular integral equation
rho = I + C_-(rho (G - I)) for X_+ = X_- G, X -> I at infinity.

Boundary values use singularity subtraction at a node z_k:

    C_pm f(z_k) = (1/2 pi i) [ sum_{j != k} w_j (f_j - f_k)/(z_j - z_k)
                               + w_k f'(z_k) + f_k PV int dw/(w - z_k) ] +- f_k / 2,

where f' comes from the panel's Lagrange differentiation matrix and the
principal value of int dw/(w - z) is closed form on each arc.  One grid
serves both boundary values, so C_+ - C_- = 1 holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from ..errors import ConvergenceError, NumericError, ParameterError
from ..quadrature import (ArcTag, Contour, QuadratureRule, barycentric_eval, composite_rule,
                          concatenate, diff_matrix)

TWO_PI_I = 2j * math.pi
DENSE_LIMIT = 2500
ROW_BLOCK = 256


@dataclass(frozen=True, eq=False)
class ContourRule:
    """Gauss-Legendre panels on every arc of a contour."""

    contour: Contour
    rule: QuadratureRule
    arc_of_node: np.ndarray
    arc_rules: tuple

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights

    @property
    def n(self) -> int:
        return self.rule.n

    def pv_log(self, z: complex, arc: int) -> complex:
        """PV int_Sigma dw/(w - z) for z on arc ``arc``."""
        total = 0.0 + 0.0j
        for i, a in enumerate(self.contour.oriented_arcs()):
            total += a.pv_log(z) if i == arc else a.log_integral(z)
        return total

    def point(self, arc: int, tau: float) -> complex:
        return complex(self.contour.arc(arc).point(np.array([tau]))[0])

    def locate(self, arc: int, tau: float) -> tuple[int, float]:
        """Global panel index and reference coordinate of parameter tau on arc."""
        ar = self.arc_rules[arc]
        br = np.asarray(ar.breaks)
        k = int(np.clip(np.searchsorted(br, tau) - 1, 0, len(br) - 2))
        u = 2.0 * (tau - br[k]) / (br[k + 1] - br[k]) - 1.0
        offset = sum(len(r.breaks) - 1 for r in self.arc_rules[:arc])
        return offset + k, u


def contour_rule(contour: Contour, n_per_panel: int = 16, panels=1) -> ContourRule:
    """``panels`` is an int (same for every arc) or one entry per arc, each an
    int or a tuple of breakpoints in [0, 1]."""
    per_arc = panels if isinstance(panels, (list, tuple)) else [panels] * len(contour.arcs)
    if len(per_arc) != len(contour.arcs):
        raise ParameterError("one panel specification per arc")
    rules = []
    for i, spec in enumerate(per_arc):
        if isinstance(spec, (list, tuple, np.ndarray)):
            rules.append(composite_rule(n_per_panel, ArcTag(contour, i), breaks=tuple(spec)))
        else:
            rules.append(composite_rule(n_per_panel, ArcTag(contour, i), panels=int(spec)))
    rule = rules[0] if len(rules) == 1 else concatenate(rules)
    arc_of = np.concatenate([np.full(r.n, i) for i, r in enumerate(rules)])
    return ContourRule(contour, rule, arc_of, tuple(rules))


# --------------------------------------------------------------------------
# Cauchy operators


def _as_matrix_density(density, n: int) -> tuple[np.ndarray, bool]:
    f = np.asarray(density, dtype=complex)
    scalar = f.ndim == 1
    if scalar:
        f = f[:, None, None]
    if f.shape[0] != n or f.ndim != 3:
        raise ParameterError("density must have shape (n,) or (n, p, p)")
    return f, scalar


def _pv_all(cr: ContourRule) -> np.ndarray:
    return np.array([cr.pv_log(z, int(a)) for z, a in zip(cr.nodes, cr.arc_of_node)])


def cauchy_rows(cr: ContourRule, rows: np.ndarray, side: int, pv: np.ndarray | None = None
                ) -> np.ndarray:
    """Rows ``rows`` of the collocation matrix of C_side (side = +1 or -1)."""
    z, w, r = cr.nodes, cr.weights, cr.rule
    pv = _pv_all(cr) if pv is None else pv
    zk = z[rows]
    d = z[None, :] - zk[:, None]
    hit = d == 0
    d[hit] = 1.0
    C = w[None, :] / d
    C[hit] = 0.0
    diag = pv[rows] - C.sum(axis=1)
    m = r.n_per_panel
    D = diff_matrix(m)
    for i, k in enumerate(rows):
        p = int(r.panel[k])
        lo = p * m
        C[i, lo:lo + m] += w[k] * D[k - lo] / r.jacobian[k]
        C[i, k] += diag[i]
    C /= TWO_PI_I
    C[np.arange(len(rows)), rows] += 0.5 * side
    return C


def cauchy_matrix(cr: ContourRule, side: int) -> np.ndarray:
    if cr.rule.n_per_panel < 2 or np.any(np.diff(cr.rule.panel) < 0):
        raise ParameterError("rule lacks the panel structure needed for boundary values")
    return cauchy_rows(cr, np.arange(cr.n), side)


def cauchy_transform(density, cr: ContourRule, z) -> np.ndarray:
    """(1/2 pi i) int H(w) dw / (w - z) for z off the contour."""
    f, scalar = _as_matrix_density(density, cr.n)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    d = cr.nodes[None, :] - zz[:, None]
    if np.any(np.abs(d) < 1e-14):
        raise ParameterError("z lies on the contour; use cauchy_boundary")
    k = cr.weights[None, :] / d / TWO_PI_I
    out = np.einsum("zj,jab->zab", k, f)
    if scalar:
        out = out[:, 0, 0]
    return out[0] if np.ndim(z) == 0 else out


def cauchy_boundary(density, cr: ContourRule, node_index: int, side: int) -> np.ndarray:
    """C_side H at a contour node."""
    if side not in (1, -1):
        raise ParameterError("side must be +1 or -1")
    f, scalar = _as_matrix_density(density, cr.n)
    row = cauchy_rows(cr, np.array([node_index]), side)[0]
    out = np.einsum("j,jab->ab", row, f)
    return out[0, 0] if scalar else out


def interpolate_density(density, cr: ContourRule, panel: int, u: float) -> np.ndarray:
    f, scalar = _as_matrix_density(density, cr.n)
    m = cr.rule.n_per_panel
    ref = cr.rule.ref_nodes[panel * m:(panel + 1) * m]
    val = barycentric_eval(ref, f[panel * m:(panel + 1) * m], u)
    return val[0, 0] if scalar else val


def cauchy_boundary_at(density, cr: ContourRule, arc: int, tau: float, side: int):
    """C_side H at the contour point with parameter tau on ``arc`` (not a node).

    The subtracted integrand (H(w) - H(z))/(w - z) is smooth, so the plain
    rule applies; H(z) comes from barycentric interpolation on its panel.
    """
    if not 0.0 < tau < 1.0:
        raise ParameterError("endpoint locations are not supported")
    f, scalar = _as_matrix_density(density, cr.n)
    z = cr.point(arc, tau)
    panel, u = cr.locate(arc, tau)
    fz = interpolate_density(f, cr, panel, u)
    d = cr.nodes - z
    if np.any(np.abs(d) < 1e-14):
        raise ParameterError("point coincides with a node; use cauchy_boundary")
    val = (np.einsum("j,jab->ab", cr.weights / d, f - fz[None])
           + fz * cr.pv_log(z, arc)) / TWO_PI_I + 0.5 * side * fz
    return val[0, 0] if scalar else val


# --------------------------------------------------------------------------
# Jumps and the singular integral equation


@dataclass(frozen=True, eq=False)
class JumpData:
    """G(z) on the contour; ``G`` maps an array of points to (n, p, p)."""

    contour: Contour
    G: Callable
    p: int = 2
    decay_profile: Callable | None = None

    def __post_init__(self):
        if self.p not in (1, 2):
            raise ParameterError("only p = 1 or p = 2 is supported")

    def sample(self, z) -> np.ndarray:
        g = np.asarray(self.G(np.asarray(z)), dtype=complex)
        if self.p == 1 and g.ndim == 1:
            g = g[:, None, None]
        if g.shape != (len(z), self.p, self.p):
            raise ParameterError(f"G returned shape {g.shape}, expected {(len(z), self.p, self.p)}")
        det = g[:, 0, 0] if self.p == 1 else g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
        if np.any(np.abs(det) < 1e-14):
            raise NumericError("jump matrix is singular at a sampled node")
        return g


def _apply_cauchy(cr: ContourRule, h: np.ndarray, side: int, pv: np.ndarray,
                  C: np.ndarray | None) -> np.ndarray:
    n = cr.n
    flat = h.reshape(n, -1)
    if C is not None:
        return (C @ flat).reshape(h.shape)
    out = np.empty_like(flat)
    for lo in range(0, n, ROW_BLOCK):
        rows = np.arange(lo, min(n, lo + ROW_BLOCK))
        out[rows] = cauchy_rows(cr, rows, side, pv) @ flat
    return out.reshape(h.shape)


@dataclass(frozen=True, eq=False)
class RhpSolution:
    rho: np.ndarray
    jump: JumpData
    rule: ContourRule
    residual: float
    X1: np.ndarray
    X2: np.ndarray
    method: str = "dense"
    iterations: int = 0
    G_nodes: np.ndarray = field(default=None, repr=False)

    @property
    def h(self) -> np.ndarray:
        """rho (G - I) at the nodes, the density of X - I."""
        eye = np.eye(self.jump.p)
        return np.einsum("nab,nbc->nac", self.rho, self.G_nodes - eye)

    def X(self, z) -> np.ndarray:
        return np.eye(self.jump.p) + cauchy_transform(self.h, self.rule, z)

    def boundary(self, arc: int, tau: float, side: int) -> np.ndarray:
        return np.eye(self.jump.p) + cauchy_boundary_at(self.h, self.rule, arc, tau, side)

    def jump_residual(self, checkpoints) -> float:
        """sup ||X_+ - X_- G|| over (arc, tau) checkpoints between nodes."""
        worst = 0.0
        for arc, tau in checkpoints:
            z = self.rule.point(arc, tau)
            G = self.jump.sample(np.array([z]))[0]
            worst = max(worst, float(np.max(np.abs(
                self.boundary(arc, tau, 1) - self.boundary(arc, tau, -1) @ G))))
        return worst

    def decay(self, radii=(1e2, 1e3), angles=(0.3, 1.9, 4.0)) -> list[float]:
        """R * max ||X(R e^{i theta}) - I|| for each radius (bounded if X - I = O(1/R))."""
        out = []
        for R in radii:
            z = R * np.exp(1j * np.asarray(angles))
            out.append(float(R * max(np.max(np.abs(self.X(zz) - np.eye(self.jump.p)))
                                     for zz in z)))
        return out


def default_checkpoints(cr: ContourRule, count: int = 7) -> list[tuple[int, float]]:
    """Parameter midpoints between nodes spread over every arc."""
    pts = []
    for arc, ar in enumerate(cr.arc_rules):
        taus = np.linspace(0.05, 0.95, count)
        for t in taus:
            # Shift off any node by a small fraction of the local spacing.
            pts.append((arc, float(t) + 1e-3 / max(1, ar.n)))
    return pts


def solve_sie(jump: JumpData, cr: ContourRule, method: str = "dense", tol: float = 1e-14,
              max_iter: int = 500) -> RhpSolution:
    """Solve rho = I + C_-(rho (G - I)) by dense collocation or Neumann series."""
    n, p = cr.n, jump.p
    G = jump.sample(cr.nodes)
    M = G - np.eye(p)
    pv = _pv_all(cr)
    eye = np.broadcast_to(np.eye(p, dtype=complex), (n, p, p))
    C = cauchy_rows(cr, np.arange(n), -1, pv) if n <= DENSE_LIMIT else None
    it = 0
    if method == "dense":
        if C is None:
            raise ParameterError(f"dense solve limited to {DENSE_LIMIT} nodes; use neumann")
        K = C[:, None, :, None] * np.transpose(M, (2, 0, 1))[None, :, :, :]
        A = np.eye(n * p) - K.reshape(n * p, n * p)
        B = np.tile(np.eye(p, dtype=complex), (n, 1))
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
        if np.min(np.abs(np.diag(lu))) < 1e-13 * np.max(np.abs(np.diag(lu))):
            raise NumericError("collocation system is singular: 1 - C_w not invertible")
        x = scipy.linalg.lu_solve((lu, piv), B, check_finite=False)
        rho = x.reshape(n, p, p).transpose(0, 2, 1)
    elif method == "neumann":
        rho = eye.copy()
        prev = math.inf
        for it in range(1, max_iter + 1):
            new = eye + _apply_cauchy(cr, np.einsum("nab,nbc->nac", rho, M), -1, pv, C)
            delta = float(np.max(np.abs(new - rho)))
            rho = new
            if delta <= tol:
                break
            if delta > 1e3 or (it > 20 and delta > prev):
                raise ConvergenceError(f"Neumann series diverges (step {delta:.3e} at {it})")
            prev = delta
        else:
            raise ConvergenceError(f"Neumann series did not reach {tol:g} in {max_iter} steps")
    else:
        raise ParameterError(f"unknown method {method!r}")
    h = np.einsum("nab,nbc->nac", rho, M)
    res = float(np.max(np.abs(rho - eye - _apply_cauchy(cr, h, -1, pv, C))))
    w = cr.weights[:, None, None]
    X1 = -np.sum(w * h, axis=0) / TWO_PI_I
    X2 = -np.sum(w * cr.nodes[:, None, None] * h, axis=0) / TWO_PI_I
    return RhpSolution(rho, jump, cr, res, X1, X2, method, it, G)


@dataclass(frozen=True)
class SmallNormCertificate:
    norm_inf: float
    norm_l2: float
    norm_l1: float
    cauchy_norm: float
    bound: float
    certified: bool


def discrete_cauchy_norm(cr: ContourRule, side: int = -1) -> float:
    """Operator 2-norm of C_side on L^2(|dz|) restricted to the nodes."""
    s = np.sqrt(np.abs(cr.weights))
    if cr.n <= DENSE_LIMIT:
        A = s[:, None] * cauchy_matrix(cr, side) / s[None, :]
        return float(np.linalg.norm(A, 2))
    raise ParameterError(f"norm estimate limited to {DENSE_LIMIT} nodes")


def small_norm_certificate(jump: JumpData, cr: ContourRule) -> SmallNormCertificate:
    """||G - I|| in discrete L^inf, L^2, L^1 and the Neumann criterion
    ||C_-|| ||G - I||_inf < 1."""
    M = jump.sample(cr.nodes) - np.eye(jump.p)
    pt = np.linalg.norm(M, ord=2, axis=(1, 2))
    aw = np.abs(cr.weights)
    n_inf = float(np.max(pt))
    n_l2 = float(math.sqrt(np.sum(aw * pt ** 2)))
    n_l1 = float(np.sum(aw * pt))
    cn = discrete_cauchy_norm(cr) if n_inf > 0 else 0.0
    bound = cn * n_inf
    return SmallNormCertificate(n_inf, n_l2, n_l1, cn, bound, bool(bound < 1.0))
