"""Fredholm determinants and resolvents by Nystrom discretization.

det(1 - K) on a rule (x_i, w_i) is approximated by det(I - W^{1/2} K W^{1/2})
with W = diag(w); the symmetric weighting keeps self-adjoint kernels
symmetric at the discrete level.  Complex weights (contour arcs) use the
principal square root.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import specfun
from .errors import NumericError, ParameterError
from .measure import MeasureGrid
from .quadrature import HalfLine, Interval, QuadratureRule, composite_rule

PIVOT_FLOOR = 1e-300
NEAR_DIAGONAL = 6e-6


@dataclass(frozen=True, eq=False)
class IntegrableKernel:
    """Kernel K(x, y) on ``support``.

    ``ratio_sum`` kernels give ``fg(x) -> (F, G)`` with F, G of shape (m, len(x))
    so that K(x, y) = sum_j F_j(x) G_j(y) / (x - y), and a closed-form
    ``diagonal``.  ``smooth`` kernels give ``smooth(x, y)`` returning the full
    matrix for node vectors x, y.
    """

    form: str
    support: tuple[float, float]
    fg: Callable | None = None
    diagonal: Callable | None = None
    smooth: Callable | None = None
    name: str = ""

    def __post_init__(self):
        if self.form == "ratio_sum":
            if self.fg is None or self.diagonal is None:
                raise ParameterError("ratio kernels need fg and a closed-form diagonal")
        elif self.form == "smooth":
            if self.smooth is None:
                raise ParameterError("smooth kernels need a matrix callable")
        else:
            raise ParameterError(f"unknown kernel form {self.form!r}")

    def matrix(self, x, y=None) -> np.ndarray:
        x = np.asarray(x)
        same = y is None
        y = x if same else np.asarray(y)
        if self.form == "smooth":
            return self.smooth(x, y)
        Fx, Gx = self.fg(x)
        if same:
            Gy = Gx
        else:
            _, Gy = self.fg(y)
        num = Fx.T @ Gy
        den = x[:, None] - y[None, :]
        # Below this separation the ratio loses more to cancellation (eps/d)
        # than the midpoint diagonal loses to curvature (d^2).
        scale = np.maximum(1.0, np.abs(x[:, None]))
        hit = np.abs(den) <= NEAR_DIAGONAL * scale
        den = np.where(hit, 1.0, den)
        K = num / den
        if hit.any():
            ii, jj = np.nonzero(hit)
            K[ii, jj] = self.diagonal(0.5 * (x[ii] + y[jj]))
        return K

    def __call__(self, x, y):
        """Pointwise K(x, y) for broadcastable x, y."""
        x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
        out = np.array([self.matrix(np.array([a]), np.array([b]))[0, 0]
                        for a, b in zip(x.ravel(), y.ravel())])
        return out.reshape(x.shape) if x.ndim else out[0]

    def integrability_defect(self, x) -> float:
        """max |sum_j f_j(x) g_j(x)| (zero for a genuine integrable kernel)."""
        if self.form != "ratio_sum":
            return 0.0
        F, G = self.fg(np.asarray(x))
        return float(np.max(np.abs(np.sum(F * G, axis=0))))


@dataclass(frozen=True)
class DetResult:
    value: complex
    n_nodes: int
    err_estimate: float
    log_abs: float = 0.0
    phase: complex = 1.0


def _sym_matrix(kernel: IntegrableKernel, rule: QuadratureRule) -> np.ndarray:
    K = kernel.matrix(rule.nodes)
    if np.any(~np.isfinite(K)):
        raise NumericError(f"kernel {kernel.name or ''} produced non-finite samples")
    sw = np.sqrt(rule.weights.astype(complex)) if rule.is_complex or np.any(rule.weights < 0) \
        else np.sqrt(rule.weights)
    return sw[:, None] * K * sw[None, :], sw


def _lu_det(A: np.ndarray) -> tuple[complex, float, complex, tuple]:
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    d = np.diag(lu)
    if np.min(np.abs(d)) < PIVOT_FLOOR:
        raise NumericError("discretized operator is singular (pivot underflow)")
    swaps = int(np.sum(piv != np.arange(len(piv))))
    log_abs = float(np.sum(np.log(np.abs(d))))
    phase = np.prod(d / np.abs(d)) * (-1.0 if swaps % 2 else 1.0)
    if not np.iscomplexobj(A):
        phase = float(np.real(phase))
    value = math.exp(log_abs) * phase if log_abs > -745 else 0.0 * phase
    return value, log_abs, phase, (lu, piv)


def _det_only(kernel: IntegrableKernel, rule: QuadratureRule) -> DetResult:
    M, _ = _sym_matrix(kernel, rule)
    value, log_abs, phase, _ = _lu_det(np.eye(len(M)) - M)
    return DetResult(value, rule.n, 0.0, log_abs, phase)


def det_nystrom(kernel: IntegrableKernel, rule: QuadratureRule,
                estimate_error: bool = True) -> DetResult:
    """det(1 - K) on ``rule`` with err_estimate = |D_n - D_{n/2}|.

    The half-size determinant uses the same panels with half the nodes per
    panel; rules without a recorded recipe report an infinite estimate.
    """
    if rule.n < 2:
        raise ParameterError("Nystrom determinant needs at least 2 nodes")
    full = _det_only(kernel, rule)
    err = 0.0
    if estimate_error:
        if rule.domain_tag is None or rule.n_per_panel < 2:
            err = math.inf
        else:
            half = _det_only(kernel, rule.resample(rule.n_per_panel // 2))
            err = float(abs(full.value - half.value))
    return DetResult(full.value, rule.n, err, full.log_abs, full.phase)


def det_series_oracle(kernel: IntegrableKernel, rule: QuadratureRule, k_max: int,
                      max_terms: int = 4_000_000) -> complex:
    """Partial sum of the Fredholm series through order k_max.

    The k-fold integral of det[K(x_i, x_j)] over the discrete measure equals
    k! times the sum of k x k principal minors of W^{1/2} K W^{1/2}, which is
    what is summed here (tuples with a repeated node contribute zero).
    """
    if not 0 <= k_max <= 8:
        raise ParameterError("k_max must lie in [0, 8]")
    n = rule.n
    M, _ = _sym_matrix(kernel, rule)
    total = 1.0 + 0.0j
    for k in range(1, k_max + 1):
        count = math.comb(n, k)
        if count > max_terms:
            raise ParameterError(
                f"series order {k} on {n} nodes needs {count} minors; use a smaller rule")
        ek = 0.0 + 0.0j
        combos = itertools.combinations(range(n), k)
        while True:
            chunk = np.array(list(itertools.islice(combos, 20000)), dtype=int)
            if chunk.size == 0:
                break
            sub = M[chunk[:, :, None], chunk[:, None, :]]
            ek += np.sum(np.linalg.det(sub))
        total += (-1) ** k * ek
    if not np.iscomplexobj(M):
        return complex(total)
    return complex(total)


def resolvent_apply(kernel: IntegrableKernel, rhs, rule: QuadratureRule,
                    det_floor: float = 1e-10) -> np.ndarray:
    """Samples of (1 - K)^{-1} rhs at the rule nodes."""
    rhs = np.asarray(rhs)
    M, sw = _sym_matrix(kernel, rule)
    A = np.eye(len(M)) - M
    value, _, _, (lu, piv) = _lu_det(A)
    if abs(value) < det_floor:
        raise NumericError(f"resolvent requested where |det(1-K)| = {abs(value):.3e}")
    b = sw[:, None] * rhs.reshape(len(sw), -1) if rhs.ndim > 1 else sw * rhs
    y = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    out = y / (sw[:, None] if y.ndim > 1 else sw)
    return out.reshape(rhs.shape)


# --------------------------------------------------------------------------
# Kernels


def _airy_fg(x):
    ai, aip = specfun.airy_ai(np.asarray(x, dtype=float))
    return np.vstack([ai, aip]), np.vstack([aip, -ai])


def _airy_diag(x):
    ai, aip = specfun.airy_ai(np.asarray(x, dtype=float))
    return aip * aip - x * ai * ai


def kernel_airy(s_shift: float = 0.0) -> IntegrableKernel:
    """(Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x - y) on (s_shift, inf)."""
    return IntegrableKernel("ratio_sum", (float(s_shift), math.inf), _airy_fg, _airy_diag,
                            name="airy")


def _sine_fg(x):
    x = np.asarray(x, dtype=float)
    s, c = np.sin(np.pi * x), np.cos(np.pi * x)
    return np.vstack([s, c]) / np.pi, np.vstack([c, -s])


def kernel_sine(a: float = -math.inf, b: float = math.inf) -> IntegrableKernel:
    """sin(pi(x - y))/(pi(x - y)); diagonal 1."""
    return IntegrableKernel("ratio_sum", (a, b), _sine_fg, lambda x: np.ones(np.shape(x)),
                            name="sine")


def kernel_finite_temp_airy(sigma: MeasureGrid, s_shift: float = 0.0) -> IntegrableKernel:
    """K_sigma(x, y) = sum_k w_k K_Ai(x + t_k, y + t_k) for the measure grid.

    Written as a ratio kernel with 2m functions sqrt(w_k) Ai(x + t_k),
    sqrt(w_k) Ai'(x + t_k); the diagonal is sum_k w_k K_Ai(x+t_k, x+t_k).
    """
    sigma.check_normalized()
    t = sigma.t_nodes
    sw = np.sqrt(sigma.t_weights)

    def fg(x):
        x = np.asarray(x, dtype=float)
        ai, aip = specfun.airy_ai(x[None, :] + t[:, None])
        ai = sw[:, None] * ai
        aip = sw[:, None] * aip
        return np.vstack([ai, aip]), np.vstack([aip, -ai])

    def diag(x):
        x = np.asarray(x, dtype=float)
        arg = x[None, :] + t[:, None]
        ai, aip = specfun.airy_ai(arg)
        return sigma.t_weights @ (aip * aip - arg * ai * ai)

    return IntegrableKernel("ratio_sum", (float(s_shift), math.inf), fg, diag,
                            name="finite-temperature airy")


def smooth_kernel(k: Callable, a: float, b: float, name: str = "") -> IntegrableKernel:
    """Wrap a vectorized k(x, y) (broadcasting) as a smooth kernel."""
    return IntegrableKernel("smooth", (a, b),
                            smooth=lambda x, y: k(np.asarray(x)[:, None], np.asarray(y)[None, :]),
                            name=name)


def airy_rule(s: float, n: int = 60, right: float | None = None, panels: int | None = None
              ) -> QuadratureRule:
    """Rule for the Airy kernel on (s, inf), truncated where K_Ai(x, x) < 1e-30.

    The diagonal decays like exp(-(4/3) x^{3/2}), so x = 14 is far past any
    double-precision contribution.
    """
    b = max(s, 0.0) + 14.0 if right is None else right
    if panels is None:
        panels = max(1, int(math.ceil((b - s) / 8.0)))
    return composite_rule(max(2, n // panels), Interval(s, b), panels=panels)


def airy_half_line_rule(s: float, n: int = 60, scale: float = 1.0) -> QuadratureRule:
    return composite_rule(n, HalfLine(s, "exp", scale))
