"""Riemann-Hilbert problems on contours and their applications."""

from .core import (ContourRule, JumpData, RhpSolution, SmallNormCertificate, cauchy_boundary,
                   cauchy_boundary_at, cauchy_matrix, cauchy_transform, contour_rule,
                   discrete_cauchy_norm, small_norm_certificate, solve_sie)
from .nls import GaussianReflection, Reflection, nls_pde_residual, nls_solve
from .op import cd_kernel_rhp, cd_kernel_sum, op_jump_residual, op_rhp_gaussian
from .wiener_hopf import G_symbol, milne_residual, milne_solution, wiener_hopf

__all__ = [
    "ContourRule", "JumpData", "RhpSolution", "SmallNormCertificate", "cauchy_boundary",
    "cauchy_boundary_at", "cauchy_matrix", "cauchy_transform", "contour_rule",
    "discrete_cauchy_norm", "small_norm_certificate", "solve_sie",
    "GaussianReflection", "Reflection", "nls_pde_residual", "nls_solve",
    "cd_kernel_rhp", "cd_kernel_sum", "op_jump_residual", "op_rhp_gaussian",
    "G_symbol", "milne_residual", "milne_solution", "wiener_hopf",
]
