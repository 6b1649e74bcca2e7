"""Quaternionic psi-hyperholomorphic analysis with fractional proportional operators.

Submodules
----------
quat
    Quaternion arrays, A-values and structural sets.
frac1d
    One-dimensional fractional proportional integrals and derivatives.
grid
    Boxes, grid fields and finite differences.
psi_ops
    psi-Cauchy-Riemann operators, classical and fractional.
quadrature, classical, fractional
    Integral identities and their numerical residuals.
config, experiments, cli
    Experiment files and the ``verify`` command.
"""

from .classical import borel_pompeiu_classical, closed_surface_null, kernel_dbar_residual, stokes_residual
from .convergence import IdentityReport, Resolution, fitted_order, observed_orders
from .errors import ConfigError, DomainError, PreconditionError, StructuralSetError
from .frac1d import Weight, prop_derivative, prop_frac_derivative, prop_frac_integral
from .fractional import (
    LambdaSet,
    build_lambda,
    cauchy_corollary_check,
    frac_borel_pompeiu,
    frac_stokes_residual,
    remainder_R,
    weighted_product_rule_residual,
)
from .grid import Box, GridField, SlicePoint, axis_slice, partial_fd, sample_field
from .psi_ops import FracParams, Weight3, frac_prop_integral_3d, frac_prop_psi_cr, laplacian, psi_dbar
from .quadrature import cauchy_kernel, sphere_moment
from .quat import STANDARD, AValue, Quaternion, StructuralSet, make_structural_set, quat_conj, quat_inv, quat_mul, quat_norm

__all__ = [
    "AValue", "Box", "ConfigError", "DomainError", "FracParams", "GridField", "IdentityReport", "LambdaSet",
    "PreconditionError", "Quaternion", "Resolution", "STANDARD", "SlicePoint", "StructuralSet",
    "StructuralSetError", "Weight", "Weight3", "axis_slice", "borel_pompeiu_classical", "build_lambda",
    "cauchy_corollary_check", "cauchy_kernel", "closed_surface_null", "fitted_order", "frac_borel_pompeiu",
    "frac_prop_integral_3d", "frac_prop_psi_cr", "frac_stokes_residual", "kernel_dbar_residual", "laplacian",
    "make_structural_set", "observed_orders", "partial_fd", "prop_derivative", "prop_frac_derivative",
    "prop_frac_integral", "psi_dbar", "quat_conj", "quat_inv", "quat_mul", "quat_norm", "remainder_R",
    "sample_field", "sphere_moment", "stokes_residual", "weighted_product_rule_residual",
]  # fmt: skip
