"""Finite-section realization of the logarithmic EIT forward map on the unit disk.

Submodules
----------
mesh, basis, fem
    Disk triangulations, the boundary trigonometric basis, P1 Neumann solves
    and the discrete Neumann-to-Dirichlet (ND) matrix.
calculus
    Spectral functions of ND matrices and a contour-integral logarithm.
derivatives
    Derivatives of the ND map and of its (shifted) logarithm.
harness
    Seeded experiments producing :class:`~logeit.harness.ExperimentReport`.
"""

from .basis import BoundaryBasis, boundary_trig_basis, mean_free_project, sobolev_operator_norm
from .calculus import (
    EigenSystem,
    SobolevOperator,
    SpectralFunctionSpec,
    apply_spectral_function,
    eigensystem,
    riesz_dunford_log,
    sigma_norm,
)
from .derivatives import d2f_tau, df_tau_quadrature, df_tau_spectral, divided_differences, dk_lambda, dL, dlambda
from .errors import *  # noqa: F401,F403
from .fem import ConductivityField, NDMatrix, apply_perturbation, nd_matrix, solve_neumann
from .mesh import DiskMesh, build_disk_mesh

__version__ = "0.1.0"
