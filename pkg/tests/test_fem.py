import numpy as np
import pytest

from logeit.basis import boundary_trig_basis
from logeit.errors import ContractionError, SingularSystemError
from logeit.fem import (
    ConductivityField,
    analytic_nd_constant,
    apply_perturbation,
    dlambda_matrix,
    nd_matrix,
    perturbation_chain,
    perturbation_norm,
    require_contraction,
    solve_neumann,
    stiffness_matrix,
)
from logeit.mesh import build_disk_mesh


def test_field_arithmetic(mesh4):
    a = ConductivityField.constant(mesh4, 2.0)
    b = ConductivityField.from_function(mesh4, lambda x, y: 1 + x**2)
    np.testing.assert_allclose((a * b / a - b).values, 0.0)
    np.testing.assert_allclose((1.0 - a).values, -1.0)
    assert a.is_constant() and not b.is_constant()
    np.testing.assert_allclose(b.log().exp().values, b.values)
    assert a.digest() != b.digest()
    with pytest.raises(ValueError):
        ConductivityField(mesh4, np.ones(3))
    with pytest.raises(ValueError):
        a + ConductivityField.constant(build_disk_mesh(2), 1.0)


def test_stiffness_annihilates_constants(mesh4, sigma_bump):
    K = stiffness_matrix(sigma_bump)
    np.testing.assert_allclose(K @ np.ones(mesh4.n_nodes), 0.0, atol=1e-12)
    assert abs(K - K.T).max() < 1e-14


def test_neumann_solution_linear_mode(mesh4, basis8):
    # unit conductivity, current cos(t)/sqrt(pi): potential x/sqrt(pi)
    f = np.zeros(16)
    f[0] = 1.0
    sol = solve_neumann(ConductivityField.constant(mesh4, 1.0), f, basis8)
    x = mesh4.nodes[:, 0] / np.sqrt(np.pi)
    assert np.max(np.abs(sol.values - x)) < 5e-3
    np.testing.assert_allclose(sol.trace[0], 1.0, rtol=1e-2)
    w = mesh4.boundary_weights
    assert abs(w @ sol.values[mesh4.boundary_nodes]) < 1e-12


def test_disk_oracle_level4(mesh4, basis8):
    A = nd_matrix(ConductivityField.constant(mesh4, 1.0), basis8)
    lam = np.linalg.eigvalsh(A.matrix)[::-1]
    np.testing.assert_allclose(lam, 1.0 / basis8.frequencies, rtol=0.02)
    np.testing.assert_allclose(A.matrix, analytic_nd_constant(1.0, basis8).matrix, atol=0.02)
    assert A.asymmetry < 1e-10


def test_scaling_identity(sigma_bump, basis8):
    A = nd_matrix(sigma_bump, basis8).matrix
    for c in (0.5, 2.0, 10.0):
        np.testing.assert_allclose(nd_matrix(sigma_bump * c, basis8).matrix, A / c, atol=1e-12)


def test_truncation_is_leading_block(sigma_bump, basis8):
    A = nd_matrix(sigma_bump, basis8)
    small = nd_matrix(sigma_bump, boundary_trig_basis(basis8.mesh, 3))
    np.testing.assert_allclose(A.truncate(3).matrix, small.matrix, atol=1e-14)


def test_inadmissible_sigma(mesh4, basis8):
    with pytest.raises(SingularSystemError):
        nd_matrix(ConductivityField.constant(mesh4, 0.0), basis8)
    with pytest.raises(ValueError):
        analytic_nd_constant(-1.0, basis8)


def test_derivative_along_sigma(sigma_bump, basis8):
    A = nd_matrix(sigma_bump, basis8).matrix
    np.testing.assert_allclose(dlambda_matrix(sigma_bump, sigma_bump, basis8), -A, atol=1e-12)
    np.testing.assert_allclose(perturbation_chain(sigma_bump, [sigma_bump], basis8), -A, atol=1e-12)


def test_perturbation_of_self_is_minus_identity(sigma_bump, basis8):
    u = solve_neumann(sigma_bump, np.eye(16)[2], basis8)
    w = apply_perturbation(sigma_bump, sigma_bump * 0.3, u, basis8)
    np.testing.assert_allclose(w.values, -0.3 * u.values, atol=1e-10)


def test_perturbation_norm(sigma_bump):
    assert perturbation_norm(sigma_bump, sigma_bump * 0.3) == pytest.approx(0.3, rel=1e-8)
    assert require_contraction(sigma_bump, sigma_bump * 0.5) < 1
    with pytest.raises(ContractionError):
        require_contraction(sigma_bump, sigma_bump * 1.2)
    assert perturbation_norm(sigma_bump, sigma_bump * 0.0) == 0.0
