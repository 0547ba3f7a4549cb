import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logeit.calculus import (
    SobolevOperator,
    SpectralFunctionSpec,
    apply_spectral_function,
    eigensystem,
    riesz_dunford_log,
    sigma_norm,
    spectral_log,
    spectral_power,
)
from logeit.errors import ContourError, DefinitenessError, DomainError
from logeit.fem import ConductivityField, nd_matrix


def _spd(seed, n=6, cond=50.0):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.geomspace(1.0, 1.0 / cond, n)
    return (Q * lam) @ Q.T


def test_eigensystem_examples():
    E = eigensystem(np.diag([1.0, 2.0]))
    np.testing.assert_array_equal(E.eigenvalues, [2.0, 1.0])
    np.testing.assert_allclose(np.abs(E.eigenvectors), [[0, 1], [1, 0]])
    E = eigensystem(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(E.eigenvalues, [3.0, 1.0])
    # sign convention: first significant entry positive
    assert E.eigenvectors[0, 0] > 0 and E.eigenvectors[0, 1] > 0
    with pytest.raises(DefinitenessError):
        eigensystem(np.diag([1.0, -1.0]))


def test_log_and_power_of_diagonal():
    A = np.diag([2.0, 1.0])
    np.testing.assert_allclose(spectral_log(A).matrix, np.diag([np.log(2), 0.0]), atol=1e-15)
    np.testing.assert_allclose(spectral_log(A, tau=1.0).matrix, np.diag([np.log(3), np.log(2)]))
    P = spectral_power(A, -1.0)
    np.testing.assert_allclose(P.matrix, np.diag([0.5, 1.0]))
    assert (P.r_in, P.r_out) == (0.5, -0.5)


def test_signatures():
    E = eigensystem(np.diag([2.0, 1.0]))
    assert (spectral_log(np.diag([2.0, 1.0]), eps=0.1).r_in, spectral_log(np.diag([2.0, 1.0]), eps=0.1).r_out) == (0.1, -0.1)
    op = apply_spectral_function(E, SpectralFunctionSpec.log(tau=0.5))
    assert (op.r_in, op.r_out) == (0.0, 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        SpectralFunctionSpec("power", exponent=1.5)
    with pytest.raises(ValueError):
        SpectralFunctionSpec("sqrt")
    with pytest.raises(ValueError):
        SpectralFunctionSpec("log", tau=0.1)


def test_domain_error():
    E = eigensystem(np.diag([2.0, 1e-3]))
    from dataclasses import replace

    bad = replace(E, eigenvalues=np.array([2.0, -1.0]))
    with pytest.raises(DomainError):
        apply_spectral_function(bad, SpectralFunctionSpec.log())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_power_composition(seed, a, b):
    A = _spd(seed)
    if abs(a + b) > 1.0:
        b = np.sign(b) * (1.0 - abs(a))
    lhs = spectral_power(A, a).matrix @ spectral_power(A, b).matrix
    np.testing.assert_allclose(lhs, spectral_power(A, a + b).matrix, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_log_inverts_exp(seed):
    A = _spd(seed)
    L = spectral_log(A).matrix
    E = eigensystem(L + 10 * np.eye(6))  # shift keeps it positive definite
    back = E.function(np.exp(E.eigenvalues - 10))
    np.testing.assert_allclose(back, A, atol=1e-12)


def test_riesz_dunford_diag():
    op, info = riesz_dunford_log(np.diag([2.0, 1.0]), return_info=True)
    np.testing.assert_allclose(op.matrix, np.diag([np.log(2.0), 0.0]), atol=1e-12)
    assert info["imag_residual"] < 1e-10


def test_riesz_dunford_on_nd(sigma_bump, basis8):
    A = nd_matrix(sigma_bump, basis8)
    np.testing.assert_allclose(riesz_dunford_log(A).matrix, spectral_log(A).matrix, atol=1e-10)


def test_riesz_dunford_rejects_bad_spectra():
    with pytest.raises(ContourError):
        riesz_dunford_log(np.diag([1.0, 0.0]))
    with pytest.raises(ContourError):
        riesz_dunford_log(np.diag([1.0, 1e-8]))


def test_sigma_norm_disk_oracle(mesh4, basis8):
    E = eigensystem(nd_matrix(ConductivityField.constant(mesh4, 1.0), basis8))
    f = np.random.default_rng(3).standard_normal(16)
    assert sigma_norm(f, 0.0, E) == pytest.approx(np.linalg.norm(f))
    # lambda_n close to 1/n: ||f||_{1/2,1}^2 close to sum n f_n^2
    exact = np.sqrt(np.sum(basis8.frequencies * f**2))
    assert sigma_norm(f, 0.5, E) == pytest.approx(exact, rel=0.01)
    with pytest.raises(ValueError):
        sigma_norm(f, 0.7, E)


def test_sobolev_operator_algebra(basis8):
    A = SobolevOperator(np.eye(16), 0.0, 0.0, True, basis8)
    B = A.scaled(2.0)
    np.testing.assert_allclose((B - A).matrix, np.eye(16))
    np.testing.assert_allclose((B + A).matrix, 3 * np.eye(16))
    assert A.norm() == pytest.approx(1.0)
    assert A.with_signature(0.5, -0.5).norm() == pytest.approx(2**-0.5)
