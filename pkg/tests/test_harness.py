import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logeit import build_disk_mesh
from logeit.basis import boundary_trig_basis
from logeit.calculus import eigensystem, spectral_log
from logeit.errors import DegenerateFitError, DomainError, InputOrderError, PlateauError
from logeit.fem import ConductivityField, nd_matrix
from logeit.harness import (
    ConductivityEnsemble,
    ExperimentReport,
    default_direction,
    dl_lipschitz_check,
    fd_check,
    fit_slope,
    inclusion_perturbations,
    linearization_error_compare,
    loewner_heinz_check,
    monotonicity_check,
    neumann_series_check,
    norm_equivalence_survey,
    relative_boundedness_experiment,
    tau_rate_experiment,
)


@pytest.fixture(scope="module")
def mesh3():
    return build_disk_mesh(3)


# --- report ------------------------------------------------------------------


def test_fit_slope_power_law():
    x = np.geomspace(1e-3, 1.0, 9)
    fit = fit_slope(x, 3.0 * x**1.5)
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert np.exp(fit.intercept) == pytest.approx(3.0, rel=1e-12)
    assert fit.residual < 1e-12
    lin = fit_slope([0.0, 1.0, 2.0], [1.0, 3.0, 5.0], loglog=False)
    assert lin.slope == pytest.approx(2.0)


def test_fit_slope_degenerate():
    with pytest.raises(DegenerateFitError):
        fit_slope([1.0], [2.0])
    with pytest.raises(DegenerateFitError):
        fit_slope([1.0, 2.0, 3.0], [1.0, 0.0, 2.0])


def test_report_gates_and_tables():
    rep = ExperimentReport("demo")
    rep.gate("inside", 0.5, 0.0, 1.0)
    assert rep.passed
    rep.gate("outside", 2.0, upper=1.0)
    assert not rep.passed
    assert "outside" in rep.summary()
    with pytest.raises(ValueError):
        rep.add_table("bad", a=[1, 2], b=[1])
    rep.add_table("t", a=[1, 2], b=[3.5, 4.5])
    assert rep.table_csv("t").splitlines()[0] == "a,b"


def test_report_json_is_deterministic(mesh4, basis8):
    s = ConductivityField.constant(mesh4, 1.0)
    a = monotonicity_check(s, s * 2.0, basis8, n_vectors=10)
    b = monotonicity_check(s, s * 2.0, basis8, n_vectors=10)
    assert a.runtime > 0
    assert a.to_json() == b.to_json()
    assert "runtime" not in json.loads(a.to_json())


# --- finite differences --------------------------------------------------------


def test_fd_check_exact_on_linear_map():
    M = np.array([[2.0, 1.0], [1.0, 3.0]])
    rep = fd_check(lambda x: x * M, M, 1.0, 1.0, exact=True)
    assert rep.passed


def test_fd_check_quadratic_rate():
    M = np.array([[2.0, 1.0], [1.0, 3.0]])
    rep = fd_check(lambda x: np.sin(x) * M, np.cos(0.7) * M, 0.7, 1.0)
    assert rep.passed
    assert rep.fits["error_slope"].slope == pytest.approx(2.0, abs=0.05)


def test_fd_check_rejects_roundoff_only():
    M = np.eye(2)
    with pytest.raises(DegenerateFitError):
        fd_check(lambda x: x * M, M, 1.0, 1.0)


# --- tau rates -----------------------------------------------------------------


def test_shift_error_matches_log1p(mesh4, basis8, sigma_bump):
    A = nd_matrix(sigma_bump, basis8)
    E = eigensystem(A)
    tau = 0.3 * E.eigenvalues[0]
    direct = spectral_log(A).matrix - spectral_log(A, tau).matrix
    np.testing.assert_allclose(E.function(-np.log1p(tau / E.eigenvalues)), direct, atol=1e-13)


def test_tau_rate_rejects_grid_outside_spectrum(basis8, sigma_bump):
    lam = eigensystem(nd_matrix(sigma_bump, basis8)).eigenvalues
    with pytest.raises(PlateauError):
        tau_rate_experiment(sigma_bump, 0.25, basis8, taus=[0.1 * lam[-1], lam[-1], lam[0]])
    with pytest.raises(DomainError):
        tau_rate_experiment(sigma_bump, 0.7, basis8)


def test_tau_rate_report_layout(mesh4):
    basis = boundary_trig_basis(mesh4, 32)
    rep = tau_rate_experiment(ConductivityField.constant(mesh4, 1.0), 0.5, basis)
    assert set(rep.tables["rates"]) == {"tau", "log_difference", "derivative_difference"}
    assert rep.gates[0].passed
    assert len(rep.curves) == 3


def test_default_direction_is_normalized(mesh4):
    assert default_direction(mesh4).sup_norm() == pytest.approx(1.0)


# --- order and boundedness ---------------------------------------------------------


def test_monotonicity_constant_pair(mesh4, basis8):
    s1 = ConductivityField.constant(mesh4, 1.0)
    rep = monotonicity_check(s1, s1 * 2.0, basis8, n_vectors=50)
    assert rep.passed
    # Lambda(1) - Lambda(2) = Lambda(1) / 2
    lam = eigensystem(nd_matrix(s1, basis8)).eigenvalues
    assert rep.params["min_eigenvalue"] == pytest.approx(lam[-1] / 2, rel=1e-10)


def test_order_checks_reject_swapped_inputs(mesh4, basis8):
    s1 = ConductivityField.constant(mesh4, 1.0)
    with pytest.raises(InputOrderError):
        monotonicity_check(s1 * 2.0, s1, basis8)
    with pytest.raises(InputOrderError):
        loewner_heinz_check(s1 * 2.0, s1, 0.25, basis8)
    with pytest.raises(DomainError):
        loewner_heinz_check(s1, s1 * 2.0, 0.75, basis8)


def test_loewner_heinz_at_zero_is_equality(mesh4, basis8, sigma_bump):
    rep = loewner_heinz_check(sigma_bump, sigma_bump * 1.5, 0.0, basis8, n_vectors=20)
    assert rep.passed
    np.testing.assert_allclose(rep.tables["inverse"]["relative_violation"], 0.0, atol=1e-12)


@pytest.mark.parametrize("r", [0.1, 0.25, 0.5])
def test_loewner_heinz_bump_pair(mesh4, basis8, sigma_bump, r):
    assert loewner_heinz_check(sigma_bump, sigma_bump * 1.5, r, basis8, n_vectors=40).passed


def test_boundedness_constant_pair(mesh4):
    basis = boundary_trig_basis(mesh4, 16)
    k1 = ConductivityField.constant(mesh4, 0.0, is_log=True)
    k2 = ConductivityField.constant(mesh4, np.log(2.0), is_log=True)
    rep = relative_boundedness_experiment(k1, k2, basis, N_grid=(4, 8, 16))
    # L(k + c) = L(k) - c I
    np.testing.assert_allclose(rep.tables["norms"]["difference_norm"], np.log(2.0), rtol=1e-10)
    assert rep.gates[0].value == pytest.approx(1.0)


# --- norm equivalence --------------------------------------------------------------


def test_norm_survey_constant_ensemble(mesh4):
    basis = boundary_trig_basis(mesh4, 8)
    ens = ConductivityEnsemble(seed=3, count=4, constant_every=1)
    rep = norm_equivalence_survey(ens, [-0.5, 0.0, 0.5], basis, n_vectors=20)
    assert rep.passed
    # r = 0 is the identity: constants are exactly one
    np.testing.assert_allclose(rep.tables["r=0/equivalence"]["constant"], 1.0, rtol=1e-12)


def test_norm_survey_rejects_bad_input(mesh4, basis8):
    with pytest.raises(DomainError):
        norm_equivalence_survey(ConductivityEnsemble(count=2), 0.75, basis8)
    with pytest.raises(ValueError):
        norm_equivalence_survey(ConductivityEnsemble(count=2), 0.25, boundary_trig_basis(mesh4, 7))


# --- Lipschitz, Neumann series, linearization ---------------------------------------------


def test_lipschitz_constant_shift_is_flat(mesh4, basis8, eta_smooth):
    # DL(kappa; eta) is invariant under constant shifts of kappa
    k1 = ConductivityField.from_function(mesh4, lambda x, y: 0.3 * x, is_log=True)
    rep = dl_lipschitz_check([(k1, k1 + 0.4)], eta_smooth, basis8)
    np.testing.assert_allclose(rep.tables["ratios"]["numerator_2N"], 0.0, atol=1e-11)


@pytest.mark.parametrize("t", [0.1, 0.3])
def test_neumann_series_scalar_direction(mesh4, basis8, t):
    # Lambda(s + t s) = Lambda(s) / (1 + t): remainders are t^(k+1) / (1 + t) ||Lambda||
    s = ConductivityField.constant(mesh4, 1.5)
    rep = neumann_series_check(s, s * t, basis8, order=3)
    norm = np.linalg.norm(nd_matrix(s, basis8).matrix, 2)
    expect = t ** np.arange(1, 5) / (1 + t) * norm
    np.testing.assert_allclose(rep.tables["remainders"]["remainder"], expect, rtol=1e-6)
    assert rep.params["P_norm"] == pytest.approx(t, rel=1e-3)
    assert rep.passed


def test_neumann_series_zero_direction(mesh4, basis8):
    s = ConductivityField.constant(mesh4, 1.0)
    rep = neumann_series_check(s, s * 0.0, basis8)
    assert [g.name for g in rep.gates] == ["zeroth_remainder"]
    assert rep.passed


def test_linearization_constant_perturbations(mesh4, basis8):
    kappa0 = ConductivityField.from_function(mesh4, lambda x, y: 0.4 * x * y, is_log=True)
    perts = [ConductivityField.constant(mesh4, c, is_log=True) for c in (-0.5, 0.3, 0.7)]
    rep = linearization_error_compare(kappa0, perts, basis8)
    c = np.array([-0.5, 0.3, 0.7])
    np.testing.assert_allclose(rep.tables["errors"]["rel_err_log"], 0.0, atol=1e-12)
    # Lambda(e^c s) = e^-c Lambda(s), linearized as (2 - e^c) Lambda(s)
    expect = (np.exp(c) + np.exp(-c) - 2) / np.abs(np.exp(-c) - 1)
    np.testing.assert_allclose(rep.tables["errors"]["rel_err_lambda"], expect, rtol=1e-9)
    assert rep.passed


# --- ensembles -------------------------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(
    st.integers(0, 2**31),
    st.sampled_from(["bumps", "inclusions", "mixed"]),
    st.floats(0.2, 0.9),
    st.floats(1.1, 5.0),
)
def test_ensemble_bounds_and_determinism(mesh3, seed, rule, lo, hi):
    ens = ConductivityEnsemble(seed=seed, count=6, rule=rule, bounds=(lo, hi))
    fields = ens.fields(mesh3)
    assert len(fields) == 6
    for f in fields:
        assert lo * (1 - 1e-12) <= f.min() and f.max() <= hi * (1 + 1e-12)
    again = ConductivityEnsemble(seed=seed, count=6, rule=rule, bounds=(lo, hi)).fields(mesh3)
    assert [f.digest() for f in fields] == [f.digest() for f in again]
    assert fields[4].is_constant()


def test_ensemble_pairs_are_ordered(mesh3):
    for s1, s2 in ConductivityEnsemble(seed=1, count=5).monotone_pairs(mesh3):
        assert np.all(s1.values <= s2.values)


def test_ensemble_rejects_bad_parameters():
    with pytest.raises(ValueError):
        ConductivityEnsemble(rule="stripes")
    with pytest.raises(ValueError):
        ConductivityEnsemble(bounds=(2.0, 1.0))
    with pytest.raises(ValueError):
        ConductivityEnsemble(count=0)


def test_inclusion_perturbations(mesh3):
    perts = inclusion_perturbations(mesh3, 6, contrast=3.0, seed=2)
    for h in perts:
        assert set(np.round(np.unique(np.abs(h.values)), 12)) <= {0.0, round(np.log(3.0), 12)}
        assert h.sup_norm() > 0
