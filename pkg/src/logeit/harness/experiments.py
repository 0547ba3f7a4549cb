"""Finite-section experiments for the logarithmic forward map."""

from __future__ import annotations

import time
from typing import Sequence

import numpy as np

from ..basis import BoundaryBasis, fourier_weights, sobolev_operator_norm
from ..calculus import eigensystem
from ..derivatives import log_derivative
from ..errors import DomainError, InputOrderError, PlateauError
from ..fem import (
    ConductivityField,
    dlambda_matrix,
    nd_matrix,
    perturbation_chain,
    require_contraction,
)
from .ensemble import ConductivityEnsemble
from .report import ExperimentReport, fit_slope

__all__ = [
    "default_direction",
    "dl_lipschitz_check",
    "linearization_error_compare",
    "loewner_heinz_check",
    "monotonicity_check",
    "neumann_series_check",
    "norm_equivalence_survey",
    "relative_boundedness_experiment",
    "tau_rate_experiment",
]


def default_direction(mesh) -> ConductivityField:
    """A fixed smooth nonconstant direction with sup norm at most 1."""
    f = ConductivityField.from_function(
        mesh, lambda x, y: 0.5 + 0.3 * np.cos(3 * x) * (1 + y) + 0.2 * x * y, is_log=True
    )
    return f / f.sup_norm()


def _opnorm(M, r_in, r_out, basis) -> float:
    return sobolev_operator_norm(M, r_in, r_out, basis)


def _log_matrix(A: np.ndarray) -> np.ndarray:
    E = eigensystem(A)
    return E.function(np.log(E.eigenvalues))


def _random_vectors(dim: int, count: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((dim, count))


def _quad_forms(M: np.ndarray, X: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->j", X, M @ X)


def _finish(rep: ExperimentReport, t0: float) -> ExperimentReport:
    rep.runtime = time.perf_counter() - t0
    return rep


def tau_rate_experiment(
    sigma: ConductivityField,
    eps: float,
    basis: BoundaryBasis,
    taus: Sequence[float] | None = None,
    eta: ConductivityField | None = None,
    n_tau: int = 12,
    upper_fraction: float = 0.1,
) -> ExperimentReport:
    """Decay of the shift error ``log Lambda - log(Lambda + tau I)`` as ``tau -> 0``.

    Both ``||log Lambda - log Lambda_tau||`` and
    ``||DF_0(sigma; eta) - DF_tau(sigma; eta)|| / ||eta||_inf`` are measured
    from ``H^eps`` to ``H^-eps`` and fitted against ``tau`` on a log-log
    scale.

    The default grid is geometric from the smallest eigenvalue to
    ``upper_fraction`` times the largest: below the smallest eigenvalue the
    truncation saturates the difference, and near the largest one the rate
    bends towards the linear regime of ``log(1 + tau / lambda_1)``.

    Raises
    ------
    PlateauError
        If an explicit grid leaves ``[lambda_min, lambda_max]``.
    """
    t0 = time.perf_counter()
    if not 0 < eps <= 0.5:
        raise DomainError("eps must lie in (0, 1/2]")
    E = eigensystem(nd_matrix(sigma, basis))
    lam = E.eigenvalues
    lo, hi = float(lam[-1]), float(lam[0])
    if taus is None:
        taus = np.geomspace(lo, upper_fraction * hi, n_tau)
    taus = np.asarray(taus, dtype=float)
    if taus.size < 3:
        raise ValueError("tau grid needs at least three points")
    if taus.min() < lo * (1 - 1e-9) or taus.max() > hi * (1 + 1e-9):
        raise PlateauError(
            f"tau grid [{taus.min():.3g}, {taus.max():.3g}] leaves the resolvable range [{lo:.3g}, {hi:.3g}]"
        )
    eta = default_direction(sigma.mesh) if eta is None else eta
    S = dlambda_matrix(sigma, eta, basis)
    D0 = log_derivative(E, S, 0.0)
    log_diff = np.array([_opnorm(E.function(np.log1p(t / lam)), eps, -eps, basis) for t in taus])
    der_diff = np.array(
        [_opnorm(D0 - log_derivative(E, S, t), eps, -eps, basis) for t in taus]
    ) / eta.sup_norm()

    rep = ExperimentReport(
        "tau_rate",
        params={"eps": eps, "N": basis.max_frequency, "lambda_min": lo, "lambda_max": hi,
                "sigma": sigma.digest()},
    )
    rep.add_table("rates", tau=taus, log_difference=log_diff, derivative_difference=der_diff)
    f1 = rep.add_fit("log_difference", fit_slope(taus, log_diff))
    f2 = rep.add_fit("derivative_difference", fit_slope(taus, der_diff))
    rep.add_table("log_difference_fit", tau=taus, fit=np.exp(f1.intercept) * taus**f1.slope)
    rep.add_curve("log_difference", "rates", "tau", "log_difference")
    rep.add_curve("log_difference_fit", "log_difference_fit", "tau", "fit")
    rep.add_curve("derivative_difference", "rates", "tau", "derivative_difference")
    rep.gate("log_difference_slope", f1.slope, 2 * eps - 0.1, 2 * eps + 0.15)
    rep.gate("derivative_difference_slope", f2.slope, eps - 0.1)
    return _finish(rep, t0)


def relative_boundedness_experiment(
    kappa1: ConductivityField,
    kappa2: ConductivityField,
    basis: BoundaryBasis,
    N_grid: Sequence[int] = (8, 16, 32, 64),
    max_variation: float = 1.5,
) -> ExperimentReport:
    """``||L(kappa2) - L(kappa1)||`` against ``||log Lambda(e^kappa1)||`` over truncations.

    ``basis`` must have order at least ``max(N_grid)``; smaller sections are
    leading blocks of the same Galerkin matrix.
    """
    t0 = time.perf_counter()
    A1 = nd_matrix(kappa1.exp(), basis)
    A2 = A1 if kappa2 is kappa1 else nd_matrix(kappa2.exp(), basis)
    Ns = np.array(sorted(N_grid), dtype=int)
    diff, lognorm = [], []
    for n in Ns:
        k = 2 * n
        L1 = _log_matrix(A1.matrix[:k, :k])
        L2 = _log_matrix(A2.matrix[:k, :k])
        diff.append(np.linalg.norm(L2 - L1, 2))
        lognorm.append(np.linalg.norm(L1, 2))
    diff, lognorm = np.array(diff), np.array(lognorm)
    dsig = (kappa2.exp() - kappa1.exp()).sup_norm()

    rep = ExperimentReport("relative_boundedness", params={"N_grid": Ns, "sigma_difference_sup": dsig})
    cols = {"N": Ns, "difference_norm": diff, "log_norm": lognorm}
    if dsig > 0:
        cols["ratio_to_sigma_difference"] = diff / dsig
    rep.add_table("norms", **cols)
    rep.add_curve("difference_norm", "norms", "N", "difference_norm")
    rep.add_curve("log_norm", "norms", "N", "log_norm")
    variation = diff.max() / diff.min() if diff.min() > 0 else (1.0 if diff.max() == 0 else np.inf)
    rep.gate("difference_variation", variation, upper=max_variation)
    fit = rep.add_fit("log_norm_vs_logN", fit_slope(np.log(Ns), lognorm, loglog=False))
    rep.gate("log_norm_slope", fit.slope, 0.8, 1.2)
    return _finish(rep, t0)


def _check_order(s1: ConductivityField, s2: ConductivityField) -> None:
    if np.any(s1.values > s2.values):
        raise InputOrderError("expected sigma_1 <= sigma_2 pointwise")


def monotonicity_check(
    s1: ConductivityField,
    s2: ConductivityField,
    basis: BoundaryBasis,
    n_vectors: int = 100,
    seed: int = 0,
    tol: float = 1e-10,
) -> ExperimentReport:
    """``x^T (Lambda(s1) - Lambda(s2)) x >= 0`` for ``s1 <= s2`` on random ``x``."""
    t0 = time.perf_counter()
    _check_order(s1, s2)
    D = nd_matrix(s1, basis).matrix - nd_matrix(s2, basis).matrix
    X = _random_vectors(basis.dim, n_vectors, seed)
    q = _quad_forms(D, X) / np.einsum("ij,ij->j", X, X)
    rep = ExperimentReport("monotonicity", params={"n_vectors": n_vectors, "seed": seed})
    rep.add_table("forms", normalized_form=q)
    rep.params["min_eigenvalue"] = float(np.linalg.eigvalsh(D)[0])
    rep.gate("min_normalized_form", float(q.min()), lower=-tol)
    return _finish(rep, t0)


def loewner_heinz_check(
    s1: ConductivityField,
    s2: ConductivityField,
    r: float,
    basis: BoundaryBasis,
    n_vectors: int = 100,
    seed: int = 0,
    rtol: float = 1e-9,
) -> ExperimentReport:
    """Order of fractional ND powers for ``s1 <= s2``.

    Checks ``<Lambda(s1)^(-2r) f, f> <= <Lambda(s2)^(-2r) f, f>`` and
    ``<Lambda(s2)^(2r) f, f> <= <Lambda(s1)^(2r) f, f>`` for ``r`` in [0, 1/2].
    """
    t0 = time.perf_counter()
    if not 0.0 <= r <= 0.5:
        raise DomainError("r must lie in [0, 1/2]")
    _check_order(s1, s2)
    E1 = eigensystem(nd_matrix(s1, basis))
    E2 = eigensystem(nd_matrix(s2, basis))
    X = _random_vectors(basis.dim, n_vectors, seed)
    rep = ExperimentReport("loewner_heinz", params={"r": r, "n_vectors": n_vectors, "seed": seed})
    for label, p, small, large in (("inverse", -2 * r, E1, E2), ("forward", 2 * r, E2, E1)):
        qs = _quad_forms(small.function(small.eigenvalues**p), X)
        ql = _quad_forms(large.function(large.eigenvalues**p), X)
        viol = (qs - ql) / np.maximum(np.abs(qs), np.abs(ql))
        rep.add_table(label, smaller_side=qs, larger_side=ql, relative_violation=viol)
        rep.gate(f"{label}_max_violation", float(viol.max()), upper=rtol)
    return _finish(rep, t0)


def _equivalence_constants(A: np.ndarray, r: float, freq: np.ndarray) -> tuple[float, float]:
    E = eigensystem(A)
    w = fourier_weights(freq, r)
    M = E.function(E.eigenvalues ** (-2 * r))
    G = M / np.outer(w, w)
    ev = np.linalg.eigvalsh(0.5 * (G + G.T))
    return float(np.sqrt(ev[-1])), float(np.sqrt(ev[0]))


def norm_equivalence_survey(
    ensemble: ConductivityEnsemble,
    r,
    basis: BoundaryBasis,
    n_vectors: int = 100,
    seed: int = 0,
    rtol: float = 1e-9,
    max_drift: float = 0.1,
    resample_seed: int | None = None,
) -> ExperimentReport:
    """Sandwich of ``||f||_{r,sigma}`` between the bound constants, and H^r equivalence.

    ``basis`` has order ``2N``; the survey runs at ``N`` and ``2N`` and
    records how much the worst Fourier equivalence constant
    ``max(upper, 1/lower)`` moves.  With ``resample_seed`` the survey is
    repeated on a freshly drawn ensemble and that drift is gated too.
    ``r`` may be a sequence, sharing the ND matrices across indices.
    """
    t0 = time.perf_counter()
    rs = [float(v) for v in np.atleast_1d(r)]
    if any(not -0.5 <= v <= 0.5 for v in rs):
        raise DomainError("r must lie in [-1/2, 1/2]")
    if basis.max_frequency % 2:
        raise ValueError("basis order must be even (the survey also runs at half of it)")
    mesh = basis.mesh
    lo, hi = ensemble.bounds
    Nh = basis.max_frequency // 2
    E_one = eigensystem(nd_matrix(ConductivityField.constant(mesh, 1.0), basis))
    mats = [nd_matrix(s, basis).matrix for s in ensemble.fields(mesh)]
    if resample_seed is not None:
        other = ConductivityEnsemble(
            resample_seed, ensemble.count, ensemble.rule, ensemble.bounds, ensemble.constant_every
        )
        other_mats = [nd_matrix(s, basis).matrix for s in other.fields(mesh)]
    X = _random_vectors(basis.dim, n_vectors, seed)
    systems = [eigensystem(A) for A in mats]

    def constant(matrices, n, rv):
        k = 2 * n
        c = np.array([_equivalence_constants(A[:k, :k], rv, basis.frequencies[:k]) for A in matrices])
        return c, float(np.max(np.maximum(c[:, 0], 1.0 / c[:, 1])))

    rep = ExperimentReport(
        "norm_equivalence",
        params={"r": rs, "bounds": [lo, hi], "count": ensemble.count, "seed": ensemble.seed},
    )
    for rv in rs:
        tag = "" if len(rs) == 1 else f"r={rv:g}/"
        # ||f||_{r,c}^2 = c^(2r) ||f||_{r,1}^2 for a constant c
        q_one = _quad_forms(E_one.function(E_one.eigenvalues ** (-2 * rv)), X)
        q_lo, q_hi = lo ** (2 * rv) * q_one, hi ** (2 * rv) * q_one
        small, large = (q_hi, q_lo) if rv <= 0 else (q_lo, q_hi)
        worst = -np.inf
        for E in systems:
            q = _quad_forms(E.function(E.eigenvalues ** (-2 * rv)), X)
            worst = max(worst, float(np.max((small - q) / q)), float(np.max((q - large) / q)))
        rep.gate(f"{tag}sandwich_max_violation", worst, upper=rtol)
        (cn, c_n), (c2n, c_2n) = constant(mats, Nh, rv), constant(mats, 2 * Nh, rv)
        rep.add_table(
            f"{tag}equivalence",
            N=[Nh, 2 * Nh],
            worst_upper=[cn[:, 0].max(), c2n[:, 0].max()],
            worst_lower=[cn[:, 1].min(), c2n[:, 1].min()],
            constant=[c_n, c_2n],
        )
        rep.gate(f"{tag}refinement_drift", abs(c_2n - c_n) / c_n, upper=max_drift)
        if resample_seed is not None:
            c_other = constant(other_mats, 2 * Nh, rv)[1]
            rep.params[f"{tag}resampled_constant"] = c_other
            rep.gate(f"{tag}resample_drift", abs(c_other - c_2n) / c_2n, upper=max_drift)
    if resample_seed is not None:
        rep.params["resample_seed"] = resample_seed
    return _finish(rep, t0)


def dl_lipschitz_check(
    pairs: Sequence[tuple[ConductivityField, ConductivityField]],
    eta: ConductivityField,
    basis: BoundaryBasis,
    max_drift: float = 0.1,
) -> ExperimentReport:
    """Ratio ``||DL(k2; eta) - DL(k1; eta)|| / (||eta|| ||e^k2 - e^k1||)`` under refinement.

    ``basis`` has order ``2N``; ratios are computed at ``N`` and ``2N`` from
    leading blocks of the same Galerkin matrices.
    """
    t0 = time.perf_counter()
    if basis.max_frequency % 2:
        raise ValueError("basis order must be even")
    Nh = basis.max_frequency // 2
    ratios = {Nh: [], 2 * Nh: []}
    nums = {Nh: [], 2 * Nh: []}
    for k1, k2 in pairs:
        dsig = (k2.exp() - k1.exp()).sup_norm()
        blocks = []
        for kappa in (k1, k2):
            s = kappa.exp()
            blocks.append((nd_matrix(s, basis).matrix, dlambda_matrix(s, eta * s, basis)))
        for n in (Nh, 2 * Nh):
            k = 2 * n
            d = [log_derivative(eigensystem(A[:k, :k]), S[:k, :k]) for A, S in blocks]
            num = float(np.linalg.norm(d[1] - d[0], 2))
            nums[n].append(num)
            ratios[n].append(num / (eta.sup_norm() * dsig) if dsig > 0 else 0.0)
    rep = ExperimentReport("dl_lipschitz", params={"pairs": len(pairs), "N": [Nh, 2 * Nh]})
    rep.add_table(
        "ratios",
        pair=np.arange(len(pairs)),
        numerator_N=nums[Nh],
        numerator_2N=nums[2 * Nh],
        ratio_N=ratios[Nh],
        ratio_2N=ratios[2 * Nh],
    )
    m1, m2 = max(ratios[Nh]), max(ratios[2 * Nh])
    rep.params["max_ratio_N"] = m1
    rep.params["max_ratio_2N"] = m2
    rep.gate("max_ratio_drift", abs(m2 - m1) / m1 if m1 > 0 else 0.0, upper=max_drift)
    return _finish(rep, t0)


def neumann_series_check(
    sigma: ConductivityField,
    eta: ConductivityField,
    basis: BoundaryBasis,
    order: int = 3,
    ratio_tol: float = 0.25,
) -> ExperimentReport:
    """Remainders of the Taylor series of ``Lambda`` about ``sigma`` in direction ``eta``.

    The k-th term is ``tr P(sigma, eta)^k N(sigma)``; remainders should
    shrink by roughly ``||P(sigma, eta)||`` per order.

    Raises
    ------
    ContractionError
        If the power-iteration estimate of ``||P||`` is at least one.
    """
    t0 = time.perf_counter()
    p_norm = require_contraction(sigma, eta)
    target = nd_matrix(sigma + eta, basis).matrix
    partial = nd_matrix(sigma, basis).matrix.copy()
    rem = [np.linalg.norm(target - partial, 2)]
    fact = 1.0
    for k in range(1, order + 1):
        fact *= k
        term = perturbation_chain(sigma, [eta] * k, basis) / fact
        partial = partial + 0.5 * (term + term.T)
        rem.append(np.linalg.norm(target - partial, 2))
    rem = np.array(rem)
    rep = ExperimentReport("neumann_series", params={"order": order, "P_norm": p_norm})
    rep.add_table("remainders", order=np.arange(order + 1), remainder=rem)
    rep.add_curve("remainder", "remainders", "order", "remainder")
    scale = np.linalg.norm(target, 2)
    if rem[0] <= 1e-13 * scale:
        rep.gate("zeroth_remainder", rem[0] / scale, upper=1e-13)
        return _finish(rep, t0)
    ratios = rem[1:] / rem[:-1]
    observed = float((rem[-1] / rem[0]) ** (1.0 / order))
    rep.params["observed_ratio"] = observed
    rep.add_table("ratios", order=np.arange(1, order + 1), ratio=ratios)
    rep.gate("max_step_ratio", float(ratios.max()), upper=1.0)
    rep.gate("ratio_vs_P_norm", observed / p_norm, 1 - ratio_tol, 1 + ratio_tol)
    return _finish(rep, t0)


def linearization_error_compare(
    kappa0: ConductivityField,
    perturbations: Sequence[ConductivityField],
    basis: BoundaryBasis,
) -> ExperimentReport:
    """Relative linearization errors of ``Lambda`` (in sigma) and ``L`` (in kappa).

    Each perturbation ``h`` acts on the log-conductivity; the ND map sees the
    same conductivity change ``e^(kappa0+h) - e^kappa0``.  ``Lambda`` errors
    are measured from ``H^-1/2`` to ``H^1/2``, ``L`` errors in L2.
    """
    t0 = time.perf_counter()
    s0 = kappa0.exp()
    A0 = nd_matrix(s0, basis).matrix
    E0 = eigensystem(A0)
    L0 = E0.function(np.log(E0.eigenvalues))
    err_lam, err_log = [], []
    for h in perturbations:
        s1 = (kappa0 + h).exp()
        A1 = nd_matrix(s1, basis).matrix
        dA = A1 - A0
        lin = dlambda_matrix(s0, s1 - s0, basis)
        err_lam.append(_opnorm(dA - lin, -0.5, 0.5, basis) / _opnorm(dA, -0.5, 0.5, basis))
        dLog = _log_matrix(A1) - L0
        linL = log_derivative(E0, dlambda_matrix(s0, h * s0, basis))
        err_log.append(np.linalg.norm(dLog - linL, 2) / np.linalg.norm(dLog, 2))
    err_lam, err_log = np.array(err_lam), np.array(err_log)
    med_lam, med_log = float(np.median(err_lam)), float(np.median(err_log))
    rep = ExperimentReport(
        "linearization",
        params={"samples": len(perturbations), "median_lambda": med_lam, "median_log": med_log},
    )
    rep.add_table("errors", sample=np.arange(err_lam.size), rel_err_lambda=err_lam, rel_err_log=err_log)
    rep.gate("median_ratio_log_over_lambda", med_log / med_lam, upper=1.0)
    return _finish(rep, t0)
