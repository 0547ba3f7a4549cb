"""The acceptance suite: one gated report per numbered check.

Every function takes a base ``seed`` from which all random choices are
derived, and returns an :class:`~logeit.harness.ExperimentReport` whose gates
carry the acceptance thresholds.  ``SUITE`` lists them in order.
"""

from __future__ import annotations

import time

import numpy as np

from .basis import boundary_trig_basis
from .calculus import riesz_dunford_log, spectral_log
from .derivatives import d2f_tau, df_tau_quadrature, df_tau_spectral, dk_lambda, dL, dlambda
from .fem import ConductivityField, nd_matrix
from .harness import (
    ConductivityEnsemble,
    ExperimentReport,
    default_direction,
    dl_lipschitz_check,
    fd_check,
    inclusion_perturbations,
    linearization_error_compare,
    loewner_heinz_check,
    monotonicity_check,
    neumann_series_check,
    norm_equivalence_survey,
    relative_boundedness_experiment,
    tau_rate_experiment,
)
from .mesh import build_disk_mesh

__all__ = ["SUITE", "derive_seed", "run_suite"]


def derive_seed(seed: int, tag: int) -> int:
    """Independent child seed for sub-experiment ``tag``."""
    return int(np.random.SeedSequence([int(seed), int(tag)]).generate_state(1)[0])


def _timed(name, body, seed, budget):
    t0 = time.perf_counter()
    rep = ExperimentReport(name, params={"seed": seed, "runtime_budget_s": budget})
    body(rep)
    rep.runtime = time.perf_counter() - t0
    return rep


def disk_oracle(seed: int = 0) -> ExperimentReport:
    """Unit conductivity: eigenvalues against ``1/n`` on two mesh levels."""

    def body(rep):
        errs = {}
        for level in (4, 5):
            b = boundary_trig_basis(build_disk_mesh(level), 8)
            lam = np.linalg.eigvalsh(nd_matrix(ConductivityField.constant(b.mesh, 1.0), b).matrix)[::-1]
            exact = 1.0 / b.frequencies
            errs[level] = np.abs(lam - exact) / exact
        rep.add_table("relative_errors", n=np.repeat(np.arange(1, 9), 2), level4=errs[4], level5=errs[5])
        rep.gate("max_relative_error_level4", errs[4].max(), upper=0.02)
        rep.gate("max_error_ratio_level5_over_level4", (errs[5] / errs[4]).max(), upper=1.0 - 1e-12)

    return _timed("disk_oracle", body, seed, 30)


def scaling_identity(seed: int = 0) -> ExperimentReport:
    """``Lambda(c sigma) = Lambda(sigma) / c``."""

    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 8)
        s = ConductivityEnsemble(derive_seed(seed, 2), 2, constant_every=0).fields(m)[0]
        A = nd_matrix(s, b).matrix
        cs = [0.5, 2.0, 10.0]
        err = [np.abs(nd_matrix(s * c, b).matrix - A / c).max() for c in cs]
        rep.add_table("errors", c=cs, max_abs_error=err)
        rep.gate("max_abs_error", max(err), upper=1e-12)

    return _timed("scaling_identity", body, seed, 10)


def contour_crosscheck(seed: int = 0) -> ExperimentReport:
    """Contour-integral log against the spectral log on random ND matrices."""

    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 8)
        err, nodes = [], []
        for s in ConductivityEnsemble(derive_seed(seed, 3), 20).fields(m):
            A = nd_matrix(s, b)
            op, info = riesz_dunford_log(A, return_info=True)
            err.append(np.abs(op.matrix - spectral_log(A).matrix).max())
            nodes.append(info["n_quad"])
        rep.add_table("errors", sample=np.arange(len(err)), max_abs_error=err, nodes=nodes)
        rep.gate("max_abs_error", max(err), upper=1e-8)

    return _timed("contour_crosscheck", body, seed, 10)


def quadrature_crosscheck(seed: int = 0) -> ExperimentReport:
    """Closed-form shifted-log derivative against resolvent quadrature."""

    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 8)
        fields = ConductivityEnsemble(derive_seed(seed, 4), 20).fields(m)
        sig, eta = fields[0::2], fields[1::2]
        taus = [0.0, 0.01, 0.1, 1.0]
        rows = {"pair": [], "tau": [], "difference": []}
        for i, (s, e) in enumerate(zip(sig, eta)):
            e = e - 1.0  # signed direction
            for tau in taus:
                d = np.linalg.norm(
                    df_tau_quadrature(s, e, tau, b).matrix - df_tau_spectral(s, e, tau, b).matrix, 2
                )
                rows["pair"].append(i)
                rows["tau"].append(tau)
                rows["difference"].append(d)
        rep.add_table("differences", **rows)
        rep.gate("max_difference", max(rows["difference"]), upper=1e-8)

    return _timed("quadrature_crosscheck", body, seed, 60)


def derivative_fd(seed: int = 0) -> ExperimentReport:
    """Finite-difference slopes and exact identities for every derivative."""

    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 8)
        fields = ConductivityEnsemble(derive_seed(seed, 5), 4, rule="bumps", constant_every=0).fields(m)
        s = fields[0]
        eta = default_direction(m)
        xi = (fields[1] - fields[1].values.mean()) / (fields[1] - fields[1].values.mean()).sup_norm()

        def lam(x):
            return nd_matrix(x, b).matrix

        def logshift(tau):
            return lambda x: spectral_log(nd_matrix(x, b), tau).matrix

        checks = [
            ("dlambda", fd_check(lam, dlambda(s, eta, b), s, eta)),
            (
                "d2lambda",
                fd_check(lambda x: dlambda(x, eta, b).matrix, dk_lambda(s, [eta, xi], b), s, xi),
            ),
        ]
        for tau in (0.1, 1.0):
            checks.append((f"df_tau{tau:g}", fd_check(logshift(tau), df_tau_spectral(s, eta, tau, b), s, eta)))
        checks.append(
            ("d2f_tau0.1", fd_check(logshift(0.1), d2f_tau(s, eta, xi, 0.1, b), s, eta, second_direction=xi))
        )
        kappa = s.log()
        checks.append(
            ("dL", fd_check(lambda k: spectral_log(nd_matrix(k.exp(), b)).matrix, dL(kappa, eta, b), kappa, eta))
        )
        for name, sub in checks:
            rep.merge(sub, f"{name}/")

        A = nd_matrix(s, b).matrix
        rep.gate("exact/dlambda_self", np.abs(dlambda(s, s, b).matrix + A).max(), upper=1e-8)
        rep.gate("exact/d2lambda_self", np.abs(dk_lambda(s, [s, s], b).matrix - 2 * A).max(), upper=1e-8)
        k0 = ConductivityField.constant(m, 0.3, is_log=True)
        c = 0.7
        got = dL(k0, ConductivityField.constant(m, c, is_log=True), b).matrix
        rep.gate("exact/dL_constant", np.abs(got + c * np.eye(b.dim)).max(), upper=1e-8)

    return _timed("derivative_fd", body, seed, 120)


def tau_rates(seed: int = 0) -> ExperimentReport:
    """Shift-error rates for three Sobolev indices on two conductivities."""

    def body(rep):
        m = build_disk_mesh(5)
        b = boundary_trig_basis(m, 64)
        sigmas = {
            "unit": ConductivityField.constant(m, 1.0),
            "bumps": ConductivityEnsemble(derive_seed(seed, 6), 1, rule="bumps", constant_every=0).fields(m)[0],
        }
        for label, s in sigmas.items():
            for eps in (0.1, 0.25, 0.5):
                rep.merge(tau_rate_experiment(s, eps, b), f"{label}/eps{eps:g}/")

    return _timed("tau_rates", body, seed, 60)


def boundedness(seed: int = 0) -> ExperimentReport:
    """Log-difference boundedness against log-growth over N = 8..64."""

    def body(rep):
        m = build_disk_mesh(5)
        b = boundary_trig_basis(m, 64)
        zero = ConductivityField.constant(m, 0.0, is_log=True)
        sub = relative_boundedness_experiment(zero, ConductivityField.constant(m, np.log(2.0), is_log=True), b)
        exact = np.max(np.abs(np.array(sub.tables["norms"]["difference_norm"]) - np.log(2.0)))
        rep.merge(sub, "constant/")
        rep.gate("constant/deviation_from_log2", exact, upper=1e-8)
        ks = ConductivityEnsemble(derive_seed(seed, 7), 10, constant_every=0).log_fields(m)
        for i in range(5):
            rep.merge(relative_boundedness_experiment(ks[2 * i], ks[2 * i + 1], b), f"pair{i}/")

    return _timed("boundedness", body, seed, 120)


def order_inequalities(seed: int = 0) -> ExperimentReport:
    """Monotonicity and fractional-power order on monotone pairs."""

    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 16)
        pairs = ConductivityEnsemble(derive_seed(seed, 8), 20).monotone_pairs(m)
        mono, lh = [], {0.0: [], 0.25: [], 0.5: []}
        vseed = derive_seed(seed, 80)
        for s1, s2 in pairs:
            mono.append(monotonicity_check(s1, s2, b, seed=vseed).gates[0].value)
            for r in lh:
                g = loewner_heinz_check(s1, s2, r, b, seed=vseed).gates
                lh[r].append(max(x.value for x in g))
        rep.add_table("worst", pair=np.arange(len(pairs)), monotone_min_form=mono,
                      **{f"lh_violation_r{r:g}": v for r, v in lh.items()})
        rep.gate("monotone_min_form", min(mono), lower=-1e-10)
        for r, v in lh.items():
            rep.gate(f"loewner_heinz_r{r:g}_max_violation", max(v), upper=1e-9)

    return _timed("order_inequalities", body, seed, 60)


def norm_equivalence(seed: int = 0) -> ExperimentReport:
    def body(rep):
        b = boundary_trig_basis(build_disk_mesh(4), 32)
        ens = ConductivityEnsemble(derive_seed(seed, 9), 50, bounds=(0.5, 2.0))
        sub = norm_equivalence_survey(ens, [-0.5, -0.25, 0.0, 0.25, 0.5], b, seed=derive_seed(seed, 90))
        rep.merge(sub, "")

    return _timed("norm_equivalence", body, seed, 60)


def lipschitz(seed: int = 0) -> ExperimentReport:
    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 32)
        ks = ConductivityEnsemble(derive_seed(seed, 10), 40).log_fields(m)
        rep.merge(dl_lipschitz_check(list(zip(ks[0::2], ks[1::2])), default_direction(m), b), "")

    return _timed("lipschitz", body, seed, 60)


def neumann_series(seed: int = 0) -> ExperimentReport:
    """Taylor remainders on five contractive pairs ``eta = t sigma (1 + d g)``."""

    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 16)
        sig = ConductivityEnsemble(derive_seed(seed, 11), 5, constant_every=0).fields(m)
        g = default_direction(m)
        for i, (s, (t, d)) in enumerate(zip(sig, [(0.2, 0.0), (0.3, 0.05), (0.2, 0.1), (0.4, 0.1), (0.1, 0.2)])):
            rep.merge(neumann_series_check(s, s * (t * (1.0 + d * g)), b), f"pair{i}/")

    return _timed("neumann_series", body, seed, 60)


def linearization(seed: int = 0) -> ExperimentReport:
    def body(rep):
        m = build_disk_mesh(4)
        b = boundary_trig_basis(m, 16)
        hs = inclusion_perturbations(m, 100, contrast=2.0, seed=derive_seed(seed, 12))
        sub = linearization_error_compare(ConductivityField.constant(m, 0.0, is_log=True), hs, b)
        rep.params.update(sub.params)
        rep.merge(sub, "")

    return _timed("linearization", body, seed, 300)


SUITE = {
    "disk_oracle": disk_oracle,
    "scaling_identity": scaling_identity,
    "contour_crosscheck": contour_crosscheck,
    "quadrature_crosscheck": quadrature_crosscheck,
    "derivative_fd": derivative_fd,
    "tau_rates": tau_rates,
    "boundedness": boundedness,
    "order_inequalities": order_inequalities,
    "norm_equivalence": norm_equivalence,
    "lipschitz": lipschitz,
    "neumann_series": neumann_series,
    "linearization": linearization,
}


def run_suite(seed: int = 0, names=None) -> list[ExperimentReport]:
    return [SUITE[n](seed) for n in (names or SUITE)]
