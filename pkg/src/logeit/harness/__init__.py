"""Measurable finite-section experiments and their reports."""

from .ensemble import ConductivityEnsemble, bump, inclusion, inclusion_perturbations
from .experiments import (
    default_direction,
    dl_lipschitz_check,
    linearization_error_compare,
    loewner_heinz_check,
    monotonicity_check,
    neumann_series_check,
    norm_equivalence_survey,
    relative_boundedness_experiment,
    tau_rate_experiment,
)
from .fdcheck import DEFAULT_STEPS, fd_check
from .report import ExperimentReport, Gate, SlopeFit, fit_slope

__all__ = [
    "ConductivityEnsemble",
    "DEFAULT_STEPS",
    "ExperimentReport",
    "Gate",
    "SlopeFit",
    "bump",
    "default_direction",
    "dl_lipschitz_check",
    "fd_check",
    "fit_slope",
    "inclusion",
    "inclusion_perturbations",
    "linearization_error_compare",
    "loewner_heinz_check",
    "monotonicity_check",
    "neumann_series_check",
    "norm_equivalence_survey",
    "relative_boundedness_experiment",
    "tau_rate_experiment",
]
