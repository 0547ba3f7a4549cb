"""Central-difference verification of derivative implementations."""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from ..errors import DegenerateFitError
from .report import ExperimentReport, fit_slope

__all__ = ["DEFAULT_STEPS", "fd_check"]

DEFAULT_STEPS = 0.2 * 2.0 ** -np.arange(8)

_EPS = np.finfo(float).eps


def _spectral_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M), 2))


def fd_check(
    F: Callable,
    derivative,
    x,
    direction,
    steps=None,
    second_direction=None,
    norm: Callable | None = None,
    name: str = "fd_check",
    exact: bool = False,
    exact_tol: float = 1e-8,
    slope_target: float = 2.0,
    slope_tol: float = 0.2,
    floor_factor: float = 1e3,
) -> ExperimentReport:
    """Compare a derivative against central differences of ``F``.

    For one direction the error at step ``t`` is
    ``|| (F(x + t h) - F(x - t h)) / (2t) - DF ||``.  With ``second_direction``
    ``k`` the mixed second difference
    ``(F(x+th+tk) - F(x+th-tk) - F(x-th+tk) + F(x-th-tk)) / (4 t^2)`` is used.
    Both errors decay like ``t**2``.

    Parameters
    ----------
    F : callable
        Map from a point (anything supporting ``x + t * h``) to a matrix.
    derivative : array_like
        The derivative being checked, already evaluated at ``x``.
    steps : array_like, optional
        Decreasing step sizes, at least four.
    exact : bool
        The derivative is exact along this line: gate the largest error
        below ``exact_tol`` instead of fitting a slope.
    floor_factor : float
        Points whose error is below ``floor_factor * eps * ||F(x)|| / t**m``
        (``m`` the difference order) are treated as roundoff and dropped.

    Raises
    ------
    DegenerateFitError
        If fewer than three steps remain above the roundoff floor.
    """
    t0 = time.perf_counter()
    steps = np.asarray(DEFAULT_STEPS if steps is None else steps, dtype=float)
    if steps.size < 4 or np.any(np.diff(steps) >= 0) or np.any(steps <= 0):
        raise ValueError("steps must be positive, strictly decreasing and at least four")
    norm = norm or _spectral_norm
    D = np.asarray(getattr(derivative, "matrix", derivative))
    h, k = direction, second_direction
    order = 1 if k is None else 2
    errors = []
    for t in steps:
        if k is None:
            approx = (np.asarray(F(x + t * h)) - np.asarray(F(x - t * h))) / (2 * t)
        else:
            approx = (
                np.asarray(F(x + t * h + t * k))
                - np.asarray(F(x + t * h - t * k))
                - np.asarray(F(x - t * h + t * k))
                + np.asarray(F(x - t * h - t * k))
            ) / (4 * t * t)
        errors.append(norm(approx - D))
    errors = np.array(errors)
    scale = max(norm(np.asarray(F(x))), norm(D), 1e-300)
    floor = floor_factor * _EPS * scale / steps**order

    rep = ExperimentReport(name, params={"steps": steps, "order": order, "exact": exact})
    rep.add_table("errors", step=steps, error=errors, roundoff_floor=floor)
    rep.add_curve("error_vs_step", "errors", "step", "error")
    if exact:
        rep.gate("max_error", float(errors.max()), upper=exact_tol)
    else:
        usable = errors > floor
        if usable.sum() < 3:
            raise DegenerateFitError(
                f"{name}: only {int(usable.sum())} steps above the roundoff floor"
            )
        fit = rep.add_fit("error_slope", fit_slope(steps[usable], errors[usable]))
        rep.gate("slope", fit.slope, slope_target - slope_tol, slope_target + slope_tol)
    rep.runtime = time.perf_counter() - t0
    return rep
