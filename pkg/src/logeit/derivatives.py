"""Derivatives of the ND map and of its (shifted) logarithm.

Two independent routes are provided for the logarithmic derivatives:

* closed forms in the eigenbasis, weighting the derivative of the ND matrix
  entrywise by divided differences of ``log`` (first order) or by the
  integrals ``int_0^inf ds / ((a+s)(b+s)(c+s))`` (second order);
* adaptive quadrature of the defining improper integrals over the
  resolvents ``(Lambda + (tau + s) I)^{-1}``, evaluated by linear solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from .basis import BoundaryBasis
from .calculus import EigenSystem, SobolevOperator, eigensystem
from .errors import ConvergenceError, DomainError, OrderCapError
from .fem import ConductivityField, dlambda_matrix, nd_matrix, perturbation_chain

__all__ = [
    "DividedDifferenceTable",
    "MAX_ORDER",
    "d2f_tau",
    "df_tau_quadrature",
    "df_tau_spectral",
    "dk_lambda",
    "dL",
    "dlambda",
    "divided_differences",
    "log_derivative",
    "log_derivative_quadrature",
    "log_second_derivative",
    "log_second_derivative_quadrature",
    "resolvent_triple_integrals",
]

MAX_ORDER = 3


@dataclass(frozen=True, eq=False)
class DividedDifferenceTable:
    """``C[j, k] = (log(l_j + tau) - log(l_k + tau)) / (l_j - l_k)``, ``1/(l_j + tau)`` on ties."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    tau: float


def _log_dd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """First divided difference of log at positive arguments (elementwise)."""
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    lo = np.minimum(a, b)
    gap = np.abs(a - b)
    out = np.empty(a.shape)
    tie = gap == 0
    out[tie] = 1.0 / lo[tie]
    g = gap[~tie]
    out[~tie] = np.log1p(g / lo[~tie]) / g
    return out


def divided_differences(E: EigenSystem | np.ndarray, tau: float = 0.0) -> DividedDifferenceTable:
    """Divided-difference weights of the logarithm for the shifted spectrum.

    Raises
    ------
    DomainError
        If ``min(lambda) + tau <= 0``.
    """
    lam = np.asarray(E.eigenvalues if isinstance(E, EigenSystem) else E, dtype=float)
    a = lam + tau
    if not np.all(a > 0):
        raise DomainError("shifted spectrum must be positive")
    C = _log_dd(a[:, None], a[None, :])
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 1.0 / a)
    return DividedDifferenceTable(C, lam, float(tau))


def _complete_homogeneous(x, y, z, kmax):
    """h_0..h_kmax of three variables via Newton's identities."""
    p = [None] + [x**i + y**i + z**i for i in range(1, kmax + 1)]
    h = [np.ones_like(x)]
    for k in range(1, kmax + 1):
        h.append(sum(p[i] * h[k - i] for i in range(1, k + 1)) / k)
    return h


def resolvent_triple_integrals(a: np.ndarray) -> np.ndarray:
    """``I[j, k, l] = int_0^inf ds / ((a_j+s)(a_k+s)(a_l+s))`` for positive ``a``.

    Equals minus the second divided difference of ``log`` at
    ``(a_j, a_k, a_l)``.  Sorting each triple pairs the two closest points
    so ties need no special-casing; nearly coincident triples use a series
    about their mean.
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    trip = np.stack(np.broadcast_arrays(a[:, None, None], a[None, :, None], a[None, None, :]), axis=-1)
    trip = np.sort(trip.reshape(-1, 3), axis=1)
    p, q, r = trip.T
    m = trip.mean(axis=1)
    spread = r - p
    out = np.empty(p.size)
    far = spread > 1e-3 * m
    out[far] = (_log_dd(p[far], q[far]) - _log_dd(q[far], r[far])) / spread[far]
    near = ~far
    if np.any(near):
        mm = m[near]
        x, y, z = p[near] - mm, q[near] - mm, r[near] - mm
        h = _complete_homogeneous(x, y, z, 6)
        acc = np.zeros_like(mm)
        for order in range(2, 9):
            acc += (-1.0) ** order / (order * mm**order) * h[order - 2]
        out[near] = acc
    return out.reshape(n, n, n)


def log_derivative(E: EigenSystem, S: np.ndarray, tau: float = 0.0) -> np.ndarray:
    """Derivative of ``log(A + tau I)`` at ``A`` in the symmetric direction ``S``."""
    C = divided_differences(E, tau).matrix
    Phi = E.eigenvectors
    B = Phi.T @ S @ Phi
    M = Phi @ (C * B) @ Phi.T
    return 0.5 * (M + M.T)


def log_second_derivative(
    E: EigenSystem, S_eta: np.ndarray, S_xi: np.ndarray, H: np.ndarray, tau: float = 0.0
) -> np.ndarray:
    """Second derivative of ``sigma -> log(Lambda(sigma) + tau I)`` from the ND derivatives.

    ``S_eta`` and ``S_xi`` are first derivatives of the ND matrix, ``H`` the
    mixed second derivative.
    """
    Phi = E.eigenvectors
    a = E.eigenvalues + tau
    if not np.all(a > 0):
        raise DomainError("shifted spectrum must be positive")
    C = divided_differences(E, tau).matrix
    T = resolvent_triple_integrals(a)
    Bh = Phi.T @ S_eta @ Phi
    Bx = Phi.T @ S_xi @ Phi
    Hh = Phi.T @ H @ Phi
    M = C * Hh - np.einsum("jk,kl,jkl->jl", Bh, Bx, T) - np.einsum("jk,kl,jkl->jl", Bx, Bh, T)
    M = Phi @ M @ Phi.T
    return 0.5 * (M + M.T)


def _improper_quad(integrand, A: np.ndarray, tau: float, rtol: float, limit: int):
    lam = np.linalg.eigvalsh(A)
    scale = np.sqrt(lam[0] * lam[-1]) + tau
    eye = np.eye(A.shape[0])

    def g(t):
        s = scale * t / (1.0 - t)
        R = np.linalg.solve(A + (tau + s) * eye, eye)
        return integrand(R) * (scale / (1.0 - t) ** 2)

    val, err, info = quad_vec(g, 0.0, 1.0, epsabs=0.0, epsrel=rtol, norm="max", limit=limit, full_output=True)
    if not info.success or err > rtol * max(np.max(np.abs(val)), 1e-300) * 10:
        raise ConvergenceError(f"resolvent quadrature did not converge (error estimate {err:.3g})")
    return 0.5 * (val + val.T)


def log_derivative_quadrature(
    A: np.ndarray, S: np.ndarray, tau: float = 0.0, rtol: float = 1e-12, limit: int = 2000
) -> np.ndarray:
    """``int_0^inf R(s) S R(s) ds`` with ``R(s) = (A + (tau+s) I)^{-1}``.

    The half line is mapped to (0, 1) by ``s = c t / (1 - t)`` where ``c`` is
    the geometric mean of the extreme eigenvalues plus ``tau``.
    """
    if not np.any(S):
        return np.zeros_like(np.asarray(S, dtype=float))
    return _improper_quad(lambda R: R @ S @ R, A, tau, rtol, limit)


def log_second_derivative_quadrature(
    A: np.ndarray,
    S_eta: np.ndarray,
    S_xi: np.ndarray,
    H: np.ndarray,
    tau: float = 0.0,
    rtol: float = 1e-12,
    limit: int = 2000,
) -> np.ndarray:
    if not (np.any(H) or (np.any(S_eta) and np.any(S_xi))):
        return np.zeros_like(np.asarray(H, dtype=float))

    def integrand(R):
        return R @ H @ R - R @ S_eta @ R @ S_xi @ R - R @ S_xi @ R @ S_eta @ R

    return _improper_quad(integrand, A, tau, rtol, limit)


def dlambda(sigma: ConductivityField, eta: ConductivityField, basis: BoundaryBasis) -> SobolevOperator:
    """First derivative of the ND map at ``sigma`` in direction ``eta``."""
    return SobolevOperator(dlambda_matrix(sigma, eta, basis), -0.5, 0.5, True, basis)


def dk_lambda(
    sigma: ConductivityField, directions: list[ConductivityField], basis: BoundaryBasis
) -> SobolevOperator:
    """k-th derivative of the ND map: sum over orderings of ``tr P ... P N``.

    Raises
    ------
    OrderCapError
        For more than ``MAX_ORDER`` directions.
    """
    k = len(directions)
    if k < 1:
        raise ValueError("need at least one direction")
    if k > MAX_ORDER:
        raise OrderCapError(f"derivatives above order {MAX_ORDER} are not supported")
    M = perturbation_chain(sigma, list(directions), basis)
    return SobolevOperator(M, -0.5, 0.5, True, basis)


def _nd_eigensystem(sigma, basis):
    return eigensystem(nd_matrix(sigma, basis))


def df_tau_spectral(
    sigma: ConductivityField, eta: ConductivityField, tau: float, basis: BoundaryBasis
) -> SobolevOperator:
    """Closed-form derivative of ``log(Lambda + tau I)`` in the ND eigenbasis."""
    E = _nd_eigensystem(sigma, basis)
    S = dlambda_matrix(sigma, eta, basis)
    return SobolevOperator(log_derivative(E, S, tau), 0.0, 0.0, True, basis)


def df_tau_quadrature(
    sigma: ConductivityField,
    eta: ConductivityField,
    tau: float,
    basis: BoundaryBasis,
    rtol: float = 1e-12,
    limit: int = 2000,
) -> SobolevOperator:
    """Same derivative as :func:`df_tau_spectral`, by quadrature of the resolvent integral."""
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    A = nd_matrix(sigma, basis).matrix
    S = dlambda_matrix(sigma, eta, basis)
    return SobolevOperator(log_derivative_quadrature(A, S, tau, rtol, limit), 0.0, 0.0, True, basis)


def dL(kappa: ConductivityField, eta: ConductivityField, basis: BoundaryBasis) -> SobolevOperator:
    """Derivative of ``kappa -> log Lambda(exp(kappa))`` in direction ``eta``."""
    sigma = kappa.exp()
    return df_tau_spectral(sigma, eta * sigma, 0.0, basis)


def d2f_tau(
    sigma: ConductivityField,
    eta: ConductivityField,
    xi: ConductivityField,
    tau: float,
    basis: BoundaryBasis,
    method: str = "closed",
    rtol: float = 1e-12,
) -> SobolevOperator:
    """Second derivative of ``log(Lambda + tau I)`` in directions ``eta`` and ``xi``.

    ``method="closed"`` uses the eigenbasis formula, ``"quadrature"`` the
    resolvent integrals.
    """
    A = nd_matrix(sigma, basis)
    S_eta = dlambda_matrix(sigma, eta, basis)
    S_xi = dlambda_matrix(sigma, xi, basis)
    H = perturbation_chain(sigma, [eta, xi], basis)
    H = 0.5 * (H + H.T)
    if method == "closed":
        M = log_second_derivative(eigensystem(A), S_eta, S_xi, H, tau)
    elif method == "quadrature":
        M = log_second_derivative_quadrature(A.matrix, S_eta, S_xi, H, tau, rtol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SobolevOperator(M, 0.0, 0.0, True, basis)
