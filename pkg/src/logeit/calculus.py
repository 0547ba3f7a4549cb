"""Spectral functional calculus for discrete ND operators.

Every function of an ND matrix is formed from its eigendecomposition, so
degenerate eigenvalue clusters (the disk spectrum is doubly degenerate) need
no special handling: only spectral projectors enter the results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .basis import BoundaryBasis, check_sobolev_index, sobolev_operator_norm
from .errors import ContourError, ConvergenceError, DefinitenessError, DomainError
from .fem import NDMatrix

__all__ = [
    "EigenSystem",
    "SobolevOperator",
    "SpectralFunctionSpec",
    "apply_spectral_function",
    "eigensystem",
    "riesz_dunford_log",
    "sigma_norm",
]


@dataclass(frozen=True, eq=False)
class SobolevOperator:
    """Matrix in a boundary basis tagged with its Sobolev signature.

    ``r_in`` and ``r_out`` are the indices of the domain and range spaces
    the operator is considered between; they only matter for
    :meth:`norm`.
    """

    matrix: np.ndarray
    r_in: float = 0.0
    r_out: float = 0.0
    symmetric: bool = True
    basis: BoundaryBasis | None = None

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if self.symmetric:
            M = 0.5 * (M + M.T)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    def norm(self, r_in: float | None = None, r_out: float | None = None) -> float:
        """Fourier-weighted operator norm, by default in the stored signature."""
        return sobolev_operator_norm(
            self,
            self.r_in if r_in is None else r_in,
            self.r_out if r_out is None else r_out,
        )

    def with_signature(self, r_in: float, r_out: float) -> "SobolevOperator":
        return SobolevOperator(self.matrix, r_in, r_out, self.symmetric, self.basis)

    def __sub__(self, other: "SobolevOperator") -> "SobolevOperator":
        return SobolevOperator(
            self.matrix - other.matrix,
            self.r_in,
            self.r_out,
            self.symmetric and other.symmetric,
            self.basis,
        )

    def __add__(self, other: "SobolevOperator") -> "SobolevOperator":
        return SobolevOperator(
            self.matrix + other.matrix,
            self.r_in,
            self.r_out,
            self.symmetric and other.symmetric,
            self.basis,
        )

    def scaled(self, c: float) -> "SobolevOperator":
        return SobolevOperator(c * self.matrix, self.r_in, self.r_out, self.symmetric, self.basis)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues in descending order and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source: NDMatrix | None = None

    @property
    def basis(self) -> BoundaryBasis | None:
        return None if self.source is None else self.source.basis

    def function(self, values: np.ndarray) -> np.ndarray:
        """``Phi diag(values) Phi^T``."""
        Phi = self.eigenvectors
        M = (Phi * values) @ Phi.T
        return 0.5 * (M + M.T)

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        """Coefficients ``<f, phi_k>`` of a coefficient vector (or matrix columns)."""
        return self.eigenvectors.T @ f

    def reconstruct(self) -> np.ndarray:
        return self.function(self.eigenvalues)


@dataclass(frozen=True)
class SpectralFunctionSpec:
    """Which scalar function to apply: ``log``, ``power`` or ``shifted-log``.

    ``power`` uses the exponent ``2r`` (``exponent`` field, in [-1, 1]).
    ``eps`` is the Sobolev index recorded on the result of an unshifted log.
    """

    kind: Literal["log", "power", "shifted-log"] = "log"
    tau: float = 0.0
    exponent: float = 1.0
    eps: float = 0.25

    def __post_init__(self):
        if self.kind not in ("log", "power", "shifted-log"):
            raise ValueError(f"unknown spectral function {self.kind!r}")
        if self.tau < 0:
            raise ValueError("shift tau must be nonnegative")
        if self.kind == "power" and not -1.0 <= self.exponent <= 1.0:
            raise ValueError("power exponent 2r must lie in [-1, 1]")
        if self.kind == "log" and self.tau != 0.0:
            raise ValueError("use kind='shifted-log' for tau > 0")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    @classmethod
    def log(cls, tau: float = 0.0, eps: float = 0.25) -> "SpectralFunctionSpec":
        return cls("shifted-log" if tau > 0 else "log", tau=tau, eps=eps)

    @classmethod
    def power(cls, exponent: float) -> "SpectralFunctionSpec":
        return cls("power", exponent=exponent)


def _as_matrix(A) -> np.ndarray:
    return np.asarray(A.matrix if hasattr(A, "matrix") else A, dtype=float)


def eigensystem(A: NDMatrix | np.ndarray) -> EigenSystem:
    """Eigendecomposition with descending eigenvalues.

    Each eigenvector is signed so that its first entry of magnitude above
    1e-12 is positive.

    Raises
    ------
    DefinitenessError
        If any eigenvalue is <= 0.
    """
    M = _as_matrix(A)
    M = 0.5 * (M + M.T)
    lam, Phi = np.linalg.eigh(M)
    lam = lam[::-1].copy()
    Phi = Phi[:, ::-1].copy()
    if not lam[-1] > 0:
        raise DefinitenessError(f"smallest eigenvalue {lam[-1]:.3g} is not positive")
    lead = np.argmax(np.abs(Phi) > 1e-12, axis=0)
    signs = np.sign(Phi[lead, np.arange(Phi.shape[1])])
    Phi *= np.where(signs == 0, 1.0, signs)
    lam.setflags(write=False)
    Phi.setflags(write=False)
    return EigenSystem(lam, Phi, A if isinstance(A, NDMatrix) else None)


def apply_spectral_function(E: EigenSystem, spec: SpectralFunctionSpec) -> SobolevOperator:
    """``Phi diag(g(lambda_k + tau)) Phi^T`` for ``g = log`` or ``g(t) = t**(2r)``.

    The result is tagged ``(eps, -eps)`` for the unshifted log, ``(0, 0)`` for
    a shifted log and ``(-r, r)`` for the power ``2r``.
    """
    lam = E.eigenvalues + spec.tau
    if np.any(lam <= 0):
        raise DomainError("spectral function evaluated at a nonpositive eigenvalue")
    if spec.kind == "power":
        vals = lam ** spec.exponent
        r = 0.5 * spec.exponent
        r_in, r_out = -r, r
    else:
        vals = np.log(lam)
        r_in, r_out = (spec.eps, -spec.eps) if spec.tau == 0 else (0.0, 0.0)
    return SobolevOperator(E.function(vals), r_in, r_out, True, E.basis)


def spectral_log(A, tau: float = 0.0, eps: float = 0.25) -> SobolevOperator:
    """Shorthand for the (shifted) logarithm of an ND matrix."""
    return apply_spectral_function(eigensystem(A), SpectralFunctionSpec.log(tau, eps))


def spectral_power(A, exponent: float) -> SobolevOperator:
    return apply_spectral_function(eigensystem(A), SpectralFunctionSpec.power(exponent))


def _contour_sum(M: np.ndarray, center: float, radius: float, n: int) -> np.ndarray:
    # Full circle, no conjugate-symmetry shortcut: the imaginary part of the
    # sum is a genuine accuracy diagnostic.
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    z = center + radius * np.exp(1j * theta)
    eye = np.eye(M.shape[0])
    out = np.zeros(M.shape, dtype=complex)
    for chunk in np.array_split(np.arange(n), max(1, n // 512)):
        zc = z[chunk]
        res = np.linalg.solve(zc[:, None, None] * eye - M, np.broadcast_to(eye, (zc.size,) + M.shape))
        out += np.tensordot(np.log(zc) * (zc - center), res, axes=1)
    return out / n


def riesz_dunford_log(
    A,
    n_quad: int = 64,
    tol: float = 1e-12,
    max_quad: int = 1 << 16,
    return_info: bool = False,
):
    """Matrix logarithm by the resolvent contour integral.

    The contour is the circle crossing the real axis at ``lambda_min / 2`` and
    ``2 * lambda_max``, discretized by the trapezoidal rule in the angle.
    The node count starts at ``n_quad`` and doubles until two successive
    results differ by at most ``tol * max(1, ||result||)``.

    Raises
    ------
    ContourError
        If ``lambda_min`` is too close to zero relative to ``lambda_max``.
    ConvergenceError
        If ``max_quad`` nodes do not reach the tolerance.
    """
    M = _as_matrix(A)
    M = 0.5 * (M + M.T)
    ev = np.linalg.eigvalsh(M)
    lo, hi = ev[0], ev[-1]
    if not lo > 0:
        raise ContourError("spectrum touches the branch cut of the logarithm")
    if hi / lo > 1e6:
        raise ContourError(f"condition number {hi / lo:.3g} too large for a circular contour")
    a, b = 0.5 * lo, 2.0 * hi
    center, radius = 0.5 * (a + b), 0.5 * (b - a)
    n = max(8, int(n_quad) + int(n_quad) % 2)
    prev = _contour_sum(M, center, radius, n)
    while True:
        n *= 2
        if n > max_quad:
            raise ConvergenceError(f"contour quadrature did not converge with {max_quad} nodes")
        cur = _contour_sum(M, center, radius, n)
        change = np.max(np.abs(cur - prev))
        if change <= tol * max(1.0, np.max(np.abs(cur))):
            break
        prev = cur
    op = SobolevOperator(cur.real, 0.25, -0.25, True, getattr(A, "basis", None))
    if return_info:
        return op, {"n_quad": n, "imag_residual": float(np.max(np.abs(cur.imag))), "change": float(change)}
    return op


def sigma_norm(f: np.ndarray, r: float, E: EigenSystem) -> float:
    """Conductivity-dependent norm ``sqrt(sum lambda_k**(-2r) <f, phi_k>**2)``."""
    r = check_sobolev_index(r)
    c = E.coefficients(np.asarray(f, dtype=float))
    return float(np.sqrt(np.sum(E.eigenvalues ** (-2.0 * r) * c * c)))
