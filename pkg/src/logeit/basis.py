"""Zero-mean trigonometric basis on the unit circle and Sobolev weights.

Boundary data are represented by their coefficient vectors (length ``2N``)
in the ordered basis ``cos(t), sin(t), ..., cos(Nt), sin(Nt)``, each function
normalized in L2 of the circle.  The constant is excluded, so every
coefficient vector is automatically mean-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AliasingError
from .mesh import DiskMesh

__all__ = [
    "BoundaryBasis",
    "boundary_trig_basis",
    "check_sobolev_index",
    "fourier_weights",
    "mean_free_project",
    "sobolev_operator_norm",
]


@dataclass(frozen=True, eq=False)
class BoundaryBasis:
    """L2-orthonormal mean-free trigonometric frame on the boundary nodes.

    Attributes
    ----------
    mesh : DiskMesh
    max_frequency : int
    angles, weights : ndarray, shape (n_boundary,)
        Trapezoidal quadrature rule on the boundary nodes.
    values : ndarray, shape (n_boundary, 2N)
        Basis functions sampled at the boundary nodes.
    frequencies : ndarray, shape (2N,)
        Frequency ``n`` of every basis function.
    """

    mesh: DiskMesh
    max_frequency: int
    angles: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    frequencies: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * self.max_frequency

    def gram(self) -> np.ndarray:
        return self.values.T @ (self.weights[:, None] * self.values)

    def means(self) -> np.ndarray:
        """Quadrature mean of each basis function."""
        return self.weights @ self.values / self.weights.sum()

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        """Nodal boundary values of a coefficient vector (or columns of a matrix)."""
        return self.values @ np.asarray(coefficients, dtype=float)

    def truncate(self, n: int) -> "BoundaryBasis":
        """The leading ``2n`` functions, as a basis of its own."""
        if not 1 <= n <= self.max_frequency:
            raise ValueError(f"cannot truncate order {self.max_frequency} basis to {n}")
        k = 2 * n
        return BoundaryBasis(
            self.mesh, n, self.angles, self.weights, self.values[:, :k], self.frequencies[:k]
        )


def boundary_trig_basis(mesh: DiskMesh, N: int) -> BoundaryBasis:
    """Trigonometric basis of order ``N`` on the boundary nodes of ``mesh``.

    Raises
    ------
    AliasingError
        If ``2N`` exceeds a quarter of the boundary nodes.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be at least 1")
    if 2 * N > mesh.n_boundary // 4:
        raise AliasingError(
            f"order N={N} needs at least {8 * N} boundary nodes, mesh level "
            f"{mesh.refinement_level} has {mesh.n_boundary}"
        )
    th = mesh.boundary_angles
    n = np.repeat(np.arange(1, N + 1), 2)
    phase = np.outer(th, np.arange(1, N + 1))
    vals = np.empty((th.size, 2 * N))
    vals[:, 0::2] = np.cos(phase)
    vals[:, 1::2] = np.sin(phase)
    vals /= np.sqrt(np.pi)
    vals.setflags(write=False)
    n.setflags(write=False)
    return BoundaryBasis(mesh, N, th, mesh.boundary_weights, vals, n)


def mean_free_project(values: np.ndarray, basis: BoundaryBasis) -> np.ndarray:
    """Coefficients of a nodal boundary trace after removing its mean.

    ``values`` may be a vector over the boundary nodes or a matrix whose
    columns are such vectors.
    """
    v = np.asarray(values, dtype=float)
    w = basis.weights
    mean = w @ v / w.sum()
    wv = (v - mean) * (w[:, None] if v.ndim == 2 else w)
    return basis.values.T @ wv


def check_sobolev_index(r: float, lo: float = -0.5, hi: float = 0.5) -> float:
    r = float(r)
    if not lo - 1e-15 <= r <= hi + 1e-15:
        raise ValueError(f"Sobolev index {r} outside [{lo}, {hi}]")
    return r


def fourier_weights(frequencies: np.ndarray, r: float) -> np.ndarray:
    """Diagonal H^r weights ``(1 + n**2)**(r/2)`` of the trigonometric basis."""
    check_sobolev_index(r, -1.0, 1.0)
    n = np.asarray(frequencies, dtype=float)
    return (1.0 + n * n) ** (0.5 * r)


def sobolev_operator_norm(T, r_in: float, r_out: float, basis: BoundaryBasis | None = None) -> float:
    """Operator norm of ``T`` from H^r_in to H^r_out in Fourier weights.

    ``T`` is either a matrix or an object with ``matrix`` and ``basis``
    attributes (e.g. :class:`logeit.calculus.SobolevOperator`).  Without a
    basis, the standard ordering ``1, 1, 2, 2, ...`` of frequencies is used.
    """
    if hasattr(T, "matrix"):
        M = np.asarray(T.matrix)
        basis = basis if basis is not None else getattr(T, "basis", None)
    else:
        M = np.asarray(T, dtype=float)
    if basis is not None:
        freq = basis.frequencies
    else:
        freq = np.repeat(np.arange(1, M.shape[0] // 2 + 1), 2)
    if freq.size != M.shape[0]:
        raise ValueError("operator size does not match basis")
    d_out = fourier_weights(freq, r_out)
    d_in = fourier_weights(freq, r_in)
    return float(np.linalg.norm(d_out[:, None] * M / d_in[None, :], 2))
