"""Piecewise-linear finite elements for the Neumann conductivity problem.

The discrete problem seeks a nodal vector ``u`` with

    K(sigma) u + c * mu = b,    c . u = 0,

where ``K`` is the P1 stiffness matrix with one conductivity value per
triangle, ``b`` the lumped boundary load of a current density, and the
scalar multiplier ``mu`` enforces a zero boundary-quadrature mean of the
trace.  One sparse LU factorization of this bordered matrix is computed per
conductivity and reused for every right-hand side.
"""

from __future__ import annotations

import hashlib
import itertools
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .basis import BoundaryBasis, mean_free_project
from .errors import ContractionError, DefinitenessError, SingularSystemError
from .mesh import DiskMesh

__all__ = [
    "ConductivityField",
    "InteriorSolution",
    "NDMatrix",
    "NeumannSolver",
    "analytic_nd_constant",
    "apply_perturbation",
    "get_solver",
    "nd_matrix",
    "perturbation_norm",
    "solve_neumann",
    "stiffness_matrix",
]


@dataclass(frozen=True, eq=False)
class ConductivityField:
    """Piecewise-constant field on the triangles of a mesh.

    Used both for conductivities (strictly positive) and for unconstrained
    perturbations or log-conductivities (``is_log=True``).
    """

    mesh: DiskMesh
    values: np.ndarray
    is_log: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 0:
            v = np.full(self.mesh.n_triangles, float(v))
        if v.shape != (self.mesh.n_triangles,):
            raise ValueError(
                f"field needs {self.mesh.n_triangles} triangle values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, mesh: DiskMesh, value: float, is_log: bool = False) -> "ConductivityField":
        return cls(mesh, np.full(mesh.n_triangles, float(value)), is_log)

    @classmethod
    def from_function(cls, mesh: DiskMesh, func, is_log: bool = False) -> "ConductivityField":
        """Sample ``func(x, y)`` at the triangle centroids."""
        c = mesh.centroids
        return cls(mesh, np.broadcast_to(func(c[:, 0], c[:, 1]), (mesh.n_triangles,)), is_log)

    def exp(self) -> "ConductivityField":
        return ConductivityField(self.mesh, np.exp(self.values))

    def log(self) -> "ConductivityField":
        return ConductivityField(self.mesh, np.log(self.values), is_log=True)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def is_admissible(self) -> bool:
        return self.min() > 0.0

    def is_constant(self) -> bool:
        return bool(np.ptp(self.values) == 0.0)

    def digest(self) -> str:
        return hashlib.sha256(self.values.tobytes()).hexdigest()[:16]

    def _wrap(self, values) -> "ConductivityField":
        return ConductivityField(self.mesh, values, self.is_log)

    def _other(self, other):
        if isinstance(other, ConductivityField):
            if other.mesh is not self.mesh:
                raise ValueError("fields live on different meshes")
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __neg__(self):
        return self._wrap(-self.values)


def _local_gradients(mesh: DiskMesh) -> np.ndarray:
    """Per-triangle matrices ``area * grad(phi_i) . grad(phi_j)``, shape (T, 3, 3)."""
    key = "p1_local"
    if key not in mesh._cache:
        p = mesh.nodes[mesh.triangles]
        e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
        area = mesh.signed_areas
        G = np.einsum("tik,tjk->tij", e, e) / (4.0 * area)[:, None, None]
        G.setflags(write=False)
        mesh._cache[key] = G
    return mesh._cache[key]


def _pattern(mesh: DiskMesh):
    key = "p1_pattern"
    if key not in mesh._cache:
        t = mesh.triangles
        rows = np.repeat(t, 3, axis=1).ravel()
        cols = np.tile(t, (1, 3)).ravel()
        mesh._cache[key] = (rows, cols)
    return mesh._cache[key]


def stiffness_matrix(field_: ConductivityField) -> sp.csr_matrix:
    """P1 stiffness matrix of ``int coeff grad u . grad v`` (CSR)."""
    mesh = field_.mesh
    G = _local_gradients(mesh)
    rows, cols = _pattern(mesh)
    data = (field_.values[:, None, None] * G).ravel()
    n = mesh.n_nodes
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


@dataclass(frozen=True, eq=False)
class InteriorSolution:
    """Nodal FEM potential with zero boundary-quadrature mean of its trace."""

    values: np.ndarray
    trace: np.ndarray  # coefficients in the basis used to build it


class NeumannSolver:
    """Factorized Neumann problem for one conductivity.

    The factorization is immutable once built; concurrent calls to
    :meth:`solve_nodal` with different right-hand sides are safe.
    """

    def __init__(self, sigma: ConductivityField):
        if not sigma.is_admissible():
            raise SingularSystemError(
                f"conductivity must be strictly positive (min value {sigma.min():.3g})"
            )
        self.sigma = sigma
        self.mesh = sigma.mesh
        mesh = self.mesh
        n = mesh.n_nodes
        self.K = stiffness_matrix(sigma)
        c = np.zeros(n)
        c[mesh.boundary_nodes] = mesh.boundary_weights
        self._constraint = c
        bordered = sp.bmat(
            [[self.K, sp.csr_matrix(c[:, None])], [sp.csr_matrix(c[None, :]), None]],
            format="csc",
        )
        try:
            self._lu = splu(bordered)
        except RuntimeError as exc:
            raise SingularSystemError(str(exc)) from exc
        self._basis_solutions: dict[int, np.ndarray] = {}

    def solve_nodal(self, rhs: np.ndarray) -> np.ndarray:
        """Gauge-fixed solution of ``K u = rhs`` (rhs vector or column matrix)."""
        rhs = np.asarray(rhs, dtype=float)
        one = rhs.ndim == 1
        r = rhs[:, None] if one else rhs
        aug = np.vstack([r, np.zeros((1, r.shape[1]))])
        u = self._lu.solve(aug)[:-1]
        if not np.all(np.isfinite(u)):
            raise SingularSystemError("non-finite solution of the Neumann system")
        return u[:, 0] if one else u

    def boundary_load(self, coefficients: np.ndarray, basis: BoundaryBasis) -> np.ndarray:
        coefficients = np.asarray(coefficients, dtype=float)
        F = basis.synthesize(coefficients)
        b = np.zeros((self.mesh.n_nodes,) + F.shape[1:])
        b[self.mesh.boundary_nodes] = F * (
            basis.weights[:, None] if F.ndim == 2 else basis.weights
        )
        return b

    def basis_solutions(self, basis: BoundaryBasis) -> np.ndarray:
        """Nodal solutions ``N(sigma) f_k`` for every basis function, shape (n_nodes, 2N).

        Solutions for a larger basis on the same mesh are reused for a
        truncated one.
        """
        for dim, U in self._basis_solutions.items():
            if dim >= basis.dim:
                return U[:, : basis.dim]
        U = self.solve_nodal(self.boundary_load(np.eye(basis.dim), basis))
        U.setflags(write=False)
        self._basis_solutions = {basis.dim: U}
        return U

    def trace_coefficients(self, nodal: np.ndarray, basis: BoundaryBasis) -> np.ndarray:
        return mean_free_project(np.asarray(nodal)[self.mesh.boundary_nodes], basis)

    def perturb_nodal(self, eta: ConductivityField, u: np.ndarray) -> np.ndarray:
        """Nodal ``P(sigma, eta) u``: solves ``K(sigma) w = -K(eta) u``."""
        if eta.mesh is not self.mesh:
            raise ValueError("perturbation lives on a different mesh")
        return self.solve_nodal(-(stiffness_matrix(eta) @ u))


_SOLVER_CACHE: "OrderedDict[tuple, NeumannSolver]" = OrderedDict()
_SOLVER_CACHE_SIZE = 4


def get_solver(sigma: ConductivityField) -> NeumannSolver:
    """Factorization handle for ``sigma``, reused across calls."""
    key = (id(sigma.mesh), sigma.digest(), sigma.values.size)
    solver = _SOLVER_CACHE.get(key)
    if solver is not None and solver.mesh is sigma.mesh:
        _SOLVER_CACHE.move_to_end(key)
        return solver
    solver = NeumannSolver(sigma)
    _SOLVER_CACHE[key] = solver
    while len(_SOLVER_CACHE) > _SOLVER_CACHE_SIZE:
        _SOLVER_CACHE.popitem(last=False)
    return solver


def solve_neumann(sigma: ConductivityField, f: np.ndarray, basis: BoundaryBasis) -> InteriorSolution:
    """FEM solution of the Neumann problem for the current density ``f``.

    ``f`` holds coefficients in ``basis``.
    """
    solver = get_solver(sigma)
    u = solver.solve_nodal(solver.boundary_load(f, basis))
    return InteriorSolution(u, solver.trace_coefficients(u, basis))


def apply_perturbation(
    sigma: ConductivityField,
    eta: ConductivityField,
    u: InteriorSolution | np.ndarray,
    basis: BoundaryBasis | None = None,
) -> InteriorSolution:
    """``w = P(sigma, eta) u``: ``int sigma grad w . grad v = -int eta grad u . grad v``."""
    solver = get_solver(sigma)
    nodal = u.values if isinstance(u, InteriorSolution) else np.asarray(u, dtype=float)
    w = solver.perturb_nodal(eta, nodal)
    trace = solver.trace_coefficients(w, basis) if basis is not None else np.empty(0)
    return InteriorSolution(w, trace)


@dataclass(frozen=True, eq=False)
class NDMatrix:
    """Galerkin section ``A[j, k] = <Lambda(sigma) f_k, f_j>`` of the ND map."""

    matrix: np.ndarray
    basis: BoundaryBasis
    sigma: ConductivityField | None = None
    asymmetry: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.basis.max_frequency

    def truncate(self, n: int) -> "NDMatrix":
        k = 2 * n
        return NDMatrix(self.matrix[:k, :k].copy(), self.basis.truncate(n), self.sigma, self.asymmetry)


def _check_definite(A: np.ndarray) -> None:
    lam_min = np.linalg.eigvalsh(A)[0]
    if not lam_min > 0.0:
        raise DefinitenessError(f"ND matrix has eigenvalue {lam_min:.3g} <= 0")


def nd_matrix(sigma: ConductivityField, basis: BoundaryBasis) -> NDMatrix:
    """Discrete ND operator of ``sigma`` in ``basis`` (explicitly symmetrized)."""
    if basis.mesh is not sigma.mesh:
        raise ValueError("basis and conductivity live on different meshes")
    solver = get_solver(sigma)
    U = solver.basis_solutions(basis)
    raw = solver.trace_coefficients(U, basis)
    A = 0.5 * (raw + raw.T)
    _check_definite(A)
    return NDMatrix(A, basis, sigma, float(np.linalg.norm(raw - raw.T)))


def analytic_nd_constant(sigma0: float, basis: BoundaryBasis) -> NDMatrix:
    """Exact ND section of the unit disk with constant conductivity ``sigma0``."""
    if not sigma0 > 0:
        raise ValueError("sigma0 must be positive")
    return NDMatrix(np.diag(1.0 / (sigma0 * basis.frequencies)), basis, None)


def dlambda_matrix(sigma: ConductivityField, eta: ConductivityField, basis: BoundaryBasis) -> np.ndarray:
    """``-U^T K(eta) U``: entries ``-int eta grad u_k . grad u_j``."""
    U = get_solver(sigma).basis_solutions(basis)
    M = -(U.T @ (stiffness_matrix(eta) @ U))
    return 0.5 * (M + M.T)


def perturbation_chain(
    sigma: ConductivityField, etas: list[ConductivityField], basis: BoundaryBasis
) -> np.ndarray:
    """Sum over orderings of ``tr P(sigma, eta_a1) ... P(sigma, eta_ak) N(sigma)`` in ``basis``."""
    solver = get_solver(sigma)
    U = solver.basis_solutions(basis)
    k = len(etas)
    stiff = [stiffness_matrix(e) for e in etas]
    total = np.zeros((basis.dim, basis.dim))
    for perm in itertools.permutations(range(k)):
        W = U
        for idx in reversed(perm):
            W = solver.solve_nodal(-(stiff[idx] @ W))
        total += solver.trace_coefficients(W, basis)
    return total


def perturbation_norm(
    sigma: ConductivityField, eta: ConductivityField, iters: int = 200, rtol: float = 1e-10, seed: int = 0
) -> float:
    """Energy-norm estimate of ``P(sigma, eta)`` by power iteration.

    ``P`` is self-adjoint in the inner product ``int sigma grad u . grad v``,
    so iterating ``P**2`` converges to the square of its spectral radius.
    """
    solver = get_solver(sigma)
    rng = np.random.default_rng(seed)
    x = solver.solve_nodal(solver.K @ rng.standard_normal(solver.mesh.n_nodes))
    K = solver.K

    def energy(v):
        return float(np.sqrt(max(v @ (K @ v), 0.0)))

    x /= energy(x)
    est = 0.0
    for _ in range(iters):
        y = solver.perturb_nodal(eta, solver.perturb_nodal(eta, x))
        new = np.sqrt(energy(y))
        if new == 0.0:
            return 0.0
        x = y / energy(y)
        if abs(new - est) <= rtol * new:
            est = new
            break
        est = new
    return float(est)


def require_contraction(sigma: ConductivityField, eta: ConductivityField, **kwargs) -> float:
    norm = perturbation_norm(sigma, eta, **kwargs)
    if norm >= 1.0:
        raise ContractionError(f"estimated ||P(sigma, eta)|| = {norm:.4f} >= 1")
    return norm
