# %% [markdown]
# # A tour of the discrete forward map
#
# We build a disk mesh, assemble the Neumann-to-Dirichlet (ND) matrix for a
# few conductivities and look at its logarithm.  Run cell by cell in an
# editor that understands `# %%` markers, or as a plain script.

# %%
import numpy as np

from logeit import (
    ConductivityField,
    boundary_trig_basis,
    build_disk_mesh,
    dL,
    eigensystem,
    nd_matrix,
    riesz_dunford_log,
)
from logeit.calculus import spectral_log

mesh = build_disk_mesh(4)
basis = boundary_trig_basis(mesh, 8)
print(mesh.n_triangles, "triangles,", basis.dim, "boundary modes")

# %% [markdown]
# For the unit conductivity the ND eigenvalues are close to 1/n, each twice.

# %%
one = ConductivityField.constant(mesh, 1.0)
lam = eigensystem(nd_matrix(one, basis)).eigenvalues
print(np.column_stack([basis.frequencies, lam, 1.0 / basis.frequencies]))

# %% [markdown]
# Scaling the conductivity scales the ND matrix inversely, so the logarithm
# only shifts by a multiple of the identity.

# %%
sigma = ConductivityField.from_function(mesh, lambda x, y: 1 + 0.8 * np.exp(-8 * ((x - 0.3) ** 2 + y**2)))
L1 = spectral_log(nd_matrix(sigma, basis)).matrix
L3 = spectral_log(nd_matrix(sigma * 3.0, basis)).matrix
print("shift:", np.abs(L3 - L1 + np.log(3.0) * np.eye(basis.dim)).max())

# %% [markdown]
# The contour-integral logarithm agrees with the eigendecomposition.

# %%
print("contour vs spectral:", np.abs(riesz_dunford_log(nd_matrix(sigma, basis)).matrix - L1).max())

# %% [markdown]
# The derivative of the logarithmic map in a constant direction is minus that
# constant times the identity.

# %%
kappa = sigma.log()
eta = ConductivityField.constant(mesh, 0.5, is_log=True)
print("DL(kappa; 1/2) + I/2:", np.abs(dL(kappa, eta, basis).matrix + 0.5 * np.eye(basis.dim)).max())
