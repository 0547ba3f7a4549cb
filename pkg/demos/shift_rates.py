# %% [markdown]
# # How fast does the shifted logarithm converge?
#
# `log(Lambda + tau I)` tends to `log Lambda` as `tau -> 0`.  Measured from
# `H^eps` to `H^-eps` the error decays like `tau^(2 eps)` once the shift sits
# inside the spectrum.  This script fits that slope for a few `eps` and shows
# why small `eps` needs many more boundary modes than a 64-mode truncation has.

# %%
import numpy as np

from logeit import ConductivityField, boundary_trig_basis, build_disk_mesh
from logeit.harness import tau_rate_experiment

mesh = build_disk_mesh(5)
basis = boundary_trig_basis(mesh, 64)
sigma = ConductivityField.constant(mesh, 1.0)

# %%
for eps in (0.5, 0.25, 0.1):
    rep = tau_rate_experiment(sigma, eps, basis)
    print(f"eps={eps:<5} fitted slope {rep.fits['log_difference'].slope:.3f}  target {2 * eps:.2f}  "
          f"{'ok' if rep.passed else 'outside gate'}")

# %% [markdown]
# For a constant conductivity the error is the largest of
# `n^(-2 eps) log(1 + tau n)` over the available frequencies.  Its maximizer
# moves out like `1/tau`, so for small `eps` it leaves the truncation and the
# fitted slope drifts towards one.

# %%
n = np.arange(1, 5001)
for tau in (0.02, 0.05, 0.1):
    w = n ** -0.2 * np.log1p(tau * n)
    print(f"tau={tau}: maximizing frequency {n[np.argmax(w)]}")
