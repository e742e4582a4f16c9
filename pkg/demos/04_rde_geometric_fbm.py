"""Rough differential equations: geometric fBM by Picard iteration.

dX = mu X dt + sigma X dB along the Itô space-time lift has the closed form
X0 exp(sigma B_t + mu t - sigma^2 t^{2H} / 2).  The Picard solver converges
in a handful of sweeps, and the same Itô solution can be obtained through
the Stratonovich lift with the modified vector field (f, -Df f / 2).
"""

from types import SimpleNamespace

import numpy as np

from roughfbm import FbmModel, Grid, geometric_fbm, lift_ito, lift_stratonovich, sample_batch, solve_ito_via_strat, solve_rde
from roughfbm.rde import linear_field

params = SimpleNamespace(mu=0.1, sigma=0.5, X0=1.0, hurst=0.45)
path = sample_batch(FbmModel(params.hurst), Grid(0.0, 1.0, 2**14), seed=8, count=1)[0]

res = geometric_fbm(params, path)
print(f"sup |Picard - closed form| = {res.sup_error:.2e} after {res.solution.iterations} sweeps")
print("Picard gaps:", " ".join(f"{g:.1e}" for g in res.solution.gap_history))

f = linear_field([params.sigma])
direct = solve_rde(f, lift_ito(path), [1.0])
via = solve_ito_via_strat(f, lift_stratonovich(path), [1.0])
print(f"Itô solution direct vs through the Stratonovich lift: {np.abs(direct.values - via.values).max():.2e}")
