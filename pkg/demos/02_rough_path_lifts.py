"""Level-2 rough paths over fBM.

The Stratonovich lift is the canonical lift of the dyadic piecewise-linear
interpolation.  The Itô lift subtracts (t^{2H} - s^{2H}) I / 2 from the
second level.  Both are stored per step and reassembled on any interval by
Chen's identity.
"""

import numpy as np

from roughfbm import FbmModel, Grid, chen_reconstruct, lift_ito, lift_stratonovich, pvar_diagnostics, sample_batch
from roughfbm.roughpath import levy_area, tensor_mul

h = 0.4
path = sample_batch(FbmModel(h, 2), Grid(0.0, 1.0, 2**12), seed=3, count=1)[0]
strat, ito = lift_stratonovich(path), lift_ito(path)

x1, x2 = chen_reconstruct(strat, 0.0, 1.0)
print("X^1_{0,1} =", x1.round(4))
print("Sym X^2 - X^1 (x) X^1 / 2 (Stratonovich):", np.abs(0.5 * (x2 + x2.T) - 0.5 * np.outer(x1, x1)).max())

y1, y2 = chen_reconstruct(ito, 0.0, 1.0)
print("Itô diagonal offset:", np.diag(0.5 * (y2 + y2.T) - 0.5 * np.outer(y1, y1)).round(12), "expected -1/2")

left, right = chen_reconstruct(ito, 0.0, 0.5), chen_reconstruct(ito, 0.5, 1.0)
print("Chen over [0, 1/2] and [1/2, 1]:", np.abs(tensor_mul(left, right)[1] - y2).max())

# Lévy area converges as the dyadic level increases
for m in (6, 8, 10, 12):
    print(f"level {m:2d}: Lévy area over [0, 1] = {levy_area(lift_stratonovich(path, m), 0, 1)[0, 1]:+.5f}")

diag = pvar_diagnostics(strat)
print(f"p = {diag.p:.3f}: dyadic p-variation {diag.level1_pvar:.3f}, p/2-variation of X^2 {diag.level2_pvar2:.3f}")
