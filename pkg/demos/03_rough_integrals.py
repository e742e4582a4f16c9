"""Rough integrals of one-forms, the Itô/Stratonovich translation and the Itô formula.

A one-form integral is a compensated Riemann sum F(X) X^1 + DF(X) X^2.
Against the Itô lift the integral of B dB is (B_t^2 - t^{2H}) / 2 exactly,
and integrals of one-forms have mean zero.
"""

import numpy as np

from roughfbm import (FbmModel, Grid, integrate_one_form, ito_strat_translate, lift_ito, lift_stratonovich,
                      sample_batch, zero_mean_verify)
from roughfbm import forms
from roughfbm.integrate import ito_formula_report, total

h = 0.45
path = sample_batch(FbmModel(h), Grid(0.0, 1.0, 2**12), seed=5, count=1)
b_T = path.values[0, -1, 0]

ito = total(integrate_one_form(forms.identity(1), lift_ito(path)))[0][0, 0]
strat = total(integrate_one_form(forms.identity(1), lift_stratonovich(path)))[0][0, 0]
print(f"int B dB (Itô)          {ito:+.12f}   (B_1^2 - 1) / 2 = {0.5 * (b_T**2 - 1):+.12f}")
print(f"int B o dB (Stratonovich) {strat:+.12f}   B_1^2 / 2       = {0.5 * b_T**2:+.12f}")

# translating the Stratonovich integral reproduces the Itô one step by step
form = forms.sine(1)
s_int = integrate_one_form(form, lift_stratonovich(path))
i_int = integrate_one_form(form, lift_ito(path))
tr = ito_strat_translate(form, s_int, lift_stratonovich(path))
print("translation error, level 1:", np.abs(tr.level1 - i_int.level1).max())

# Itô formula for Phi = x^3 / 3 (one-form x^2): residual shrinks with the mesh
rep = ito_formula_report(forms.cube_potential(1), sample_batch(FbmModel(h), Grid(0, 1, 2**14), 6, 8), range(10, 15))
for mesh, r in zip(rep.mesh, rep.residual_1):
    print(f"mesh {mesh:.1e}: Itô formula residual {r:.2e}")
print(f"fitted rate {rep.rate_1:.2f}")

res = zero_mean_verify(forms.square(1), FbmModel(h), Grid(0.0, 1.0, 128), 20_000, seed=7)
print(f"E[int B^2 dB] = {res.mean[0]:+.4f} +- {res.se[0]:.4f}  (pass: {res.passed})")
