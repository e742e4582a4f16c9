"""Fractional Black-Scholes call prices.

Under the shifted measure the price is X0 (1 - Phi(c-)) - K e^{-rT} (1 - Phi(c+)).
All Hurst curves meet at T = 1 because T^H = 1 there.  Writes the data
behind the price-versus-maturity figure to fig1.csv.
"""

import numpy as np

from roughfbm import MarketParams, figure1_curve, price_call, price_closed_form, price_monte_carlo
from roughfbm.fileio import write_curve_csv
from roughfbm.finance import FIGURE1, black_scholes_call, call, figure1_features

p = MarketParams(T=1.0, hurst=0.4, **FIGURE1)
print(f"closed form {price_call(p):.10f}, quadrature {price_closed_form(p, call(p.K)):.10f}")
mc, se = price_monte_carlo(p, call(p.K), 1_000_000, seed=1)
print(f"Monte Carlo {mc:.4f} +- {se:.4f}")

half = p.replace(hurst=0.5, T=0.7)
print("H = 1/2 vs Black-Scholes:", price_call(half) - black_scholes_call(half.X0, half.K, half.r, half.sigma, half.T))

table = figure1_curve(p, np.linspace(0.05, 3.0, 60), [0.35, 0.40, 0.45, 0.50])
with open("fig1.csv", "w", newline="") as fh:
    write_curve_csv(fh, table)
print("wrote fig1.csv;", figure1_features(table))
