"""The Stratonovich market admits arbitrage, the Itô market does not (within admissible strategies).

With E = X e^{-rt} / X0 the strategy gamma = 1 - E^2, zeta = 2 (E - 1) / X0
costs nothing, never loses and is self-financing when gains are Stratonovich
integrals.  Read with Itô integrals the same holdings are not self-financing,
and admissible strategies keep a zero-mean discounted value.
"""

from roughfbm import FbmModel, Grid, MarketParams, arbitrage_demo, no_arbitrage_check, sample_batch
from roughfbm.finance import constant_holding, proportional_holding, smoothed_indicator

p = MarketParams(mu=0.1, sigma=0.5, r=0.05, X0=1.0, K=1.0, T=1.0, hurst=0.4)
paths = sample_batch(FbmModel(p.hurst), Grid(0.0, 1.0, 2**12), seed=9, count=32)
out = arbitrage_demo(p, paths, n_terminal=10_000, seed=9)
print(f"V_0 = {out['V0']}, min V_t = {out['min_V']:.2e}, P(V_T > 0) ~ {out['p_positive']}")
for mesh, s, i in zip(out["mesh"], out["self_financing_residual"], out["ito_market_residual"]):
    print(f"mesh {mesh:.1e}: self-financing residual, Stratonovich {s:.2e}   Itô {i:.2e}")

for zeta in (constant_holding(1.0), proportional_holding(), smoothed_indicator(p.K)):
    r = no_arbitrage_check(p, zeta, 20_000, seed=7, steps=128)
    print(f"{zeta.name:14s} E[e^-rT V_T - V_0] = {r.mean:+.4f} +- {r.se:.4f}  pass: {r.passed}")
