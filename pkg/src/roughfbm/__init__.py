"""Itô-type rough-path integration against fractional Brownian motion.

Modules:

fbm        exact fBM sampling on uniform grids
roughpath  level-2 paths, Stratonovich and Itô lifts, Chen's identity
integrate  Young and rough integrals of one-forms, Itô <-> Stratonovich
rde        Picard solver for rough differential equations, geometric fBM
finance    fractional Black-Scholes pricing and the arbitrage example
cli        the ``roughfbm`` command
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, NumericalError, RoughFbmError
from .fbm import FbmModel, FbmPath, Grid, covariance, sample_batch, sample_paths
from .roughpath import (Level2Path, Perturbation, chen_reconstruct, lift_ito, lift_stratonovich,
                        perturb, pvar_diagnostics)
from .integrate import (OneForm, Potential, RoughIntegral, SpaceTimePath, integrate_one_form,
                        ito_formula_residual, ito_strat_translate, lift_spacetime, translation_terms,
                        young_integral, zero_mean_verify)
from .rde import VectorField, RdeSolution, geometric_fbm, solve_ito_via_strat, solve_rde, chain_rule_check
from .finance import (MarketParams, arbitrage_demo, no_arbitrage_check, price_call,
                      price_closed_form, price_monte_carlo, figure1_curve)

__all__ = [
    "__version__", "RoughFbmError", "DomainError", "NumericalError", "ConvergenceError",
    "FbmModel", "FbmPath", "Grid", "covariance", "sample_batch", "sample_paths",
    "Level2Path", "Perturbation", "chen_reconstruct", "lift_ito", "lift_stratonovich", "perturb",
    "pvar_diagnostics", "OneForm", "Potential", "RoughIntegral", "SpaceTimePath",
    "integrate_one_form", "ito_formula_residual", "ito_strat_translate", "lift_spacetime",
    "translation_terms", "young_integral", "zero_mean_verify", "VectorField", "RdeSolution",
    "geometric_fbm", "solve_ito_via_strat", "solve_rde", "chain_rule_check", "MarketParams",
    "arbitrage_demo", "no_arbitrage_check", "price_call", "price_closed_form", "price_monte_carlo",
    "figure1_curve",
]
