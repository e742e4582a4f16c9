"""Fractional Black-Scholes market driven by fBM.

The stock follows dX = mu X dt + sigma X dB and the money market M_t = e^{rt}.
In the Stratonovich reading X = X0 exp(sigma B + mu t) and the market admits
an explicit arbitrage; in the Itô reading X = X0 exp(sigma B + mu t -
sigma^2 t^{2H} / 2) and pricing goes through the analytic Girsanov shift
mu -> r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate as sintegrate
from scipy.special import erfc

from .errors import DomainError, NumericalError
from .fbm import HURST_MAX, HURST_MIN, FbmModel, FbmPath, Grid, hurst_phi, iter_batches, sample_batch
from .integrate import OneForm, _slope, integrate_one_form, lift_spacetime, mean_and_se, total
from .roughpath import lift_ito, lift_stratonovich


@dataclass(frozen=True)
class MarketParams:
    """Parameters of the fractional Black-Scholes market."""

    mu: float
    sigma: float
    r: float
    X0: float
    K: float
    T: float
    hurst: float

    def __post_init__(self):
        for name in ("mu", "sigma", "r", "X0", "K", "T", "hurst"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        for name in ("sigma", "X0", "K", "T"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not HURST_MIN < self.hurst <= HURST_MAX:
            raise DomainError(f"hurst must lie in (1/3, 1/2], got {self.hurst}")

    def replace(self, **kw) -> "MarketParams":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("mu", "sigma", "r", "X0", "K", "T", "hurst")}


FIGURE1 = dict(mu=0.05, sigma=2.0, r=0.05, X0=3.5, K=3.0)


@dataclass(frozen=True)
class GirsanovShift:
    """B^_t = B_t + ((mu - r) / sigma) t is an fBM under the shifted measure P^.

    Only the drift is realised numerically.  The kernel-based density Z_T,
    the processes u_s and v(s) and the Brownian motion W~ of the underlying
    theorem are left analytic.
    """

    params: MarketParams

    @property
    def drift(self) -> float:
        p = self.params
        return (p.mu - p.r) / p.sigma

    def shifted(self, b, times):
        return np.asarray(b) + self.drift * np.asarray(times)

    def unshifted(self, b_hat, times):
        return np.asarray(b_hat) - self.drift * np.asarray(times)


# ---------------------------------------------------------------------------
# payoffs


@dataclass(frozen=True)
class Payoff:
    """Payoff F(X_T) with the prices at which it is not smooth."""

    fn: Callable
    kinks: tuple = ()
    name: str = "payoff"

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def call(K: float) -> Payoff:
    return Payoff(lambda x: np.maximum(x - K, 0.0), (K,), "call")


def put(K: float) -> Payoff:
    return Payoff(lambda x: np.maximum(K - x, 0.0), (K,), "put")


def digital(K: float) -> Payoff:
    return Payoff(lambda x: (x > K).astype(float), (K,), "digital")


def identity() -> Payoff:
    return Payoff(lambda x: x, (), "identity")


def unit() -> Payoff:
    return Payoff(lambda x: np.ones_like(x), (), "unit")


# ---------------------------------------------------------------------------
# pricing


def norm_sf(c):
    """1 - Phi(c) via erfc, accurate in both tails."""
    return 0.5 * erfc(np.asarray(c, dtype=float) / math.sqrt(2.0))


def call_thresholds(params: MarketParams):
    """(c-, c+) of the call formula."""
    p = params
    sth = p.sigma * p.T**p.hurst
    base = math.log(p.K / p.X0) / sth - (p.r / p.sigma) * p.T ** (1.0 - p.hurst)
    return base - 0.5 * sth, base + 0.5 * sth


def price_call(params: MarketParams) -> float:
    """X0 (1 - Phi(c-)) - K e^{-rT} (1 - Phi(c+))."""
    cm, cp = call_thresholds(params)
    p = params
    return float(p.X0 * norm_sf(cm) - p.K * math.exp(-p.r * p.T) * norm_sf(cp))


def black_scholes_call(S, K, r, sigma, T) -> float:
    """Classical Black-Scholes call price."""
    srt = sigma * math.sqrt(T)
    d1 = (math.log(S / K) + (r + 0.5 * sigma**2) * T) / srt
    d2 = d1 - srt
    return float(S * norm_sf(-d1) - K * math.exp(-r * T) * norm_sf(-d2))


def terminal_price(params: MarketParams, z):
    """X_T under the shifted measure as a function of a standard normal z."""
    p = params
    sth = p.sigma * p.T**p.hurst
    return p.X0 * np.exp(sth * np.asarray(z) + p.r * p.T - 0.5 * sth * sth)


def price_closed_form(params: MarketParams, payoff: Payoff, epsrel: float = 1e-12,
                      width: float = 40.0) -> float:
    """e^{-rT} int F(X0 exp(sigma T^H y + rT - sigma^2 T^{2H} / 2)) phi(y) dy.

    Adaptive Gauss-Kronrod quadrature, split at the payoff's kinks, over a
    window of ``width`` standard deviations around both the origin and the
    log-normal tilt.  Raises :class:`NumericalError` if any piece fails to
    converge.
    """
    p = params
    sth = p.sigma * p.T**p.hurst
    lo = min(-width, sth - width)
    hi = max(width, sth + width)
    cuts = [(math.log(k / p.X0) - p.r * p.T + 0.5 * sth * sth) / sth for k in payoff.kinks if k > 0]
    edges = [lo] + sorted(c for c in cuts if lo < c < hi) + [hi]
    norm = 1.0 / math.sqrt(2.0 * math.pi)

    def integrand(y):
        return float(payoff(terminal_price(p, y))) * norm * math.exp(-0.5 * y * y)

    total_ = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        out = sintegrate.quad(integrand, a, b, epsabs=0.0, epsrel=epsrel, limit=400, full_output=1)
        if len(out) > 3:
            raise NumericalError(f"quadrature failed on [{a:.3g}, {b:.3g}]: {out[3]}")
        total_ += out[0]
    return math.exp(-p.r * p.T) * total_


MC_CHUNK = 65536


def _normal_chunk(seed: int, index: int, size: int) -> np.ndarray:
    # stream family 1; fBM paths use family 0
    rng = np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, 1, int(index)]))
    return rng.standard_normal(size)


def price_monte_carlo(params: MarketParams, payoff: Payoff, n: int, seed: int,
                      workers: int = 1) -> tuple[float, float]:
    """(price, standard error) from ``n`` terminal draws under the shifted measure.

    Normals come in fixed blocks of ``MC_CHUNK`` draws, each block from its
    own counter-based stream, so the result does not depend on ``workers``.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    sizes = [min(MC_CHUNK, n - a) for a in range(0, n, MC_CHUNK)]

    def block(i):
        return payoff(terminal_price(params, _normal_chunk(seed, i, sizes[i])))

    if workers > 1 and len(sizes) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(block, range(len(sizes))))
    else:
        parts = [block(i) for i in range(len(sizes))]
    vals = np.concatenate(parts)
    mean, se = mean_and_se(vals)
    disc = math.exp(-params.r * params.T)
    return float(disc * mean), float(disc * se)


def figure1_curve(params: MarketParams, t_grid, h_list) -> np.ndarray:
    """Rows (T, H, price) of the call price over maturities and Hurst values.

    Rows are ordered by H, then T.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise DomainError("maturities must be positive and increasing")
    rows = []
    for h in h_list:
        for T in t_grid:
            rows.append((T, h, price_call(params.replace(T=float(T), hurst=float(h)))))
    return np.array(rows)


def figure1_features(table: np.ndarray, atol: float = 1e-12) -> dict:
    """Spread of prices across H at each maturity; curves meet at T = 1."""
    ts = np.unique(table[:, 0])
    spread = np.array([np.ptp(table[table[:, 0] == t, 2]) for t in ts])
    at_one = np.isclose(ts, 1.0, rtol=0, atol=1e-12)
    return {
        "coincide_at_T1": bool(at_one.any() and np.all(spread[at_one] <= atol)),
        "separate_elsewhere": bool(np.all(spread[~at_one] > 1e3 * atol)),
        "finite": bool(np.all(np.isfinite(table[:, 2]))),
        "max_spread_at_T1": float(spread[at_one].max()) if at_one.any() else None,
        "min_spread_elsewhere": float(spread[~at_one].min()) if (~at_one).any() else None,
    }


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class Portfolio:
    """Holdings (gamma, zeta) of money market and stock as functions of (X_t, t).

    ``dzeta`` is the derivative of ``zeta`` in the price; it enters the
    compensated sums of the stock integral.  Taking (x, t) as the only
    arguments is what makes a portfolio admissible.
    """

    gamma: Callable
    zeta: Callable
    dzeta: Callable
    name: str = "portfolio"
    admissible: bool = True


def stratonovich_arbitrage(params: MarketParams) -> Portfolio:
    """gamma = 1 - E^2, zeta = 2 (E - 1) / X0 with E = X e^{-rt} / X0.

    In the Stratonovich market E = exp(sigma B + (mu - r) t), so the value
    is V = e^{rt} (E - 1)^2: zero at t = 0 and non-negative afterwards.
    """
    X0, r = params.X0, params.r

    def e(x, t):
        return x * np.exp(-r * t) / X0

    return Portfolio(
        gamma=lambda x, t: 1.0 - e(x, t) ** 2,
        zeta=lambda x, t: 2.0 * (e(x, t) - 1.0) / X0,
        dzeta=lambda x, t: 2.0 * np.exp(-r * t) / X0**2 + 0.0 * x,
        name="stratonovich_arbitrage",
    )


def constant_holding(c: float = 1.0) -> Portfolio:
    return Portfolio(lambda x, t: 0.0 * x, lambda x, t: c + 0.0 * x, lambda x, t: 0.0 * x,
                     name=f"zeta={c:g}")


def proportional_holding() -> Portfolio:
    return Portfolio(lambda x, t: 0.0 * x, lambda x, t: x, lambda x, t: np.ones_like(x),
                     name="zeta=X")


def smoothed_indicator(K: float, width: float | None = None) -> Portfolio:
    """zeta = sigmoid((X - K) / w), a smooth stand-in for 1{X > K}.

    The exact indicator has no derivative at K, and the compensated sums of
    a rough integral need one.  The default width is w = K / 5: the mean of
    the discrete Itô sum carries a bias of order w^{-3} h^{4H - 1}, which for
    H near 1/3 only fades slowly with the mesh h.
    """
    w = 0.2 * K if width is None else width

    def s(x):
        return 0.5 * (1.0 + np.tanh(0.5 * (x - K) / w))

    return Portfolio(lambda x, t: 0.0 * x, lambda x, t: s(x),
                     lambda x, t: s(x) * (1.0 - s(x)) / w, name="zeta=1{X>K}~")


def _price_process(params, flavor, mu):
    s = params.sigma

    def X(x, t):
        expo = s * x + mu * t
        if flavor == "ito":
            expo = expo - 0.5 * s * s * hurst_phi(params.hurst, t)
        return params.X0 * np.exp(expo)

    return X


def stock_integral_form(params: MarketParams, zeta: Portfolio, flavor: str, mu: float | None = None,
                        discount: bool = False) -> OneForm:
    """One-form of int zeta(X, t) dX along the space-time path of B.

    f1 = sigma zeta X against dB and f2 = mu zeta X against dt, with
    D_x f1 = sigma^2 X (zeta' X + zeta).  With ``discount`` the form is
    multiplied by e^{-rt} and the dt part is dropped (the discounted stock
    has no drift once mu = r).
    """
    mu = params.mu if mu is None else mu
    s, r = params.sigma, params.r
    X = _price_process(params, flavor, mu)

    def parts(x, t):
        xs = x[..., 0]
        px = X(xs, t)
        z = zeta.zeta(px, t)
        dz = zeta.dzeta(px, t)
        scale = np.exp(-r * t) if discount else 1.0
        return px, z, dz, scale

    def F(x, t):
        px, z, _, sc = parts(x, t)
        return (sc * s * z * px)[..., None, None]

    def DxF(x, t):
        px, z, dz, sc = parts(x, t)
        return (sc * s * s * px * (dz * px + z))[..., None, None, None]

    def G(x, t):
        px, z, _, _ = parts(x, t)
        return (mu * z * px)[..., None]

    def DxG(x, t):
        px, z, dz, _ = parts(x, t)
        return (mu * s * px * (dz * px + z))[..., None, None]

    if discount:
        return OneForm(F, DxF, time_dependent=True, name=f"discounted {zeta.name}")
    return OneForm(F, DxF, drift=G, Dx_drift=DxG, time_dependent=True, name=zeta.name)


@dataclass
class SelfFinancingReport:
    mesh: np.ndarray
    residual: np.ndarray
    rate: float


def self_financing_residual(params: MarketParams, portfolio: Portfolio, path: FbmPath,
                            flavor: str, levels) -> SelfFinancingReport:
    """|V_T - V_0 - int gamma dM - int zeta dX| on the dyadic lifts of ``path``.

    int gamma dM is a left-point Young sum against the exact increments of
    e^{rt}; int zeta dX is the rough integral of :func:`stock_integral_form`
    on the space-time path of the ``flavor`` lift.
    """
    lift = lift_ito if flavor == "ito" else lift_stratonovich
    X = _price_process(params, flavor, params.mu)
    rows = []
    for m in levels:
        rp = lift(path, m)
        t = rp.grid.times
        x = X(rp.values[..., 0], t)
        m_t = np.exp(params.r * t)
        gam = portfolio.gamma(x, t)
        v = gam * m_t + portfolio.zeta(x, t) * x
        money = np.sum(gam[..., :-1] * np.diff(m_t), axis=-1)
        stock = total(integrate_one_form(stock_integral_form(params, portfolio, flavor),
                                         lift_spacetime(rp)))[0][..., 0]
        res = np.abs(v[..., -1] - v[..., 0] - money - stock)
        rows.append((rp.grid.dt, float(np.sqrt(np.mean(res**2)))))
    mesh, res = (np.array(c) for c in zip(*rows))
    return SelfFinancingReport(mesh, res, _slope(mesh, res))


def arbitrage_demo(params: MarketParams, path: FbmPath, levels=None, n_terminal: int = 10_000,
                   seed: int = 0) -> dict:
    """The explicit arbitrage of the Stratonovich market on sampled paths.

    Reports V_0, min_t V_t, the gap between gamma M + zeta X and the closed
    form e^{rt}(E - 1)^2, the self-financing residual per refinement level
    (Stratonovich integrals, where it vanishes, and Itô integrals in the Itô
    market, where it does not), and a Monte Carlo estimate of P^(V_T > 0)
    from ``n_terminal`` draws of B^_T.  For a batch of paths the value
    statistics are taken over every path and the residuals are
    root-mean-square over the batch.
    """
    top = path.grid.levels
    levels = list(range(max(top - 6, 0), top + 1)) if levels is None else list(levels)
    p = params
    pf = stratonovich_arbitrage(p)
    t = path.grid.times
    b = path.values[..., 0]
    x = _price_process(p, "stratonovich", p.mu)(b, t)
    v = pf.gamma(x, t) * np.exp(p.r * t) + pf.zeta(x, t) * x
    closed = np.exp(p.r * t) * np.expm1(p.sigma * b + (p.mu - p.r) * t) ** 2
    strat = self_financing_residual(p, pf, path, "stratonovich", levels)
    ito = self_financing_residual(p, pf, path, "ito", levels)
    # under P^, sigma B_T + (mu - r) T = sigma B^_T
    grid = Grid(0.0, p.T, 1)
    b_hat = sample_batch(FbmModel(p.hurst), grid, seed, n_terminal, method="cholesky").values[:, -1, 0]
    v_t = math.exp(p.r * p.T) * np.expm1(p.sigma * b_hat) ** 2
    return {
        "V0": float(np.max(np.abs(v[..., 0]))),
        "min_V": float(v.min()),
        "value_identity_error": float(np.max(np.abs(v - closed))),
        "p_positive": float(np.mean(v_t > 0)),
        "n_terminal": int(n_terminal),
        "paths": len(path),
        "mesh": strat.mesh.tolist(),
        "self_financing_residual": strat.residual.tolist(),
        "self_financing_rate": strat.rate,
        "ito_market_residual": ito.residual.tolist(),
        "ito_market_rate": ito.rate,
    }


@dataclass
class NoArbitrageReport:
    strategy: str
    mean: float
    se: float
    passed: bool
    n_paths: int

    def as_dict(self) -> dict:
        return {"strategy": self.strategy, "mean": self.mean, "se": self.se,
                "pass": self.passed, "paths": self.n_paths}


def no_arbitrage_check(params: MarketParams, zeta: Portfolio, n_paths: int, seed: int,
                       steps: int = 256, sigmas: float = 3.0, workers: int = 1,
                       chunk: int = 8192) -> NoArbitrageReport:
    """Martingale test of the discounted value of a self-financing strategy.

    Under the shifted measure the drift becomes r, and e^{-rT} V_T - V_0 is
    the Itô integral of sigma e^{-rt} zeta(X) X against dB^.  Passes iff
    |mean| < ``sigmas`` * SE over ``n_paths`` paths; an exactly zero sample
    passes with SE = 0.
    """
    grid = Grid(0.0, params.T, steps)
    model = FbmModel(params.hurst)
    form = stock_integral_form(params, zeta, "ito", mu=params.r, discount=True)
    parts = []
    for batch in iter_batches(model, grid, seed, n_paths, chunk=chunk, workers=workers):
        parts.append(total(integrate_one_form(form, lift_ito(batch)))[0][..., 0])
    vals = np.concatenate(parts)
    mean, se = mean_and_se(vals)
    passed = bool(mean == 0.0) if se == 0 else bool(abs(mean) < sigmas * se)
    return NoArbitrageReport(zeta.name, float(mean), float(se), passed, int(n_paths))


__all__ = ["MarketParams", "GirsanovShift", "Payoff", "Portfolio", "NoArbitrageReport",
           "SelfFinancingReport", "FIGURE1", "call", "put", "digital", "identity", "unit",
           "norm_sf", "call_thresholds", "price_call", "black_scholes_call", "terminal_price",
           "price_closed_form", "price_monte_carlo", "figure1_curve", "figure1_features",
           "stratonovich_arbitrage", "constant_holding", "proportional_holding",
           "smoothed_indicator", "stock_integral_form", "self_financing_residual",
           "arbitrage_demo", "no_arbitrage_check"]
