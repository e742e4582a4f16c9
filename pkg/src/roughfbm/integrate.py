"""Young integrals and rough integrals of one-forms against level-2 paths.

Rough integrals use compensated Riemann sums evaluated at the left point of
each step::

    Y^1_k = F(x_k, t_k) dx_k + DxF(x_k, t_k) : X^2_k + G(x_k, t_k) h_k
    Y^2_k = F(x_k, t_k) X^2_k F(x_k, t_k)^T

and the result is itself a level-2 path whose interval values come from
Chen's identity.  Every du^{2H} integral uses the exact increments
t_{k+1}^{2H} - t_k^{2H} against left-point integrand values.

Callback conventions (all vectorised over leading axes): ``x`` has shape
(..., d) and ``t`` shape (...).  ``F`` returns (..., e, d); ``DxF`` returns
(..., e, d, d) with ``DxF[..., a, j, i] = dF_{aj} / dx_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError, NumericalError
from .fbm import FbmModel, FbmPath, Grid, hurst_phi, iter_batches
from .roughpath import Level2Path, chen_prefix, chen_range, lift_ito, lift_stratonovich

Callback = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OneForm:
    """A map (x, t) -> L(R^d (+) R, R^e) acting as (xi, tau) -> F xi + G tau.

    ``drift`` (G) and its derivatives are optional; without them the form is
    F(x, t) xi.  ``DtF``, ``Dx_drift`` and ``Dt_drift`` only enter the
    vanishing cross terms of the space-time expansion.
    """

    F: Callback
    DxF: Callback
    drift: Callback | None = None
    Dx_drift: Callback | None = None
    DtF: Callback | None = None
    Dt_drift: Callback | None = None
    time_dependent: bool = False
    name: str = "one-form"

    @property
    def uses_time(self) -> bool:
        return self.time_dependent or self.drift is not None


class RoughIntegral(Level2Path):
    """Per-step values of a rough integral; a level-2 path in R^e."""


def _evaluate(fn, x, t, name):
    t = np.broadcast_to(t, x.shape[:-1])
    with np.errstate(all="ignore"):
        out = np.asarray(fn(x, t), dtype=float)
    if not np.all(np.isfinite(out)):
        lead = x.shape[:-1]
        where = ()
        if out.shape[: len(lead)] == lead:
            bad = np.argwhere((~np.isfinite(out.reshape(lead + (-1,)))).any(-1))
            where = tuple(bad[0]) if bad.size else ()
        xs = x[where] if where else x
        ts = t[where] if where else t
        raise NumericalError(f"{name} returned a non-finite value at x={xs}, t={ts}")
    return out


# ---------------------------------------------------------------------------
# time-like extensions


@dataclass(frozen=True, eq=False)
class SpaceTimePath:
    """The pair (X, clock) as a (d + 1)-dimensional level-2 path.

    With the clock u -> u this is the space-time path; its cross integrals
    per step are computed in closed form for the piecewise-linear model.
    ``extended`` holds the full path, the other attributes are views.
    """

    extended: Level2Path
    base_flavor: str

    @property
    def dim(self) -> int:
        return self.extended.dim - 1

    @property
    def grid(self) -> Grid:
        return self.extended.grid

    @property
    def hurst(self):
        return self.extended.hurst

    @property
    def base(self) -> Level2Path:
        e, d = self.extended, self.dim
        return Level2Path(e.grid, e.level1[..., :d], e.level2[..., :d, :d], self.base_flavor,
                          e.origin[..., :d], e.hurst)

    @property
    def cross_xu(self) -> np.ndarray:
        """Per-step integral of X_{s,u} against the clock."""
        return self.extended.level2[..., : self.dim, self.dim]

    @property
    def cross_ux(self) -> np.ndarray:
        """Per-step integral of (clock_u - clock_s) against X."""
        return self.extended.level2[..., self.dim, : self.dim]

    @property
    def time2(self) -> np.ndarray:
        return self.extended.level2[..., self.dim, self.dim]

    def coarsen(self, factor: int) -> "SpaceTimePath":
        return SpaceTimePath(self.extended.coarsen(factor), self.base_flavor)


def extend_with_clock(rp: Level2Path, clock: np.ndarray, ramp: np.ndarray) -> Level2Path:
    """Append a deterministic coordinate ``clock`` (values on the grid) to ``rp``.

    ``ramp[k]`` is the integral of (u - t_k) against d clock over step k.
    With X linear on each step this fixes every cross term.
    """
    d = rp.dim
    n = rp.grid.n
    h = rp.grid.dt
    dc = np.diff(clock)
    dx = rp.level1
    lead = dx.shape[:-2]
    x1 = np.empty(lead + (n, d + 1))
    x1[..., :d] = dx
    x1[..., d] = dc
    x2 = np.empty(lead + (n, d + 1, d + 1))
    x2[..., :d, :d] = rp.level2
    xu = dx * (ramp / h)[:, None]
    x2[..., :d, d] = xu
    x2[..., d, :d] = dx * dc[:, None] - xu
    x2[..., d, d] = 0.5 * dc**2
    origin = np.concatenate([rp.origin, np.broadcast_to(clock[0], lead + (1,))], axis=-1)
    return Level2Path(rp.grid, x1, x2, "generic", origin, rp.hurst)


def lift_spacetime(rp: Level2Path) -> SpaceTimePath:
    """Space-time path (X, t) of a per-step lift."""
    if isinstance(rp, SpaceTimePath):
        return rp
    h = rp.grid.dt
    ramp = np.full(rp.grid.n, 0.5 * h * h)
    return SpaceTimePath(extend_with_clock(rp, rp.grid.times, ramp), rp.flavor)


def power_clock_ramp(grid: Grid, hurst: float) -> np.ndarray:
    """Per-step integral of (u - t_k) d(u^{2H}), in closed form."""
    t = grid.times
    a = 2.0 * hurst
    return grid.dt * t[1:] ** a - (t[1:] ** (a + 1) - t[:-1] ** (a + 1)) / (a + 1)


# ---------------------------------------------------------------------------
# Young integration


def young_integral(f: Callable, g: Callable, s: float, t: float, tol: float = 1e-9,
                   n0: int = 16, max_level: int = 22) -> float:
    """Riemann–Stieltjes integral of f against g on [s, t] by left-point sums.

    The partition is halved repeatedly; successive sums are combined in a
    Romberg table and refinement stops once two diagonal estimates agree to
    ``tol`` relative to the integral's scale.  Both callables take an array
    of times.
    """
    if not t > s:
        raise DomainError("young_integral needs s < t")
    rows = []
    history = []
    n = n0
    for level in range(max_level + 1):
        u = np.linspace(s, t, n + 1)
        with np.errstate(all="ignore"):
            fu = np.asarray(f(u[:-1]), dtype=float)
            dg = np.diff(np.asarray(g(u), dtype=float))
        if not (np.all(np.isfinite(fu)) and np.all(np.isfinite(dg))):
            raise NumericalError("young_integral: non-finite integrand or integrator")
        row = [float(np.sum(fu * dg))]
        scale = float(np.sum(np.abs(fu * dg)))
        for j, prev in enumerate(rows[-1] if rows else []):
            row.append(row[j] + (row[j] - prev) / (2.0 ** (j + 1) - 1.0))
        rows.append(row)
        if level:
            diff = abs(rows[-1][-1] - rows[-2][-1])
            history.append(diff)
            if diff <= tol * max(abs(rows[-1][-1]), scale, 1e-300):
                return rows[-1][-1]
        n *= 2
    raise ConvergenceError(f"young_integral did not reach tol={tol} with {n // 2} points", history)


def young_sum(f_vals: np.ndarray, g_vals: np.ndarray, axis: int = -1, cumulative: bool = False):
    """Left-point Stieltjes sum of sampled f against sampled g along ``axis``.

    Both arrays hold values at the n + 1 grid points and broadcast against
    each other.  With ``cumulative`` the running integrals from the first
    point are returned (n + 1 values, starting at zero).
    """
    f = np.moveaxis(np.asarray(f_vals, dtype=float), axis, -1)
    g = np.moveaxis(np.asarray(g_vals, dtype=float), axis, -1)
    steps = f[..., :-1] * np.diff(g, axis=-1)
    if not cumulative:
        return steps.sum(axis=-1)
    run = np.concatenate([np.zeros(steps.shape[:-1] + (1,)), np.cumsum(steps, axis=-1)], axis=-1)
    return np.moveaxis(run, -1, axis)


# ---------------------------------------------------------------------------
# rough integrals of one-forms


def _prepare(form: OneForm, rp, stride: int):
    if isinstance(rp, SpaceTimePath):
        st = rp
    elif form.uses_time:
        st = lift_spacetime(rp)
    else:
        st = None
    if st is not None:
        ext = st.extended if stride == 1 else st.extended.coarsen(stride)
        return ext, st.base_flavor, True
    base = rp if stride == 1 else rp.coarsen(stride)
    return base, rp.flavor, False


def _left_points(path: Level2Path, spacetime: bool):
    vals = path.values[..., :-1, :]
    if spacetime:
        return vals[..., :-1], vals[..., -1]
    return vals, np.broadcast_to(path.grid.times[:-1], vals.shape[:-1])


def integrate_one_form(form: OneForm, rp, stride: int = 1, cross_terms: bool = False) -> RoughIntegral:
    """Rough integral of ``form`` along ``rp`` on the partition of every ``stride``-th point.

    ``rp`` is a :class:`Level2Path` or a :class:`SpaceTimePath`; time-dependent
    forms and forms with a drift are integrated along the space-time path.
    The cross terms of that expansion (integrals of X against du and of u
    against dX, and the du du term) are o(mesh) and are left out unless
    ``cross_terms`` is set.
    """
    path, flavor, spacetime = _prepare(form, rp, stride)
    x, t = _left_points(path, spacetime)
    d = x.shape[-1]
    dx = path.level1[..., :d]
    x2 = path.level2[..., :d, :d]
    F = _evaluate(form.F, x, t, f"{form.name}.F")
    F = np.broadcast_to(F, x.shape[:-1] + F.shape[-2:])
    DF = _evaluate(form.DxF, x, t, f"{form.name}.DxF")
    DF = np.broadcast_to(DF, F.shape + (d,))
    y1 = np.einsum("...aj,...j->...a", F, dx) + np.einsum("...aji,...ij->...a", DF, x2)
    y2 = np.einsum("...ai,...ij,...bj->...ab", F, x2, F)
    if spacetime:
        h = path.level1[..., d]
        G = None
        if form.drift is not None:
            G = np.broadcast_to(_evaluate(form.drift, x, t, f"{form.name}.drift"), y1.shape)
            y1 = y1 + G * h[..., None]
        if cross_terms:
            xu = path.level2[..., :d, d]
            ux = path.level2[..., d, :d]
            tt = path.level2[..., d, d]
            if form.DtF is not None:
                DtF = _evaluate(form.DtF, x, t, f"{form.name}.DtF")
                y1 = y1 + np.einsum("...aj,...j->...a", np.broadcast_to(DtF, F.shape), ux)
            if G is not None:
                if form.Dx_drift is not None:
                    DxG = _evaluate(form.Dx_drift, x, t, f"{form.name}.Dx_drift")
                    y1 = y1 + np.einsum("...ai,...i->...a", np.broadcast_to(DxG, F.shape), xu)
                if form.Dt_drift is not None:
                    DtG = _evaluate(form.Dt_drift, x, t, f"{form.name}.Dt_drift")
                    y1 = y1 + np.broadcast_to(DtG, y1.shape) * tt[..., None]
                Fxu = np.einsum("...ai,...i->...a", F, xu)
                Fux = np.einsum("...ai,...i->...a", F, ux)
                y2 = (y2 + Fxu[..., :, None] * G[..., None, :] + G[..., :, None] * Fux[..., None, :]
                      + G[..., :, None] * G[..., None, :] * tt[..., None, None])
    e = y1.shape[-1]
    return RoughIntegral(path.grid, y1, y2, flavor, np.zeros(y1.shape[:-2] + (e,)), path.hurst)


def total(rp: Level2Path):
    """(X^1, X^2) over the whole grid."""
    return chen_range(rp.level1, rp.level2, 0, rp.grid.n)


@dataclass
class ConvergenceReport:
    """Level-1 totals of a rough integral on nested partitions (coarse to fine)."""

    mesh: np.ndarray
    totals: np.ndarray
    differences: np.ndarray
    rate: float


def _slope(mesh, values):
    mesh = np.asarray(mesh, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = values > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(mesh[ok]), np.log(values[ok]), 1)[0])


def convergence_report(form: OneForm, rp, levels: int = 5, tol: float | None = None,
                       cross_terms: bool = False) -> ConvergenceReport:
    """Integrate on partitions with stride 2**levels, ..., 2, 1 and compare totals.

    ``rate`` is the fitted log-log slope of successive differences against
    the mesh.  With ``tol`` set, a final difference above ``tol`` (relative)
    raises :class:`ConvergenceError`.
    """
    strides = [2**k for k in range(levels, -1, -1) if rp.grid.n % 2**k == 0]
    totals = np.array([total(integrate_one_form(form, rp, s, cross_terms))[0] for s in strides])
    mesh = np.array([rp.grid.dt * s for s in strides])
    diffs = np.array([np.max(np.abs(totals[i + 1] - totals[i])) for i in range(len(strides) - 1)])
    report = ConvergenceReport(mesh, totals, diffs, _slope(mesh[1:], diffs))
    if tol is not None and diffs.size and diffs[-1] > tol * max(1.0, np.max(np.abs(totals[-1]))):
        raise ConvergenceError(f"rough integral totals still move by {diffs[-1]:.3g}", diffs)
    return report


# ---------------------------------------------------------------------------
# Itô <-> Stratonovich


def _clock_increments(grid: Grid, hurst):
    if hurst is None:
        raise DomainError("this operation needs the Hurst parameter of the driving lift")
    return np.diff(hurst_phi(hurst, grid.times))


def _form_on_result_grid(form, rp, result):
    stride = rp.grid.n // result.grid.n
    path, _, spacetime = _prepare(form, rp, stride)
    if path.grid != result.grid:
        raise DomainError("result and driving lift are on incompatible grids")
    x, t = _left_points(path, spacetime)
    F = _evaluate(form.F, x, t, f"{form.name}.F")
    F = np.broadcast_to(F, x.shape[:-1] + F.shape[-2:])
    DF = np.broadcast_to(_evaluate(form.DxF, x, t, f"{form.name}.DxF"), F.shape + (x.shape[-1],))
    return x, t, F, DF


def _trace(DF):
    return np.einsum("...ajj->...a", DF)


def ito_strat_translate(form: OneForm, result: RoughIntegral, rp, direction: str = "strat_to_ito") -> RoughIntegral:
    """Convert a rough integral between the Stratonovich and Itô lifts.

    Per step the two differ by (1/2) tr DxF du^{2H} at level 1 and by
    (1/2) F F^T du^{2H} at level 2; Chen aggregation of the converted steps
    produces the four Young correction terms over longer intervals (see
    :func:`translation_terms`).  ``rp`` is the lift (or space-time path) the
    integral was computed on.
    """
    if direction not in ("strat_to_ito", "ito_to_strat"):
        raise DomainError(f"unknown direction {direction!r}")
    _, _, F, DF = _form_on_result_grid(form, rp, result)
    dphi = _clock_increments(result.grid, rp.hurst)
    c1 = 0.5 * _trace(DF) * dphi[:, None]
    c2 = 0.5 * np.einsum("...ai,...bi->...ab", F, F) * dphi[:, None, None]
    sign = -1.0 if direction == "strat_to_ito" else 1.0
    flavor = "ito" if direction == "strat_to_ito" else "stratonovich"
    return RoughIntegral(result.grid, result.level1 + sign * c1, result.level2 + sign * c2,
                         flavor, result.origin, result.hurst)


@dataclass
class TranslationTerms:
    """Correction terms between Stratonovich and Itô integrals over [s, t]."""

    level1: np.ndarray
    ff: np.ndarray
    inner_dx: np.ndarray
    x_dtrace: np.ndarray
    inner_dtrace: np.ndarray

    @property
    def level2(self) -> np.ndarray:
        return self.ff + self.inner_dx + self.x_dtrace + self.inner_dtrace


def translation_terms(form: OneForm, strat_result: RoughIntegral, rp, s: float, t: float,
                      integrator_base: str = "s") -> TranslationTerms:
    """Explicit Young sums for X^S - X^I over [s, t].

    level1 = (1/2) int tr DxF du^{2H}; the level-2 difference is the sum of

      ff           (1/2) int F F^T du^{2H}
      inner_dx     (1/2) int (int_s^u tr DxF dr^{2H}) (x) dX^S_u
      x_dtrace     (1/2) int X^S_{s,u} (x) tr DxF du^{2H}
      inner_dtrace -(1/4) int (int_s^u tr DxF dr^{2H}) (x) tr DxF du^{2H}

    ``integrator_base`` picks whether the integrator of ``inner_dx`` is read
    as X^S_{0,u} or X^S_{s,u}; the two have identical increments.
    """
    if integrator_base not in ("s", "0"):
        raise DomainError("integrator_base must be 's' or '0'")
    grid = strat_result.grid
    i, j = grid.index_of(s), grid.index_of(t)
    _, _, F, DF = _form_on_result_grid(form, rp, strat_result)
    dphi = _clock_increments(grid, rp.hurst)[i:j]
    tr = _trace(DF)[..., i:j, :]
    FF = np.einsum("...ai,...bi->...ab", F[..., i:j, :, :], F[..., i:j, :, :])
    dtr = tr * dphi[:, None]
    inner = np.cumsum(dtr, axis=-2) - dtr
    if integrator_base == "0":
        xs = np.cumsum(strat_result.level1, axis=-2)
        xs = np.concatenate([np.zeros_like(xs[..., :1, :]), xs], axis=-2)
        dxs = np.diff(xs[..., i:j + 1, :], axis=-2)
    else:
        dxs = strat_result.level1[..., i:j, :]
    xs_su = np.cumsum(dxs, axis=-2) - dxs
    return TranslationTerms(
        level1=0.5 * dtr.sum(axis=-2),
        ff=0.5 * np.einsum("...kab,k->...ab", FF, dphi),
        inner_dx=0.5 * np.einsum("...ka,...kb->...ab", inner, dxs),
        x_dtrace=0.5 * np.einsum("...ka,...kb->...ab", xs_su, dtr),
        inner_dtrace=-0.25 * np.einsum("...ka,...kb->...ab", inner, dtr),
    )


# ---------------------------------------------------------------------------
# Itô formula


@dataclass(frozen=True)
class Potential:
    """A function Phi(x, t) -> R^e together with its gradient one-form.

    ``gradient.F`` is D_x Phi, ``gradient.DxF`` is D_x^2 Phi and
    ``gradient.drift`` is D_t Phi (None for time-independent Phi).
    """

    value: Callback
    gradient: OneForm
    name: str = "potential"


@dataclass
class ItoFormulaResidual:
    residual_1: np.ndarray
    residual_2: np.ndarray
    residual_1_strat: np.ndarray
    mesh: float


def ito_formula_residual(phi: Potential, strat: Level2Path, ito: Level2Path,
                         cross_terms: bool = False) -> ItoFormulaResidual:
    """Residuals of the first- and second-level Itô formulas over the whole grid.

    residual_1 = |Phi(B_T, T) - Phi(B_0, 0) - int DPhi dB~ - (1/2) int tr D_x^2 Phi du^{2H}|
    residual_2 = |F_R((B^S, t))^2 - int DPhi dB~^2 - four Young terms|  (Frobenius)
    residual_1_strat = |Phi(B_T, T) - Phi(B_0, 0) - int DPhi o dB~|
    """
    if strat.grid != ito.grid:
        raise DomainError("Stratonovich and Itô lifts must share a grid")
    form = phi.gradient
    grid = strat.grid
    s_int = integrate_one_form(form, strat, cross_terms=cross_terms)
    i_int = integrate_one_form(form, ito, cross_terms=cross_terms)
    vals = strat.values
    t = np.broadcast_to(grid.times, vals.shape[:-1])
    pv = _evaluate(phi.value, vals, t, f"{phi.name}.value")
    pv = np.broadcast_to(pv, vals.shape[:-1] + pv.shape[-1:])
    dphi_total = pv[..., -1, :] - pv[..., 0, :]
    D2 = _evaluate(form.DxF, vals[..., :-1, :], t[..., :-1], f"{form.name}.DxF")
    D1 = _evaluate(form.F, vals[..., :-1, :], t[..., :-1], f"{form.name}.F")
    D1 = np.broadcast_to(D1, vals[..., :-1, :].shape[:-1] + D1.shape[-2:])
    D2 = np.broadcast_to(D2, D1.shape + (strat.dim,))
    dclock = _clock_increments(grid, strat.hurst)
    dtr = _trace(D2) * dclock[:, None]
    s1, s2 = total(s_int)
    i1, i2 = total(i_int)
    r1 = np.linalg.norm(dphi_total - i1 - 0.5 * dtr.sum(axis=-2), axis=-1)
    r1s = np.linalg.norm(dphi_total - s1, axis=-1)
    inner = np.cumsum(dtr, axis=-2) - dtr
    dpv = np.diff(pv, axis=-2)
    rel = pv[..., :-1, :] - pv[..., :1, :]
    rhs = (i2
           + 0.5 * np.einsum("...kai,...kbi,k->...ab", D1, D1, dclock)
           + 0.5 * np.einsum("...ka,...kb->...ab", inner, dpv)
           + 0.5 * np.einsum("...ka,...kb->...ab", rel, dtr)
           - 0.25 * np.einsum("...ka,...kb->...ab", inner, dtr))
    r2 = np.linalg.norm(s2 - rhs, axis=(-2, -1))
    return ItoFormulaResidual(_squeeze(r1), _squeeze(r2), _squeeze(r1s), grid.dt)


def _squeeze(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


@dataclass
class ItoFormulaReport:
    mesh: np.ndarray
    residual_1: np.ndarray
    residual_2: np.ndarray
    residual_1_strat: np.ndarray
    rate_1: float
    rate_2: float


def ito_formula_report(phi: Potential, path: FbmPath, levels, cross_terms: bool = False) -> ItoFormulaReport:
    """Itô-formula residuals on the dyadic lifts of ``path`` at each level.

    For a batch of paths the residuals are root-mean-square over the batch.
    Rates are fitted log-log slopes of residual against mesh (NaN when the
    residuals are exactly zero).
    """
    rows = []
    for m in levels:
        r = ito_formula_residual(phi, lift_stratonovich(path, m), lift_ito(path, m), cross_terms)
        rows.append((r.mesh, _rms(r.residual_1), _rms(r.residual_2), _rms(r.residual_1_strat)))
    mesh, r1, r2, r1s = (np.array(c) for c in zip(*rows))
    return ItoFormulaReport(mesh, r1, r2, r1s, _slope(mesh, r1), _slope(mesh, r2))


def _rms(a):
    return float(np.sqrt(np.mean(np.square(a))))


# ---------------------------------------------------------------------------
# zero mean


@dataclass
class ZeroMeanResult:
    mean: np.ndarray
    se: np.ndarray
    passed: bool
    degenerate: bool = False
    n_paths: int = 0
    totals: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "se": self.se.tolist(), "pass": bool(self.passed),
                "degenerate": bool(self.degenerate), "paths": int(self.n_paths)}


def mean_and_se(samples: np.ndarray):
    """Sample mean and standard error along axis 0 (numpy's pairwise summation)."""
    n = samples.shape[0]
    mean = np.mean(samples, axis=0)
    se = np.std(samples, axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    return mean, se


def zero_mean_verify(form: OneForm, model: FbmModel, grid: Grid, n_paths: int, seed: int,
                     flavor: str = "ito", sigmas: float = 3.0, chunk: int = 8192,
                     workers: int = 1, keep_totals: bool = False) -> ZeroMeanResult:
    """Monte Carlo mean of the level-1 integral of ``form`` over ``grid``.

    Passes iff |mean| < ``sigmas`` * SE in every component.  A zero standard
    error passes only with an exactly zero mean and is flagged degenerate
    otherwise.
    """
    if flavor not in ("ito", "stratonovich"):
        raise DomainError(f"unknown flavor {flavor!r}")
    lift = lift_ito if flavor == "ito" else lift_stratonovich
    parts = []
    for batch in iter_batches(model, grid, seed, n_paths, chunk=chunk, workers=workers):
        parts.append(total(integrate_one_form(form, lift(batch)))[0])
    totals = np.concatenate(parts, axis=0)
    mean, se = mean_and_se(totals)
    zero_se = se == 0
    degenerate = bool(np.any(zero_se & (mean != 0)))
    passed = bool(np.all(np.where(zero_se, mean == 0, np.abs(mean) < sigmas * se)))
    return ZeroMeanResult(mean, se, passed, degenerate, n_paths, totals if keep_totals else None)


__all__ = ["OneForm", "RoughIntegral", "SpaceTimePath", "Potential", "TranslationTerms",
           "ItoFormulaResidual", "ItoFormulaReport", "ZeroMeanResult", "ConvergenceReport",
           "lift_spacetime", "extend_with_clock", "power_clock_ramp", "young_integral",
           "young_sum", "integrate_one_form", "total", "convergence_report",
           "ito_strat_translate", "translation_terms", "ito_formula_residual",
           "ito_formula_report", "zero_mean_verify", "mean_and_se", "chen_prefix"]
