"""Level-2 rough paths over uniform grids.

A :class:`Level2Path` stores one increment ``dx_k`` and one second-level
tensor ``x2_k`` per grid step.  Values over any pair of grid times are
assembled with Chen's identity

    X^1_{s,t} = X^1_{s,u} + X^1_{u,t}
    X^2_{s,t} = X^2_{s,u} + X^2_{u,t} + X^1_{s,u} (x) X^1_{u,t}

so storage is O(n) rather than O(n^2).  Arrays may carry leading batch axes;
every operation here broadcasts over them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fbm import FbmPath, Grid, hurst_phi

FLAVORS = ("stratonovich", "ito", "generic")


@dataclass(frozen=True, eq=False)
class Level2Path:
    """Per-step increments of a level-2 rough path.

    level1: (..., n, d) increments X^1_{t_k, t_{k+1}}
    level2: (..., n, d, d) tensors X^2_{t_k, t_{k+1}}
    origin: (..., d) value of the path at ``grid.t0``
    """

    grid: Grid
    level1: np.ndarray
    level2: np.ndarray
    flavor: str = "generic"
    origin: np.ndarray | None = None
    hurst: float | None = None

    def __post_init__(self):
        x1 = np.asarray(self.level1, dtype=float)
        x2 = np.asarray(self.level2, dtype=float)
        if x1.ndim < 2 or x1.shape[-2] != self.grid.n:
            raise DomainError(f"level1 shape {x1.shape} does not match a grid of {self.grid.n} steps")
        if x2.shape != x1.shape + x1.shape[-1:]:
            raise DomainError(f"level2 shape {x2.shape} inconsistent with level1 {x1.shape}")
        if self.flavor not in FLAVORS:
            raise DomainError(f"unknown flavor {self.flavor!r}")
        origin = np.zeros(x1.shape[:-2] + x1.shape[-1:]) if self.origin is None else self.origin
        origin = np.broadcast_to(np.asarray(origin, dtype=float), x1.shape[:-2] + x1.shape[-1:])
        object.__setattr__(self, "level1", x1)
        object.__setattr__(self, "level2", x2)
        object.__setattr__(self, "origin", origin)

    @property
    def dim(self) -> int:
        return self.level1.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.level1.shape[:-2]

    @property
    def values(self) -> np.ndarray:
        """Path values at every grid point, shape (..., n + 1, d)."""
        cs = np.cumsum(self.level1, axis=-2)
        return np.concatenate([self.origin[..., None, :], self.origin[..., None, :] + cs], axis=-2)

    def with_arrays(self, level1=None, level2=None, flavor=None) -> "Level2Path":
        return Level2Path(self.grid,
                          self.level1 if level1 is None else level1,
                          self.level2 if level2 is None else level2,
                          self.flavor if flavor is None else flavor,
                          self.origin, self.hurst)

    def coarsen(self, factor: int) -> "Level2Path":
        """Aggregate blocks of ``factor`` steps with Chen's identity."""
        grid = self.grid.coarsen(factor)
        x1, x2 = _chen_blocks(self.level1, self.level2, factor)
        return Level2Path(grid, x1, x2, self.flavor, self.origin, self.hurst)

    def __getitem__(self, i) -> "Level2Path":
        """Select paths along the leading batch axis."""
        if not self.batch_shape:
            raise TypeError("single path is not indexable")
        return Level2Path(self.grid, self.level1[i], self.level2[i], self.flavor,
                          self.origin[i], self.hurst)


def tensor_mul(a, b):
    """Product in the truncated tensor algebra T^(2): (1, a1, a2) (x) (1, b1, b2)."""
    a1, a2 = a
    b1, b2 = b
    return a1 + b1, a2 + b2 + a1[..., :, None] * b1[..., None, :]


def _chen_blocks(x1, x2, factor):
    lead = x1.shape[:-2]
    n, d = x1.shape[-2:]
    b1 = x1.reshape(lead + (n // factor, factor, d))
    b2 = x2.reshape(lead + (n // factor, factor, d, d))
    prefix = np.cumsum(b1, axis=-2) - b1
    agg2 = b2.sum(axis=-3) + np.einsum("...ki,...kj->...ij", prefix, b1)
    return b1.sum(axis=-2), agg2


def chen_reconstruct(rp: Level2Path, s: float, t: float):
    """(X^1_{s,t}, X^2_{s,t}) for grid times s <= t, folded left to right."""
    i, j = rp.grid.index_of(s), rp.grid.index_of(t)
    if i > j:
        raise DomainError(f"need s <= t, got s={s}, t={t}")
    return chen_range(rp.level1, rp.level2, i, j)


def chen_range(x1, x2, i: int, j: int):
    """Chen aggregate of steps i..j-1 of per-step arrays."""
    seg1 = x1[..., i:j, :]
    seg2 = x2[..., i:j, :, :]
    if j == i:
        d = x1.shape[-1]
        return np.zeros(x1.shape[:-2] + (d,)), np.zeros(x1.shape[:-2] + (d, d))
    prefix = np.cumsum(seg1, axis=-2) - seg1
    return seg1.sum(axis=-2), seg2.sum(axis=-3) + np.einsum("...ki,...kj->...ij", prefix, seg1)


def chen_prefix(x1, x2):
    """Running (X^1_{t0,t_k}, X^2_{t0,t_k}) for k = 0..n."""
    c1 = np.cumsum(x1, axis=-2)
    prefix = c1 - x1
    c2 = np.cumsum(x2 + prefix[..., :, None] * x1[..., None, :], axis=-3)
    z1 = np.zeros(x1.shape[:-2] + (1,) + x1.shape[-1:])
    z2 = np.zeros(x2.shape[:-3] + (1,) + x2.shape[-2:])
    return np.concatenate([z1, c1], axis=-2), np.concatenate([z2, c2], axis=-3)


def _level_stride(grid: Grid, level: int | None) -> int:
    if not grid.is_dyadic:
        raise DomainError(f"lift needs a dyadic grid, got n={grid.n}")
    top = grid.levels
    level = top if level is None else int(level)
    if not 0 <= level <= top:
        raise DomainError(f"level must lie in [0, {top}], got {level}")
    return 2 ** (top - level)


def lift_stratonovich(path: FbmPath, level: int | None = None) -> Level2Path:
    """Canonical lift of the dyadic piecewise-linear interpolation at ``level``.

    The result lives on the grid with 2**level steps.  Each linear segment
    carries X^2 = dx (x) dx / 2, and any coarser interval picks up its Lévy
    area through Chen's identity.  ``level`` defaults to the full grid.
    """
    stride = _level_stride(path.grid, level)
    vals = path.values[..., ::stride, :]
    dx = np.diff(vals, axis=-2)
    x2 = 0.5 * dx[..., :, None] * dx[..., None, :]
    return Level2Path(path.grid.coarsen(stride), dx, x2, "stratonovich", vals[..., 0, :], path.hurst)


@dataclass(frozen=True, eq=False)
class Perturbation:
    """Additive function of time phi on a grid; X(phi)^2 = X^2 - phi_{s,t}.

    ``values`` has shape (n + 1,) for a scalar multiple of the identity or
    (n + 1, d) for a diagonal.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape[0] != self.grid.n + 1 or v.ndim > 2:
            raise DomainError(f"perturbation values of shape {v.shape} do not fit the grid")
        object.__setattr__(self, "values", v)

    @classmethod
    def ito(cls, grid: Grid, hurst: float) -> "Perturbation":
        """phi_t = t^{2H} / 2: the Stratonovich-to-Itô correction."""
        return cls(grid, 0.5 * hurst_phi(hurst, grid.times))

    def __neg__(self) -> "Perturbation":
        return Perturbation(self.grid, -self.values)

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=0)


def perturb(rp: Level2Path, phi: Perturbation, flavor: str = "generic") -> Level2Path:
    """Subtract phi increments from the diagonal of every per-step X^2."""
    if phi.grid != rp.grid:
        raise DomainError("perturbation and rough path live on different grids")
    dphi = phi.increments()
    d = rp.dim
    diag = np.broadcast_to(dphi[:, None] if dphi.ndim == 1 else dphi, (rp.grid.n, d))
    x2 = rp.level2.copy()
    idx = np.arange(d)
    x2[..., idx, idx] -= diag
    return rp.with_arrays(level2=x2, flavor=flavor)


def lift_ito(path: FbmPath, level: int | None = None) -> Level2Path:
    """Itô lift: Stratonovich lift with (t^{2H} - s^{2H}) I / 2 removed from X^2."""
    strat = lift_stratonovich(path, level)
    return perturb(strat, Perturbation.ito(strat.grid, path.hurst), flavor="ito")


def levy_area(rp: Level2Path, s: float, t: float) -> np.ndarray:
    """Antisymmetric part of X^2_{s,t}."""
    _, x2 = chen_reconstruct(rp, s, t)
    return 0.5 * (x2 - np.swapaxes(x2, -1, -2))


@dataclass(frozen=True)
class PVarDiagnostics:
    """Empirical p-variation over dyadic partitions; a diagnostic, not a norm."""

    p: float
    level1_pvar: float | np.ndarray
    level2_pvar2: float | np.ndarray


def _default_p(hurst):
    return 0.5 * (1.0 / hurst + 3.0)


def pvar_diagnostics(rp: Level2Path, p: float | None = None) -> PVarDiagnostics:
    """Sup over partitions built from dyadic intervals of sum |X^1|^p and sum |X^2|^{p/2}.

    Computed bottom-up on the dyadic tree: each node keeps the larger of its
    own term and the best split into its two children.  ``p`` must lie in
    (1/H, 3) when the Hurst parameter is known, in [2, 3) otherwise.
    """
    if not rp.grid.is_dyadic:
        raise DomainError("p-variation diagnostics need a dyadic grid")
    if p is None:
        p = _default_p(rp.hurst) if rp.hurst is not None else 2.5
    lo = 1.0 / rp.hurst if rp.hurst is not None else 2.0
    if not (lo <= p < 3.0) or (rp.hurst is not None and p == lo):
        raise DomainError(f"p={p} outside the admissible range ({lo:.4g}, 3)")
    x1, x2 = rp.level1, rp.level2
    best1 = np.linalg.norm(x1, axis=-1) ** p
    best2 = np.linalg.norm(x2, axis=(-2, -1)) ** (p / 2)
    while x1.shape[-2] > 1:
        x1, x2 = _chen_blocks(x1, x2, 2)
        own1 = np.linalg.norm(x1, axis=-1) ** p
        own2 = np.linalg.norm(x2, axis=(-2, -1)) ** (p / 2)
        best1 = np.maximum(own1, best1[..., 0::2] + best1[..., 1::2])
        best2 = np.maximum(own2, best2[..., 0::2] + best2[..., 1::2])
    return PVarDiagnostics(p, _scalar(best1[..., 0]), _scalar(best2[..., 0]))


def _scalar(a):
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a


__all__ = ["Level2Path", "Perturbation", "PVarDiagnostics", "FLAVORS", "tensor_mul",
           "chen_reconstruct", "chen_range", "chen_prefix", "lift_stratonovich", "lift_ito",
           "perturb", "levy_area", "pvar_diagnostics"]
