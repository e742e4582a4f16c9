"""Fractional Brownian motion on uniform grids.

Paths are drawn exactly (up to floating point) with the circulant embedding
of fractional Gaussian noise, falling back to a dense Cholesky factor of the
covariance matrix when the embedding is not nonnegative or the grid does not
start at zero.

Every path owns a counter-based random stream keyed by ``(seed, path index)``,
so a path is the same whether it is drawn alone, in a batch, or by a worker
thread.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NumericalError

log = logging.getLogger(__name__)

HURST_MIN = 1.0 / 3.0
HURST_MAX = 0.5
_CHUNK = 4096


@dataclass(frozen=True)
class FbmModel:
    """A ``dimension``-dimensional fBM with independent components.

    The Volterra kernel K_H(t, s) is not implemented; only the covariance is
    needed to sample.
    """

    hurst: float
    dimension: int = 1

    def __post_init__(self):
        h = float(self.hurst)
        if not (HURST_MIN < h <= HURST_MAX):
            raise DomainError(f"hurst must lie in (1/3, 1/2], got {self.hurst}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise DomainError(f"dimension must be a positive integer, got {self.dimension}")
        object.__setattr__(self, "hurst", h)
        object.__setattr__(self, "dimension", int(self.dimension))


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``t_k = t0 + k (t1 - t0) / n`` for k = 0..n."""

    t0: float
    t1: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"grid needs n >= 1 steps, got {self.n}")
        if not (self.t0 >= 0.0 and self.t1 > self.t0):
            raise DomainError(f"grid needs 0 <= t0 < t1, got [{self.t0}, {self.t1}]")
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.n

    @property
    def times(self) -> np.ndarray:
        return self.t0 + (self.t1 - self.t0) * np.arange(self.n + 1) / self.n

    @property
    def is_dyadic(self) -> bool:
        return self.n & (self.n - 1) == 0

    @property
    def levels(self) -> int:
        """log2(n); only meaningful for dyadic grids."""
        return self.n.bit_length() - 1

    def coarsen(self, factor: int) -> "Grid":
        if factor < 1 or self.n % factor:
            raise DomainError(f"cannot coarsen {self.n} steps by {factor}")
        return Grid(self.t0, self.t1, self.n // factor)

    def index_of(self, t: float) -> int:
        """Grid index of time ``t``; raises if ``t`` is not a grid point."""
        x = (t - self.t0) / self.dt
        k = int(round(x))
        if not (0 <= k <= self.n) or abs(x - k) > 1e-9 * max(1.0, abs(x)):
            raise DomainError(f"time {t} is not a point of {self}")
        return k


@dataclass(frozen=True, eq=False)
class FbmPath:
    """Sampled fBM values on ``grid``.

    ``values`` has shape (n + 1, d) for one path or (N, n + 1, d) for a batch,
    in which case ``index`` holds the N path indices.
    """

    model: FbmModel
    grid: Grid
    values: np.ndarray
    seed: int
    index: object = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim not in (2, 3) or v.shape[-2:] != (self.grid.n + 1, self.model.dimension):
            raise DomainError(f"values of shape {v.shape} do not match grid/model")
        object.__setattr__(self, "values", v)

    @property
    def hurst(self) -> float:
        return self.model.hurst

    @property
    def batched(self) -> bool:
        return self.values.ndim == 3

    def __len__(self):
        return self.values.shape[0] if self.batched else 1

    def __getitem__(self, i) -> "FbmPath":
        if not self.batched:
            raise TypeError("single path is not indexable")
        idx = np.asarray(self.index)
        return FbmPath(self.model, self.grid, self.values[i], self.seed, idx[i].item())

    def restrict(self, factor: int) -> "FbmPath":
        """The same path seen on the grid coarsened by ``factor``."""
        return FbmPath(self.model, self.grid.coarsen(factor),
                       self.values[..., ::factor, :], self.seed, self.index)


def covariance(model: FbmModel, s, t):
    """E[B_s B_t] = (|t|^{2H} + |s|^{2H} - |t - s|^{2H}) / 2 for each component."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise DomainError("covariance is defined for non-negative times")
    h2 = 2.0 * model.hurst
    out = 0.5 * (np.abs(t) ** h2 + np.abs(s) ** h2 - np.abs(t - s) ** h2)
    return float(out) if out.ndim == 0 else out


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for path ``index``: Philox keyed by ``seed``."""
    return np.random.Generator(
        np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, 0, int(index)]))


@lru_cache(maxsize=32)
def _circulant_sqrt_eigs(n: int, hurst: float) -> np.ndarray | None:
    # autocovariance of unit-step fGn, embedded in a circulant of size 2n
    k = np.arange(n + 1, dtype=float)
    h2 = 2.0 * hurst
    gamma = 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    if lam.min() < -1e-10 * lam.max():
        return None
    m = row.size
    return np.sqrt(np.clip(lam, 0.0, None) / m)


@lru_cache(maxsize=32)
def _cholesky_factor(grid: Grid, hurst: float) -> np.ndarray:
    t = grid.times
    if t[0] == 0.0:
        t = t[1:]
    model = FbmModel(hurst)
    cov = covariance(model, t[:, None], t[None, :])
    cov = cov + 1e-12 * np.max(np.diag(cov)) * np.eye(t.size)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("fBM covariance matrix is not positive definite") from exc


def _draw_circulant(sqrt_eigs, n, d, seed, indices, scale):
    m = sqrt_eigs.size
    pairs = (d + 1) // 2
    out = np.empty((len(indices), n + 1, d))
    out[:, 0, :] = 0.0
    z = np.empty((len(indices), pairs, m), dtype=complex)
    for row, i in enumerate(indices):
        g = path_rng(seed, i).standard_normal((pairs, 2, m))
        z[row].real = g[:, 0]
        z[row].imag = g[:, 1]
    y = np.fft.fft(sqrt_eigs * z, axis=-1)[..., :n]
    # real and imaginary parts are independent fGn samples
    noise = np.stack([y.real, y.imag], axis=2).reshape(len(indices), 2 * pairs, n)[:, :d]
    out[:, 1:, :] = np.cumsum(noise, axis=-1).transpose(0, 2, 1) * scale
    return out


def _draw_cholesky(factor, grid, d, seed, indices):
    n_pts = factor.shape[0]
    out = np.empty((len(indices), grid.n + 1, d))
    for row, i in enumerate(indices):
        g = path_rng(seed, i).standard_normal((d, n_pts))
        vals = (factor @ g.T)
        if n_pts == grid.n:
            out[row, 0] = 0.0
            out[row, 1:] = vals
        else:
            out[row] = vals
    return out


def _sampler(model: FbmModel, grid: Grid, method: str):
    if method not in ("auto", "circulant", "cholesky"):
        raise DomainError(f"unknown sampling method {method!r}")
    if method != "cholesky" and grid.t0 == 0.0:
        eig = _circulant_sqrt_eigs(grid.n, model.hurst)
        if eig is not None:
            scale = grid.dt ** model.hurst
            return lambda seed, idx: _draw_circulant(eig, grid.n, model.dimension, seed, idx, scale)
        log.warning("circulant embedding has negative eigenvalues; using Cholesky")
    elif method == "circulant":
        raise DomainError("circulant embedding needs a grid starting at t0 = 0")
    factor = _cholesky_factor(grid, model.hurst)
    return lambda seed, idx: _draw_cholesky(factor, grid, model.dimension, seed, idx)


def sample_batch(model: FbmModel, grid: Grid, seed: int, count: int, start: int = 0,
                 method: str = "auto", workers: int = 1) -> FbmPath:
    """Draw paths ``start .. start + count - 1`` as one batched :class:`FbmPath`.

    The result does not depend on ``workers`` or on how the index range is
    split across calls.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    draw = _sampler(model, grid, method)
    chunks = [range(a, min(a + _CHUNK, start + count)) for a in range(start, start + count, _CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: draw(seed, c), chunks))
    else:
        parts = [draw(seed, c) for c in chunks]
    values = np.concatenate(parts, axis=0)
    return FbmPath(model, grid, values, seed, np.arange(start, start + count))


def sample_paths(model: FbmModel, grid: Grid, seed: int, count: int, **kw) -> list[FbmPath]:
    """Draw ``count`` independent paths; see :func:`sample_batch`."""
    batch = sample_batch(model, grid, seed, count, **kw)
    return [batch[i] for i in range(count)]


def iter_batches(model: FbmModel, grid: Grid, seed: int, count: int, chunk: int = 8192, **kw):
    """Yield batched paths covering indices 0..count-1 in blocks of ``chunk``."""
    for a in range(0, count, chunk):
        yield sample_batch(model, grid, seed, min(chunk, count - a), start=a, **kw)


def hurst_phi(hurst: float, times) -> np.ndarray:
    """t^{2H}, the variance clock used by every Itô correction."""
    return np.asarray(times, dtype=float) ** (2.0 * hurst)


__all__ = ["FbmModel", "Grid", "FbmPath", "covariance", "sample_batch", "sample_paths",
           "iter_batches", "path_rng", "hurst_phi", "HURST_MIN", "HURST_MAX"]
