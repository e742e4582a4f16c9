"""CSV formats shared by the command line tools.

paths:     path_id, t, component_0, ..., component_{d-1}
lift:      path_id, k, t_k, dx_0, ..., dx_{d-1}, x2_00, x2_01, ... (row-major)
solution:  path_id, t, y_0, ..., y_{e-1}
curve:     T, H, price

Floats are written with 17 significant digits so files round-trip exactly.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import DomainError
from .fbm import Grid
from .roughpath import Level2Path

FMT = "{:.17g}"


def _fmt(v):
    return FMT.format(float(v))


def write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)


def _read(path, required):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    if header[: len(required)] != required:
        raise DomainError(f"{path}: expected columns starting with {required}, got {header[:len(required)]}")
    try:
        data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    except ValueError as exc:
        raise DomainError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DomainError(f"{path}: ragged rows")
    return header, data


def _grid_from_times(times, closed: bool, path) -> Grid:
    n = times.size - 1 if closed else times.size
    if n < 1 or (not closed and times.size < 2):
        raise DomainError(f"{path}: too few time points to recover the grid")
    dt = times[1] - times[0]
    t1 = times[-1] if closed else times[-1] + dt
    grid = Grid(times[0], t1, n)
    ref = grid.times if closed else grid.times[:-1]
    if not np.allclose(times, ref, rtol=0, atol=1e-9 * max(1.0, abs(t1))):
        raise DomainError(f"{path}: time column is not a uniform grid")
    return grid


def _split_paths(data, path):
    ids = data[:, 0]
    uniq, first = np.unique(ids, return_index=True)
    uniq = uniq[np.argsort(first)]
    counts = np.array([(ids == u).sum() for u in uniq])
    if np.any(counts != counts[0]):
        raise DomainError(f"{path}: paths have different lengths")
    blocks = data.reshape(uniq.size, counts[0], data.shape[1])
    if not np.all(blocks[:, :, 0] == uniq[:, None]):
        raise DomainError(f"{path}: rows of a path must be contiguous")
    return uniq.astype(int), blocks


def write_paths_csv(fh, times, values, ids):
    d = values.shape[-1]
    rows = ([str(int(pid)), _fmt(t)] + [_fmt(v) for v in values[i, k]]
            for i, pid in enumerate(ids) for k, t in enumerate(times))
    write_rows(fh, ["path_id", "t"] + [f"component_{j}" for j in range(d)], rows)


def read_paths_csv(path):
    """(grid, values (N, n + 1, d), path ids)."""
    header, data = _read(path, ["path_id", "t"])
    ids, blocks = _split_paths(data, path)
    grid = _grid_from_times(blocks[0, :, 1], True, path)
    if not np.all(blocks[:, :, 1] == blocks[:1, :, 1]):
        raise DomainError(f"{path}: paths use different time grids")
    return grid, blocks[:, :, 2:], ids


def write_lift_csv(fh, rp: Level2Path, ids):
    d = rp.dim
    x1 = rp.level1.reshape((-1,) + rp.level1.shape[-2:])
    x2 = rp.level2.reshape((-1,) + rp.level2.shape[-3:])
    t = rp.grid.times[:-1]
    header = (["path_id", "k", "t_k"] + [f"dx_{i}" for i in range(d)]
              + [f"x2_{i}{j}" for i in range(d) for j in range(d)])
    rows = ([str(int(pid)), str(k), _fmt(t[k])] + [_fmt(v) for v in x1[p, k]]
            + [_fmt(v) for v in x2[p, k].ravel()]
            for p, pid in enumerate(ids) for k in range(rp.grid.n))
    write_rows(fh, header, rows)


def read_lift_csv(path, hurst=None, flavor="generic"):
    """(batched Level2Path, path ids); the path is taken to start at 0."""
    header, data = _read(path, ["path_id", "k", "t_k"])
    m = len(header) - 3
    d = int(round((-1 + np.sqrt(1 + 4 * m)) / 2))
    if d < 1 or d + d * d != m:
        raise DomainError(f"{path}: {m} data columns do not form dx and x2 blocks")
    ids, blocks = _split_paths(data, path)
    if not np.all(blocks[:, :, 1] == np.arange(blocks.shape[1])):
        raise DomainError(f"{path}: step index column must run 0..n-1")
    grid = _grid_from_times(blocks[0, :, 2], False, path)
    x1 = blocks[:, :, 3:3 + d]
    x2 = blocks[:, :, 3 + d:].reshape(blocks.shape[:2] + (d, d))
    return Level2Path(grid, x1, x2, flavor, None, hurst), ids


def detect_flavor(rp: Level2Path, rtol: float = 1e-9) -> str:
    """stratonovich if Sym(X^2) = X^1 (x) X^1 / 2 per step, ito if it is offset by
    the same negative multiple of the identity in every direction, else generic."""
    x1, x2 = rp.level1, rp.level2
    sym = 0.5 * (x2 + np.swapaxes(x2, -1, -2)) - 0.5 * x1[..., :, None] * x1[..., None, :]
    scale = max(float(np.max(np.abs(x2))), 1e-300)
    if np.max(np.abs(sym)) <= rtol * scale:
        return "stratonovich"
    d = rp.dim
    diag = np.diagonal(sym, axis1=-2, axis2=-1)
    off = sym - diag[..., :, None] * np.eye(d)
    same = np.max(np.abs(diag - diag[..., :1])) <= rtol * scale
    if np.max(np.abs(off)) <= rtol * scale and same and np.all(diag < 0):
        return "ito"
    return "generic"


def write_solution_csv(fh, times, values, ids):
    e = values.shape[-1]
    rows = ([str(int(pid)), _fmt(t)] + [_fmt(v) for v in values[i, k]]
            for i, pid in enumerate(ids) for k, t in enumerate(times))
    write_rows(fh, ["path_id", "t"] + [f"y_{j}" for j in range(e)], rows)


def write_curve_csv(fh, table):
    write_rows(fh, ["T", "H", "price"], ([_fmt(a), _fmt(b), _fmt(c)] for a, b, c in table))


def read_curve_csv(path):
    _, data = _read(path, ["T", "H", "price"])
    return data


def dump_json(obj) -> str:
    """Stable single-line JSON."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


__all__ = ["write_paths_csv", "read_paths_csv", "write_lift_csv", "read_lift_csv", "detect_flavor",
           "write_solution_csv", "write_curve_csv", "read_curve_csv", "dump_json"]
