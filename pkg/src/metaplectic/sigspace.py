"""Uniform N-D grids, complex signals on them, and test-signal generators.

Integration convention: every integral in this package is the plain Riemann
sum, sample values times the grid-cell volume prod(step).  Theorem checks
always compare two quantities discretized under this one rule, so the rule's
low order costs nothing; the fixtures used by the verification suites decay
fast enough that boundary terms are negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadParams, GridMismatch, OffGrid

# Guard against accidental huge allocations (2**26 samples ~ 1 GiB complex).
MAX_GRID_POINTS = 1 << 26


@dataclass(frozen=True)
class Grid:
    """Uniform sampling lattice: per-axis origin, step and count.

    Axis k holds points origin[k] + j * step[k], j = 0 .. count[k]-1.
    Grids compare by exact field equality; signals may only be combined
    when their grids compare equal.
    """

    origin: tuple
    step: tuple
    count: tuple

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        step = tuple(float(v) for v in self.step)
        count = tuple(int(v) for v in self.count)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "count", count)
        if not (len(origin) == len(step) == len(count)) or not count:
            raise BadParams("origin, step, count must be equal-length, nonempty")
        if any(s <= 0 for s in step):
            raise BadParams("every step must be positive")
        if any(c < 1 for c in count):
            raise BadParams("every count must be >= 1")
        if math.prod(count) > MAX_GRID_POINTS:
            raise BadParams(f"grid has more than {MAX_GRID_POINTS} points")

    @property
    def n(self) -> int:
        return len(self.count)

    @property
    def npoints(self) -> int:
        return math.prod(self.count)

    def axes(self) -> list:
        """Per-axis coordinate arrays."""
        return [o + s * np.arange(c) for o, s, c in zip(self.origin, self.step, self.count)]

    def points(self) -> np.ndarray:
        """All grid points as a (npoints, n) array in C row-major order."""
        return _grid_points(self)


@lru_cache(maxsize=64)
def _grid_points(grid: Grid) -> np.ndarray:
    mesh = np.meshgrid(*grid.axes(), indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=-1)
    pts.flags.writeable = False
    return pts


def riemann_weight(grid: Grid) -> float:
    """Cell volume prod(step); Riemann sums are sample sums times this."""
    return math.prod(grid.step)


def scale_grid(grid: Grid, factor: float) -> Grid:
    """Grid holding the points factor * u_j, same counts."""
    if factor == 0:
        raise BadParams("scale factor must be nonzero")
    if factor < 0:
        raise BadParams("negative scale would reverse axis orientation")
    return Grid(
        origin=tuple(o * factor for o in grid.origin),
        step=tuple(s * factor for s in grid.step),
        count=grid.count,
    )


@dataclass(frozen=True, eq=False)
class Signal:
    """Complex samples on a grid, stored shaped like grid.count (C order)."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.shape != self.grid.count:
            arr = arr.reshape(self.grid.count)
        if not np.all(np.isfinite(arr)):
            raise BadParams("signal samples must be finite")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def flat(self) -> np.ndarray:
        return self.samples.reshape(-1)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        if isinstance(other, Signal):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__


def _require_same_grid(f: Signal, g: Signal):
    if f.grid != g.grid:
        raise GridMismatch("signals live on different grids")


def add(f: Signal, g: Signal) -> Signal:
    _require_same_grid(f, g)
    return Signal(f.grid, f.samples + g.samples)


def mul(f: Signal, g: Signal) -> Signal:
    _require_same_grid(f, g)
    return Signal(f.grid, f.samples * g.samples)


def scale(f: Signal, factor: complex) -> Signal:
    return Signal(f.grid, f.samples * complex(factor))


def constant_signal(grid: Grid, value: complex = 1.0) -> Signal:
    return Signal(grid, np.full(grid.count, complex(value), dtype=np.complex128))


def l2_norm(f: Signal) -> float:
    """sqrt of the Riemann-sum squared magnitude."""
    return float(np.sqrt(riemann_weight(f.grid) * np.sum(np.abs(f.samples) ** 2)))


def make_gaussian(grid: Grid, center=None, inv_cov_diag=None) -> Signal:
    """exp(-pi * sum_k c_k (t_k - mu_k)^2).

    With c = 1 and mu = 0 this function is its own N-D Fourier transform
    under the 2*pi-convention kernel, which the transform tests lean on.
    """
    n = grid.n
    mu = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    c = np.ones(n) if inv_cov_diag is None else np.asarray(inv_cov_diag, dtype=float)
    if mu.shape != (n,) or c.shape != (n,):
        raise BadParams("center and inv_cov_diag must have one entry per axis")
    if np.any(c <= 0):
        raise BadParams("inv_cov_diag entries must be positive")
    q = np.zeros(grid.count)
    for k, axis in enumerate(grid.axes()):
        shape = [1] * n
        shape[k] = grid.count[k]
        q = q + (c[k] * (axis - mu[k]) ** 2).reshape(shape)
    return Signal(grid, np.exp(-np.pi * q).astype(np.complex128))


def make_delta(grid: Grid, at) -> Signal:
    """Unit-mass delta: 1/cell-volume at the nearest grid point.

    The requested location must sit strictly within half a step of a grid
    point on every axis, so the Riemann sum of delta * phi reproduces
    phi(at).
    """
    at = np.atleast_1d(np.asarray(at, dtype=float))
    if at.shape != (grid.n,):
        raise BadParams("at must have one entry per axis")
    idx = []
    for k in range(grid.n):
        j = int(round((at[k] - grid.origin[k]) / grid.step[k]))
        snapped = grid.origin[k] + j * grid.step[k]
        if not (0 <= j < grid.count[k]) or not abs(at[k] - snapped) < grid.step[k] / 2:
            raise OffGrid(f"axis {k}: {at[k]} is not within step/2 of a grid point")
        idx.append(j)
    samples = np.zeros(grid.count, dtype=np.complex128)
    samples[tuple(idx)] = 1.0 / riemann_weight(grid)
    return Signal(grid, samples)


def make_chirp(grid: Grid, S, shift=None) -> Signal:
    """Unit-modulus quadratic phase exp(i*pi*(t-s) S (t-s)^T), S symmetric."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    n = grid.n
    if S.shape != (n, n):
        raise BadParams(f"S must be {n}x{n}")
    if np.abs(S - S.T).max() > 1e-12 * (1.0 + np.abs(S).max()):
        raise BadParams("S must be symmetric")
    s = np.zeros(n) if shift is None else np.asarray(shift, dtype=float)
    if s.shape != (n,):
        raise BadParams("shift must have one entry per axis")
    v = grid.points() - s
    q = np.einsum("ij,jk,ik->i", v, S, v)
    return Signal(grid, np.exp(1j * np.pi * q).reshape(grid.count))
