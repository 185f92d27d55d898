"""Independent classical reference implementations for the corollary checks.

Everything here is written from the per-axis 1-D definitions: plain Fourier
quadrature, 1-D canonical kernels applied axis by axis, linear convolution
through scipy, and a direct 1-D second-kind convolution.  None of it touches
the N-D machinery in fmt_core/convolution, so agreement between the two is
evidence, not tautology.  (The off-grid spline primitive is the one shared
ingredient; what these references isolate is the N-D composition.)
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage
from scipy.signal import fftconvolve

from .errors import BadParams, GridMismatch
from .sigspace import Grid, Signal, riemann_weight


def fourier_sum(f: Signal, out_grid: Grid = None) -> Signal:
    """Plain N-D Fourier quadrature F(u) = w * sum_t f(t) exp(-2*pi*i t.u)."""
    out_grid = out_grid or f.grid
    tpts = f.grid.points()
    upts = out_grid.points()
    phase = tpts @ upts.T
    vals = riemann_weight(f.grid) * (f.flat @ np.exp(-2j * np.pi * phase))
    return Signal(out_grid, vals.reshape(out_grid.count))


def kernel_1d(a: float, b: float, c: float, d: float, t, u) -> np.ndarray:
    """1-D canonical kernel K[t_i, u_j] in the |b|^(-1/2) convention."""
    if abs(a * d - b * c - 1.0) > 1e-9:
        raise BadParams("a*d - b*c must equal 1")
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    quad = (a / b) * t[:, None] ** 2 + (d / b) * u[None, :] ** 2
    return np.exp(1j * np.pi * quad - 2j * np.pi * np.outer(t, u) / b) / math.sqrt(abs(b))


def separable_transform(f: Signal, abcd, out_grid: Grid = None,
                        inverse: bool = False) -> Signal:
    """Apply 1-D canonical kernels axis by axis.

    `abcd` holds one (a, b, c, d) per axis; `inverse=True` uses the per-axis
    inverse parameters (d, -b, -c, a) instead.
    """
    out_grid = out_grid or f.grid
    if len(abcd) != f.grid.n:
        raise BadParams("need one (a, b, c, d) per axis")
    out = np.asarray(f.samples, dtype=np.complex128)
    for k, (a, b, c, d) in enumerate(abcd):
        if inverse:
            a, b, c, d = d, -b, -c, a
        kern = kernel_1d(a, b, c, d, f.grid.axes()[k], out_grid.axes()[k])
        out = np.moveaxis(
            np.tensordot(out, f.grid.step[k] * kern, axes=([k], [0])), -1, k
        )
    return Signal(out_grid, out)


def classical_convolution(f: Signal, g: Signal) -> Signal:
    """Linear convolution w * sum_tau f(tau) g(t - tau), zero-extended.

    Evaluated with scipy's FFT convolution; the full-convolution output is
    re-indexed back onto f's grid, which requires origin/step to be integer
    multiples (true for the centered grids used in the suites).
    """
    if f.grid != g.grid:
        raise GridMismatch("classical convolution needs a shared grid")
    grid = f.grid
    full = fftconvolve(f.samples, g.samples, mode="full")
    idx = []
    for k in range(grid.n):
        # full index m holds coordinate 2*origin + m*step; grid index i holds
        # origin + i*step, so m = i - origin/step.
        off = -grid.origin[k] / grid.step[k]
        ioff = round(off)
        if abs(off - ioff) > 1e-9:
            raise BadParams("grid origin must be an integer multiple of step")
        idx.append(np.arange(grid.count[k]) + ioff)
    sub = full
    for k, ix in enumerate(idx):
        ok = (ix >= 0) & (ix < sub.shape[k])
        if not ok.all():
            raise BadParams("convolution support exceeds the padded output")
        sub = np.take(sub, ix, axis=k)
    return Signal(grid, riemann_weight(grid) * sub)


def second_kind_conv_1d(fvals: np.ndarray, gvals: np.ndarray, axis: np.ndarray,
                        a: float, b: float) -> np.ndarray:
    """Direct 1-D second-kind convolution on one axis.

    sqrt(2)/sqrt(|b|) * h * sum_tau f(tau) g(sqrt(2) t - tau)
                            exp(2*pi*i (a/b) (t/sqrt(2) - tau)^2)
    """
    h = float(axis[1] - axis[0]) if axis.size > 1 else 1.0
    g_filt = ndimage.spline_filter(
        np.asarray(gvals, dtype=np.complex128), order=3, mode="grid-constant"
    )
    root2 = math.sqrt(2.0)
    out = np.empty(axis.size, dtype=np.complex128)
    for i, t in enumerate(axis):
        pos = (root2 * t - axis - axis[0]) / h
        gv = ndimage.map_coordinates(
            g_filt, pos[None, :], order=3, mode="grid-constant", cval=0.0,
            prefilter=False,
        )
        v = t / root2 - axis
        out[i] = np.sum(fvals * gv * np.exp(2j * np.pi * (a / b) * v**2))
    return (root2 / math.sqrt(abs(b))) * h * out


def separable_second_kind(f_factors, g_factors, axes, abcd) -> np.ndarray:
    """N-D second-kind convolution of separable signals, one axis at a time.

    With the sqrt(2)^N normalization the N-D operator factorizes exactly
    into the outer product of the per-axis 1-D operators.
    """
    parts = [
        second_kind_conv_1d(fk, gk, ax, row[0], row[1])
        for fk, gk, ax, row in zip(f_factors, g_factors, axes, abcd)
    ]
    out = parts[0]
    for p in parts[1:]:
        out = np.multiply.outer(out, p)
    return out
