"""Free metaplectic transform: kernel, forward (oracle and fast), inverse.

Forward transform of f with matrix M = (A, B; C, D):

    F(u) = integral f(t) K(t, u) dt,
    K(t, u) = |det B|^(-1/2) exp(i*pi*(u Q u^T + t P t^T) - 2*pi*i t B^-1 u^T),

with P = B^-1 A and Q = D B^-1 and t, u row vectors.  The inverse is the
forward transform generated by (D^T, -B^T; -C^T, A^T); written out it is

    f(t) = |det B|^(-1/2) integral F(u)
           exp(-i*pi*(u B^-T D^T u^T + t A^T B^-T t^T) + 2*pi*i u B^-T t^T) du,

and the two forms agree pointwise (the quadratic forms only see the
symmetric parts, which the symplectic constraints pin down); `ifmt` spot
checks that identity in debug runs.

Two execution paths:

* DirectQuadrature evaluates the kernel literally at every (t, u) pair and
  sums.  O(P*Q), the reference everything else is checked against.
* ChirpFourier factors the kernel: multiply by the input chirp
  exp(i*pi t P t^T), evaluate the plain 2*pi-convention Fourier sum at the
  mapped frequencies w = u B^-T, multiply by the output chirp
  |det B|^(-1/2) exp(i*pi u Q u^T).  The Fourier sum dispatches per axis:
  an FFT when B is diagonal and the grids align so that
  (out_step/b_k) * in_step * count == 1 (an engineering condition; nothing
  upstream prescribes output sampling), a dense per-axis matrix when B is
  merely diagonal, and a full nonuniform-frequency DFT otherwise.

All paths are exact reorganizations of the same finite sum, so fast and
direct agree to rounding, not to a discretization tolerance.
"""

from __future__ import annotations

import numpy as np

from .errors import BadParams, DimMismatch
from .sigspace import Grid, Signal, riemann_weight
from .symplectic import SymplecticMatrix

# Max entries per temporary chunk array (complex128) in the dense paths.
_CHUNK_ENTRIES = 1 << 21

_FFT_ALIGN_TOL = 1e-9
_DIAG_TOL = 1e-14


def _sym(S: np.ndarray) -> np.ndarray:
    # Tiny asymmetry left by validation must not leak phase into kernels.
    return 0.5 * (S + S.T)


def _quad(points: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Row-wise quadratic form p S p^T."""
    return np.einsum("ij,jk,ik->i", points, S, points)


def kernel_eval(m: SymplecticMatrix, t, u) -> complex:
    """Kernel value at one (t, u) pair."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if t.shape != (m.n,) or u.shape != (m.n,):
        raise DimMismatch("t and u must match the matrix dimension")
    ps, qs = _sym(m.P), _sym(m.Q)
    phase = np.pi * (u @ qs @ u + t @ ps @ t) - 2.0 * np.pi * (t @ m.B_inv @ u)
    return complex(np.exp(1j * phase) / np.sqrt(m.abs_det_B))


def _axis_plan(in_grid: Grid, out_grid: Grid, fmap: np.ndarray, sign: int):
    """Per-axis dispatch for a diagonal frequency map; None if not diagonal."""
    n = in_grid.n
    off = np.abs(fmap - np.diag(np.diag(fmap))).max() if n > 1 else 0.0
    if off > _DIAG_TOL * max(1.0, np.abs(fmap).max()):
        return None
    plan = []
    for k in range(n):
        dt = in_grid.step[k]
        dw = out_grid.step[k] * fmap[k, k]
        cnt = in_grid.count[k]
        aligned = (
            out_grid.count[k] == cnt
            and dw > 0
            and abs(dt * dw * cnt - 1.0) <= _FFT_ALIGN_TOL
        )
        plan.append("fft" if aligned else "matmul")
    return plan


def fast_tier_description(m: SymplecticMatrix, in_grid: Grid, out_grid: Grid) -> str:
    """Which fast-path tier the given geometry selects (for benchmarks)."""
    plan = _axis_plan(in_grid, out_grid, np.asarray(m.B_invT), -1)
    if plan is None:
        return "dense"
    return "separable:" + ",".join(plan)


def _mapped_fourier_sum(values, in_grid: Grid, out_grid: Grid, fmap, sign: int):
    """sum_m values[m] * exp(sign * 2*pi*i * t_m . w_j), w_j = out_point_j @ fmap.

    `values` is shaped like in_grid.count; the result is shaped like
    out_grid.count.  No quadrature weight is applied here.
    """
    fmap = np.asarray(fmap, dtype=float)
    plan = _axis_plan(in_grid, out_grid, fmap, sign)
    if plan is not None:
        out = np.asarray(values, dtype=np.complex128)
        in_axes = in_grid.axes()
        out_axes = out_grid.axes()
        for k, tier in enumerate(plan):
            t_ax = in_axes[k]
            w_ax = out_axes[k] * fmap[k, k]
            if tier == "fft":
                cnt = in_grid.count[k]
                dt = in_grid.step[k]
                shape = [1] * in_grid.n
                shape[k] = cnt
                pre = np.exp(sign * 2j * np.pi * dt * w_ax[0] * np.arange(cnt))
                post = np.exp(sign * 2j * np.pi * t_ax[0] * w_ax)
                out = out * pre.reshape(shape)
                if sign < 0:
                    out = np.fft.fft(out, axis=k)
                else:
                    out = np.fft.ifft(out, axis=k) * cnt
                out = out * post.reshape(shape)
            else:
                e = np.exp(sign * 2j * np.pi * np.outer(t_ax, w_ax))
                out = np.moveaxis(np.tensordot(out, e, axes=([k], [0])), -1, k)
        return out

    # Dense nonuniform-frequency DFT.  The frequencies are scattered but the
    # input lattice is a tensor product, so the kernel factors per axis:
    # exp(s*2*pi*i t_m.w_j) = prod_k exp(s*2*pi*i t_ax[m_k] w_{j,k}).  The
    # first axis contracts through BLAS; the rest contract elementwise in j.
    w = out_grid.points() @ fmap
    vals = np.asarray(values, dtype=np.complex128)
    in_axes = in_grid.axes()
    nq = w.shape[0]
    rest = in_grid.npoints // in_grid.count[0]
    out_flat = np.empty(nq, dtype=np.complex128)
    chunk = max(1, _CHUNK_ENTRIES // max(in_grid.count[0], rest))
    coef = sign * 2j * np.pi
    for start in range(0, nq, chunk):
        stop = min(start + chunk, nq)
        wc = w[start:stop]
        e0 = np.exp(coef * np.outer(in_axes[0], wc[:, 0]))
        t = np.tensordot(vals, e0, axes=([0], [0]))
        for k in range(1, in_grid.n):
            ek = np.exp(coef * np.outer(in_axes[k], wc[:, k]))
            t = np.einsum("a...q,aq->...q", t, ek)
        out_flat[start:stop] = t
    return out_flat.reshape(out_grid.count)


class FmtPlan:
    """Precomputed state for applying one transform geometry repeatedly.

    Holds the validated matrix, both grids, the requested method, the two
    cached chirps (input exp(i*pi t P t^T); output including the
    |det B|^(-1/2) factor) and the mapped frequency lattice W = U B^-T.
    Plans are immutable after construction and safe to share.
    """

    def __init__(self, matrix: SymplecticMatrix, in_grid: Grid, out_grid: Grid = None,
                 method: str = "fast"):
        if method not in ("direct", "fast"):
            raise BadParams("method must be 'direct' or 'fast'")
        out_grid = out_grid or in_grid
        if not (matrix.n == in_grid.n == out_grid.n):
            raise DimMismatch(
                f"matrix dim {matrix.n}, input grid dim {in_grid.n}, "
                f"output grid dim {out_grid.n}"
            )
        self.matrix = matrix
        self.in_grid = in_grid
        self.out_grid = out_grid
        self.method = method
        self._ps = _sym(matrix.P)
        self._qs = _sym(matrix.Q)
        self._detfac = 1.0 / np.sqrt(matrix.abs_det_B)
        self.in_chirp = np.exp(
            1j * np.pi * _quad(in_grid.points(), self._ps)
        ).reshape(in_grid.count)
        self.out_chirp = (
            self._detfac
            * np.exp(1j * np.pi * _quad(out_grid.points(), self._qs)).reshape(out_grid.count)
        )
        self.freq_map = np.asarray(matrix.B_invT)
        self.frequencies = out_grid.points() @ self.freq_map
        self.fast_tier = fast_tier_description(matrix, in_grid, out_grid)

    def execute(self, f: Signal) -> Signal:
        if f.grid != self.in_grid:
            raise DimMismatch("signal grid does not match the plan's input grid")
        if self.method == "direct":
            return Signal(self.out_grid, self._execute_direct(f))
        return Signal(self.out_grid, self._execute_fast(f))

    def _execute_direct(self, f: Signal) -> np.ndarray:
        m = self.matrix
        tpts = self.in_grid.points()
        upts = self.out_grid.points()
        tq = _quad(tpts, self._ps)
        w = riemann_weight(self.in_grid)
        v = f.flat
        out = np.empty(upts.shape[0], dtype=np.complex128)
        chunk = max(1, _CHUNK_ENTRIES // tpts.shape[0])
        cross_left = tpts @ m.B_inv
        for start in range(0, upts.shape[0], chunk):
            stop = min(start + chunk, upts.shape[0])
            uq = _quad(upts[start:stop], self._qs)
            phase = tq[:, None] + uq[None, :] - 2.0 * (cross_left @ upts[start:stop].T)
            kern = np.exp(1j * np.pi * phase)
            out[start:stop] = w * self._detfac * (v @ kern)
        return out.reshape(self.out_grid.count)

    def _execute_fast(self, f: Signal) -> np.ndarray:
        h = f.samples * self.in_chirp
        hhat = _mapped_fourier_sum(h, self.in_grid, self.out_grid, self.freq_map, -1)
        return riemann_weight(self.in_grid) * hhat * self.out_chirp


def fmt_direct(f: Signal, m: SymplecticMatrix, out_grid: Grid = None) -> Signal:
    """Brute-force quadrature of the defining integral; the oracle."""
    return FmtPlan(m, f.grid, out_grid, method="direct").execute(f)


def fmt_fast(f: Signal, m: SymplecticMatrix, out_grid: Grid = None) -> Signal:
    """Chirp-Fourier evaluation; numerically equal to fmt_direct."""
    return FmtPlan(m, f.grid, out_grid, method="fast").execute(f)


def inverse_kernel_explicit(m: SymplecticMatrix, u, t) -> complex:
    """Inverse kernel written from the original blocks of m (not from m^-1).

    |det B|^(-1/2) exp(-i*pi*(u B^-T D^T u^T + t A^T B^-T t^T)
                       + 2*pi*i u B^-T t^T).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    qu = _sym(m.B_invT @ m.D.T)
    qt = _sym(m.A.T @ m.B_invT)
    phase = -np.pi * (u @ qu @ u + t @ qt @ t) + 2.0 * np.pi * (u @ m.B_invT @ t)
    return complex(np.exp(1j * phase) / np.sqrt(m.abs_det_B))


def _debug_check_inverse_kernel(m: SymplecticMatrix, minv: SymplecticMatrix,
                                u_grid: Grid, t_grid: Grid):
    u_ax = [np.array([a[0], a[-1], a[len(a) // 2]]) for a in u_grid.axes()]
    t_ax = [np.array([a[0], a[-1], a[len(a) // 3]]) for a in t_grid.axes()]
    us = np.stack([np.array([ax[i % 3] for ax in u_ax]) for i in range(3)])
    ts = np.stack([np.array([ax[i % 3] for ax in t_ax]) for i in range(3)])
    for u in us:
        for t in ts:
            lhs = kernel_eval(minv, u, t)
            rhs = inverse_kernel_explicit(m, u, t)
            assert abs(lhs - rhs) <= 1e-12, (
                f"inverse kernel mismatch {abs(lhs - rhs):.3e} at u={u}, t={t}"
            )


def ifmt(F: Signal, m: SymplecticMatrix, out_grid: Grid = None,
         method: str = "fast") -> Signal:
    """Inverse transform: the forward transform generated by m^-1.

    In debug runs (python without -O) a handful of (u, t) pairs are checked
    against the explicitly written inverse kernel to catch transcription
    drift between the two equivalent forms.
    """
    minv = m.inverse()
    out_grid = out_grid or F.grid
    if __debug__:
        _debug_check_inverse_kernel(m, minv, F.grid, out_grid)
    return FmtPlan(minv, F.grid, out_grid, method=method).execute(F)
