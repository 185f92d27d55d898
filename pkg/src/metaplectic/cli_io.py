"""Command line: file I/O, CSV export, verification suites, benchmarks.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O or
format error.

File formats owned here:

* FMTSIG01 signal container: 8-byte ASCII magic "FMTSIG01", 4-byte
  little-endian unsigned header length L, L bytes of UTF-8 JSON
  {"n", "origin", "step", "count"}, then count-product complex samples as
  little-endian float64 (re, im) pairs in C row-major order.
* Matrix JSON: {"n": int, "A": [[...]], "B": ..., "C": ..., "D": ...} with
  row-major nested lists; validated on read.
* CSV export: '.' decimal, ',' separator, 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import struct
import sys
import time

import numpy as np

from . import classical
from .convolution import (
    conv_first_spatial,
    conv_first_spectral,
    conv_second,
    phase_factor_deviation,
    verify_product_theorem,
    verify_theorem1,
    verify_theorem2,
)
from .errors import FmtError, FormatError, NotSymplectic, SingularB
from .filtering import box_mask, build_demo, multiplicative_filter, run_demo
from .fmt_core import FmtPlan, fast_tier_description, fmt_direct, fmt_fast, ifmt
from .report import VerifyReport, signal_discrepancy
from .sigspace import (
    Grid,
    Signal,
    l2_norm,
    make_chirp,
    make_delta,
    make_gaussian,
    mul,
    scale_grid,
)
from .symplectic import (
    SymplecticMatrix,
    constraint_residuals,
    from_special,
    ft_matrix,
    random_symplectic,
    separable_frft,
    separable_lct,
    validate,
)

MAGIC = b"FMTSIG01"


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def write_signal(path, sig: Signal) -> None:
    header = {
        "n": sig.grid.n,
        "origin": list(sig.grid.origin),
        "step": list(sig.grid.step),
        "count": list(sig.grid.count),
    }
    blob = json.dumps(header, separators=(",", ":")).encode("utf-8")
    data = np.ascontiguousarray(sig.samples, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(data.tobytes())


def read_signal(path) -> Signal:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        raw_len = fh.read(4)
        if len(raw_len) != 4:
            raise FormatError(f"{path}: truncated header length")
        (hlen,) = struct.unpack("<I", raw_len)
        blob = fh.read(hlen)
        if len(blob) != hlen:
            raise FormatError(f"{path}: truncated header")
        try:
            header = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: header is not UTF-8 JSON ({exc})") from None
        try:
            grid = Grid(
                origin=tuple(header["origin"]),
                step=tuple(header["step"]),
                count=tuple(header["count"]),
            )
            if int(header["n"]) != grid.n:
                raise FormatError(f"{path}: header n={header['n']} but {grid.n} axes")
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: malformed header ({exc})") from None
        payload = fh.read()
    expected = grid.npoints * 16
    if len(payload) != expected:
        raise FormatError(f"{path}: payload {len(payload)} bytes, expected {expected}")
    samples = np.frombuffer(payload, dtype="<c16").reshape(grid.count)
    return Signal(grid, samples)


def write_matrix(path, m: SymplecticMatrix) -> None:
    doc = {"n": m.n, "A": m.A.tolist(), "B": m.B.tolist(), "C": m.C.tolist(),
           "D": m.D.tolist()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def read_matrix(path) -> SymplecticMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON ({exc})") from None
    try:
        blocks = [np.asarray(doc[key], dtype=float) for key in ("A", "B", "C", "D")]
        n = int(doc["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed matrix document ({exc})") from None
    if any(b.shape != (n, n) for b in blocks):
        raise FormatError(f"{path}: blocks are not all {n}x{n}")
    return validate(*blocks)


def export_csv(path, sig: Signal, slices: dict = None) -> None:
    """Write one row per remaining grid point after fixing the given axes.

    Columns: one coordinate per remaining axis, then re, im, magnitude and
    phase.  Every float is printed with 17 significant digits so a reader
    recovers the exact double.
    """
    slices = slices or {}
    take = [slice(None)] * sig.grid.n
    kept = []
    for ax in range(sig.grid.n):
        if ax in slices:
            idx = slices[ax]
            if not 0 <= idx < sig.grid.count[ax]:
                raise FormatError(f"slice index {idx} out of range on axis {ax}")
            take[ax] = idx
        else:
            kept.append(ax)
    sub = sig.samples[tuple(take)]
    axes = [sig.grid.axes()[ax] for ax in kept]
    mesh = np.meshgrid(*axes, indexing="ij") if axes else []
    coords = [m.reshape(-1) for m in mesh]
    vals = np.asarray(sub).reshape(-1)

    def fmt17(x: float) -> str:
        return format(float(x), ".17g")

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"u{ax + 1}" for ax in kept] + ["re", "im", "magnitude", "phase"])
        for i in range(vals.size):
            v = vals[i]
            row = [fmt17(c[i]) for c in coords]
            row += [fmt17(v.real), fmt17(v.imag), fmt17(abs(v)), fmt17(np.angle(v))]
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Verification suites (the executable acceptance criteria)
# ---------------------------------------------------------------------------

def _centered_grid(count: int, extent: float, dims: int) -> Grid:
    step = 2.0 * extent / count
    origin = -step * (count // 2)
    return Grid(origin=(origin,) * dims, step=(step,) * dims, count=(count,) * dims)


def _grid_for(dims: int, count: int = None) -> Grid:
    if dims == 1:
        return _centered_grid(count or 128, 6.0, 1)
    if dims == 2:
        return _centered_grid(count or 64, 4.0, 2)
    return _centered_grid(count or 12, 3.0, 3)


def _fixtures(grid: Grid) -> dict:
    gauss = make_gaussian(grid)
    s = 0.4 * np.eye(grid.n)
    if grid.n > 1:
        s[0, -1] = s[-1, 0] = 0.1
    chirped = mul(
        make_gaussian(grid, center=[0.3] * grid.n, inv_cov_diag=[1.0] * grid.n),
        make_chirp(grid, s, shift=[0.2] * grid.n),
    )
    return {"gauss": gauss, "chirp": chirped}


def _gauss_pair(grid: Grid):
    f = make_gaussian(grid)
    g = make_gaussian(grid, center=[0.4] + [0.2] * (grid.n - 1),
                      inv_cov_diag=[1.3] + [0.9] * (grid.n - 1))
    return f, g


def suite_symplectic(seed: int = 7) -> list:
    """Constraint residuals and phase-factor degeneracy over random matrices."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_resid = 0.0
    worst_factor = 0.0
    for i in range(100):
        dims = 1 + i % 3
        m = random_symplectic(dims, seed * 1000 + i)
        res = constraint_residuals(m.A, m.B, m.C, m.D)
        worst_resid = max(
            worst_resid,
            max(res[k] for k in ("ABt_sym", "CDt_sym", "ADt_BCt_identity")) / res["scale"],
        )
        ts = rng.uniform(-6.0, 6.0, size=(1000, dims))
        us = rng.uniform(-6.0, 6.0, size=(1000, dims))
        worst_factor = max(worst_factor, max(phase_factor_deviation(m, ts, us).values()))
    runtime = time.perf_counter() - t0
    return [
        VerifyReport(
            "symplectic_constraints", worst_resid, 0.0, 1e-10,
            worst_resid <= 1e-10 and runtime < 1.0,
            extra={"runtime_s": runtime, "matrices": 100},
        ),
        VerifyReport(
            "phase_factor_degeneracy", worst_factor, 0.0, 1e-9,
            worst_factor <= 1e-9,
            extra={"pairs_per_matrix": 1000},
        ),
    ]


def suite_transform(seed: int = 7) -> list:
    """Oracle equivalence, inversion round trip and unitarity on the desk
    fixtures with 20 random matrices (10 per dimension)."""
    t0 = time.perf_counter()
    worst = {"oracle": 0.0, "roundtrip": 0.0, "unitarity": 0.0}
    cases = 0
    for dims in (1, 2):
        grid = _grid_for(dims)
        fixtures = _fixtures(grid)
        for i in range(10):
            m = random_symplectic(dims, seed * 100 + 10 * dims + i)
            for f in fixtures.values():
                direct = fmt_direct(f, m)
                fast = fmt_fast(f, m)
                _, rel = signal_discrepancy(fast, direct)
                worst["oracle"] = max(worst["oracle"], rel)
                back = ifmt(fast, m)
                worst["roundtrip"] = max(
                    worst["roundtrip"], l2_norm(back - f) / l2_norm(f)
                )
                worst["unitarity"] = max(
                    worst["unitarity"], abs(l2_norm(direct) - l2_norm(f)) / l2_norm(f)
                )
                cases += 1
    runtime = time.perf_counter() - t0
    return [
        VerifyReport(
            "oracle_equivalence", 0.0, worst["oracle"], 1e-9,
            worst["oracle"] <= 1e-9 and runtime < 60.0,
            extra={"runtime_s": runtime, "cases": cases},
        ),
        VerifyReport(
            "inversion_round_trip", 0.0, worst["roundtrip"], 1e-3,
            worst["roundtrip"] <= 1e-3,
        ),
        VerifyReport(
            "unitarity", 0.0, worst["unitarity"], 1e-3,
            worst["unitarity"] <= 1e-3,
        ),
    ]


def suite_theorem1(seed: int = 7) -> list:
    """First-kind spectral identity plus the product theorem."""
    ft_worst = 0.0
    for dims in (1, 2):
        grid = _grid_for(dims)
        f, g = _gauss_pair(grid)
        ft_worst = max(ft_worst, verify_theorem1(f, g, ft_matrix(dims), 1e-3).rel_l2)

    rand_worst = 0.0
    for dims in (1, 2):
        grid = _grid_for(dims)
        f, g = _gauss_pair(grid)
        for i in range(10):
            m = random_symplectic(dims, seed * 200 + 10 * dims + i)
            rand_worst = max(rand_worst, verify_theorem1(f, g, m, 1e-2).rel_l2)

    prod_worst = 0.0
    for dims in (1, 2):
        grid = _grid_for(dims)
        f, g = _gauss_pair(grid)
        prod_worst = max(
            prod_worst, verify_product_theorem(f, g, ft_matrix(dims), 1e-3).rel_l2
        )
    # Random-matrix product theorem is informative only.
    g1 = _grid_for(1)
    f1, h1 = _gauss_pair(g1)
    prod_random = max(
        verify_product_theorem(f1, h1, random_symplectic(1, seed * 200 + 77), 1e-2).rel_l2
        for _ in (0,)
    )
    return [
        VerifyReport("theorem1_ft", 0.0, ft_worst, 1e-3, ft_worst <= 1e-3),
        VerifyReport(
            "theorem1_random", 0.0, rand_worst, 1e-2, rand_worst <= 1e-2,
            extra={"matrices": 20},
        ),
        VerifyReport(
            "product_theorem_ft", 0.0, prod_worst, 1e-3, prod_worst <= 1e-3,
            extra={"random_rel_l2_informative": prod_random},
        ),
    ]


def suite_theorem2(seed: int = 7) -> list:
    """Second-kind spectral identity and its closed-form check."""
    g1 = _grid_for(1)
    f1 = make_gaussian(g1)
    z = conv_second(f1, f1, ft_matrix(1))
    x = np.asarray(g1.axes()[0])
    closed_max = float(np.abs(z.samples - np.exp(-np.pi * x**2)).max())

    ft_worst = 0.0
    for dims in (1, 2):
        grid = _grid_for(dims, count=128 if dims == 1 else 48)
        f, g = _gauss_pair(grid)
        ft_worst = max(ft_worst, verify_theorem2(f, g, ft_matrix(dims), 1e-3).rel_l2)

    rand_worst = 0.0
    for i in range(2):
        f, g = _gauss_pair(g1)
        m = random_symplectic(1, seed * 300 + i)
        rand_worst = max(rand_worst, verify_theorem2(f, g, m, 1e-2).rel_l2)
    grid2 = _grid_for(2, count=48)
    f2, g2 = _gauss_pair(grid2)
    rand_worst = max(
        rand_worst, verify_theorem2(f2, g2, random_symplectic(2, seed * 300 + 5), 1e-2).rel_l2
    )
    rng = np.random.default_rng(seed)
    diag = separable_lct(
        [(c, b, -(1 - c * c) / b if b else 0.0, c) for c, b in
         [(math.cos(a), math.sin(a)) for a in rng.uniform(0.5, 1.1, size=2)]]
    )
    rand_worst = max(rand_worst, verify_theorem2(f2, g2, diag, 1e-2).rel_l2)

    return [
        VerifyReport(
            "theorem2_closed_form", closed_max, 0.0, 2e-3, closed_max <= 2e-3
        ),
        VerifyReport("theorem2_ft", 0.0, ft_worst, 1e-3, ft_worst <= 1e-3),
        VerifyReport("theorem2_random", 0.0, rand_worst, 1e-2, rand_worst <= 1e-2),
    ]


def _lct_params(seed: int, dims: int) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(dims):
        a = rng.uniform(0.5, 1.2)
        b = rng.uniform(0.8, 1.3)
        c = rng.uniform(-0.8, 0.2)
        d = (1.0 + b * c) / a
        rows.append((a, b, c, d))
    return rows


def suite_corollaries(seed: int = 7) -> list:
    """Specialization reductions against independent per-axis references."""
    grid2 = _grid_for(2)
    f2, g2 = _gauss_pair(grid2)
    alphas = [0.7, 1.2]
    abcd_frft = [(math.cos(a), math.sin(a), -math.sin(a), math.cos(a)) for a in alphas]
    abcd_lct = _lct_params(seed, 2)
    abcd_ft = [(0.0, 1.0, -1.0, 0.0)] * 2

    # transforms against per-axis kernels (plus the plain Fourier sum)
    spec_worst = 0.0
    ft2 = ft_matrix(2)
    _, rel = signal_discrepancy(fmt_direct(f2, ft2), classical.fourier_sum(f2))
    spec_worst = max(spec_worst, rel)
    for matrix, abcd in (
        (separable_frft(alphas), abcd_frft),
        (separable_lct(abcd_lct), abcd_lct),
    ):
        ref = classical.separable_transform(f2, abcd)
        _, rel = signal_discrepancy(fmt_direct(f2, matrix), ref)
        spec_worst = max(spec_worst, rel)

    # Corollary 1: Fourier case of the first kind = ordinary convolution
    cor1_worst = 0.0
    for dims in (1, 2):
        grid = _grid_for(dims)
        f, g = _gauss_pair(grid)
        z = conv_first_spatial(f, g, ft_matrix(dims))
        _, rel = signal_discrepancy(z, classical.classical_convolution(f, g))
        cor1_worst = max(cor1_worst, rel)

    # Corollaries 2-3: separable first kind = per-axis composition
    cor23_worst = 0.0
    for matrix, abcd in (
        (separable_frft(alphas), abcd_frft),
        (separable_lct(abcd_lct), abcd_lct),
    ):
        z = conv_first_spatial(f2, g2, matrix)
        spec_prod = mul(
            classical.separable_transform(f2, abcd),
            classical.separable_transform(g2, abcd),
        )
        ref = classical.separable_transform(spec_prod, abcd, inverse=True)
        _, rel = signal_discrepancy(z, ref)
        cor23_worst = max(cor23_worst, rel)

    # Corollaries 4-6: separable second kind = outer product of 1-D results
    cor456_worst = 0.0
    ax = grid2.axes()
    f_factors = [np.exp(-np.pi * a**2).astype(complex) for a in ax]
    g_centers, g_covs = [0.4, 0.2], [1.3, 0.9]
    g_factors = [
        np.exp(-np.pi * cv * (a - mu) ** 2).astype(complex)
        for a, mu, cv in zip(ax, g_centers, g_covs)
    ]
    f_sep = Signal(grid2, np.multiply.outer(f_factors[0], f_factors[1]))
    g_sep = Signal(grid2, np.multiply.outer(g_factors[0], g_factors[1]))
    for matrix, abcd in (
        (ft_matrix(2), abcd_ft),
        (separable_frft(alphas), abcd_frft),
        (separable_lct(abcd_lct), abcd_lct),
    ):
        z = conv_second(f_sep, g_sep, matrix)
        ref = classical.separable_second_kind(f_factors, g_factors, ax, abcd)
        _, rel = signal_discrepancy(z, Signal(grid2, ref))
        cor456_worst = max(cor456_worst, rel)

    return [
        VerifyReport(
            "specialization_transforms", 0.0, spec_worst, 1e-9, spec_worst <= 1e-9
        ),
        VerifyReport(
            "corollary1_ft_convolution", 0.0, cor1_worst, 1e-6, cor1_worst <= 1e-6
        ),
        VerifyReport(
            "corollaries23_first_kind_separable", 0.0, cor23_worst, 1e-6,
            cor23_worst <= 1e-6,
        ),
        VerifyReport(
            "corollaries456_second_kind_separable", 0.0, cor456_worst, 1e-6,
            cor456_worst <= 1e-6,
        ),
    ]


def suite_filter(seed: int = 7) -> list:
    """End-to-end denoising demo: energy split and SNR improvement.

    filter_demo_energy_split stores max(clean energy outside the box,
    disturbance energy inside it); filter_demo_snr_gain stores the achieved
    gain in dB in max_abs and passes when it reaches at least the tolerance.
    """
    t0 = time.perf_counter()
    scenario = build_demo(seed)
    _, metrics = run_demo(scenario)
    split = max(
        1.0 - metrics["energy_split"]["clean_inside"],
        metrics["energy_split"]["noise_inside"],
    )
    gain = metrics["snr_out_db"] - metrics["snr_in_db"]
    runtime = time.perf_counter() - t0
    return [
        VerifyReport(
            "filter_demo_energy_split", split, 0.0, 0.01, split <= 0.01,
            extra=metrics["energy_split"],
        ),
        VerifyReport(
            "filter_demo_snr_gain", gain, 0.0, 20.0, gain >= 20.0,
            extra={
                "snr_in_db": metrics["snr_in_db"],
                "snr_out_db": metrics["snr_out_db"],
                "runtime_s": runtime,
            },
        ),
    ]


SUITES = {
    "symplectic": suite_symplectic,
    "transform": suite_transform,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "corollaries": suite_corollaries,
    "filter": suite_filter,
}


def run_suite(name: str, seed: int = 7) -> list:
    if name == "all":
        reports = []
        for fn in SUITES.values():
            reports.extend(fn(seed))
        return reports
    if name not in SUITES:
        raise FmtError(f"unknown suite {name!r}")
    return SUITES[name](seed)


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------

def bench(sizes, dims, seed: int = 7) -> list:
    """Time direct vs fast per (dimension, size) on three matrix families."""
    rows = []
    for d in dims:
        for n in sizes:
            aligned = Grid(
                origin=(-(1.0 / math.sqrt(n)) * (n // 2),) * d,
                step=(1.0 / math.sqrt(n),) * d,
                count=(n,) * d,
            )
            desk = _centered_grid(n, 4.0, d)
            cases = [
                ("ft_aligned", ft_matrix(d), aligned),
                ("diag_lct", separable_lct(_lct_params(seed, d)), desk),
                ("random", random_symplectic(d, seed), desk),
            ]
            for label, m, grid in cases:
                f = make_gaussian(grid)
                t0 = time.perf_counter()
                ref = fmt_direct(f, m)
                t_direct = time.perf_counter() - t0
                t0 = time.perf_counter()
                fast = fmt_fast(f, m)
                t_fast = time.perf_counter() - t0
                _, rel = signal_discrepancy(fast, ref)
                rows.append({
                    "dims": d,
                    "size": n,
                    "case": label,
                    "tier": fast_tier_description(m, grid, grid),
                    "t_direct_s": t_direct,
                    "t_fast_s": t_fast,
                    "speedup": t_direct / t_fast if t_fast > 0 else float("inf"),
                    "rel_l2": rel,
                })
    return rows


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _float_rows(text: str) -> list:
    return [list(_floats(row)) for row in text.split(";") if row != ""]


def _grid_from_args(args) -> Grid:
    return Grid(origin=args.origin, step=args.step, count=args.count)


def _add_matrix_args(p: argparse.ArgumentParser, inverse_option: bool = False):
    p.add_argument("--matrix", help="matrix JSON file")
    if inverse_option:
        p.add_argument(
            "--matrix-inverse",
            help="matrix JSON file; apply the inverse transform it generates",
        )
    p.add_argument("--special",
                   choices=["ft", "lct", "frft", "nsfrft", "fresnel", "nsfresnel"],
                   help="inline specialization instead of a JSON file")
    p.add_argument("--dim", type=int, help="dimension for ft/nsfrft")
    p.add_argument("--alpha", type=float, help="angle for nsfrft")
    p.add_argument("--alphas", type=_floats, help="per-axis angles for frft")
    p.add_argument("--abcd", type=_float_rows,
                   help="per-axis a,b,c,d rows separated by ';' for lct")
    p.add_argument("--b-diag", type=_floats, help="per-axis b for fresnel")
    p.add_argument("--b-matrix", type=_float_rows, help="symmetric B rows for nsfresnel")


def _matrix_from_args(args) -> tuple:
    """Return (matrix, apply_inverse)."""
    inverse = getattr(args, "matrix_inverse", None)
    given = [x for x in (args.matrix, inverse, args.special) if x]
    if len(given) != 1:
        raise FmtError("give exactly one of --matrix, --matrix-inverse, --special")
    if args.matrix:
        return read_matrix(args.matrix), False
    if inverse:
        return read_matrix(inverse), True
    kw = {}
    if args.special in ("ft", "nsfrft"):
        if args.dim is None:
            raise FmtError(f"--special {args.special} needs --dim")
        kw["dim"] = args.dim
    if args.special == "nsfrft":
        if args.alpha is None:
            raise FmtError("--special nsfrft needs --alpha")
        kw["alpha"] = args.alpha
    if args.special == "frft":
        if not args.alphas:
            raise FmtError("--special frft needs --alphas")
        kw["alphas"] = args.alphas
    if args.special == "lct":
        if not args.abcd:
            raise FmtError("--special lct needs --abcd")
        kw["abcd"] = args.abcd
    if args.special == "fresnel":
        if not args.b_diag:
            raise FmtError("--special fresnel needs --b-diag")
        kw["b_diag"] = args.b_diag
    if args.special == "nsfresnel":
        if not args.b_matrix:
            raise FmtError("--special nsfresnel needs --b-matrix")
        kw["b_matrix"] = args.b_matrix
    return from_special(args.special, **kw), False


def _parse_edge(text: str) -> tuple:
    if text == "hard":
        return "hard", 0.0
    if text.startswith("cosine:"):
        try:
            return "cosine", float(text.split(":", 1)[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"edge must be 'hard' or 'cosine:W', got {text!r}")


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------

def _cmd_validate_matrix(args) -> int:
    try:
        m, _ = _matrix_from_args(args)
    except (NotSymplectic, SingularB) as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1
    res = constraint_residuals(m.A, m.B, m.C, m.D)
    print(f"valid free symplectic matrix, n={m.n}, det(B)={m.det_B:.17g}")
    for key in ("ABt_sym", "CDt_sym", "ADt_BCt_identity"):
        print(f"  residual {key}: {res[key]:.3e} (scale {res['scale']:.3g})")
    return 0


def _cmd_make_signal(args) -> int:
    grid = _grid_from_args(args)
    if args.kind == "gaussian":
        sig = make_gaussian(grid, center=args.center or None,
                            inv_cov_diag=args.inv_cov or None)
    elif args.kind == "delta":
        if args.at is None:
            raise FmtError("delta needs --at")
        sig = make_delta(grid, args.at)
    else:
        if args.chirp_matrix is None:
            raise FmtError("chirp needs --chirp-matrix")
        sig = make_chirp(grid, np.asarray(args.chirp_matrix, dtype=float),
                         shift=args.shift or None)
        if args.center or args.inv_cov:
            sig = mul(sig, make_gaussian(grid, center=args.center or None,
                                         inv_cov_diag=args.inv_cov or None))
    write_signal(args.out, sig)
    print(f"wrote {args.out}: n={grid.n}, {grid.npoints} samples")
    return 0


def _cmd_transform(args) -> int:
    sig = read_signal(args.infile)
    m, apply_inverse = _matrix_from_args(args)
    out_grid = sig.grid
    if args.out_origin or args.out_step or args.out_count:
        if not (args.out_origin and args.out_step and args.out_count):
            raise FmtError("give all of --out-origin, --out-step, --out-count or none")
        out_grid = Grid(origin=args.out_origin, step=args.out_step, count=args.out_count)
    if apply_inverse:
        result = ifmt(sig, m, out_grid, method=args.method)
    elif args.method == "direct":
        result = fmt_direct(sig, m, out_grid)
    else:
        result = fmt_fast(sig, m, out_grid)
    write_signal(args.out, result)
    print(f"wrote {args.out} (method={args.method}, "
          f"tier={fast_tier_description(m if not apply_inverse else m.inverse(), sig.grid, out_grid)})")
    return 0


def _cmd_convolve(args) -> int:
    f = read_signal(args.in_a)
    g = read_signal(args.in_b)
    m, _ = _matrix_from_args(args)
    if args.kind == 1:
        if args.method == "spectral":
            z = conv_first_spectral(f, g, m)
        else:
            z = conv_first_spatial(f, g, m)
    else:
        z = conv_second(f, g, m)
    write_signal(args.out, z)
    print(f"wrote {args.out} (kind={args.kind})")
    return 0


def _cmd_filter(args) -> int:
    sig = read_signal(args.infile)
    m, _ = _matrix_from_args(args)
    lo, hi = (_floats(args.mask_box[0]), _floats(args.mask_box[1]))
    edge, width = args.edge
    grid = sig.grid
    if args.mask_grid_scale != 1.0:
        grid = scale_grid(grid, args.mask_grid_scale)
    mask = box_mask(grid, lo, hi, edge=edge, width=width)
    out = multiplicative_filter(sig, m, mask)
    write_signal(args.out, out)
    print(f"wrote {args.out} (mask {mask.description})")
    return 0


def _cmd_demo_denoise(args) -> int:
    scenario = build_demo(args.seed)
    r_out, metrics = run_demo(scenario)
    outdir = args.outdir.rstrip("/")
    write_signal(f"{outdir}/f.sig", scenario.clean)
    write_signal(f"{outdir}/r_in.sig", scenario.received)
    write_signal(f"{outdir}/r_out.sig", r_out)
    with open(f"{outdir}/report.json", "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2)
        fh.write("\n")
    print(json.dumps(metrics, indent=2))
    return 0


def _cmd_verify(args) -> int:
    reports = run_suite(args.suite, args.seed)
    for rep in reports:
        print(rep.line())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump([r.to_json_dict() for r in reports], fh, indent=2)
            fh.write("\n")
    failed = [r for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
    return 1 if failed else 0


def _cmd_bench(args) -> int:
    rows = bench(args.sizes, args.dims, args.seed)
    hdr = f"{'dims':>4} {'size':>5} {'case':<12} {'tier':<24} {'direct_s':>9} {'fast_s':>9} {'speedup':>8} {'rel_l2':>9}"
    print(hdr)
    for r in rows:
        print(f"{r['dims']:>4} {r['size']:>5} {r['case']:<12} {r['tier']:<24} "
              f"{r['t_direct_s']:>9.4f} {r['t_fast_s']:>9.4f} {r['speedup']:>8.1f} "
              f"{r['rel_l2']:>9.2e}")
    return 0


def _cmd_export_csv(args) -> int:
    sig = read_signal(args.infile)
    slices = {}
    for item in args.slice or []:
        try:
            axis, idx = item.split("=", 1)
            slices[int(axis)] = int(idx)
        except ValueError:
            raise FmtError(f"bad --slice {item!r}, expected AXIS=INDEX")
    export_csv(args.out, sig, slices)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmt",
        description="Free metaplectic transforms, convolutions and filtering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-matrix", help="check the block constraints")
    _add_matrix_args(p)
    p.set_defaults(func=_cmd_validate_matrix)

    p = sub.add_parser("make-signal", help="synthesize a test signal")
    p.add_argument("kind", choices=["gaussian", "delta", "chirp"])
    p.add_argument("--origin", type=_floats, required=True)
    p.add_argument("--step", type=_floats, required=True)
    p.add_argument("--count", type=_ints, required=True)
    p.add_argument("--center", type=_floats)
    p.add_argument("--inv-cov", type=_floats)
    p.add_argument("--at", type=_floats)
    p.add_argument("--chirp-matrix", type=_float_rows)
    p.add_argument("--shift", type=_floats)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_make_signal)

    p = sub.add_parser("transform", help="apply the transform to a signal file")
    p.add_argument("--in", dest="infile", required=True)
    _add_matrix_args(p, inverse_option=True)
    p.add_argument("--method", choices=["direct", "fast"], default="fast")
    p.add_argument("--out-origin", type=_floats)
    p.add_argument("--out-step", type=_floats)
    p.add_argument("--out-count", type=_ints)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("convolve", help="convolve two signal files")
    p.add_argument("--in-a", required=True)
    p.add_argument("--in-b", required=True)
    _add_matrix_args(p)
    p.add_argument("--kind", type=int, choices=[1, 2], required=True)
    p.add_argument("--method", choices=["spatial", "spectral"], default="spatial",
                   help="first-kind only; the second kind has a single path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_convolve)

    p = sub.add_parser("filter", help="multiplicative filtering with a box mask")
    p.add_argument("--in", dest="infile", required=True)
    _add_matrix_args(p)
    p.add_argument("--mask-box", nargs=2, required=True, metavar=("LO", "HI"),
                   help="comma-separated per-axis bounds")
    p.add_argument("--edge", type=_parse_edge, default=("hard", 0.0),
                   help="hard or cosine:WIDTH")
    p.add_argument("--mask-grid-scale", type=float, default=1.0,
                   help="scale factor for the spectral grid the mask lives on "
                        "(1/sqrt(2) exercises the second-kind selection)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("demo-denoise", help="run the synthetic denoising demo")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=_cmd_demo_denoise)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True,
                   choices=sorted(SUITES) + ["all"])
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--json", help="also write the reports as JSON")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="time direct vs fast paths")
    p.add_argument("--sizes", type=_ints, default=(32, 64))
    p.add_argument("--dims", type=_ints, default=(1, 2))
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("export-csv", help="dump a signal (or slice) as CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--slice", action="append", metavar="AXIS=INDEX")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_csv)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NotSymplectic, SingularB) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FmtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
