"""Structured results of theorem and property checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sigspace import Signal, l2_norm


@dataclass
class VerifyReport:
    """One named check: error metrics, its tolerance and the verdict.

    For most checks max_abs / rel_l2 are discrepancy metrics and
    passed == (metric <= tol).  A few artifact-level checks store a quality
    figure instead (e.g. an SNR gain in dB, where bigger is better); the
    producing suite documents which and sets `passed` accordingly.
    """

    check: str
    max_abs: float
    rel_l2: float
    tol: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        d = {
            "check": self.check,
            "max_abs": self.max_abs,
            "rel_l2": self.rel_l2,
            "tol": self.tol,
            "pass": bool(self.passed),
        }
        if self.extra:
            d["extra"] = {k: _jsonable(v) for k, v in self.extra.items()}
        return d

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict}  {self.check:<40s} max_abs={self.max_abs:.3e} "
            f"rel_l2={self.rel_l2:.3e} tol={self.tol:.1e}"
        )


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def signal_discrepancy(a: Signal, b: Signal) -> tuple:
    """(max abs difference, relative L2 difference) of a against reference b.

    Relative L2 uses the reference norm; it is 0 for two zero signals and
    inf when only the reference vanishes.
    """
    diff = a.samples - b.samples
    max_abs = float(np.abs(diff).max()) if diff.size else 0.0
    ref = l2_norm(b)
    dn = l2_norm(Signal(a.grid, diff))
    if ref == 0.0:
        rel = 0.0 if dn == 0.0 else math.inf
    else:
        rel = dn / ref
    return max_abs, rel
