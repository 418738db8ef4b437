"""Adaptive Simpson quadrature for vector-valued integrands.

The integrand maps a scalar abscissa to an array; one recursion refines all
components together, with the error test taken on the worst component.  The
range is first split into ``panels`` equal pieces so that narrow peaks in a
wide range cannot slip between the initial Simpson nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DomainError

MAX_DEPTH = 48


@dataclass(frozen=True)
class QuadratureSpec:
    lo: float
    hi: float
    abs_tol: float = 1e-10
    panels: int = 16

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.hi <= self.lo:
            raise DomainError(f"bad quadrature range [{self.lo}, {self.hi}]")
        if self.abs_tol <= 0 or self.panels < 1:
            raise DomainError("abs_tol and panels must be positive")


def adaptive_simpson(f: Callable[[float], np.ndarray], spec: QuadratureSpec) -> np.ndarray:
    """Integrate ``f`` over ``[spec.lo, spec.hi]`` to absolute tolerance ``spec.abs_tol``."""
    edges = np.linspace(spec.lo, spec.hi, spec.panels + 1)
    width = spec.hi - spec.lo
    total = None
    for a, b in zip(edges[:-1], edges[1:]):
        part = _simpson_panel(f, a, b, spec.abs_tol * (b - a) / width)
        total = part if total is None else total + part
    return total


def _simpson_panel(f, a, b, tol):
    fa, fb = np.asarray(f(a), float), np.asarray(f(b), float)
    m = 0.5 * (a + b)
    fm = np.asarray(f(m), float)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = np.zeros_like(whole)
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = np.asarray(f(lm), float), np.asarray(f(rm), float)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        diff = left + right - whole
        if depth >= MAX_DEPTH or np.max(np.abs(diff)) <= 15.0 * tol:
            total += left + right + diff / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
    return total


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """Trapezoid-rule weights for an arbitrary increasing grid."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 1:
        return np.ones(1)
    d = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w
