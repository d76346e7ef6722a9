"""
Brillouin-zone averages (1/2pi) int_{-pi}^{pi} f(k) dk.

The integrands met in this package are periodic and (after pairing sin k
with alpha_k beta_k) analytic in k, so the equally spaced midpoint rule
converges geometrically.  The panel count is doubled until two successive
estimates agree; the difference is reported as the error estimate.  Midpoint
nodes never land on k = 0 or k = +-pi, where the closed-gap limits live.

Integrands are vectorised callables ``f(k) -> array`` whose leading axis runs
over ``k``; any trailing axes (several integrands, several times) are
integrated together and must all converge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

# nodes evaluated per call of f; bounds memory and fixes the summation order
BLOCK = 1 << 12


class NoConvergence(RuntimeError):
    """Raised when max_panels is reached before the tolerance is met."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    min_panels: int = 4096
    max_panels: int = 1 << 22
    oscillation_hint: float = 0.0

    def __post_init__(self):
        if self.min_panels < 2:
            raise ValueError("min_panels must be >= 2")
        if self.max_panels < self.min_panels:
            raise ValueError("max_panels must be >= min_panels")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.oscillation_hint < 0:
            raise ValueError("oscillation_hint must be >= 0")

    def initial_panels(self) -> int:
        n = max(self.min_panels, 64 * math.ceil(1.0 + self.oscillation_hint))
        n += n % 2
        return min(n, self.max_panels - self.max_panels % 2)

    def with_hint(self, hint: float) -> "QuadratureSpec":
        return replace(self, oscillation_hint=float(hint))


@dataclass(frozen=True)
class QuadratureResult:
    value: np.ndarray | float | complex
    err_estimate: float
    panels_used: int


def _midpoint_mean(f, lo: float, width: float, n: int):
    """Mean of f over n midpoint nodes of [lo, lo + width], summed block by block."""
    h = width / n
    total = None
    for start in range(0, n, BLOCK):
        j = np.arange(start, min(start + BLOCK, n), dtype=float)
        vals = np.asarray(f(lo + (j + 0.5) * h))
        if vals.ndim == 0:
            vals = np.full(j.shape, vals)
        part = vals.sum(axis=0)
        total = part if total is None else total + part
    return total / n


def _refine(mean_at: Callable[[int], np.ndarray], spec: QuadratureSpec, scale: int) -> QuadratureResult:
    """Double the panel count until successive estimates agree.

    ``mean_at(n)`` returns the estimate on ``n`` nodes; ``scale`` converts a
    node count into the full-period panel count reported to the caller.
    """
    nodes = spec.initial_panels() // scale
    prev = mean_at(nodes)
    while True:
        if 2 * nodes * scale > spec.max_panels:
            raise NoConvergence(
                f"no convergence with {nodes * scale} panels (max_panels={spec.max_panels})",
                result=QuadratureResult(_squeeze(prev), float("nan"), nodes * scale),
            )
        nodes *= 2
        cur = mean_at(nodes)
        diff = np.abs(cur - prev)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(cur))
        if np.all(diff <= tol):
            return QuadratureResult(_squeeze(cur), float(np.max(diff, initial=0.0)), nodes * scale)
        prev = cur


def _squeeze(value):
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value


def integrate_periodic(f, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """(1/2pi) * integral of f over [-pi, pi]."""
    spec = spec or QuadratureSpec()
    return _refine(lambda n: _midpoint_mean(f, -np.pi, 2 * np.pi, n), spec, 1)


def integrate_halfline_even(f, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """(1/2pi) * integral of an even f over [-pi, pi], sampled on [0, pi] only.

    With an even number of panels the half-line nodes are exactly the positive
    half of the full-period midpoint grid.
    """
    spec = spec or QuadratureSpec()
    return _refine(lambda n: _midpoint_mean(f, 0.0, np.pi, n), spec, 2)
