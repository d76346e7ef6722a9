"""
Time series of the correlation measures and the scans built on them:
first maxima of the classical correlation, the entanglement boundary for
nearest neighbours, and onset times / dead bands for next-nearest ones.

Every scan is a list of independent per-coupling tasks.  ``workers > 1``
farms them out to a process pool; results come back in task order, so the
output does not depend on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.signal import find_peaks

from .correlators import XState, assemble_nn, assemble_nnn, contractions
from .model import ModelParams
from .qinfo import CorrelationTriple, OptimizerSettings, concurrence, correlation_triple
from .quadrature import QuadratureSpec

# concurrence below this counts as zero
ZERO_CONCURRENCE = 1e-12

PAIRS = {"nn": "nn", "nearest": "nn", "nnn": "nnn", "next_nearest": "nnn"}


class Degenerate(ValueError):
    pass


class SeriesError(RuntimeError):
    """Upstream failure while building a series; carries the offending time."""

    def __init__(self, message, t=None, params=None):
        super().__init__(message)
        self.t = t
        self.params = params


@dataclass
class TimeSeries:
    params: ModelParams
    pair: str
    times: np.ndarray
    values: CorrelationTriple
    states: XState


@dataclass(frozen=True)
class PeakReport:
    t_star: float
    value: float
    found: bool
    index: int = -1


@dataclass
class CmaxCurve:
    gamma: float
    lambdas: np.ndarray
    t_star: np.ndarray
    cmax: np.ndarray
    found: np.ndarray
    lambda_star: float


@dataclass
class BoundaryReport:
    gamma: float
    lambdas: np.ndarray
    zero_run: np.ndarray
    lambda_b: float
    uncertainty: float


@dataclass
class OnsetReport:
    gamma: float
    lambdas: np.ndarray
    t_on: np.ndarray
    dead_bands: list = field(default_factory=list)


def time_grid(T: float, dt: float) -> np.ndarray:
    """Uniform grid 0, dt, 2 dt, ... up to T (T rounded to a whole number of steps)."""
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be > 0")
    steps = int(round(T / dt))
    if steps < 1:
        raise ValueError("T must be at least one step dt")
    return np.arange(steps + 1) * dt


def _pair(pair: str) -> str:
    try:
        return PAIRS[pair]
    except KeyError:
        raise ValueError(f"pair must be one of {sorted(PAIRS)}, got {pair!r}") from None


def pair_states(params: ModelParams, pair: str, times, spec=None, variant="wick_derived") -> XState:
    pair = _pair(pair)
    times = np.asarray(times, dtype=float)
    cs = contractions(params, times, spec)
    try:
        if pair == "nn":
            return assemble_nn(cs)
        return assemble_nnn(cs, variant, validate=variant == "wick_derived")
    except ValueError as exc:
        bad = _first_bad_time(cs, times, pair, variant)
        raise SeriesError(f"{exc} (lambda={params.lam}, gamma={params.gamma}, t={bad})",
                          t=bad, params=params) from exc


def _first_bad_time(cs, times, pair, variant):
    for i, t in enumerate(times):
        try:
            assemble_nn(cs[i]) if pair == "nn" else assemble_nnn(cs[i], variant)
        except ValueError:
            return float(t)
    return None


def time_series(params: ModelParams, pair: str = "nn", T: float = 25.0, dt: float = 0.01,
                spec: QuadratureSpec | None = None, opt: OptimizerSettings | None = None,
                variant: str = "wick_derived", classical: bool = True) -> TimeSeries:
    """Concurrence, discord and classical correlation on the grid 0..T."""
    times = time_grid(T, dt)
    states = pair_states(params, pair, times, spec, variant)
    values = correlation_triple(states, opt, classical=classical)
    return TimeSeries(params, _pair(pair), times, values, states)


def first_local_max(values, times=None, prominence: float = 1e-6) -> PeakReport:
    """First interior peak with at least ``prominence``, refined by a parabola through 3 points."""
    values = np.asarray(values, dtype=float)
    times = np.arange(len(values), dtype=float) if times is None else np.asarray(times, float)
    peaks, _ = find_peaks(values, prominence=prominence)
    if len(peaks) == 0:
        return PeakReport(float("nan"), float("nan"), False)
    i = int(peaks[0])
    left, mid, right = values[i - 1], values[i], values[i + 1]
    curv = left - 2.0 * mid + right
    dt = times[i + 1] - times[i]
    if curv < 0:
        shift = 0.5 * (left - right) / curv
        return PeakReport(float(times[i] + shift * dt), float(mid - 0.25 * (left - right) * shift),
                          True, i)
    return PeakReport(float(times[i]), float(mid), True, i)


def _run_tasks(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# first maximum of the classical correlation
# ----------------------------------------------------------------------------

def _cmax_task(lam, gamma, T, dt, spec, opt, prominence):
    ts = time_series(ModelParams(lam, gamma), "nn", T, dt, spec, opt)
    peak = first_local_max(ts.values.classical, ts.times, prominence)
    return peak.t_star, peak.value, peak.found


def cmax_curve(gamma: float, lambda_grid, T: float = 10.0, dt: float = 0.01,
               spec: QuadratureSpec | None = None, opt: OptimizerSettings | None = None,
               prominence: float = 1e-6, workers: int = 1) -> CmaxCurve:
    """First local maximum C_max of the nearest-neighbour classical correlation versus lambda."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    lambdas = np.asarray(lambda_grid, dtype=float)
    task = partial(_cmax_task, gamma=gamma, T=T, dt=dt, spec=spec, opt=opt, prominence=prominence)
    out = _run_tasks(task, list(lambdas), workers)
    t_star, cmax, found = (np.array(v) for v in zip(*out))
    found = found.astype(bool)
    if found.any():
        masked = np.where(found, cmax, -np.inf)
        lam_star = float(lambdas[int(np.argmax(masked))])
    else:
        lam_star = float("nan")
    return CmaxCurve(gamma, lambdas, t_star, cmax, found, lam_star)


# ----------------------------------------------------------------------------
# concurrence scans
# ----------------------------------------------------------------------------

def _concurrence_task(lam, gamma, pair, T, dt, spec):
    times = time_grid(T, dt)
    return np.asarray(concurrence(pair_states(ModelParams(lam, gamma), pair, times, spec)))


def concurrence_scan(gamma, lambda_grid, pair="nn", T=25.0, dt=0.01, spec=None, workers=1):
    """Concurrence on the time grid for every lambda; shape (n_lambda, n_times)."""
    lambdas = np.asarray(lambda_grid, dtype=float)
    task = partial(_concurrence_task, gamma=gamma, pair=pair, T=T, dt=dt, spec=spec)
    return np.array(_run_tasks(task, list(lambdas), workers))


def longest_zero_run(conc, dt: float) -> float:
    """Length in time of the longest stretch of consecutive zero-concurrence samples."""
    zero = np.asarray(conc) < ZERO_CONCURRENCE
    best = run = 0
    for z in zero:
        run = run + 1 if z else 0
        best = max(best, run)
    return max(best - 1, 0) * dt


def entanglement_boundary(gamma: float, lambda_grid, T: float = 25.0, dt: float = 0.01,
                          spec: QuadratureSpec | None = None, workers: int = 1) -> BoundaryReport:
    """Coupling where nearest-neighbour entanglement switches to early sudden death.

    L(lambda) is the longest zero-concurrence interval within [0, T]; the
    boundary is the midpoint of the steepest rise of L across the grid.
    """
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    lambdas = np.asarray(lambda_grid, dtype=float)
    if len(lambdas) < 2:
        raise ValueError("need at least two lambda values")
    conc = concurrence_scan(gamma, lambdas, "nn", T, dt, spec, workers)
    runs = np.array([longest_zero_run(c, dt) for c in conc])
    rise = np.diff(runs)
    if rise.max() <= 0:
        raise Degenerate(f"zero-concurrence interval does not grow anywhere on the grid (gamma={gamma})")
    i = int(np.argmax(rise))
    return BoundaryReport(gamma, lambdas, runs, 0.5 * (lambdas[i] + lambdas[i + 1]),
                          float(lambdas[i + 1] - lambdas[i]))


def onset_time(conc, times) -> float:
    """First grid time with nonzero concurrence (inf if none)."""
    hit = np.flatnonzero(np.asarray(conc) >= ZERO_CONCURRENCE)
    return float(times[hit[0]]) if len(hit) else float("inf")


def dead_bands(lambdas, t_on):
    """Maximal runs of consecutive grid couplings with no entanglement, as (first, last)."""
    bands, start = [], None
    for lam, t in zip(lambdas, t_on):
        if np.isinf(t):
            start = lam if start is None else start
            last = lam
        elif start is not None:
            bands.append((float(start), float(last)))
            start = None
    if start is not None:
        bands.append((float(start), float(last)))
    return bands


def nnn_onset_and_deadband(gamma: float, lambda_grid, T: float = 25.0, dt: float = 0.01,
                           spec: QuadratureSpec | None = None, workers: int = 1) -> OnsetReport:
    lambdas = np.asarray(lambda_grid, dtype=float)
    times = time_grid(T, dt)
    conc = concurrence_scan(gamma, lambdas, "nnn", T, dt, spec, workers)
    t_on = np.array([onset_time(c, times) for c in conc])
    return OnsetReport(gamma, lambdas, t_on, dead_bands(lambdas, t_on))
