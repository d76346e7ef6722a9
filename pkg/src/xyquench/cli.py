"""
Command-line front end.

Every mode writes a CSV file (header row, 17 significant digits) and a JSON
sidecar next to it holding the full configuration, the package version, the
wall-clock time and a short summary.  The CSV depends only on the
configuration: work is split into fixed units (one coupling, or one block of
times) and written back in unit order, whatever the worker count.

Exit status: 0 on success, 1 for an invalid configuration, 2 when a numerical
step fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, fields
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .correlators import TIME_CHUNK
from .dynamics import (
    Degenerate, SeriesError, _run_tasks, cmax_curve, entanglement_boundary,
    nnn_onset_and_deadband, pair_states, time_grid,
)
from .model import ModelParams
from .oracle import ED_MAX_SITES, RingSpec, ed_evolve
from .qinfo import OptimizerFailure, correlation_triple
from .quadrature import NoConvergence, QuadratureSpec

log = logging.getLogger("xyquench")

MODES = ("series", "sweep", "cmax", "boundary", "nnn-scan", "oracle-compare")
VARIANT_NAMES = {"wick": "wick_derived", "printed": "as_printed"}
DEFAULT_TMAX = {"cmax": 10.0, "oracle-compare": 1.5}

SERIES_COLUMNS = ["t", "concurrence", "discord", "classical", "r11", "r22", "r33", "r44",
                  "re_r14", "im_r14", "re_r23", "im_r23"]

# times per work unit in series mode; a multiple of TIME_CHUNK keeps chunking identical
SERIES_BLOCK = 8 * TIME_CHUNK


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    mode: str = "series"
    lam: float | None = None
    gamma: float | None = None
    lambda_range: str | None = None
    gamma_list: list[float] | None = None
    pair: str = "nn"
    variant: str = "wick"
    tmax: float | None = None
    dt: float = 0.01
    tol: float = 1e-10
    out: str = "out.csv"
    workers: int = 1
    seed: int | None = None
    ring_size: int = 12
    prominence: float = 1e-6

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}")
        if self.pair not in ("nn", "nnn"):
            raise ConfigError("pair", "must be nn or nnn")
        if self.variant not in VARIANT_NAMES:
            raise ConfigError("variant", "must be wick or printed")
        if self.tmax is None:
            self.tmax = DEFAULT_TMAX.get(self.mode, 25.0)
        if not (np.isfinite(self.tmax) and self.tmax > 0):
            raise ConfigError("tmax", "must be > 0")
        if not (np.isfinite(self.dt) and 0 < self.dt <= self.tmax):
            raise ConfigError("dt", "must be > 0 and <= tmax")
        if not (self.tol > 0):
            raise ConfigError("tol", "must be > 0")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        if not (self.prominence >= 0):
            raise ConfigError("prominence", "must be >= 0")
        if self.lam is not None and not (np.isfinite(self.lam) and self.lam >= 0):
            raise ConfigError("lambda", "must be >= 0")
        for g in self.gammas():
            if not 0 <= g <= 1:
                raise ConfigError("gamma", f"{g} outside [0, 1]")
        if self.mode in ("series", "oracle-compare"):
            if self.lam is None:
                raise ConfigError("lambda", f"required in {self.mode} mode")
            if self.gamma is None:
                raise ConfigError("gamma", f"required in {self.mode} mode")
        else:
            self.lambdas()
            if not self.gammas():
                raise ConfigError("gamma-list", f"required in {self.mode} mode")
        if self.mode == "cmax" and any(g == 0 for g in self.gammas()):
            raise ConfigError("gamma", "cmax mode needs gamma in (0, 1]")
        if self.mode == "oracle-compare" and not 4 <= self.ring_size <= ED_MAX_SITES:
            raise ConfigError("ring-size", f"must lie in [4, {ED_MAX_SITES}]")
        return self

    def gammas(self) -> list[float]:
        if self.gamma_list:
            return [float(g) for g in self.gamma_list]
        if self.gamma is not None:
            return [float(self.gamma)]
        return []

    def lambdas(self) -> np.ndarray:
        if self.lambda_range is None:
            if self.lam is None:
                raise ConfigError("lambda-range", f"required in {self.mode} mode")
            return np.array([float(self.lam)])
        try:
            a, b, step = (float(v) for v in self.lambda_range.split(":"))
        except ValueError:
            raise ConfigError("lambda-range", "expected a:b:step") from None
        if not (step > 0 and b >= a >= 0):
            raise ConfigError("lambda-range", "need 0 <= a <= b and step > 0")
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        return np.round(a + step * np.arange(count), 12)

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.tol, abs_tol=min(1e-12, self.tol))


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _series_rows(times, x, tri):
    return np.column_stack([
        times, tri.concurrence, tri.discord, tri.classical,
        x.r11, x.r22, x.r33, x.r44,
        np.real(x.r14), np.imag(x.r14), np.real(x.r23), np.imag(x.r23),
    ])


def _series_block(times, lam, gamma, pair, variant, spec):
    params = ModelParams(lam, gamma)
    x = pair_states(params, pair, times, spec, variant)
    tri = correlation_triple(x)
    return _series_rows(times, x, tri)


def _run_series(cfg, spec):
    times = time_grid(cfg.tmax, cfg.dt)
    blocks = [times[i:i + SERIES_BLOCK] for i in range(0, len(times), SERIES_BLOCK)]
    task = partial(_series_block, lam=cfg.lam, gamma=cfg.gamma, pair=cfg.pair,
                   variant=VARIANT_NAMES[cfg.variant], spec=spec)
    rows = np.concatenate(_run_tasks(task, blocks, cfg.workers))
    return SERIES_COLUMNS, rows.tolist(), {"points": len(rows)}


def _sweep_task(item, pair, variant, tmax, dt, spec):
    gamma, lam = item
    times = time_grid(tmax, dt)
    blocks = [_series_block(times[i:i + SERIES_BLOCK], lam, gamma, pair, variant, spec)
              for i in range(0, len(times), SERIES_BLOCK)]
    rows = np.concatenate(blocks)
    lead = np.tile([gamma, lam], (len(rows), 1))
    return np.hstack([lead, rows])


def _run_sweep(cfg, spec):
    items = [(g, lam) for g in cfg.gammas() for lam in cfg.lambdas()]
    task = partial(_sweep_task, pair=cfg.pair, variant=VARIANT_NAMES[cfg.variant],
                   tmax=cfg.tmax, dt=cfg.dt, spec=spec)
    rows = np.concatenate(_run_tasks(task, items, cfg.workers))
    return ["gamma", "lambda"] + SERIES_COLUMNS, rows.tolist(), {"points": len(rows)}


def _run_cmax(cfg, spec):
    rows, summary = [], {}
    for g in cfg.gammas():
        curve = cmax_curve(g, cfg.lambdas(), cfg.tmax, cfg.dt, spec,
                           prominence=cfg.prominence, workers=cfg.workers)
        for lam, ts, cm, ok in zip(curve.lambdas, curve.t_star, curve.cmax, curve.found):
            rows.append([g, lam, ts, cm, bool(ok)])
        summary[f"gamma={g}"] = {"lambda_star": curve.lambda_star}
    return ["gamma", "lambda", "t_star", "c_max", "found"], rows, summary


def _run_boundary(cfg, spec):
    rows, summary = [], {}
    for g in cfg.gammas():
        try:
            rep = entanglement_boundary(g, cfg.lambdas(), cfg.tmax, cfg.dt, spec, cfg.workers)
        except Degenerate as exc:
            summary[f"gamma={g}"] = {"degenerate": str(exc)}
            continue
        rows += [[g, lam, run] for lam, run in zip(rep.lambdas, rep.zero_run)]
        summary[f"gamma={g}"] = {"lambda_b": rep.lambda_b, "uncertainty": rep.uncertainty}
    return ["gamma", "lambda", "longest_zero_interval"], rows, summary


def _run_nnn(cfg, spec):
    rows, summary = [], {}
    for g in cfg.gammas():
        rep = nnn_onset_and_deadband(g, cfg.lambdas(), cfg.tmax, cfg.dt, spec, cfg.workers)
        rows += [[g, lam, t] for lam, t in zip(rep.lambdas, rep.t_on)]
        summary[f"gamma={g}"] = {"dead_bands": rep.dead_bands}
    return ["gamma", "lambda", "t_on"], rows, summary


def _run_oracle(cfg, spec):
    from .correlators import VARIANTS, assemble_nn, assemble_nnn, contractions

    params = ModelParams(cfg.lam, cfg.gamma)
    ring = RingSpec(cfg.ring_size, params)
    times = time_grid(cfg.tmax, cfg.dt)
    cs = contractions(params, times, spec)
    rows = []
    worst = {"nn": 0.0, **dict.fromkeys(VARIANTS, 0.0)}
    for i, t in enumerate(times):
        row = [t]
        dev = float(np.max(np.abs(assemble_nn(cs[i]).matrix() - ed_evolve(ring, float(t), (0, 1)))))
        row.append(dev)
        worst["nn"] = max(worst["nn"], dev)
        rho13 = ed_evolve(ring, float(t), (0, 2))
        for v in VARIANTS:
            dev = float(np.max(np.abs(assemble_nnn(cs[i], v, validate=False).matrix() - rho13)))
            row.append(dev)
            worst[v] = max(worst[v], dev)
        rows.append(row)
    return ["t", "nn", "nnn_wick_derived", "nnn_as_printed"], rows, {"max_deviation": worst}


RUNNERS = {
    "series": _run_series, "sweep": _run_sweep, "cmax": _run_cmax,
    "boundary": _run_boundary, "nnn-scan": _run_nnn, "oracle-compare": _run_oracle,
}


def sidecar_path(out) -> Path:
    return Path(out).with_suffix(".json")


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def run(cfg: RunConfig) -> int:
    """Execute one configuration; returns the process exit status."""
    try:
        cfg.validate()
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return 1
    start = time.perf_counter()
    spec = cfg.quadrature()
    try:
        columns, rows, summary = RUNNERS[cfg.mode](cfg, spec)
    except (NoConvergence, OptimizerFailure, SeriesError) as exc:
        log.error("numerical failure: %s", exc)
        return 2
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, columns, rows)
    meta = {
        "config": asdict(cfg),
        "version": __version__,
        "wall_clock_seconds": time.perf_counter() - start,
        "columns": columns,
        "summary": summary,
    }
    sidecar_path(out).write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default))
    log.info("wrote %s (%d rows)", out, len(rows))
    return 0


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serialisable: {type(obj)}")


def config_from_sidecar(path) -> RunConfig:
    data = json.loads(Path(path).read_text())["config"]
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in data.items() if k in known})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xyquench", description=__doc__.strip().splitlines()[0])
    p.add_argument("--mode", choices=MODES, default="series")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda-range", help="a:b:step, inclusive of b")
    p.add_argument("--gamma-list", type=lambda s: [float(v) for v in s.split(",")],
                   help="comma separated anisotropies")
    p.add_argument("--pair", choices=("nn", "nnn"), default="nn")
    p.add_argument("--variant", choices=tuple(VARIANT_NAMES), default="wick")
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=1e-10, help="relative quadrature tolerance")
    p.add_argument("--out", default="out.csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, help="reserved; every algorithm is deterministic")
    p.add_argument("--ring-size", type=int, default=12, help="ED ring size for oracle-compare")
    p.add_argument("--prominence", type=float, default=1e-6)
    p.add_argument("--config", help="re-run the configuration stored in a JSON sidecar")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.config:
        cfg = config_from_sidecar(args.config)
        argv = sys.argv[1:] if argv is None else argv
        if "--out" in argv:
            cfg.out = args.out
        if "--workers" in argv:
            cfg.workers = args.workers
    else:
        opts = vars(args)
        cfg = RunConfig(**{f.name: opts[f.name] for f in fields(RunConfig) if f.name in opts})
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
