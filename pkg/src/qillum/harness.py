"""Sweep engine: deterministic, parallel reproduction of the figure curves.

Each sweep walks a log-spaced background grid, synthesizes frames on
counter-derived streams (see ``streams``), and writes one CSV row per
grid point carrying both the empirical estimate and the matching theory
value, plus a JSON run manifest.  Output bytes depend only on
(spec, seed), never on the thread count.
"""

from __future__ import annotations

import json
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import _backend, estimators, theory
from ._version import __version__
from .detection import fill_frame_arrays
from .errors import DegenerateInputError, InvalidParameterError
from .estimators import FrameStats
from .params import BackgroundParams, DetectionParams, SourceKind, SourceParams
from .streams import DOMAIN_GROUPING, FrameStreams, child_generator, frame_domain

_SOURCE_CHOICES = ("twb", "thermal", "both")


@dataclass(frozen=True)
class SweepSpec:
    """Full configuration of one sweep run (defaults: desk-scale defaults)."""

    source: str = "both"
    mu: float = 0.075
    modes: int = 90_000
    eta1: float = 0.4
    eta2: float = 0.2
    nb_min: float = 0.0
    nb_max: float = 5000.0
    nb_points: int = 12
    mb: int = 57
    npix: int = 80
    nimg: int = 10
    frames: int = 2000
    trials: int = 200
    seed: int = 0
    threads: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if self.source not in _SOURCE_CHOICES:
            raise InvalidParameterError(
                f"source must be one of {_SOURCE_CHOICES}, got {self.source!r}")
        # Delegate physical-parameter validation to the params types.
        for kind in self.source_kinds():
            SourceParams(self.mu, self.modes, kind)
        DetectionParams(self.eta1, self.eta2, True)
        BackgroundParams(0.0, self.mb)
        if self.nb_min < 0 or not math.isfinite(self.nb_min):
            raise InvalidParameterError("nb_min must be finite and >= 0")
        if not math.isfinite(self.nb_max) or self.nb_max < self.nb_min:
            raise InvalidParameterError("nb_max must be finite and >= nb_min")
        if self.nb_points < 1:
            raise InvalidParameterError("nb_points must be >= 1")
        if self.nb_points > 1 and self.nb_max <= self.nb_min:
            raise InvalidParameterError(
                "nb_max must exceed nb_min for a multi-point grid")
        if self.npix < 2:
            raise InvalidParameterError("npix must be >= 2")
        if self.frames < 2:
            raise InvalidParameterError("frames must be >= 2")
        if self.nimg < 1 or self.trials < 1:
            raise InvalidParameterError("nimg and trials must be >= 1")
        if self.threads < 1:
            raise InvalidParameterError("threads must be >= 1")

    def source_kinds(self) -> list[SourceKind]:
        if self.source == "twb":
            return [SourceKind.TWIN_BEAM]
        if self.source == "thermal":
            return [SourceKind.SPLIT_THERMAL]
        return [SourceKind.TWIN_BEAM, SourceKind.SPLIT_THERMAL]

    def nb_grid(self) -> np.ndarray:
        """Strictly increasing background grid, log-spaced.

        A zero nb_min contributes an exact 0 point; the positive part then
        starts three decades below nb_max.
        """
        if self.nb_points == 1:
            return np.array([float(self.nb_min)])
        if self.nb_min > 0.0:
            return np.logspace(math.log10(self.nb_min),
                               math.log10(self.nb_max), self.nb_points)
        floor = self.nb_max / 1000.0
        rest = np.logspace(math.log10(floor), math.log10(self.nb_max),
                           self.nb_points - 1)
        return np.concatenate([[0.0], rest])

    def point_params(self, kind: SourceKind, nb: float, target: bool):
        return (SourceParams(self.mu, self.modes, kind),
                DetectionParams(self.eta1, self.eta2, target),
                BackgroundParams(nb, self.mb))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SweepSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise InvalidParameterError(
                f"unknown config keys: {sorted(unknown)}")
        return cls(**mapping)


def collect_stats(spec: SweepSpec, kind: SourceKind, nb: float, point: int,
                  n_frames: int, target: bool = True) -> FrameStats:
    """Synthesize ``n_frames`` frames for one grid point, streaming into
    per-frame sums."""
    src, det, bg = spec.point_params(kind, nb, target)
    streams = FrameStreams(spec.seed, frame_domain(kind, target), point)
    n1 = np.empty(spec.npix, dtype=np.int64)
    n2 = np.empty(spec.npix, dtype=np.int64)
    stats = FrameStats(spec.npix, n_frames)
    for f in range(n_frames):
        fill_frame_arrays(src, det, bg, streams.generator(f), n1, n2)
        stats.add(n1, n2)
    return stats


def _run_jobs(jobs: dict, threads: int) -> dict:
    if threads <= 1:
        return {key: fn() for key, fn in jobs.items()}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {key: pool.submit(fn) for key, fn in jobs.items()}
        return {key: fut.result() for key, fut in futures.items()}


@dataclass
class SweepResult:
    """Rows of one sweep plus everything needed to reproduce them."""

    sweep: str
    columns: list[str]
    rows: list[dict]
    spec: SweepSpec
    grid: np.ndarray
    wall_time_s: float = 0.0

    def to_csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt_cell(row[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    def manifest(self) -> dict:
        return {
            "sweep": self.sweep,
            "spec": asdict(self.spec),
            "nb_grid": [float(x) for x in self.grid],
            "columns": self.columns,
            "backend": _backend.BACKEND,
            "versions": {
                "qillum": __version__,
                "numpy": np.__version__,
                "python": platform.python_version(),
            },
            "wall_time_s": self.wall_time_s,
        }

    def write(self, path) -> None:
        """Write the CSV and ``<path>.manifest.json`` beside it."""
        path = Path(path)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv_text())
        with open(f"{path}.manifest.json", "w") as fh:
            json.dump(self.manifest(), fh, indent=2)
            fh.write("\n")


def _fmt_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _source_label(kind: SourceKind) -> str:
    return kind.value


def run_nrf_sweep(spec: SweepSpec) -> SweepResult:
    """Noise reduction factor vs background, both source kinds."""
    start = time.perf_counter()
    grid = spec.nb_grid()
    jobs = {}
    for kind in spec.source_kinds():
        for point, nb in enumerate(grid):
            jobs[(point, kind)] = (
                lambda k=kind, n=nb, p=point:
                collect_stats(spec, k, n, p, spec.frames))
    stats = _run_jobs(jobs, spec.threads)
    rows = []
    for kind in spec.source_kinds():
        for point, nb in enumerate(grid):
            est = estimators.nrf(stats[(point, kind)])
            src, det, bg = spec.point_params(kind, nb, True)
            rows.append({
                "point": point, "source": _source_label(kind),
                "nb": float(nb), "nrf": est.value, "nrf_err": est.std_error,
                "nrf_theory": theory.nrf_theory(src, det, bg),
                "frames": spec.frames, "npix": spec.npix,
            })
    columns = ["point", "source", "nb", "nrf", "nrf_err", "nrf_theory",
               "frames", "npix"]
    return SweepResult("nrf", columns, rows, spec, grid,
                       time.perf_counter() - start)


def run_epsilon_sweep(spec: SweepSpec) -> SweepResult:
    """Generalized Cauchy-Schwarz parameter vs background."""
    start = time.perf_counter()
    grid = spec.nb_grid()
    jobs = {}
    for kind in spec.source_kinds():
        for point, nb in enumerate(grid):
            jobs[(point, kind)] = (
                lambda k=kind, n=nb, p=point:
                collect_stats(spec, k, n, p, spec.frames))
    stats = _run_jobs(jobs, spec.threads)
    rows = []
    for kind in spec.source_kinds():
        for point, nb in enumerate(grid):
            try:
                est = estimators.cauchy_schwarz_epsilon(stats[(point, kind)])
                value, err = est.value, est.std_error
            except DegenerateInputError:
                value, err = float("nan"), float("nan")
            src, det, bg = spec.point_params(kind, nb, True)
            try:
                eps_th = theory.epsilon_theory(src, det, bg)
            except DegenerateInputError:
                eps_th = float("nan")
            rows.append({
                "point": point, "source": _source_label(kind),
                "nb": float(nb), "epsilon": value, "epsilon_err": err,
                "epsilon_theory": eps_th,
                "frames": spec.frames, "npix": spec.npix,
            })
    columns = ["point", "source", "nb", "epsilon", "epsilon_err",
               "epsilon_theory", "frames", "npix"]
    return SweepResult("epsilon", columns, rows, spec, grid,
                       time.perf_counter() - start)


def run_snr_sweep(spec: SweepSpec) -> SweepResult:
    """Covariance-contrast SNR vs background (per-sqrt(K) normalization)."""
    start = time.perf_counter()
    grid = spec.nb_grid()
    jobs = {}
    for kind in spec.source_kinds():
        for point, nb in enumerate(grid):
            for target in (True, False):
                jobs[(point, kind, target)] = (
                    lambda k=kind, n=nb, p=point, t=target:
                    collect_stats(spec, k, n, p, spec.frames, target=t))
    stats = _run_jobs(jobs, spec.threads)
    rows = []
    root_k = math.sqrt(spec.npix)
    bias = 1.0 - 1.0 / spec.npix
    for kind in spec.source_kinds():
        for point, nb in enumerate(grid):
            d_in = estimators.per_frame_covariance(stats[(point, kind, True)])
            d_out = estimators.per_frame_covariance(stats[(point, kind, False)])
            est = estimators.empirical_snr(d_in, d_out)
            src, det, bg = spec.point_params(kind, nb, True)
            try:
                bgdom = theory.snr_dominant_bg(src, det, bg)
            except DegenerateInputError:
                bgdom = float("nan")
            ms_in = theory.detected_moments(src, det.with_target(True), bg)
            ms_out = theory.detected_moments(src, det.with_target(False), bg)
            rows.append({
                "point": point, "source": _source_label(kind),
                "nb": float(nb),
                "fsnr": est.value / root_k, "fsnr_err": est.std_error / root_k,
                "fsnr_theory": theory.snr_theory(src, det, bg, spec.npix),
                "fsnr_theory_bgdom": bgdom,
                "delta_in": float(d_in.mean()),
                "delta_in_err": float(d_in.std(ddof=1) / math.sqrt(d_in.size)),
                "delta_out": float(d_out.mean()),
                "delta_out_err": float(d_out.std(ddof=1) / math.sqrt(d_out.size)),
                "delta_in_theory": bias * ms_in.cov,
                "delta_out_theory": bias * ms_out.cov,
                "frames": spec.frames, "npix": spec.npix,
            })
    columns = ["point", "source", "nb", "fsnr", "fsnr_err", "fsnr_theory",
               "fsnr_theory_bgdom", "delta_in", "delta_in_err", "delta_out",
               "delta_out_err", "delta_in_theory", "delta_out_theory",
               "frames", "npix"]
    return SweepResult("snr", columns, rows, spec, grid,
                       time.perf_counter() - start)


def run_perr_sweep(spec: SweepSpec) -> SweepResult:
    """Empirical and Gaussian-theory error probability vs background.

    Uses ``nimg * trials`` frames per hypothesis per point.  Empirical
    values below the resolution floor 1/trials appear as 0.0 and should be
    read as upper bounds at the floor.
    """
    start = time.perf_counter()
    grid = spec.nb_grid()
    n_frames = spec.nimg * spec.trials
    jobs = {}
    for kind in spec.source_kinds():
        for point, nb in enumerate(grid):
            for target in (True, False):
                jobs[(point, kind, target)] = (
                    lambda k=kind, n=nb, p=point, t=target:
                    collect_stats(spec, k, n, p, n_frames, target=t))
    stats = _run_jobs(jobs, spec.threads)
    rows = []
    for kind in spec.source_kinds():
        kind_bit = 0 if kind is SourceKind.TWIN_BEAM else 1
        for point, nb in enumerate(grid):
            d_in = estimators.per_frame_covariance(stats[(point, kind, True)])
            d_out = estimators.per_frame_covariance(stats[(point, kind, False)])
            rng = child_generator(spec.seed,
                                  domain=DOMAIN_GROUPING + kind_bit,
                                  point=point)
            res = estimators.error_probability(d_in, d_out, spec.nimg,
                                               spec.trials, rng)
            src, det, bg = spec.point_params(kind, nb, True)
            rows.append({
                "point": point, "source": _source_label(kind),
                "nb": float(nb), "p_err": res.p_err,
                "p_err_floor": res.floor, "threshold": res.threshold,
                "p_err_theory": theory.perr_gaussian(src, det, bg, spec.nimg,
                                                     spec.npix),
                "nimg": spec.nimg, "trials": spec.trials, "npix": spec.npix,
            })
    columns = ["point", "source", "nb", "p_err", "p_err_floor", "threshold",
               "p_err_theory", "nimg", "trials", "npix"]
    return SweepResult("perr", columns, rows, spec, grid,
                       time.perf_counter() - start)


SWEEPS: dict[str, Callable[[SweepSpec], SweepResult]] = {
    "nrf": run_nrf_sweep,
    "epsilon": run_epsilon_sweep,
    "snr": run_snr_sweep,
    "perr": run_perr_sweep,
}
