"""Detection chain: binomial losses, target reflection, background addition.

A frame is one laser shot: ``n_pix`` statistically independent pixel pairs
pushed through the lossy arms.  The ancilla arm (1) is always detected;
the probe arm (2) reaches the detector only when the target is present,
and the background always adds to arm 2.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import _backend
from .errors import InvalidParameterError
from .params import BackgroundParams, DetectionParams, SourceKind, SourceParams
from .streams import FrameStreams, frame_domain


def detect(n, eta, rng):
    """Binomial loss channel: each photon survives with probability eta."""
    if not np.isfinite(eta) or not 0.0 <= eta <= 1.0:
        raise InvalidParameterError(f"eta must be in [0, 1], got {eta}")
    return rng.binomial(n, eta)


@dataclass(frozen=True)
class FrameMeta:
    """Provenance of a frame: source kind, hypothesis, background, stream id."""

    kind: SourceKind
    target_present: bool
    background: BackgroundParams
    seed_id: Optional[str] = None


@dataclass
class Frame:
    """Detected counts of one image: aligned per-pixel vectors N1, N2."""

    n1: np.ndarray
    n2: np.ndarray
    meta: Optional[FrameMeta] = None

    def __post_init__(self):
        self.n1 = np.asarray(self.n1, dtype=np.int64)
        self.n2 = np.asarray(self.n2, dtype=np.int64)
        if self.n1.ndim != 1 or self.n1.shape != self.n2.shape:
            raise InvalidParameterError("n1 and n2 must be 1-D and aligned")
        if self.n1.shape[0] < 2:
            raise InvalidParameterError("a frame needs at least 2 pixels")
        if (self.n1 < 0).any() or (self.n2 < 0).any():
            raise InvalidParameterError("photon counts must be non-negative")

    @property
    def n_pix(self) -> int:
        return self.n1.shape[0]


def _kind_code(kind: SourceKind) -> int:
    return (_backend.KIND_TWIN_BEAM if kind is SourceKind.TWIN_BEAM
            else _backend.KIND_SPLIT_THERMAL)


def fill_frame_arrays(src: SourceParams, det: DetectionParams,
                      bg: BackgroundParams, rng, n1: np.ndarray,
                      n2: np.ndarray) -> None:
    """Sample one frame into preallocated int64 vectors (hot path)."""
    _backend.fill_frame(rng, _kind_code(src.kind), src.mu, float(src.modes),
                        det.eta1, det.eta2, det.target_present,
                        bg.mean_nb, float(bg.modes), n1, n2)


def synthesize_frame(src: SourceParams, det: DetectionParams,
                     bg: BackgroundParams, n_pix: int, rng,
                     seed_id: Optional[str] = None) -> Frame:
    """Sample one frame of ``n_pix`` independent pixel pairs."""
    if n_pix < 2:
        raise InvalidParameterError(f"n_pix must be >= 2, got {n_pix}")
    n1 = np.empty(n_pix, dtype=np.int64)
    n2 = np.empty(n_pix, dtype=np.int64)
    fill_frame_arrays(src, det, bg, rng, n1, n2)
    meta = FrameMeta(src.kind, det.target_present, bg, seed_id)
    return Frame(n1, n2, meta)


def synthesize_frames(src: SourceParams, det: DetectionParams,
                      bg: BackgroundParams, n_pix: int, n_frames: int,
                      seed: int, point: int = 0) -> list[Frame]:
    """Sample ``n_frames`` frames on counter-derived per-frame streams.

    Frame ``f`` of grid point ``point`` always sees the same stream for a
    given seed, independent of batching or scheduling.
    """
    if n_frames < 1:
        raise InvalidParameterError(f"n_frames must be >= 1, got {n_frames}")
    streams = FrameStreams(seed, frame_domain(src.kind, det.target_present),
                           point)
    frames = []
    for f in range(n_frames):
        frame = synthesize_frame(src, det, bg, n_pix, streams.generator(f),
                                 seed_id=f"{seed}/{point}/{f}")
        frames.append(frame)
    return frames


def dump_frame(frame: Frame, path) -> None:
    """Write a frame as CSV (pixel_index, n1, n2) plus a JSON sidecar.

    The sidecar ``<path stem>.json`` records the frame parameters for
    external analysis.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pixel_index", "n1", "n2"])
        for i in range(frame.n_pix):
            writer.writerow([i, int(frame.n1[i]), int(frame.n2[i])])
    sidecar = {"n_pix": frame.n_pix}
    if frame.meta is not None:
        sidecar.update({
            "source_kind": frame.meta.kind.value,
            "target_present": frame.meta.target_present,
            "background": asdict(frame.meta.background),
            "seed_id": frame.meta.seed_id,
        })
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
