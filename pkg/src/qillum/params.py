"""Parameter containers for the source pair, detection chain and background.

Defaults reproduce the reference operating point of the simulated
experiment: mu = 0.075 photons per mode, M = 9e4 modes per pixel,
eta1 = 2*eta2 = 0.4 (half-reflective target folded into the probe arm).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError


class SourceKind(enum.Enum):
    """Which correlated source pair illuminates the pixel pair."""

    TWIN_BEAM = "twb"
    SPLIT_THERMAL = "thermal"


def _as_mode_count(value, name: str) -> int:
    """Coerce a mode count to int, rejecting non-integral or < 1 values."""
    if isinstance(value, bool):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, float):
        if not value.is_integer():
            raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
        value = int(value)
    if not isinstance(value, int):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise InvalidParameterError(f"{name} must be >= 1, got {value}")
    return value


def _check_nonneg(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidParameterError(f"{name} must be finite and >= 0, got {value}")
    return value


@dataclass(frozen=True)
class SourceParams:
    """Correlated source pair: per-mode mean, mode count and kind.

    For ``SPLIT_THERMAL`` the value of ``mu`` is the per-arm mean per mode;
    the thermal beam before the 50:50 split carries 2*mu per mode, so both
    source kinds deliver the same local (single-arm) statistics.
    """

    mu: float = 0.075
    modes: int = 90_000
    kind: SourceKind = SourceKind.TWIN_BEAM

    def __post_init__(self):
        object.__setattr__(self, "mu", _check_nonneg(self.mu, "mu"))
        object.__setattr__(self, "modes", _as_mode_count(self.modes, "modes"))
        if not isinstance(self.kind, SourceKind):
            object.__setattr__(self, "kind", SourceKind(self.kind))


@dataclass(frozen=True)
class DetectionParams:
    """Arm efficiencies and target presence.

    ``eta2`` is the probe-arm efficiency including the target reflectivity;
    the default half-reflective target gives eta1 = 2*eta2.
    """

    eta1: float = 0.4
    eta2: float = 0.2
    target_present: bool = True

    def __post_init__(self):
        for name in ("eta1", "eta2"):
            eta = float(getattr(self, name))
            if not math.isfinite(eta) or not 0.0 <= eta <= 1.0:
                raise InvalidParameterError(f"{name} must be in [0, 1], got {eta}")
            object.__setattr__(self, name, eta)
        object.__setattr__(self, "target_present", bool(self.target_present))

    def with_target(self, present: bool) -> "DetectionParams":
        return DetectionParams(self.eta1, self.eta2, present)


@dataclass(frozen=True)
class BackgroundParams:
    """Multithermal background reaching the probe-arm detector.

    ``mean_nb`` is the total detected background mean per pixel (detector
    efficiency already folded in); ``modes`` is the background mode count,
    which sets the excess noise: var = mean_nb * (1 + mean_nb / modes).
    """

    mean_nb: float = 0.0
    modes: int = 57

    def __post_init__(self):
        object.__setattr__(self, "mean_nb", _check_nonneg(self.mean_nb, "mean_nb"))
        object.__setattr__(self, "modes", _as_mode_count(self.modes, "modes"))

    @property
    def mean_per_mode(self) -> float:
        return self.mean_nb / self.modes

    @property
    def variance(self) -> float:
        return self.mean_nb * (1.0 + self.mean_nb / self.modes)

    def with_mean(self, mean_nb: float) -> "BackgroundParams":
        return BackgroundParams(mean_nb, self.modes)


NO_BACKGROUND = BackgroundParams(0.0, 1)
