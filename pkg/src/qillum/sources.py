"""Pre-detection photon-number samplers.

Single thermal modes follow the Bose-Einstein law; a pixel collects the
sum over ``modes`` independent modes, which is negative-binomial and is
drawn through numpy's gamma-mixed-Poisson construction at O(1) cost in
the mode count.  An explicit per-mode loop is kept behind ``per_mode=True``
for cross-validation only.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError
from .params import BackgroundParams, SourceKind, SourceParams, _as_mode_count


class ModePairSample(NamedTuple):
    """Aggregated pre-detection photon numbers of the two arms."""

    n1: object
    n2: object


def sample_thermal(mu, rng, size=None):
    """Draw from the single-mode Bose-Einstein law.

    P(n) = mu^n / (1 + mu)^(n+1); mean ``mu``, variance ``mu * (1 + mu)``.
    """
    if not np.isfinite(mu) or mu < 0:
        raise InvalidParameterError(f"mu must be finite and >= 0, got {mu}")
    return rng.geometric(1.0 / (1.0 + mu), size=size) - 1


def sample_mode_sum(mu, m, rng, size=None, per_mode=False):
    """Sum of ``m`` independent Bose-Einstein(mu) modes.

    Negative-binomial with ``m`` as the shape parameter; mean ``m * mu``,
    variance ``m * mu * (1 + mu)``.  The default aggregated draw costs
    O(1) in ``m``; ``per_mode=True`` loops over modes (validation path).
    """
    if not np.isfinite(mu) or mu < 0:
        raise InvalidParameterError(f"mu must be finite and >= 0, got {mu}")
    m = _as_mode_count(m, "m")
    if per_mode:
        shape = m if size is None else (size, m)
        draws = rng.geometric(1.0 / (1.0 + mu), size=shape) - 1
        return draws.sum(axis=-1)
    return rng.negative_binomial(m, 1.0 / (1.0 + mu), size=size)


def sample_pair_pre_detection(src: SourceParams, rng, size=None) -> ModePairSample:
    """Draw the correlated pre-detection pair, aggregated over modes.

    Twin beams have identical arms (per-mode photon-number identity
    survives the mode sum).  The split-thermal source draws the parent
    beam at 2*mu per mode and splits it 50:50, so both kinds give each
    arm mean ``modes * mu`` and variance ``modes * mu * (1 + mu)``.
    """
    if src.kind is SourceKind.TWIN_BEAM:
        n = sample_mode_sum(src.mu, src.modes, rng, size=size)
        n2 = n if size is None else n.copy()
        return ModePairSample(n, n2)
    total = sample_mode_sum(2.0 * src.mu, src.modes, rng, size=size)
    n1 = rng.binomial(total, 0.5)
    return ModePairSample(n1, total - n1)


def sample_background(bg: BackgroundParams, rng, size=None):
    """Detected multithermal background counts.

    Mean ``bg.mean_nb``, variance ``mean_nb * (1 + mean_nb / modes)``.
    A zero-mean background returns zeros without consuming the stream,
    matching the frame-synthesis draw protocol.
    """
    if bg.mean_nb == 0.0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    return sample_mode_sum(bg.mean_per_mode, bg.modes, rng, size=size)
