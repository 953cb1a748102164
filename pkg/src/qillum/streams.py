"""Counter-based random stream derivation.

Every stochastic task owns a Philox stream addressed by
(master seed, domain, grid point, frame index).  The address goes into the
256-bit Philox counter, so any scheduling of tasks across threads or
processes consumes exactly the same random numbers:

    counter = [0, frame, point, domain]

Within a stream fewer than 2**64 blocks are ever drawn, so distinct
addresses can never overlap.  The key is derived from the master seed once
per run.
"""

from __future__ import annotations

import numpy as np

from .params import SourceKind

# Purpose bases for the domain word; frame domains add a (kind, hypothesis)
# offset in the low bits.
DOMAIN_FRAMES = 0
DOMAIN_GROUPING = 16
DOMAIN_SCRATCH = 32


def master_key(seed: int) -> np.ndarray:
    """Two uint64 Philox key words derived from the master seed."""
    return np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)


def frame_domain(kind: SourceKind, target_present: bool) -> int:
    """Domain word for frame synthesis of one (source kind, hypothesis)."""
    kind_bit = 0 if kind is SourceKind.TWIN_BEAM else 1
    return DOMAIN_FRAMES + 2 * kind_bit + (0 if target_present else 1)


def child_generator(seed: int, *, domain: int, point: int = 0,
                    frame: int = 0) -> np.random.Generator:
    """Generator on the Philox stream addressed by (domain, point, frame)."""
    counter = np.array([0, frame, point, domain], dtype=np.uint64)
    bitgen = np.random.Philox(counter=counter, key=master_key(seed))
    return np.random.Generator(bitgen)


class FrameStreams:
    """Per-frame generators for one (seed, domain, point) task.

    Caches the key derivation; building one generator per frame keeps the
    output independent of how frames are batched or scheduled.
    """

    def __init__(self, seed: int, domain: int, point: int = 0):
        self._key = master_key(seed)
        self._domain = domain
        self._point = point

    def generator(self, frame: int) -> np.random.Generator:
        counter = np.array([0, frame, self._point, self._domain],
                           dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter,
                                                    key=self._key))
