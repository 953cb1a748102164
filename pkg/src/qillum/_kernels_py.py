"""Pure-numpy frame-sampling backend.

Draw protocol (one frame of ``k`` pixel pairs; the compiled kernel in
``_kernels.pyx`` consumes the generator's bit stream in exactly the same
order, so both backends produce identical frames from identical streams):

1. ``t[i] ~ NegBinomial(modes, 1/(1+mu_tot))`` for i = 0..k-1, where
   ``mu_tot`` is ``mu`` for twin beams and ``2*mu`` for the thermal beam
   before the 50:50 split.  numpy samples this as a gamma-mixed Poisson,
   so the cost is O(1) in ``modes``.
2. Split-thermal only: ``a[i] ~ Binomial(t[i], 1/2)`` (the beam-splitter);
   arm 1 carries ``a``, arm 2 carries ``t - a``.  Twin beams: both arms
   carry ``t`` (perfect per-mode photon-number correlation).
3. ``n1[i] ~ Binomial(arm1[i], eta1)``.
4. If the target is present: ``n2[i] ~ Binomial(arm2[i], eta2)``,
   otherwise the probe arm is lost and contributes 0.
5. If ``nb_mean > 0``: add ``Binomial``-independent background
   ``NegBinomial(nb_modes, 1/(1+nb_mean/nb_modes))`` to ``n2``;
   when ``nb_mean == 0`` no background draws are made.
"""

import numpy as np

KIND_TWIN_BEAM = 0
KIND_SPLIT_THERMAL = 1


def fill_frame(rng, kind, mu, modes, eta1, eta2, target,
               nb_mean, nb_modes, n1, n2):
    """Sample one frame into preallocated int64 vectors ``n1``, ``n2``."""
    k = n1.shape[0]
    if kind == KIND_TWIN_BEAM:
        t = rng.negative_binomial(modes, 1.0 / (1.0 + mu), size=k)
        n1[:] = rng.binomial(t, eta1)
        if target:
            n2[:] = rng.binomial(t, eta2)
        else:
            n2[:] = 0
    else:
        t = rng.negative_binomial(modes, 1.0 / (1.0 + 2.0 * mu), size=k)
        a = rng.binomial(t, 0.5)
        n1[:] = rng.binomial(a, eta1)
        if target:
            n2[:] = rng.binomial(t - a, eta2)
        else:
            n2[:] = 0
    if nb_mean > 0.0:
        p_bg = 1.0 / (1.0 + nb_mean / nb_modes)
        n2 += rng.negative_binomial(nb_modes, p_bg, size=k)
