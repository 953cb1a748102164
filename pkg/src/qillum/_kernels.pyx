#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled frame-sampling backend.

Mirrors the draw protocol documented in ``qillum._kernels_py`` call for
call: both backends invoke numpy's C distribution functions in the same
order on the same bit generator, so frames are identical across backends.
The loops run without the GIL, so frame synthesis scales across threads.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.string cimport memset
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (binomial_t, random_binomial,
                                           random_negative_binomial)

cnp.import_array()

cdef int _TWIN_BEAM = 0
cdef int _SPLIT_THERMAL = 1

KIND_TWIN_BEAM = _TWIN_BEAM
KIND_SPLIT_THERMAL = _SPLIT_THERMAL


def fill_frame(object rng, int kind, double mu, double modes,
               double eta1, double eta2, bint target,
               double nb_mean, double nb_modes,
               cnp.int64_t[::1] n1, cnp.int64_t[::1] n2):
    """Sample one frame into preallocated int64 vectors ``n1``, ``n2``."""
    cdef object bitgen = rng.bit_generator
    cdef bitgen_t *state = <bitgen_t *> PyCapsule_GetPointer(
        bitgen.capsule, "BitGenerator")
    cdef Py_ssize_t k = n1.shape[0]
    cdef Py_ssize_t i
    cdef double mu_tot = 2.0 * mu if kind == KIND_SPLIT_THERMAL else mu
    cdef double p_src = 1.0 / (1.0 + mu_tot)
    cdef bint draw_bg = nb_mean > 0.0
    cdef double p_bg = 1.0 / (1.0 + nb_mean / nb_modes) if draw_bg else 0.0
    cdef binomial_t binom
    cdef cnp.int64_t[::1] t = np.empty(k, dtype=np.int64)
    memset(&binom, 0, sizeof(binom))

    with bitgen.lock, nogil:
        for i in range(k):
            t[i] = random_negative_binomial(state, modes, p_src)
        if kind == KIND_SPLIT_THERMAL:
            # 50:50 split first; arm 1 takes the binomial half, arm 2 the rest.
            for i in range(k):
                n1[i] = random_binomial(state, 0.5, t[i], &binom)
            for i in range(k):
                n2[i] = t[i] - n1[i]
            for i in range(k):
                n1[i] = random_binomial(state, eta1, n1[i], &binom)
            if target:
                for i in range(k):
                    n2[i] = random_binomial(state, eta2, n2[i], &binom)
            else:
                for i in range(k):
                    n2[i] = 0
        else:
            for i in range(k):
                n1[i] = random_binomial(state, eta1, t[i], &binom)
            if target:
                for i in range(k):
                    n2[i] = random_binomial(state, eta2, t[i], &binom)
            else:
                for i in range(k):
                    n2[i] = 0
        if draw_bg:
            for i in range(k):
                n2[i] += random_negative_binomial(state, nb_modes, p_bg)
