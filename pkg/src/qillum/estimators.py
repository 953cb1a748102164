"""Empirical figures of merit computed from detected frames.

Conventions:

* Per-frame covariance is the plain 1/K sample covariance over the pixel
  pairs of one image (no K/(K-1) correction); its expectation therefore
  carries the (1 - 1/K) bias relative to the true cross-covariance.
* Pooled estimators (NRF, Cauchy-Schwarz epsilon) use 1/N moments over
  every pixel of every frame; their uncertainties come from a
  delete-one-frame jackknife.
* All estimators reduce frames to per-frame pixel sums (``FrameStats``),
  so large runs never need frames materialized in memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (DegenerateInputError, InsufficientDataError,
                     InvalidParameterError)


@dataclass(frozen=True)
class EstimateWithError:
    """Point estimate with jackknife standard error and sample count."""

    value: float
    std_error: float
    n_samples: int


class ErrorProbability(NamedTuple):
    """Optimal-threshold empirical error with its resolution floor."""

    threshold: float
    p_err: float
    floor: float


class FrameStats:
    """Per-frame pixel sums sufficient for every pooled estimator.

    Row f holds (sum n1, sum n2, sum n1^2, sum n2^2, sum n1*n2) of frame f.
    Counts stay far below 2**26, so the float64 sums are exact.
    """

    def __init__(self, npix: int, capacity: int):
        if npix < 2:
            raise InvalidParameterError(f"npix must be >= 2, got {npix}")
        self.npix = int(npix)
        self._sums = np.zeros((capacity, 5))
        self.n_frames = 0

    def add(self, n1, n2) -> None:
        f1 = np.asarray(n1, dtype=np.float64)
        f2 = np.asarray(n2, dtype=np.float64)
        row = self._sums[self.n_frames]
        row[0] = f1.sum()
        row[1] = f2.sum()
        row[2] = f1 @ f1
        row[3] = f2 @ f2
        row[4] = f1 @ f2
        self.n_frames += 1

    @property
    def sums(self) -> np.ndarray:
        return self._sums[:self.n_frames]

    @classmethod
    def from_frames(cls, frames) -> "FrameStats":
        frames = list(frames)
        if not frames:
            raise InsufficientDataError("no frames supplied")
        stats = cls(frames[0].n_pix, len(frames))
        for frame in frames:
            if frame.n_pix != stats.npix:
                raise InvalidParameterError("frames must share n_pix")
            stats.add(frame.n1, frame.n2)
        return stats


def _as_stats(frames) -> FrameStats:
    if isinstance(frames, FrameStats):
        return frames
    return FrameStats.from_frames(frames)


def covariance(frame) -> float:
    """Plain sample covariance of one frame: E[N1*N2] - E[N1]*E[N2].

    E[.] averages over the K pixel pairs with weight 1/K, so over many
    frames the mean of this statistic is (1 - 1/K) times the true
    cross-covariance.
    """
    n1 = np.asarray(frame.n1, dtype=np.float64)
    n2 = np.asarray(frame.n2, dtype=np.float64)
    if n1.shape[0] < 2:
        raise InsufficientDataError("covariance needs at least 2 pixels")
    return float(n1 @ n2 / n1.shape[0] - n1.mean() * n2.mean())


def per_frame_covariance(frames) -> np.ndarray:
    """Vector of per-frame covariances (one determination per image)."""
    st = _as_stats(frames)
    k = st.npix
    s = st.sums
    return (s[:, 4] - s[:, 0] * s[:, 1] / k) / k


def _jackknife_se(values: np.ndarray) -> float:
    n = values.shape[0]
    if n < 2 or not np.all(np.isfinite(values)):
        return float("nan")
    return float(np.sqrt((n - 1) / n * np.sum((values - values.mean()) ** 2)))


def nrf(frames) -> EstimateWithError:
    """Noise reduction factor: var(N1 - N2) / mean(N1 + N2), pooled.

    Pooled over every pixel of every frame; standard error by
    delete-one-frame jackknife.  sigma < 1 certifies nonclassical
    correlation.
    """
    st = _as_stats(frames)
    if st.n_frames < 2:
        raise InsufficientDataError("nrf needs at least 2 frames")
    k = st.npix
    n_tot = st.n_frames * k
    s = st.sums
    d = s[:, 0] - s[:, 1]
    dsq = s[:, 2] - 2.0 * s[:, 4] + s[:, 3]
    ssum = s[:, 0] + s[:, 1]
    td, tq, ts = d.sum(), dsq.sum(), ssum.sum()
    if ts == 0.0:
        raise DegenerateInputError("all counts are zero")
    sigma = (tq / n_tot - (td / n_tot) ** 2) / (ts / n_tot)

    n_i = n_tot - k
    mean_s_i = (ts - ssum) / n_i
    with np.errstate(divide="ignore", invalid="ignore"):
        var_d_i = (tq - dsq) / n_i - ((td - d) / n_i) ** 2
        sigma_i = np.where(mean_s_i > 0.0, var_d_i / mean_s_i, np.nan)
    return EstimateWithError(float(sigma), _jackknife_se(sigma_i),
                             st.n_frames)


def cauchy_schwarz_epsilon(frames) -> EstimateWithError:
    """Generalized Cauchy-Schwarz parameter from raw detected moments.

    epsilon = cov(N1, N2) / sqrt((var N1 - mean N1) * (var N2 - mean N2)),
    the normally-ordered correlation ratio; epsilon > 1 certifies
    nonclassicality.  Raises DegenerateInputError when a normally-ordered
    variance estimate is non-positive (undefined, never clamped).
    """
    st = _as_stats(frames)
    if st.n_frames < 2:
        raise InsufficientDataError("epsilon needs at least 2 frames")
    n_tot = st.n_frames * st.npix
    totals = st.sums.sum(axis=0)

    def _eps(t, n):
        m1, m2 = t[0] / n, t[1] / n
        nv1 = t[2] / n - m1 * m1 - m1
        nv2 = t[3] / n - m2 * m2 - m2
        cov = t[4] / n - m1 * m2
        return nv1, nv2, cov

    nv1, nv2, cov = _eps(totals, n_tot)
    if nv1 <= 0.0 or nv2 <= 0.0:
        raise DegenerateInputError(
            "non-positive normally-ordered variance estimate")
    eps = cov / np.sqrt(nv1 * nv2)

    n_i = n_tot - st.npix
    t_i = totals[None, :] - st.sums
    nv1_i, nv2_i, cov_i = _eps(t_i.T, n_i)
    with np.errstate(invalid="ignore"):
        prod = nv1_i * nv2_i
        eps_i = np.where((nv1_i > 0) & (nv2_i > 0),
                         cov_i / np.sqrt(np.abs(prod)), np.nan)
    return EstimateWithError(float(eps), _jackknife_se(eps_i), st.n_frames)


def empirical_snr(deltas_in, deltas_out) -> EstimateWithError:
    """Covariance-contrast SNR from per-image covariance samples.

    f = |mean(in) - mean(out)| / sqrt(var(in) + var(out)) with unbiased
    sample variances over images.  Standard error adds the jackknife
    variances of the two independent sample sets.
    """
    x_in = np.asarray(deltas_in, dtype=np.float64)
    x_out = np.asarray(deltas_out, dtype=np.float64)
    if x_in.size < 2 or x_out.size < 2:
        raise InsufficientDataError("need >= 2 covariance samples per "
                                    "hypothesis")
    m_in, m_out = x_in.mean(), x_out.mean()
    v_in, v_out = x_in.var(ddof=1), x_out.var(ddof=1)
    denom = np.sqrt(v_in + v_out)
    if denom == 0.0:
        raise DegenerateInputError("zero variance in both sample sets")
    value = abs(m_in - m_out) / denom

    def _side_se(x, other_mean, other_var):
        n = x.size
        if n < 3:
            return float("nan")
        s, q = x.sum(), x @ x
        m_i = (s - x) / (n - 1)
        v_i = (q - x * x - (n - 1) * m_i ** 2) / (n - 2)
        f_i = np.abs(m_i - other_mean) / np.sqrt(v_i + other_var)
        return _jackknife_se(f_i)

    se_in = _side_se(x_in, m_out, v_out)
    se_out = _side_se(x_out, m_in, v_in)
    se = float(np.hypot(se_in, se_out))
    return EstimateWithError(float(value), se, x_in.size + x_out.size)


N_THRESHOLDS = 512  # scan resolution; resolution error << statistical error


def error_probability(deltas_in, deltas_out, n_img: int, n_trials: int,
                      rng) -> ErrorProbability:
    """Empirical minimal error of the threshold test on averaged covariances.

    Shuffles each sample set (with ``rng``), forms ``n_trials`` groups of
    ``n_img`` per-image covariances per hypothesis, and scans
    ``N_THRESHOLDS`` thresholds over the pooled range of group means for
    the decision "mean > threshold => target present".  Returns the
    minimizing threshold (ties to the lowest), the minimized equal-prior
    error, and the resolution floor 1/n_trials.
    """
    if n_img < 1 or n_trials < 1:
        raise InvalidParameterError("n_img and n_trials must be >= 1")
    x_in = np.asarray(deltas_in, dtype=np.float64)
    x_out = np.asarray(deltas_out, dtype=np.float64)
    need = n_img * n_trials
    if x_in.size < need or x_out.size < need:
        raise InsufficientDataError(
            f"need {need} covariance samples per hypothesis, got "
            f"{x_in.size} (in) / {x_out.size} (out)")
    means_in = rng.permutation(x_in)[:need].reshape(n_trials, n_img).mean(axis=1)
    means_out = rng.permutation(x_out)[:need].reshape(n_trials, n_img).mean(axis=1)

    lo = min(means_in.min(), means_out.min())
    hi = max(means_in.max(), means_out.max())
    if lo == hi:
        return ErrorProbability(float(lo), 0.5, 1.0 / n_trials)
    thresholds = np.linspace(lo, hi, N_THRESHOLDS)
    sorted_in = np.sort(means_in)
    sorted_out = np.sort(means_out)
    # false alarm: out-mean > t; miss: in-mean <= t
    fa = 1.0 - np.searchsorted(sorted_out, thresholds, side="right") / n_trials
    miss = np.searchsorted(sorted_in, thresholds, side="right") / n_trials
    p = 0.5 * (fa + miss)
    best = int(np.argmin(p))  # argmin takes the first = lowest threshold
    return ErrorProbability(float(thresholds[best]), float(p[best]),
                            1.0 / n_trials)
