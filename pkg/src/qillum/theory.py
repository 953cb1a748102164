"""Closed-form predictions for every estimator.

The engine works in joint factorial cumulants of the detected pair
(N1, N2), truncated at order (2, 2):

* one source mode contributes the factorial-cumulant generating function
  g(u1, u2) = -log(1 - theta(u1, u2)), where theta encodes the exact
  probability generating function of the thinned mode (binomial loss
  rescales factorial-moment variables, so losses enter theta linearly);
* factorial cumulants add over the M independent modes and over the
  statistically independent background on arm 2;
* ordinary joint cumulants follow by the Stirling transform, and the
  covariance-estimator noise <d^2(dN1 dN2)> = k22 + k20*k02 + k11^2.

Everything downstream (moments, NRF, epsilon, SNR, Gaussian error
probability) is evaluated from this one exact engine; an independent
enumeration oracle over the truncated photon-number lattice validates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps
from scipy.special import ndtr  # Gaussian CDF, vectorized and precise

from .errors import DegenerateInputError, InvalidParameterError
from .params import BackgroundParams, DetectionParams, SourceKind, SourceParams

# Stirling-2 transform from factorial to ordinary cumulants, orders 0..2.
_STIRLING = np.array([[1.0, 0.0, 0.0],
                      [0.0, 1.0, 0.0],
                      [0.0, 1.0, 1.0]])


@dataclass(frozen=True)
class MomentSet:
    """First and second detected moments plus covariance-estimator noise.

    ``cov_noise`` is the per-realization noise <delta^2(dN1 dN2)>; divide
    by the pixel count for the variance of a single-image covariance.
    """

    mean1: float
    mean2: float
    var1: float
    var2: float
    cov: float
    cov_noise: float


def _mul22(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two bivariate series truncated at degree (2, 2)."""
    out = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            if a[i, j] != 0.0:
                out[i:, j:] += a[i, j] * b[:3 - i, :3 - j]
    return out


def _log_series(theta: np.ndarray) -> np.ndarray:
    """-log(1 - theta) truncated at degree (2, 2); theta(0, 0) must be 0."""
    g = theta.copy()
    power = theta
    for p in (2, 3, 4):  # theta^p has minimum total degree p; (2,2) needs p<=4
        power = _mul22(power, theta)
        g += power / p
    return g


def _mode_theta(kind: SourceKind, mu: float, eta1: float, eta2: float,
                target: bool) -> np.ndarray:
    """theta of one source mode's detected-pair generating function."""
    theta = np.zeros((3, 3))
    theta[1, 0] = eta1 * mu
    if target:
        theta[0, 1] = eta2 * mu
        if kind is SourceKind.TWIN_BEAM:
            theta[1, 1] = eta1 * eta2 * mu
    return theta


def joint_cumulants(src: SourceParams, det: DetectionParams,
                    bg: BackgroundParams) -> np.ndarray:
    """Ordinary joint cumulants k[i, j] of (N1, N2) for i, j <= 2."""
    factorials = np.array([1.0, 1.0, 2.0])
    g = _log_series(_mode_theta(src.kind, src.mu, det.eta1, det.eta2,
                                det.target_present))
    kf = src.modes * g * np.outer(factorials, factorials)
    # Independent multithermal background adds to the pure-N2 cumulants.
    mu_b = bg.mean_per_mode
    kf[0, 1] += bg.modes * mu_b
    kf[0, 2] += bg.modes * mu_b ** 2
    return _STIRLING @ kf @ _STIRLING.T


def covariance_product_noise(src: SourceParams, det: DetectionParams,
                             bg: BackgroundParams) -> float:
    """Exact fourth-order noise <delta^2(dN1 dN2)> of the detected pair."""
    k = joint_cumulants(src, det, bg)
    return float(k[2, 2] + k[2, 0] * k[0, 2] + k[1, 1] ** 2)


def detected_moments(src: SourceParams, det: DetectionParams,
                     bg: BackgroundParams) -> MomentSet:
    """Means, variances, covariance and product noise of (N1, N2)."""
    k = joint_cumulants(src, det, bg)
    return MomentSet(mean1=float(k[1, 0]), mean2=float(k[0, 1]),
                     var1=float(k[2, 0]), var2=float(k[0, 2]),
                     cov=float(k[1, 1]),
                     cov_noise=float(k[2, 2] + k[2, 0] * k[0, 2]
                                     + k[1, 1] ** 2))


def nrf_theory(src: SourceParams, det: DetectionParams,
               bg: BackgroundParams) -> float:
    """Noise reduction factor var(N1 - N2) / mean(N1 + N2)."""
    ms = detected_moments(src, det, bg)
    denom = ms.mean1 + ms.mean2
    if denom == 0.0:
        raise DegenerateInputError("zero total mean photon number")
    return (ms.var1 + ms.var2 - 2.0 * ms.cov) / denom


def nrf_zero_background(eta1: float, eta2: float, mu: float) -> float:
    """Closed-form twin-beam NRF with the thermal bath off.

    sigma0 = 1 - eta_bar + (eta1 - eta2)^2 (1/2 + mu) / (2 eta_bar),
    eta_bar = (eta1 + eta2) / 2.  Must agree with the moment-based
    nrf_theory to machine precision.
    """
    eta_bar = 0.5 * (eta1 + eta2)
    if eta_bar == 0.0:
        raise DegenerateInputError("both efficiencies are zero")
    return 1.0 - eta_bar + (eta1 - eta2) ** 2 * (0.5 + mu) / (2.0 * eta_bar)


def epsilon_theory(src: SourceParams, det: DetectionParams,
                   bg: BackgroundParams) -> float:
    """Generalized Cauchy-Schwarz parameter from normally-ordered moments.

    With no background this is (1 + mu)/mu for twin beams (independent of
    the efficiencies) and exactly 1 for the split-thermal pair.
    """
    ms = detected_moments(src, det, bg)
    nv1 = ms.var1 - ms.mean1
    nv2 = ms.var2 - ms.mean2
    if nv1 <= 0.0 or nv2 <= 0.0:
        raise DegenerateInputError("non-positive normally-ordered variance")
    return ms.cov / math.sqrt(nv1 * nv2)


def covariance_noise_exact(src: SourceParams, det: DetectionParams,
                           bg: BackgroundParams, k: int) -> float:
    """Variance of the single-image covariance over k pixel pairs.

    Returns <delta^2 Delta> ~= <delta^2(dN1 dN2)> / k (exact fourth-order
    numerator, leading order in 1/k).
    """
    if k < 2:
        raise InvalidParameterError(f"k must be >= 2, got {k}")
    return covariance_product_noise(src, det, bg) / k


def snr_theory(src: SourceParams, det: DetectionParams, bg: BackgroundParams,
               k: int) -> float:
    """Exact covariance-contrast SNR, normalized per sqrt(k).

    Evaluates |<Delta_in> - <Delta_out>| / sqrt(<d^2 Delta_in> +
    <d^2 Delta_out>) with the exact fourth-order noise terms and divides
    by sqrt(k), the convention used to report sweep results; in a
    dominant background it approaches ``snr_dominant_bg``.
    """
    if k < 2:
        raise InvalidParameterError(f"k must be >= 2, got {k}")
    ms_in = detected_moments(src, det.with_target(True), bg)
    noise_in = covariance_product_noise(src, det.with_target(True), bg)
    noise_out = covariance_product_noise(src, det.with_target(False), bg)
    denom = math.sqrt(noise_in + noise_out)
    if denom == 0.0:
        raise DegenerateInputError("zero covariance noise in both hypotheses")
    return (1.0 - 1.0 / k) * abs(ms_in.cov) / denom


def snr_dominant_bg(src: SourceParams, det: DetectionParams,
                    bg: BackgroundParams) -> float:
    """Dominant-background SNR limit cov / sqrt(2 var(N1) var(N_b))."""
    ms = detected_moments(src, det.with_target(True), bg)
    denom = math.sqrt(2.0 * ms.var1 * bg.variance)
    if denom == 0.0:
        raise DegenerateInputError("dominant-background limit needs "
                                   "var(N1) > 0 and background noise > 0")
    return ms.cov / denom


def enhancement_r(src_qi: SourceParams, src_ci: SourceParams,
                  det: DetectionParams, bg: BackgroundParams) -> float:
    """Quantum-over-classical SNR enhancement at matched local resources.

    Equals epsilon_QI / epsilon_CI evaluated on the bare sources
    (no background), i.e. (1 + mu)/mu.
    """
    if src_qi.kind is not SourceKind.TWIN_BEAM:
        raise InvalidParameterError("src_qi must be a twin-beam source")
    if src_ci.kind is not SourceKind.SPLIT_THERMAL:
        raise InvalidParameterError("src_ci must be a split-thermal source")
    if src_qi.mu != src_ci.mu or src_qi.modes != src_ci.modes:
        raise InvalidParameterError("QI and CI sources must use the same "
                                    "local resources (mu, modes)")
    bg0 = BackgroundParams(0.0, bg.modes)
    return (epsilon_theory(src_qi, det, bg0)
            / epsilon_theory(src_ci, det, bg0))


def gaussian_threshold_error(m0: float, v0: float, m1: float,
                             v1: float) -> tuple[float, float]:
    """Minimal equal-prior error of the test "x > t => hypothesis 1".

    Both hypotheses are normal (point masses allowed as zero-variance
    limits).  Returns (optimal threshold, error probability); the error
    never exceeds 0.5 because +-infinity thresholds are always available.
    """
    for v in (v0, v1):
        if not math.isfinite(v) or v < 0.0:
            raise DegenerateInputError(f"invalid variance {v}")
    if v0 == 0.0 and v1 == 0.0:
        if m1 > m0:
            return 0.5 * (m0 + m1), 0.0
        return math.inf, 0.5
    if v0 == 0.0:
        p = 0.5 * ndtr((m0 - m1) / math.sqrt(v1))
        return m0, min(float(p), 0.5)
    if v1 == 0.0:
        p = 0.5 * (1.0 - ndtr((m1 - m0) / math.sqrt(v0)))
        return m1, min(float(p), 0.5)

    s0, s1 = math.sqrt(v0), math.sqrt(v1)

    def perr(t):
        return 0.5 * ((1.0 - ndtr((t - m0) / s0)) + ndtr((t - m1) / s1))

    # Candidate thresholds: crossings of the two densities.
    a = 0.5 * (1.0 / v1 - 1.0 / v0)
    b = m0 / v0 - m1 / v1
    c = 0.5 * (m1 ** 2 / v1 - m0 ** 2 / v0) + 0.5 * math.log(v1 / v0)
    if abs(a) < 1e-300:
        candidates = [] if b == 0.0 else [-c / b]
    else:
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            candidates = []
        else:
            r = math.sqrt(disc)
            candidates = sorted([(-b - r) / (2 * a), (-b + r) / (2 * a)])
    best_t, best_p = math.inf, 0.5
    for t in candidates:
        p = float(perr(t))
        if p < best_p - 1e-15 or (abs(p - best_p) <= 1e-15 and t < best_t):
            best_t, best_p = t, p
    return best_t, best_p


def perr_gaussian(src: SourceParams, det: DetectionParams,
                  bg: BackgroundParams, n_img: int, k: int) -> float:
    """Gaussian-approximation error probability of target detection.

    The per-hypothesis test statistic (covariance averaged over ``n_img``
    images of ``k`` pixels) is modeled as normal with mean
    (1 - 1/k) * cov and variance <delta^2 Delta> / n_img; returns the
    minimal equal-prior error at the optimal threshold.
    """
    if n_img < 1:
        raise InvalidParameterError(f"n_img must be >= 1, got {n_img}")
    bias = 1.0 - 1.0 / k if k >= 2 else 0.0
    if k < 2:
        raise InvalidParameterError(f"k must be >= 2, got {k}")
    ms_in = detected_moments(src, det.with_target(True), bg)
    ms_out = detected_moments(src, det.with_target(False), bg)
    v_in = covariance_noise_exact(src, det.with_target(True), bg, k) / n_img
    v_out = covariance_noise_exact(src, det.with_target(False), bg, k) / n_img
    _, p = gaussian_threshold_error(bias * ms_out.cov, v_out,
                                    bias * ms_in.cov, v_in)
    return p


def covariance_product_noise_enumerated(src: SourceParams,
                                        det: DetectionParams,
                                        bg: BackgroundParams | None = None,
                                        tail: float = 1e-12) -> float:
    """Brute-force <delta^2(dN1 dN2)> from the explicit joint law.

    Enumerates the photon-number lattice: pre-detection totals are
    negative-binomial, detection is binomial (twin beams) or multinomial
    marking (split thermal), and an optional background convolves onto
    arm 2.  The lattice is truncated adaptively where the remaining tail
    mass drops below ``tail`` (then padded), which is far below the
    1e-9 relative accuracy this oracle is used at.  Only practical for
    small mode counts and means.
    """
    mu_tot = src.mu if src.kind is SourceKind.TWIN_BEAM else 2.0 * src.mu
    if mu_tot == 0.0:
        joint = np.ones((1, 1))
    else:
        p = 1.0 / (1.0 + mu_tot)
        t_max = int(sps.nbinom.isf(tail, src.modes, p)) * 2 + 20
        t = np.arange(t_max + 1)
        w = sps.nbinom.pmf(t, src.modes, p)
        eta2 = det.eta2 if det.target_present else 0.0
        n = np.arange(t_max + 1)
        if src.kind is SourceKind.TWIN_BEAM:
            # Given the total t, the two thinnings are independent binomials.
            pmf1 = sps.binom.pmf(n[None, :], t[:, None], det.eta1)
            pmf2 = sps.binom.pmf(n[None, :], t[:, None], eta2)
            joint = np.einsum("t,tn,tm->nm", w, pmf1, pmf2)
        else:
            # Multinomial marking: arm 1 with prob eta1/2, arm 2 with eta2/2.
            q1, q2 = 0.5 * det.eta1, 0.5 * eta2
            pmf1 = sps.binom.pmf(n[None, :], t[:, None], q1)
            cond = q2 / (1.0 - q1) if q1 < 1.0 else 0.0
            pmf2 = sps.binom.pmf(n[None, :], t[:, None], cond)
            joint = np.zeros((t_max + 1, t_max + 1))
            for ti in range(t_max + 1):
                rest = ti - n[:ti + 1]
                joint[:ti + 1] += w[ti] * pmf1[ti, :ti + 1, None] \
                    * pmf2[rest, :]
    if bg is not None and bg.mean_nb > 0.0:
        p_b = 1.0 / (1.0 + bg.mean_per_mode)
        b_max = int(sps.nbinom.isf(tail, bg.modes, p_b)) * 2 + 20
        pmf_b = sps.nbinom.pmf(np.arange(b_max + 1), bg.modes, p_b)
        padded = np.zeros((joint.shape[0], joint.shape[1] + b_max))
        for b, pb in enumerate(pmf_b):
            if pb > 0.0:
                padded[:, b:b + joint.shape[1]] += pb * joint
        joint = padded

    i1 = np.arange(joint.shape[0], dtype=np.float64)
    i2 = np.arange(joint.shape[1], dtype=np.float64)
    p1 = joint.sum(axis=1)
    p2 = joint.sum(axis=0)
    d1 = i1 - p1 @ i1
    d2 = i2 - p2 @ i2
    cov = d1 @ joint @ d2
    m22 = (d1 ** 2) @ joint @ (d2 ** 2)
    return float(m22 - cov ** 2)
