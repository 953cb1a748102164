"""Monte Carlo simulator and analytic oracle for photon-counting
quantum illumination.

Twin-beam or split-thermal photon-number frames pass through a lossy
detection chain with a half-reflective target and a multithermal
background; estimators (covariance, NRF, Cauchy-Schwarz epsilon, SNR,
error probability) are verified against closed-form theory.
"""

from ._version import __version__
from ._backend import BACKEND
from .errors import (DegenerateInputError, InsufficientDataError,
                     InvalidParameterError, QillumError)
from .params import (NO_BACKGROUND, BackgroundParams, DetectionParams,
                     SourceKind, SourceParams)
from .sources import (ModePairSample, sample_background, sample_mode_sum,
                      sample_pair_pre_detection, sample_thermal)
from .detection import (Frame, FrameMeta, detect, dump_frame,
                        synthesize_frame, synthesize_frames)
from .estimators import (EstimateWithError, ErrorProbability, FrameStats,
                         cauchy_schwarz_epsilon, covariance, empirical_snr,
                         error_probability, nrf, per_frame_covariance)
from .theory import (MomentSet, covariance_noise_exact,
                     covariance_product_noise,
                     covariance_product_noise_enumerated, detected_moments,
                     enhancement_r, epsilon_theory, nrf_theory,
                     nrf_zero_background, perr_gaussian, snr_dominant_bg,
                     snr_theory)
from .harness import (SWEEPS, SweepResult, SweepSpec, run_epsilon_sweep,
                      run_nrf_sweep, run_perr_sweep, run_snr_sweep)
from .validate import run_validate

__all__ = [
    "__version__", "BACKEND",
    "QillumError", "InvalidParameterError", "InsufficientDataError",
    "DegenerateInputError",
    "SourceKind", "SourceParams", "DetectionParams", "BackgroundParams",
    "NO_BACKGROUND",
    "ModePairSample", "sample_thermal", "sample_mode_sum",
    "sample_pair_pre_detection", "sample_background",
    "Frame", "FrameMeta", "detect", "synthesize_frame", "synthesize_frames",
    "dump_frame",
    "EstimateWithError", "ErrorProbability", "FrameStats", "covariance",
    "per_frame_covariance", "nrf", "cauchy_schwarz_epsilon", "empirical_snr",
    "error_probability",
    "MomentSet", "detected_moments", "nrf_theory", "nrf_zero_background",
    "epsilon_theory", "covariance_noise_exact", "covariance_product_noise",
    "covariance_product_noise_enumerated", "snr_theory", "snr_dominant_bg",
    "enhancement_r", "perr_gaussian",
    "SweepSpec", "SweepResult", "SWEEPS", "run_nrf_sweep",
    "run_epsilon_sweep", "run_snr_sweep", "run_perr_sweep", "run_validate",
]
