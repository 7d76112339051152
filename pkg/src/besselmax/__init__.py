"""Distribution of the maximal height of non-intersecting Bessel paths below a wall."""

__version__ = "0.1.0"

from .errors import BesselMaxError, ConsistencyError, ConvergenceError, DomainError
from .linalg_xp import PrecisionConfig, XMatrix, det_signed_log, det_sum_identity_check, vandermonde
from .maxdist import (ModelParams, MomentTable, ProbabilityResult, TruncationPolicy, moments_mop,
                      moments_single, prob_brownian_excursion, prob_brownian_reflect,
                      prob_pitman_yor, prob_thm1, prob_thm2_hankel, probability)
from .specfun import (BesselZeroTable, bessel_i, bessel_j, bessel_j_deriv, bessel_zeros,
                      gamma_fn)

__all__ = [
    "BesselMaxError", "ConsistencyError", "ConvergenceError", "DomainError",
    "PrecisionConfig", "XMatrix", "det_signed_log", "det_sum_identity_check", "vandermonde",
    "ModelParams", "MomentTable", "ProbabilityResult", "TruncationPolicy", "moments_mop",
    "moments_single", "prob_brownian_excursion", "prob_brownian_reflect", "prob_pitman_yor",
    "prob_thm1", "prob_thm2_hankel", "probability",
    "BesselZeroTable", "bessel_i", "bessel_j", "bessel_j_deriv", "bessel_zeros", "gamma_fn",
]
