"""Structural-dimension and factor-number selection from eigenvalue spectra."""

__version__ = "0.1.0"

from .criteria import (  # noqa: E402
    DimensionEstimate,
    RatioTrace,
    RidgeSchedule,
    bic,
    default_ridges_factor,
    default_ridges_sdr,
    re,
    rre,
    select,
    sequential_test,
    tdrr_factor,
    tdrr_sdr,
)
from .factors import estimate_num_factors, factor_spectrum  # noqa: E402
from .sdr import SdrTarget, dee_sir_matrix, sir_matrix  # noqa: E402
from .spectra import EigenSpectrum, sample_covariance, standardize, symmetric_eigen  # noqa: E402

__all__ = [
    "DimensionEstimate",
    "EigenSpectrum",
    "RatioTrace",
    "RidgeSchedule",
    "SdrTarget",
    "bic",
    "dee_sir_matrix",
    "default_ridges_factor",
    "default_ridges_sdr",
    "estimate_num_factors",
    "factor_spectrum",
    "re",
    "rre",
    "sample_covariance",
    "select",
    "sequential_test",
    "sir_matrix",
    "standardize",
    "symmetric_eigen",
    "tdrr_factor",
    "tdrr_sdr",
]
