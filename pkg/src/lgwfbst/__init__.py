"""Lognormal, gamma and Weibull model discrimination for right-censored
survival data.

A shared-moment three-component mixture is sampled by adaptive Metropolis and
the mixture weights are tested with FBST e-values.
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    CalibrationError,
    DataError,
    DomainError,
    InitializationError,
    OptimizerError,
    PexeFitError,
    SolverError,
)
from .survdist import Family, SharedMoments  # noqa: E402
from .mixture import LGW, Dataset, MixtureParams  # noqa: E402
from .amsampler import PosteriorDraws, SamplerConfig, run_chain  # noqa: E402
from .fbst import EvidenceReport, SharpHypothesis, e_value, test_hypotheses  # noqa: E402
from .simcens import StudyConfig, calibrate_lambda, generate_sample, run_study  # noqa: E402
from .pexe import fit_pexe, survival_at  # noqa: E402

__all__ = [
    "CalibrationError",
    "DataError",
    "DomainError",
    "InitializationError",
    "OptimizerError",
    "PexeFitError",
    "SolverError",
    "Family",
    "SharedMoments",
    "LGW",
    "Dataset",
    "MixtureParams",
    "PosteriorDraws",
    "SamplerConfig",
    "run_chain",
    "EvidenceReport",
    "SharpHypothesis",
    "e_value",
    "test_hypotheses",
    "StudyConfig",
    "calibrate_lambda",
    "generate_sample",
    "run_study",
    "fit_pexe",
    "survival_at",
]
