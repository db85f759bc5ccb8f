"""Purification of noisy quantum measurements, at desk scale.

Exact statistics and Monte Carlo for repeated noisy qubit/qudit measurements
after cloning, maximum-likelihood estimation against the Cramer-Rao bound,
mutual-information figures of merit, and preamplified photodetection /
homodyne / heterodyne models.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateModelError,
    GridCoverageError,
    NumericsError,
    ResourceLimitError,
    TailMassError,
    ValidationError,
)
from .measurement import (
    CloneCount,
    CountDistribution,
    IsotropicNoise,
    QubitParam,
    QuditNoise,
    conditional_prob,
    conditional_prob_theta,
    count_distribution,
    qudit_conditional_prob,
    sample_counts,
)
from .estimation import (
    EstimationReport,
    ScoringConfig,
    block_variance,
    fisher_information,
    linear_estimator,
    linear_estimator_moments,
    log_likelihood,
    ml_estimate,
    ml_variance_monte_carlo,
    run_estimation,
    score,
    variance_bounds,
)
from .info_theory import (
    MutualInfoResult,
    QuadratureRule,
    binary_entropy,
    binary_mutual_info,
    gauss_legendre_rule,
    ideal_mutual_info,
    majority_vote_mutual_info,
    marginal_count_prob,
    mutual_info_closed_form,
    mutual_info_quadrature,
    qudit_mutual_info,
)
from .cv_optics import (
    CVState,
    Efficiency,
    FockDistribution,
    GainParams,
    HeterodyneResult,
    HomodyneResult,
    PhotoNoiseReport,
    amplify_photon_number,
    bernoulli_convolve,
    coherent_state,
    fock_state,
    heterodyne_pdf,
    homodyne_pdf,
    photo_added_noise,
)
from .harness import ExperimentConfig, reproduce, run
from .tables import ResultTable, read_csv

__all__ = [name for name in dir() if not name.startswith("_")]
