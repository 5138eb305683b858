"""Latent hub network inference from grouped co-occurrence data."""

from .estimate import FitConfig, FitResult, InfeasibleInstanceError, e_step_scores, hard_em_fit
from .evaluate import mislabel_fraction, rmse, run_replicates
from .identifiability import (
    check_asymmetric,
    check_null_component,
    distributions_distinct,
    outcome_distribution,
)
from .model import (
    GroupedData,
    HubParams,
    InvalidInputError,
    NullHubParams,
    Variant,
    complete_data_loglik,
    marginal_loglik,
    mle_given_labels,
    population_profile_loglik,
    profile_loglik,
)
from .simulate import SimDesign, generate_params, sample_data, simulate

__version__ = "0.1.0"
