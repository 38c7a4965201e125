"""mcmclab: a posterior-integration laboratory.

Estimate evidences, expectations, and credible summaries of unnormalized
posteriors with deterministic grids, importance sampling, single-chain
Metropolis-Hastings, and three ensemble proposals, plus the diagnostics
(autocorrelation time, effective sample size, histogram evidence) needed to
compare them.
"""

from .diagnostics import (
    AutocorrCurve,
    HistogramDensity,
    TauEstimate,
    autocorrelation,
    autocovariance,
    binomial_sample_bound,
    chain_ess,
    ess_from_tau,
    evidence_from_chain,
    histogram_density,
    integrated_autocorr_time,
    kish_ess,
    per_coordinate_tau,
)
from .ensemble import (
    EnsembleState,
    StretchLaw,
    de_step,
    de_trajectory_count,
    ensemble_covariance,
    ensemble_gaussian_step,
    run_ensemble,
    sample_stretch_factor,
    stretch_step,
)
from .errors import (
    ConfigError,
    CoverageError,
    NumericalError,
    ResourceLimitError,
    ZeroVarianceError,
)
from .grid import GridCells, GridSpec, build_grid, grid_evidence, grid_expectation, grid_weights
from .importance import (
    DiagonalGaussianProposal,
    Proposal,
    UniformBoxProposal,
    WeightedSamples,
    draw_iid,
    importance_weights,
    is_evidence,
    is_expectation,
    prior_proposal,
)
from .mh import (
    Chain,
    GaussianRandomWalk,
    MarkovProposal,
    acceptance_fraction,
    drop_burn_in,
    mh_step,
    run_chain,
    transition_probability,
)
from .seeding import derive_rng
from .summaries import (
    DiscretizedPosterior,
    LossSpec,
    bayes_factor,
    expected_loss,
    percentile_interval,
    point_estimate,
    posterior_predictive_noisy_mean,
    threshold_credible_region,
)
from .targets import (
    DiagonalGaussianTarget,
    IsotropicGaussianTarget,
    NoisyMeanModel,
    ShellStats,
    TargetDensity,
    half_volume_length_fraction,
    log_unnorm_density,
    radial_log_mass,
    shell_stats,
)

__version__ = "0.1.0"
