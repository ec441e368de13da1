"""Simulation and Bayesian inference for two-group coevolving latent space networks."""

__version__ = "0.1.0"

from .alignment import center, procrustes_align
from .construct import (
    BinarizeResult,
    InteractionCounts,
    ThresholdPolicy,
    binarize,
    restrict_to_persistent_nodes,
)
from .evaluation import (
    density_report,
    in_sample_auc,
    latent_distance_report,
    posterior_summary,
)
from .gmds import gmds_initialize
from .mcmc import (
    Checkpoint,
    McmcConfig,
    PosteriorSamples,
    PriorSpec,
    load_checkpoint,
    run_mcmc,
    save_checkpoint,
)
from .model import (
    AdjacencySeries,
    GroupLabels,
    LatentState,
    ModelParams,
    attractor_between,
    attractor_within,
    edge_logit,
    observation_loglik,
    similarity,
    transition_logdensity,
    transition_mean,
)
from .selection import (
    ChangePointFit,
    compute_dic,
    fit_changepoint,
    select_changepoint,
)
from .simulate import SimConfig, sample_edges, simulate, simulate_changepoint

__all__ = [
    "AdjacencySeries",
    "BinarizeResult",
    "ChangePointFit",
    "Checkpoint",
    "GroupLabels",
    "InteractionCounts",
    "LatentState",
    "McmcConfig",
    "ModelParams",
    "PosteriorSamples",
    "PriorSpec",
    "SimConfig",
    "ThresholdPolicy",
    "attractor_between",
    "attractor_within",
    "binarize",
    "center",
    "compute_dic",
    "density_report",
    "edge_logit",
    "fit_changepoint",
    "gmds_initialize",
    "in_sample_auc",
    "latent_distance_report",
    "load_checkpoint",
    "observation_loglik",
    "posterior_summary",
    "procrustes_align",
    "restrict_to_persistent_nodes",
    "run_mcmc",
    "sample_edges",
    "save_checkpoint",
    "select_changepoint",
    "similarity",
    "simulate",
    "simulate_changepoint",
    "transition_logdensity",
    "transition_mean",
    "__version__",
]
