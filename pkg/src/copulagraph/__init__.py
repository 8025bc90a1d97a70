"""Bayesian Gaussian copula graphical models with birth-death MCMC."""

__version__ = "0.1.0"

from .bdmcmc import (ChainConfig, ChainState, ChainTrace, birth_rate, death_rate,
                     edge_probabilities, graph_probabilities, mean_precision,
                     run_chain, run_replicates, select_graph, step)
from .evalkit import (conditional_histogram, f1_score, mse,
                      posterior_predictive_sample, roc_points)
from .graphs import (Edge, Graph, complete_graph, empty_graph, graph_from_edges,
                     make_edge, neighbors, toggle_edge, triangle_count)
from .gwishart import (GWishartParams, log_norm_constant_complete,
                       log_norm_constant_empty, log_norm_ratio_identity,
                       mc_log_norm_constant, sample_gwishart, sample_wishart_full)
from .latent import (MixedDataset, gibbs_update_latent, initialize_latent,
                     rank_consistent, truncation_bounds)
from .numkit import (TruncationInterval, cholesky_spd, log_gamma, sample_truncated_normal,
                     schur_complement)
from .simgen import MarginalRecipe, gen_graph, gen_missing, gen_mixed_data, gen_precision

__all__ = [
    "ChainConfig", "ChainState", "ChainTrace", "Edge", "Graph", "GWishartParams",
    "MarginalRecipe", "MixedDataset", "TruncationInterval", "birth_rate",
    "cholesky_spd", "complete_graph", "conditional_histogram", "death_rate",
    "edge_probabilities", "empty_graph", "f1_score", "gen_graph", "gen_missing",
    "gen_mixed_data", "gen_precision", "gibbs_update_latent", "graph_from_edges",
    "graph_probabilities", "initialize_latent", "log_gamma",
    "log_norm_constant_complete", "log_norm_constant_empty",
    "log_norm_ratio_identity", "make_edge", "mc_log_norm_constant",
    "mean_precision", "mse", "neighbors", "posterior_predictive_sample",
    "rank_consistent", "roc_points", "run_chain", "run_replicates",
    "sample_gwishart", "sample_truncated_normal", "sample_wishart_full",
    "schur_complement", "select_graph", "step", "toggle_edge", "triangle_count",
    "truncation_bounds",
]
