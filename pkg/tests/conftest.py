"""Shared oracles for the sampler tests.

The exhaustive-posterior oracle enumerates every graph on p vertices and
scores it with the Monte Carlo normalizing-constant estimator:
unnormalized mass I_G(b + n, I + S) / I_G(b, I).
"""

import itertools

import numpy as np
from scipy.special import logsumexp

from copulagraph.graphs import Graph, graph_from_edges
from copulagraph.gwishart import GWishartParams, mc_log_norm_constant


def all_graphs(p: int) -> list[Graph]:
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    graphs = []
    for mask in range(2 ** len(pairs)):
        edges = [pairs[t] for t in range(len(pairs)) if mask >> t & 1]
        graphs.append(graph_from_edges(p, edges))
    return graphs


def enumerate_posterior(dstar: np.ndarray, bstar: float, b: float,
                        mc_samples: int, rng: np.random.Generator,
                        ) -> tuple[list[Graph], np.ndarray, np.ndarray]:
    """Exact-enumeration posterior over all graphs (uniform graph prior).

    Returns (graphs, probabilities, per-graph log-mass standard errors).
    """
    p = dstar.shape[0]
    graphs = all_graphs(p)
    log_mass = np.empty(len(graphs))
    ses = np.empty(len(graphs))
    post = GWishartParams(bstar, dstar)
    prior = GWishartParams(b, np.eye(p))
    for k, g in enumerate(graphs):
        est1, se1 = mc_log_norm_constant(g, post, mc_samples, rng)
        est0, se0 = mc_log_norm_constant(g, prior, mc_samples, rng)
        log_mass[k] = est1 - est0
        ses[k] = np.hypot(se1, se0)
    probs = np.exp(log_mass - logsumexp(log_mass))
    return graphs, probs, ses


def gaussian_dataset(K_true: np.ndarray, n: int, rng: np.random.Generator):
    """Continuous data drawn as exact latent rows from N(0, K_true^{-1})."""
    from copulagraph.latent import MixedDataset

    p = K_true.shape[0]
    L = np.linalg.cholesky(np.linalg.inv(K_true))
    values = rng.standard_normal((n, p)) @ L.T
    return MixedDataset(values, ("continuous",) * p)
