"""Synthetic graphical models and mixed-marginal data.

Graph families: random (independent edges with probability 2/(p-1)), cluster
(near-equal blocks, each a random graph, no inter-block edges), scale_free
(Barabasi-Albert preferential attachment, one edge per arrival). Precision
matrices come from W_G(3, I); observed columns are monotone transforms of a
latent N(0, K^{-1}) sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import ndtr
from scipy.stats import poisson

from .graphs import Graph, empty_graph, graph_from_edges
from .gwishart import GWishartParams, sample_gwishart
from .latent import MixedDataset
from .numkit import cholesky_spd

GRAPH_FAMILIES = ("random", "cluster", "scale_free")

# default column-kind rotation: "5 different types of variables"
KIND_CYCLE = ("gaussian", "non_gaussian", "ordinal", "count", "binary")

_DATA_KIND = {
    "gaussian": "continuous",
    "non_gaussian": "continuous",
    "ordinal": "ordinal",
    "count": "count",
    "binary": "binary",
}


@dataclass(frozen=True)
class MarginalRecipe:
    """Per-column marginal assignment plus the discrete-kind parameters."""

    kinds: tuple[str, ...]
    ordinal_levels: int = 4
    count_rate: float = 4.0
    binary_split: float = 0.5  # probability of level 1

    def __post_init__(self):
        for k in self.kinds:
            if k not in KIND_CYCLE:
                raise ValueError(f"unknown marginal kind {k!r}")
        if self.ordinal_levels < 3:
            raise ValueError("ordinal columns need at least 3 levels")
        if not self.count_rate > 0:
            raise ValueError("count rate must be positive")
        if not 0.0 < self.binary_split < 1.0:
            raise ValueError("binary split must lie in (0, 1)")

    @classmethod
    def cycle(cls, p: int, **kwargs) -> "MarginalRecipe":
        kinds = tuple(KIND_CYCLE[j % len(KIND_CYCLE)] for j in range(p))
        return cls(kinds, **kwargs)

    def data_kinds(self) -> tuple[str, ...]:
        return tuple(_DATA_KIND[k] for k in self.kinds)


def _random_adjacency(p: int, prob: float, rng: np.random.Generator) -> np.ndarray:
    adj = np.zeros((p, p), dtype=bool)
    iu = np.triu_indices(p, 1)
    draws = rng.random(iu[0].size) < prob
    adj[iu] = draws
    return adj | adj.T


def gen_graph(family: str, p: int, rng: np.random.Generator) -> Graph:
    """Draw a graph from one of the three synthetic families."""
    if p < 2:
        raise ValueError("need at least 2 vertices")
    if family == "random":
        return Graph(p, _random_adjacency(p, 2.0 / (p - 1), rng))
    if family == "cluster":
        n_blocks = max(2, p // 20)
        sizes = [p // n_blocks + (1 if r < p % n_blocks else 0)
                 for r in range(n_blocks)]
        adj = np.zeros((p, p), dtype=bool)
        start = 0
        for size in sizes:
            stop = start + size
            if size >= 2:
                prob = min(1.0, 2.0 / (size - 1))
                block = _random_adjacency(size, prob, rng)
                adj[start:stop, start:stop] = block
            start = stop
        return Graph(p, adj)
    if family == "scale_free":
        # preferential attachment, one edge per arriving vertex, seeded with
        # the connected pair {0, 1}: always a spanning tree
        degree_bag = [0, 1]
        edges = [(0, 1)]
        for v in range(2, p):
            target = degree_bag[int(rng.integers(len(degree_bag)))]
            edges.append((target, v))
            degree_bag.extend((target, v))
        return graph_from_edges(p, edges)
    raise ValueError(f"unknown graph family {family!r}")


def gen_precision(graph: Graph, rng: np.random.Generator) -> np.ndarray:
    """K ~ W_G(3, I_p)."""
    return sample_gwishart(graph, GWishartParams(3.0, np.eye(graph.p)), rng)


def gen_mixed_data(K: np.ndarray, n: int, recipe: MarginalRecipe,
                   rng: np.random.Generator) -> MixedDataset:
    """Latent rows i.i.d. N(0, K^{-1}) pushed through the per-column maps.

    gaussian: identity; non_gaussian: exp; ordinal: equiprobable quantile
    bins; count: Poisson quantile transform; binary: threshold at the
    (1 - split)-quantile.
    """
    if n < 2:
        raise ValueError("need at least 2 observations")
    K = np.asarray(K, dtype=float)
    p = K.shape[0]
    if len(recipe.kinds) != p:
        raise ValueError("recipe length does not match the precision matrix")
    L = cholesky_spd(K)
    latent = scipy.linalg.solve_triangular(L.T, rng.standard_normal((p, n)),
                                           lower=False).T
    sigma = scipy.linalg.inv(K)
    scale = np.sqrt(np.diag(sigma))
    values = np.empty((n, p))
    for j, kind in enumerate(recipe.kinds):
        zj = latent[:, j]
        uj = ndtr(zj / scale[j])  # exactly U(0,1) per column
        if kind == "gaussian":
            values[:, j] = zj
        elif kind == "non_gaussian":
            values[:, j] = np.exp(zj)
        elif kind == "ordinal":
            levels = np.minimum((uj * recipe.ordinal_levels).astype(int),
                                recipe.ordinal_levels - 1)
            values[:, j] = levels.astype(float)
        elif kind == "count":
            values[:, j] = poisson.ppf(uj, recipe.count_rate)
        else:  # binary
            values[:, j] = (uj > 1.0 - recipe.binary_split).astype(float)
    return MixedDataset(values, recipe.data_kinds())


def gen_missing(data: MixedDataset, fraction: float,
                rng: np.random.Generator) -> MixedDataset:
    """Mask each cell independently with the given probability (MCAR);
    redrawn until every column keeps at least one observed cell."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError("missing fraction must lie in [0, 1)")
    if fraction == 0.0:
        return MixedDataset(data.values.copy(), data.kinds, data.missing.copy())
    while True:
        mask = rng.random(data.values.shape) < fraction
        mask |= data.missing
        if not np.any(mask.all(axis=0)):
            break
    return MixedDataset(data.values.copy(), data.kinds, mask)
