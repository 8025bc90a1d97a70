"""Synthetic graph/precision/data generators."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import chisquare, spearmanr

from copulagraph.graphs import empty_graph
from copulagraph.gwishart import check_zero_pattern
from copulagraph.simgen import (MarginalRecipe, gen_graph, gen_missing,
                                gen_mixed_data, gen_precision)


def test_random_p3_is_complete():
    # inclusion probability 2/(p-1) = 1 at p=3
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert gen_graph("random", 3, rng).edge_count == 3


def test_random_p10_mean_edge_count():
    rng = np.random.default_rng(2)
    counts = [gen_graph("random", 10, rng).edge_count for _ in range(1000)]
    assert np.mean(counts) == pytest.approx(45 * 2 / 9, rel=0.05)


def test_random_edge_count_distribution_chi_square():
    """Edge count ~ Binomial(45, 2/9), chi-square GOF at the 1% level."""
    from scipy.stats import binom

    rng = np.random.default_rng(3)
    n_draws = 1000
    counts = np.array([gen_graph("random", 10, rng).edge_count
                       for _ in range(n_draws)])
    # bin the support so every expected cell count is comfortably >= 5
    edges = np.array([-0.5, 5.5, 7.5, 8.5, 9.5, 10.5, 11.5, 13.5, 45.5])
    obs = np.histogram(counts, edges)[0]
    cdf = binom.cdf(edges, 45, 2 / 9)
    probs = np.diff(cdf)
    stat, pval = chisquare(obs, probs / probs.sum() * n_draws)
    assert pval > 0.01


def test_scale_free_is_spanning_tree():
    rng = np.random.default_rng(4)
    g = gen_graph("scale_free", 40, rng)
    assert g.edge_count == 39
    # connectivity by breadth-first search
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for u in np.flatnonzero(g.adjacency[v]):
            if u not in seen:
                seen.add(int(u))
                frontier.append(int(u))
    assert len(seen) == 40


def test_cluster_graph_has_no_inter_block_edges():
    rng = np.random.default_rng(5)
    for p in (10, 25, 40, 60):
        n_blocks = max(2, p // 20)
        sizes = [p // n_blocks + (1 if r < p % n_blocks else 0)
                 for r in range(n_blocks)]
        assert max(sizes) - min(sizes) <= 1
        bounds = np.cumsum([0] + sizes)
        g = gen_graph("cluster", p, rng)
        for a in range(n_blocks):
            for b in range(a + 1, n_blocks):
                block = g.adjacency[bounds[a]:bounds[a + 1],
                                    bounds[b]:bounds[b + 1]]
                assert not block.any()


def test_gen_graph_rejects_unknown_family():
    with pytest.raises(ValueError):
        gen_graph("lattice", 5, np.random.default_rng(0))


def test_gen_precision_zero_pattern():
    rng = np.random.default_rng(6)
    g = empty_graph(4)
    K = gen_precision(g, rng)
    assert np.allclose(K, np.diag(np.diag(K)))
    g2 = gen_graph("random", 6, rng)
    assert check_zero_pattern(gen_precision(g2, rng), g2, atol=1e-12)


def test_gen_precision_scalar_density():
    """p=1: density k^{1/2} e^{-k/2}; sample mean matches quadrature."""
    norm = quad(lambda k: math.sqrt(k) * math.exp(-k / 2), 0, 300)[0]
    target = quad(lambda k: k ** 1.5 * math.exp(-k / 2), 0, 300)[0] / norm
    rng = np.random.default_rng(7)
    draws = np.array([gen_precision(empty_graph(1), rng)[0, 0]
                      for _ in range(20_000)])
    assert draws.mean() == pytest.approx(target, rel=0.02)


def test_binary_split_frequency():
    rng = np.random.default_rng(8)
    recipe = MarginalRecipe(("binary", "gaussian"), binary_split=0.5)
    data = gen_mixed_data(np.eye(2), 10_000, recipe, rng)
    assert data.values[:, 0].mean() == pytest.approx(0.5, abs=0.02)


def test_monotone_maps_preserve_ranks():
    rng1 = np.random.default_rng(9)
    rng2 = np.random.default_rng(9)
    K = np.array([[1.5, 0.4], [0.4, 1.2]])
    d_gauss = gen_mixed_data(K, 500, MarginalRecipe(("gaussian", "gaussian")), rng1)
    d_exp = gen_mixed_data(K, 500, MarginalRecipe(("non_gaussian", "non_gaussian")),
                           rng2)
    for j in range(2):
        rho = spearmanr(d_gauss.values[:, j], d_exp.values[:, j]).statistic
        assert rho == pytest.approx(1.0)


def test_independent_precision_gives_uncorrelated_columns():
    rng = np.random.default_rng(10)
    n = 4000
    data = gen_mixed_data(np.eye(2), n, MarginalRecipe(("gaussian", "ordinal")), rng)
    rho = spearmanr(data.values[:, 0], data.values[:, 1]).statistic
    assert abs(rho) < 3.0 / math.sqrt(n)


def test_discrete_columns_have_configured_levels():
    rng = np.random.default_rng(11)
    recipe = MarginalRecipe.cycle(5, ordinal_levels=4)
    data = gen_mixed_data(np.eye(5), 5000, recipe, rng)
    assert data.kinds == ("continuous", "continuous", "ordinal", "count", "binary")
    assert set(np.unique(data.values[:, 2])) == {0.0, 1.0, 2.0, 3.0}
    assert set(np.unique(data.values[:, 4])) <= {0.0, 1.0}
    counts = data.values[:, 3]
    assert np.allclose(counts, np.round(counts)) and counts.min() >= 0


def test_ordinal_levels_equiprobable():
    rng = np.random.default_rng(12)
    recipe = MarginalRecipe(("ordinal", "gaussian"), ordinal_levels=4)
    # non-unit marginal variance exercises the per-column scaling
    K = np.array([[4.0, 0.0], [0.0, 0.25]])
    data = gen_mixed_data(K, 20_000, recipe, rng)
    freqs = np.bincount(data.values[:, 0].astype(int), minlength=4) / 20_000
    assert np.abs(freqs - 0.25).max() < 0.02


def test_recipe_validation():
    with pytest.raises(ValueError):
        MarginalRecipe(("gaussian",), ordinal_levels=2)
    with pytest.raises(ValueError):
        MarginalRecipe(("mystery",))
    with pytest.raises(ValueError):
        MarginalRecipe(("gaussian",), binary_split=1.0)


def test_gen_missing_zero_fraction_is_identity():
    rng = np.random.default_rng(13)
    data = gen_mixed_data(np.eye(2), 50, MarginalRecipe(("gaussian", "binary")), rng)
    out = gen_missing(data, 0.0, rng)
    assert not out.missing.any()
    assert np.array_equal(out.values, data.values)


def test_gen_missing_share():
    rng = np.random.default_rng(14)
    data = gen_mixed_data(np.eye(2), 5000, MarginalRecipe(("gaussian", "gaussian")),
                          rng)
    out = gen_missing(data, 0.1, rng)
    assert out.missing.mean() == pytest.approx(0.1, abs=0.01)


def test_gen_missing_never_kills_a_column():
    rng = np.random.default_rng(15)
    data = gen_mixed_data(np.eye(2), 3, MarginalRecipe(("gaussian", "gaussian")), rng)
    for _ in range(200):
        out = gen_missing(data, 0.85, rng)
        assert not out.missing.all(axis=0).any()
