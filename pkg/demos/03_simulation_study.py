#!/usr/bin/env python3
"""A desk-scale slice of the simulation study.

For each graph family (random, cluster, scale-free) at p=10, n=100, runs a
few replicates in parallel and reports mean F1-score, MSE, and AUC of the
posterior edge probabilities. The full-scale study runs the same pipeline
through the CLI (`copulagraph simulate` + `fit` + `eval`).
"""

import numpy as np

from copulagraph import (ChainConfig, MarginalRecipe, edge_probabilities, f1_score,
                         gen_graph, gen_mixed_data, gen_precision, mse, roc_points,
                         run_replicates, select_graph)

p, n = 10, 100
replicates = 3
iterations, burn_in = 8000, 3000

print(f"p={p}, n={n}, {replicates} replicates, {iterations} iterations each")
print(f"{'family':<12}{'F1':>8}{'MSE':>8}{'AUC':>8}")
for family in ("random", "cluster", "scale_free"):
    tasks = []
    truths = []
    for r in range(replicates):
        rng = np.random.default_rng(np.random.SeedSequence([17, r]))
        truth = gen_graph(family, p, rng)
        K = gen_precision(truth, rng)
        data = gen_mixed_data(K, n, MarginalRecipe.cycle(p), rng)
        seed = int(np.random.SeedSequence([18, r]).generate_state(1)[0])
        tasks.append((data, ChainConfig(iterations=iterations, burn_in=burn_in,
                                        seed=seed), None))
        truths.append(truth)
    traces = run_replicates(tasks, jobs=2)
    f1s, mses, aucs = [], [], []
    for trace, truth in zip(traces, truths):
        probs = edge_probabilities(trace)
        f1s.append(f1_score(select_graph(probs, 0.5).graph, truth))
        mses.append(mse(probs, truth))
        aucs.append(roc_points(probs, truth).auc())
    print(f"{family:<12}{np.mean(f1s):>8.3f}{np.mean(mses):>8.2f}{np.mean(aucs):>8.3f}")
