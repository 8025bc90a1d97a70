"""Structure-recovery metrics and posterior predictive checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import ndtr

from .graphs import Graph
from .latent import MixedDataset
from .numkit import cholesky_spd


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int


def confusion_counts(estimated: Graph, truth: Graph) -> ConfusionCounts:
    if estimated.p != truth.p:
        raise ValueError("graphs have different vertex counts")
    iu = np.triu_indices(estimated.p, 1)
    est = estimated.adjacency[iu]
    tru = truth.adjacency[iu]
    return ConfusionCounts(
        tp=int(np.sum(est & tru)),
        fp=int(np.sum(est & ~tru)),
        fn=int(np.sum(~est & tru)),
        tn=int(np.sum(~est & ~tru)),
    )


def f1_score(estimated: Graph, truth: Graph) -> float:
    """2TP / (2TP + FP + FN); two empty graphs agree perfectly and score 1."""
    c = confusion_counts(estimated, truth)
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        return 1.0
    return 2.0 * c.tp / denom


def mse(probs: np.ndarray, truth: Graph) -> float:
    """Sum over unordered pairs of (p_hat - edge indicator)^2."""
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (truth.p, truth.p):
        raise ValueError("probability matrix and graph dimensions differ")
    iu = np.triu_indices(truth.p, 1)
    delta = probs[iu] - truth.adjacency[iu].astype(float)
    return float(np.sum(delta * delta))


@dataclass(frozen=True)
class RocCurve:
    """Threshold sweep over distinct probabilities, endpoints included."""

    fpr: np.ndarray
    tpr: np.ndarray

    def auc(self) -> float:
        return float(np.trapezoid(self.tpr, self.fpr))


def roc_points(probs: np.ndarray, truth: Graph) -> RocCurve:
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (truth.p, truth.p):
        raise ValueError("probability matrix and graph dimensions differ")
    iu = np.triu_indices(truth.p, 1)
    scores = probs[iu]
    labels = truth.adjacency[iu]
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("truth graph is empty or complete; ROC undefined")
    fpr = [0.0]
    tpr = [0.0]
    for t in np.sort(np.unique(scores))[::-1]:
        hit = scores >= t
        tpr.append(float(np.sum(hit & labels)) / n_pos)
        fpr.append(float(np.sum(hit & ~labels)) / n_neg)
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:
        fpr.append(1.0)
        tpr.append(1.0)
    return RocCurve(np.array(fpr), np.array(tpr))


def _empirical_quantile(sorted_col: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse of the scaled empirical distribution F_hat = n/(n+1) F_n:
    smallest observed value whose scaled ECDF reaches u."""
    n = sorted_col.size
    idx = np.ceil(u * (n + 1.0)).astype(int) - 1
    idx = np.clip(idx, 0, n - 1)
    return sorted_col[idx]


def posterior_predictive_sample(trace, data: MixedDataset, draws: int,
                                rng: np.random.Generator) -> list[MixedDataset]:
    """Datasets simulated from the posterior predictive distribution.

    Each draw picks a stored (graph, K) state proportionally to its waiting
    time, samples n latent rows from N(0, K^{-1}), and maps every column to
    the observed scale through the empirical quantile function of the
    original column.
    """
    if trace.thinned_k is None or len(trace.thinned_k) == 0:
        raise ValueError("trace carries no stored states")
    weights = np.asarray(trace.thinned_w, dtype=float)
    probs = weights / weights.sum()
    n, p = data.n, data.p
    sorted_cols = []
    for j in range(p):
        obs = data.values[~data.missing[:, j], j]
        if obs.size == 0:
            raise ValueError(f"column {j} has no observed values")
        sorted_cols.append(np.sort(obs))
    out = []
    for _ in range(draws):
        which = rng.choice(len(probs), p=probs)
        K = trace.thinned_k[which]
        L = cholesky_spd(K)
        latent = scipy.linalg.solve_triangular(
            L.T, rng.standard_normal((p, n)), lower=False).T
        sigma = scipy.linalg.inv(K)
        scale = np.sqrt(np.diag(sigma))
        values = np.empty((n, p))
        for j in range(p):
            u = ndtr(latent[:, j] / scale[j])
            values[:, j] = _empirical_quantile(sorted_cols[j], u)
        out.append(MixedDataset(values, data.kinds))
    return out


@dataclass(frozen=True)
class ConditionalTable:
    """Conditional frequencies of target levels within bins of a column.

    rows: one per bin; `counts` holds raw cell counts, `freqs` row-normalized
    frequencies (NaN row for an empty bin, never dropped).
    """

    bin_labels: tuple[str, ...]
    levels: tuple[float, ...]
    counts: np.ndarray
    freqs: np.ndarray

    @property
    def empty_bins(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, c in zip(self.bin_labels, self.counts.sum(axis=1))
                     if c == 0)


def conditional_histogram(data: MixedDataset, target: int, given: int,
                          bins: list[tuple[float, float]],
                          levels: list[float] | None = None) -> ConditionalTable:
    """Frequency of target levels within half-open bins [lo, hi) of the
    conditioning column (hi = inf allowed); rows sum to 1 where populated."""
    if target == given:
        raise ValueError("target and conditioning columns must differ")
    ok = ~(data.missing[:, target] | data.missing[:, given])
    y_t = data.values[ok, target]
    y_g = data.values[ok, given]
    if levels is None:
        levels = sorted(float(v) for v in np.unique(y_t))
    counts = np.zeros((len(bins), len(levels)), dtype=int)
    labels = []
    for b, (lo, hi) in enumerate(bins):
        labels.append(f"[{lo:g},{hi:g})")
        inside = (y_g >= lo) & (y_g < hi)
        for L, lv in enumerate(levels):
            counts[b, L] = int(np.sum(inside & (y_t == lv)))
    rowsum = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        freqs = np.where(rowsum > 0, counts / rowsum, np.nan)
    return ConditionalTable(tuple(labels), tuple(levels), counts, freqs)
