"""Extended-rank-likelihood latent layer.

Observed mixed data enter the model only through within-column orderings:
each latent cell is constrained to lie between the current latent values of
observations with strictly smaller and strictly larger observed values. Ties
impose no mutual constraint, and missing cells (MCAR) are updated from the
untruncated conditional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .numkit import TruncationInterval, _robert_tail, sample_truncated_normal

VARIABLE_KINDS = ("continuous", "ordinal", "count", "binary")


@dataclass
class MixedDataset:
    """n x p observed table with per-column kinds and a missing mask.

    Discrete levels are stored as reals (level codes); missing cells may hold
    NaN and are flagged in `missing`.
    """

    values: np.ndarray
    kinds: tuple[str, ...]
    missing: np.ndarray = field(default=None)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("values must be a 2-d table")
        n, p = v.shape
        if n < 2 or p < 2:
            raise ValueError("need at least 2 observations and 2 variables")
        kinds = tuple(self.kinds)
        if len(kinds) != p:
            raise ValueError("one kind per column required")
        for k in kinds:
            if k not in VARIABLE_KINDS:
                raise ValueError(f"unknown variable kind {k!r}")
        if self.missing is None:
            miss = np.isnan(v)
        else:
            miss = np.asarray(self.missing, dtype=bool)
            if miss.shape != v.shape:
                raise ValueError("missing mask shape mismatch")
            miss = miss | np.isnan(v)
        if np.any(~np.isfinite(v) & ~miss):
            raise ValueError("non-finite value in a non-missing cell")
        for j in range(p):
            col = v[~miss[:, j], j]
            if kinds[j] == "binary" and np.unique(col).size > 2:
                raise ValueError(f"binary column {j} has more than 2 levels")
            if kinds[j] in ("ordinal", "count", "binary") and col.size:
                if not np.allclose(col, np.round(col)):
                    raise ValueError(f"{kinds[j]} column {j} has non-integer codes")
        self.values = v
        self.kinds = kinds
        self.missing = miss

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class _ColumnOrder:
    """Non-missing rows grouped by observed level, levels ascending.

    flat_order is set when every level is a singleton (typical continuous
    column); the sweep then walks rank neighbors directly.
    """

    groups: tuple[np.ndarray, ...]
    missing_rows: np.ndarray
    flat_order: np.ndarray | None = None


def column_orders(data: MixedDataset) -> list[_ColumnOrder]:
    orders = []
    for j in range(data.p):
        obs = np.flatnonzero(~data.missing[:, j])
        vals = data.values[obs, j]
        groups: list[np.ndarray] = []
        if obs.size:
            for lv in np.unique(vals):
                groups.append(obs[vals == lv])
        flat = None
        if groups and all(g.size == 1 for g in groups):
            flat = np.fromiter((g[0] for g in groups), dtype=int, count=len(groups))
        orders.append(_ColumnOrder(tuple(groups),
                                   np.flatnonzero(data.missing[:, j]), flat))
    return orders


def truncation_bounds(z_col: np.ndarray, y_col: np.ndarray, row: int,
                      missing: np.ndarray | None = None) -> TruncationInterval:
    """Interval for one latent cell from the rank constraints.

    lower: max current latent value over non-missing rows with strictly
    smaller observed value (-inf if none); upper: min over strictly larger
    (+inf if none). Rows tied with `row` contribute nothing.
    """
    z_col = np.asarray(z_col, dtype=float)
    y_col = np.asarray(y_col, dtype=float)
    if missing is None:
        missing = np.zeros(y_col.shape, dtype=bool)
    if missing[row]:
        raise ValueError("row is missing; bounds are undefined")
    y = y_col[row]
    ok = ~np.asarray(missing, dtype=bool)
    below = ok & (y_col < y)
    above = ok & (y_col > y)
    lower = z_col[below].max() if below.any() else -np.inf
    upper = z_col[above].min() if above.any() else np.inf
    return TruncationInterval(float(lower), float(upper))


def initialize_latent(data: MixedDataset, rng: np.random.Generator) -> np.ndarray:
    """Normal-scores start: z = Phi^{-1}(midrank/(n_j+1)) per column, with
    tie-noise smaller than half the smallest inter-rank gap; missing cells
    are standard normal draws."""
    n, p = data.n, data.p
    z = np.empty((n, p))
    for j in range(p):
        obs = ~data.missing[:, j]
        m = int(obs.sum())
        if m:
            ranks = rankdata(data.values[obs, j], method="average")
            scores = ndtri(ranks / (m + 1.0))
            distinct = np.unique(scores)
            if distinct.size < m:  # ties present
                if distinct.size > 1:
                    delta = 0.45 * np.min(np.diff(distinct))
                else:
                    delta = 0.5
                scores = scores + rng.uniform(-delta, delta, size=m)
            z[obs, j] = scores
        z[data.missing[:, j], j] = rng.standard_normal(int(data.missing[:, j].sum()))
    return z


def rank_consistent(z: np.ndarray, data: MixedDataset) -> bool:
    """Exact check: within every column, latent values of strictly smaller
    observed levels lie strictly below those of larger levels."""
    for j, order in enumerate(column_orders(data)):
        prev_max = -np.inf
        for rows in order.groups:
            vals = z[rows, j]
            if vals.min() <= prev_max:
                return False
            prev_max = vals.max()
    return True


def _draw_truncated_block(mu: np.ndarray, sd: float, lo: float, hi: float,
                          rng: np.random.Generator) -> np.ndarray:
    """Independent truncated-normal draws sharing one interval; vectorized
    inverse-CDF with scalar fallback for cells in the far tails."""
    from scipy.special import ndtr

    a = (lo - mu) / sd
    b = (hi - mu) / sd
    out = np.empty(mu.shape)
    tail = (a >= 6.0) | (b <= -6.0)
    easy = ~tail
    if easy.any():
        ae = a[easy]
        be = b[easy]
        pos = ae >= 0.0
        loquant = np.where(pos, ndtr(-be), ndtr(ae))
        hiquant = np.where(pos, ndtr(-ae), ndtr(be))
        u = rng.uniform(loquant, hiquant)
        zed = np.where(pos, -ndtri(u), ndtri(u))
        zed = np.clip(zed, np.nextafter(ae, be), np.nextafter(be, ae))
        out[easy] = zed
    if tail.any():
        idx = np.flatnonzero(tail)
        for t in idx:
            out[t] = sample_truncated_normal(
                0.0, 1.0, TruncationInterval(a[t], b[t]), rng)
    return mu + sd * out


_SQRT1_2 = 1.0 / math.sqrt(2.0)


def _scalar_truncated(mu: float, sd: float, lo: float, hi: float, u: float,
                      rng: np.random.Generator) -> float:
    """Single truncated-normal draw on the hot path: erfc-based CDF, one
    ndtri call, exponential rejection past the tail switch."""
    a = (lo - mu) / sd
    b = (hi - mu) / sd
    if a >= 6.0:
        z = _robert_tail(a, b, rng)
    elif b <= -6.0:
        z = -_robert_tail(-b, -a, rng)
    else:
        if a >= 0.0:
            q0 = 0.5 * math.erfc(b * _SQRT1_2)
            q1 = 0.5 * math.erfc(a * _SQRT1_2)
            z = -float(ndtri(q0 + u * (q1 - q0)))
        else:
            q0 = 0.5 * math.erfc(-a * _SQRT1_2)
            q1 = 0.5 * math.erfc(-b * _SQRT1_2)
            z = float(ndtri(q0 + u * (q1 - q0)))
        if not a < z < b:
            z = min(max(z, math.nextafter(a, b)), math.nextafter(b, a))
    return mu + sd * z


def gibbs_sweep_inplace(z: np.ndarray, K: np.ndarray, orders: list[_ColumnOrder],
                        rng: np.random.Generator,
                        update_observed: bool = True) -> None:
    """One systematic-scan sweep over all cells, in place.

    Columns ascending; within a column, observed levels ascending (tied cells
    share bounds and are drawn as a block), then missing cells. Bounds are
    taken from the live column, so lower bounds see the levels just updated.
    With update_observed=False only missing cells are refreshed (exact
    Gaussian observation mode).
    """
    n, p = z.shape
    for j in range(p):
        kjj = K[j, j]
        sd = 1.0 / np.sqrt(kjj)
        with np.errstate(invalid="ignore"):
            mu = z[:, j] - (z @ K[:, j]) / kjj
        if not np.all(np.isfinite(mu)):
            raise FloatingPointError(
                f"non-finite conditional mean in column {j}; precision matrix corrupt")
        order = orders[j]
        if update_observed and order.groups:
            if order.flat_order is not None:
                # all-distinct column: bounds are the rank neighbors
                flat = order.flat_order
                m = flat.size
                uu = rng.random(m)
                zcol = z[:, j]
                lo = -np.inf
                for t in range(m):
                    r = flat[t]
                    hi = zcol[flat[t + 1]] if t + 1 < m else np.inf
                    val = _scalar_truncated(mu[r], sd, lo, hi, uu[t], rng)
                    zcol[r] = val
                    lo = val
            else:
                groups = order.groups
                nlev = len(groups)
                # pre-sweep minima of the levels above each block bound it
                mins = np.array([z[rows, j].min() for rows in groups])
                suffix = np.empty(nlev + 1)
                suffix[nlev] = np.inf
                for ell in range(nlev - 1, -1, -1):
                    suffix[ell] = min(mins[ell], suffix[ell + 1])
                lo = -np.inf
                for ell, rows in enumerate(groups):
                    hi = suffix[ell + 1]
                    draws = _draw_truncated_block(mu[rows], sd, lo, hi, rng)
                    z[rows, j] = draws
                    lo = draws.max()
        miss = order.missing_rows
        if miss.size:
            z[miss, j] = mu[miss] + sd * rng.standard_normal(miss.size)


def gibbs_update_latent(z: np.ndarray, K: np.ndarray, data: MixedDataset,
                        rng: np.random.Generator,
                        debug_check: bool = False) -> np.ndarray:
    """One Gibbs sweep of the latent matrix; returns a new array.

    Every observed cell is resampled from N(-sum_{r'} K_{rr'} z_{r'}/K_rr,
    1/K_rr) truncated to its rank interval; missing cells use the untruncated
    conditional.
    """
    out = np.array(z, dtype=float, copy=True)
    if out.shape != (data.n, data.p):
        raise ValueError("latent matrix shape mismatch")
    gibbs_sweep_inplace(out, np.asarray(K, dtype=float), column_orders(data), rng)
    if debug_check and not rank_consistent(out, data):
        raise AssertionError("sweep violated rank consistency")
    return out
