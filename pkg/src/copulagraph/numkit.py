"""Dense symmetric linear algebra and scalar sampling primitives.

All samplers take an explicit numpy Generator so parallel callers can hand
each task its own spawned stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln, ndtr, ndtri


class NotPositiveDefiniteError(ValueError):
    """Cholesky failed: the matrix is not (numerically) positive definite."""


def cholesky_spd(m: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T = m.

    Raises NotPositiveDefiniteError instead of a generic LinAlgError so
    callers can distinguish bad inputs from other failures.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("square matrix required")
    if not np.allclose(m, m.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise ValueError("matrix is not symmetric")
    try:
        return scipy.linalg.cholesky(m, lower=True)
    except scipy.linalg.LinAlgError as err:
        raise NotPositiveDefiniteError(str(err)) from err


def is_spd(m: np.ndarray) -> bool:
    try:
        cholesky_spd(m)
        return True
    except (ValueError, NotPositiveDefiniteError):
        return False


def schur_complement(m: np.ndarray, block: np.ndarray | list[int]) -> np.ndarray:
    """K_{A,B} K_{B,B}^{-1} K_{B,A} for A = block, B = complement.

    The result is the part of K_{A,A} explained through the complement; it is
    symmetric positive semidefinite for SPD input.
    """
    m = np.asarray(m, dtype=float)
    p = m.shape[0]
    a = np.asarray(sorted(set(int(i) for i in block)), dtype=int)
    if a.size == 0:
        raise ValueError("block must be nonempty")
    if a.size >= p or a.min() < 0 or a.max() >= p:
        raise ValueError("block must be a proper subset of the index range")
    b = np.setdiff1d(np.arange(p), a)
    mab = m[np.ix_(a, b)]
    mbb = m[np.ix_(b, b)]
    try:
        sol = scipy.linalg.solve(mbb, mab.T, assume_a="pos")
    except scipy.linalg.LinAlgError as err:
        raise NotPositiveDefiniteError(f"singular sub-block: {err}") from err
    out = mab @ sol
    return (out + out.T) / 2.0


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x), x > 0."""
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return float(gammaln(x))


@dataclass(frozen=True)
class TruncationInterval:
    """Open interval (lower, upper); either side may be infinite."""

    lower: float = -np.inf
    upper: float = np.inf

    def __post_init__(self):
        if np.isnan(self.lower) or np.isnan(self.upper):
            raise ValueError("NaN truncation bound")
        if not self.lower < self.upper:
            raise ValueError(f"empty interval ({self.lower}, {self.upper})")


# Beyond this many standard deviations the inverse-CDF loses precision and we
# switch to the one-sided exponential-proposal rejection sampler.
_TAIL_SWITCH = 6.0


def _robert_tail(a: float, b: float, rng: np.random.Generator) -> float:
    """Standard normal restricted to (a, b), a >= _TAIL_SWITCH."""
    alpha = 0.5 * (a + np.sqrt(a * a + 4.0))
    while True:
        z = a - np.log(rng.random()) / alpha
        if z >= b:
            continue
        if np.log(rng.random()) <= -0.5 * (z - alpha) ** 2:
            return z


def _std_trunc_normal(a: float, b: float, rng: np.random.Generator) -> float:
    """Standard normal restricted to (a, b). Inverse CDF in the central
    regime, evaluated in whichever tail is numerically stable; exponential
    rejection once the nearer bound passes the tail switch."""
    if a >= _TAIL_SWITCH:
        return _robert_tail(a, b, rng)
    if b <= -_TAIL_SWITCH:
        return -_robert_tail(-b, -a, rng)
    if a >= 0.0:
        # work in the lower tail for precision: P(a<Z<b) = Phi(-a) - Phi(-b)
        lo, hi = ndtr(-b), ndtr(-a)
        u = rng.uniform(lo, hi)
        z = -ndtri(u)
    elif b <= 0.0:
        lo, hi = ndtr(a), ndtr(b)
        u = rng.uniform(lo, hi)
        z = ndtri(u)
    else:
        u = rng.uniform(ndtr(a), ndtr(b))
        z = ndtri(u)
    # float rounding can land exactly on a bound in tight intervals
    if not a < z < b:
        z = min(max(z, np.nextafter(a, b)), np.nextafter(b, a))
    return z


def sample_truncated_normal(mu: float, sd: float, interval: TruncationInterval,
                            rng: np.random.Generator) -> float:
    """Exact draw from N(mu, sd^2) restricted to the open interval."""
    if not sd > 0:
        raise ValueError("sd must be positive")
    a = (interval.lower - mu) / sd
    b = (interval.upper - mu) / sd
    if not a < b:
        raise ValueError("interval collapses after standardization")
    return mu + sd * _std_trunc_normal(a, b, rng)


def truncated_normal_cdf(x, mu: float, sd: float, interval: TruncationInterval):
    """Analytic CDF of the truncated normal, stable in either tail."""
    a = (interval.lower - mu) / sd
    b = (interval.upper - mu) / sd
    t = (np.asarray(x, dtype=float) - mu) / sd
    t = np.clip(t, a, b)
    if a >= 0.0:
        # complementary form: (Phi(-a) - Phi(-t)) / (Phi(-a) - Phi(-b))
        return (ndtr(-a) - ndtr(-t)) / (ndtr(-a) - ndtr(-b))
    return (ndtr(t) - ndtr(a)) / (ndtr(b) - ndtr(a))
