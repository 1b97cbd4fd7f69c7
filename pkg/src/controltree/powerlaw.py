"""Discrete power-law fitting and sampling for out-degree tails.

The fit follows the standard maximum-likelihood recipe for discrete
data: a continuous-approximation MLE with the half-integer shift, with
the tail cutoff chosen to minimize the Kolmogorov-Smirnov distance
between the empirical tail and the fitted law.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import zeta

from .errors import BadExponent, BadParameter, DegenerateSample, InsufficientData

#: Smallest tail that supports a meaningful cutoff scan.
MIN_TAIL = 50


@dataclass(frozen=True)
class PowerLawFit:
    """Fitted exponent and the tail it was estimated on."""

    exponent: float
    se: float
    xmin: int
    n_tail: int
    ks: float


def _fitted_cdf(r: float, xmin: int, points: np.ndarray) -> np.ndarray:
    """CDF of the discrete power law on ``x >= xmin`` at integer points."""
    return 1.0 - zeta(r, points + 1.0) / zeta(r, float(xmin))


def _ks_distance(tail: np.ndarray, r: float, xmin: int) -> float:
    distinct = np.unique(tail)
    # The empirical CDF is a step function: the supremum over integers is
    # attained either at an observed value or just before the next one.
    points = np.union1d(distinct, distinct - 1)
    points = points[points >= xmin]
    emp = np.searchsorted(tail, points, side="right") / tail.size
    fit = _fitted_cdf(r, xmin, points.astype(float))
    return float(np.abs(emp - fit).max())


def fit_power_law(samples: Iterable[int]) -> PowerLawFit:
    """Fit a discrete power law to a degree multiset.

    Zeros (leaves) carry no tail information and are dropped before
    anything else.  Every distinct value up to the 90th percentile is a
    cutoff candidate; candidates whose tail falls below ``MIN_TAIL``
    observations are skipped, and KS ties go to the smallest cutoff.

    Raises
    ------
    InsufficientData
        Fewer than ``MIN_TAIL`` positive values.
    DegenerateSample
        All positive values identical.
    """
    x = np.asarray([int(v) for v in samples], dtype=np.int64)
    if np.any(x < 0):
        raise BadParameter("degree samples must be non-negative")
    x = np.sort(x[x > 0])
    if x.size < MIN_TAIL:
        raise InsufficientData(int(x.size), MIN_TAIL)
    if x[0] == x[-1]:
        raise DegenerateSample("all positive values are identical")

    p90 = np.percentile(x, 90)
    candidates = [int(v) for v in np.unique(x) if v <= p90]
    if not candidates:
        candidates = [int(x[0])]

    best: tuple[float, int, float, int] | None = None  # (ks, xmin, r, n_tail)
    for xmin in candidates:
        tail = x[x >= xmin]
        if tail.size < MIN_TAIL:
            continue
        r = 1.0 + tail.size / np.log(tail / (xmin - 0.5)).sum()
        ks = _ks_distance(tail, r, xmin)
        if best is None or (ks, xmin) < (best[0], best[1]):
            best = (ks, xmin, float(r), int(tail.size))
    if best is None:
        raise InsufficientData(int(x.size), MIN_TAIL)

    ks, xmin, r, n_tail = best
    return PowerLawFit(r, (r - 1.0) / np.sqrt(n_tail), xmin, n_tail, ks)


def exponent_change(earlier: PowerLawFit, later: PowerLawFit) -> float:
    """Change in fitted exponent between two snapshots (later - earlier)."""
    return later.exponent - earlier.exponent


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

_TABLE_START = 1 << 16
_TABLE_CAP = 1 << 22


def sample_power_law(
    exponent: float, xmin: int = 1, n: int = 1, seed: int = 0
) -> np.ndarray:
    """Draw ``n`` integers from P(X = x) proportional to x^-exponent, x >= xmin.

    Exact inverse-CDF sampling: the bulk is resolved against a tabulated
    CDF, and draws landing beyond the table fall back to bisection on
    the Hurwitz-zeta survival function, so the tail is not truncated.
    """
    if exponent <= 1.0:
        raise BadExponent(exponent)
    if xmin < 1:
        raise BadParameter(f"xmin must be >= 1, got {xmin}")
    if n < 1:
        raise BadParameter(f"n must be >= 1, got {n}")

    norm = zeta(exponent, float(xmin))
    u = np.random.default_rng(seed).random(n)

    length = _TABLE_START
    while True:
        support = np.arange(xmin, xmin + length, dtype=float)
        cdf = np.cumsum(support**-exponent) / norm
        idx = np.searchsorted(cdf, u, side="left")
        if not np.any(idx >= length) or length >= _TABLE_CAP:
            break
        length *= 4

    out = xmin + idx.astype(np.int64)
    for pos in np.nonzero(idx >= length)[0]:
        out[pos] = _tail_draw(exponent, norm, xmin + length, float(u[pos]))
    return out


def _tail_draw(exponent: float, norm: float, lo: int, u: float) -> int:
    """Smallest x >= lo with CDF(x) >= u, via doubling then bisection."""
    target = (1.0 - u) * norm  # compare against zeta(r, x + 1)
    hi = lo
    while zeta(exponent, float(hi + 1)) > target:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if zeta(exponent, float(mid + 1)) <= target:
            hi = mid
        else:
            lo = mid + 1
    return lo
