"""Capacity-expansion timing economics.

The expansion year delta for a vector of yearly peaks is the largest delta
such that the peaks of years 1..delta stay within the pre-expansion limit
(delta = 0 when year 1 already exceeds it, delta = n_years when the limit is
never reached). Its present cost is I/(1+rho)^delta: expansion is always
paid for, merely as late as possible, so a never-reached limit still incurs
the (heavily discounted) end-of-horizon cost.

min_present_cost solves the equivalent optimization form directly by
enumeration; the timing-rule/optimization equivalence is a tested invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nwaplan.timegrid import ConfigError, Discount, discount_factor


@dataclass(frozen=True)
class CapexParams:
    """Expansion cost (inflation-adjusted $), pre-expansion limit (MW), discounting."""

    cost: float
    limit: float
    discount: Discount

    def __post_init__(self):
        if self.cost < 0:
            raise ConfigError("expansion cost must be nonnegative")
        if not self.limit > 0:
            raise ConfigError("pre-expansion capacity limit must be positive")


def capex_year(peaks, limit: float, n_years: int) -> int:
    """Expansion year for given yearly peaks: immediately before the limit is
    first reached. Total function: 0 when peaks[0] already exceeds the limit,
    n_years when it never does."""
    peaks = np.asarray(peaks, dtype=float)
    if peaks.shape != (n_years,):
        raise ValueError(f"peaks must have length {n_years}")
    over = np.nonzero(peaks > limit)[0]
    return int(over[0]) if over.size else n_years


def present_cost(params: CapexParams, delta: int, n_years: int) -> float:
    """Present cost I/(1+rho)^delta of expanding at year delta."""
    if not 0 <= delta <= n_years:
        raise ValueError(f"delta must be in [0, {n_years}], got {delta}")
    return params.cost * discount_factor(params.discount, delta)


def min_present_cost(peaks, params: CapexParams) -> tuple[int, float]:
    """(delta*, cost*) minimizing I/(1+rho)^delta subject to the peaks of all
    years up to delta staying within the limit; enumerates delta = 0..n_years."""
    peaks = np.asarray(peaks, dtype=float)
    n_years = len(peaks)
    best_delta, best_cost = 0, params.cost
    for delta in range(1, n_years + 1):
        if peaks[delta - 1] > params.limit:
            break
        cost = present_cost(params, delta, n_years)
        if cost < best_cost:
            best_delta, best_cost = delta, cost
    return best_delta, best_cost
