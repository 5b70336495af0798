"""Planning-horizon time indexing and discounting shared by all modules.

Years are indexed 1..n_years; delta = 0 means "expand now". Periods are
indexed 1..n_periods within each year. The flat cell index
(a, t) -> (a-1)*n_periods + (t-1) is the row order used by every
per-(year, period) array and sparse matrix in the package.
"""

from __future__ import annotations

from dataclasses import dataclass


class ConfigError(ValueError):
    """Invalid model configuration or data."""


@dataclass(frozen=True)
class TimeGrid:
    """Planning horizon: n_years years of n_periods intervals of dt_hours."""

    n_years: int
    n_periods: int
    dt_hours: float = 1.0

    def __post_init__(self):
        if self.n_years < 1 or self.n_periods < 1:
            raise ConfigError("n_years and n_periods must be >= 1")
        if not self.dt_hours > 0:
            raise ConfigError("dt_hours must be positive")

    @property
    def n_cells(self) -> int:
        return self.n_years * self.n_periods

    def cell(self, year: int, period: int) -> int:
        """Flat index of (year, period), both 1-based."""
        if not (1 <= year <= self.n_years and 1 <= period <= self.n_periods):
            raise IndexError(f"(year={year}, period={period}) outside grid")
        return (year - 1) * self.n_periods + (period - 1)

    def year_of_cell(self, cell: int) -> int:
        if not 0 <= cell < self.n_cells:
            raise IndexError(f"cell {cell} outside grid")
        return cell // self.n_periods + 1


@dataclass(frozen=True)
class Discount:
    """Annual discount rate rho (strictly positive)."""

    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ConfigError("discount rate must be positive")


def discount_factor(discount: Discount, year: int) -> float:
    """Present-value factor 1/(1+rho)^year for a nonnegative integer year."""
    if year < 0:
        raise ValueError(f"year must be nonnegative, got {year}")
    return 1.0 / (1.0 + discount.rho) ** year
