"""Scenario ingestion, load growth, min/max envelopes, and resampling.

Scenario files are CSV with header ``scenario,year,period,value`` and one
row per (scenario, year, period); years and periods are 1-based and must
cover the grid completely. Envelopes (midpoint, half-width) feed the robust
planner; uniform resampling with replacement feeds the Monte Carlo
assessment. Any externally generated scenario files obeying the contract
(including learned generative models) plug in unchanged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from nwaplan.timegrid import TimeGrid


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario data."""


class Kind(Enum):
    LOAD = "load"
    PV_PROFILE = "pv_profile"
    EE_ACCURACY = "ee_accuracy"


@dataclass(frozen=True)
class ScenarioSet:
    """Stack of per-(year, period) matrices, shape (n_scenarios, n_years, n_periods)."""

    kind: Kind
    data: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[1:] != (self.grid.n_years, self.grid.n_periods):
            raise ScenarioError(
                f"scenario data shape {self.data.shape} does not match grid "
                f"({self.grid.n_years} x {self.grid.n_periods})"
            )
        if self.data.shape[0] < 1:
            raise ScenarioError("at least one scenario required")
        _validate_domain(self.kind, self.data)

    @property
    def n_scenarios(self) -> int:
        return self.data.shape[0]


def _validate_domain(kind: Kind, values, where: str = ""):
    values = np.asarray(values)
    if kind is Kind.LOAD and np.any(values < 0):
        raise ScenarioError(f"load values must be nonnegative{where}")
    if kind is Kind.PV_PROFILE and (np.any(values < 0) or np.any(values > 1)):
        raise ScenarioError(f"PV profile values must lie in [0, 1]{where}")
    if kind is Kind.EE_ACCURACY and np.any(values <= 0):
        raise ScenarioError(f"efficiency accuracy values must be positive{where}")


def load_csv(path, grid: TimeGrid, kind: Kind) -> ScenarioSet:
    """Parse and validate a scenario CSV. Errors name the offending file line."""
    per_scenario: dict[int, np.ndarray] = {}
    seen: dict[int, np.ndarray] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["scenario", "year", "period", "value"]:
            raise ScenarioError(f"{path}: expected header 'scenario,year,period,value', got {header}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) != 4:
                raise ScenarioError(f"{path}:{lineno}: expected 4 fields, got {len(rec)}")
            try:
                s, a, t = int(rec[0]), int(rec[1]), int(rec[2])
                v = float(rec[3])
            except ValueError as exc:
                raise ScenarioError(f"{path}:{lineno}: {exc}") from None
            if not 1 <= a <= grid.n_years:
                raise ScenarioError(f"{path}:{lineno}: year {a} outside 1..{grid.n_years}")
            if not 1 <= t <= grid.n_periods:
                raise ScenarioError(f"{path}:{lineno}: period {t} outside 1..{grid.n_periods}")
            try:
                _validate_domain(kind, v)
            except ScenarioError as exc:
                raise ScenarioError(f"{path}:{lineno}: {exc}") from None
            if s not in per_scenario:
                per_scenario[s] = np.full((grid.n_years, grid.n_periods), np.nan)
                seen[s] = np.zeros((grid.n_years, grid.n_periods), dtype=bool)
            if seen[s][a - 1, t - 1]:
                raise ScenarioError(f"{path}:{lineno}: duplicate entry for scenario {s}, year {a}, period {t}")
            per_scenario[s][a - 1, t - 1] = v
            seen[s][a - 1, t - 1] = True
    if not per_scenario:
        raise ScenarioError(f"{path}: no scenario rows")
    for s in sorted(per_scenario):
        if not seen[s].all():
            a, t = np.argwhere(~seen[s])[0] + 1
            raise ScenarioError(f"{path}: scenario {s} missing year {a}, period {t}")
    data = np.stack([per_scenario[s] for s in sorted(per_scenario)])
    return ScenarioSet(kind, data, grid)


def apply_growth(scen: ScenarioSet, annual_rate: float) -> ScenarioSet:
    """Scale year a by (1+rate)^(a-1). Load scenarios only."""
    if scen.kind is not Kind.LOAD:
        raise ScenarioError("growth applies to load scenarios only")
    factors = (1.0 + annual_rate) ** np.arange(scen.grid.n_years)
    return ScenarioSet(scen.kind, scen.data * factors[None, :, None], scen.grid)


def envelope(scen: ScenarioSet) -> tuple[np.ndarray, np.ndarray]:
    """(nominal, deviation) = (midpoint, half-width) of the scenario range,
    elementwise over (year, period). nominal +- deviation brackets every
    scenario exactly."""
    hi = scen.data.max(axis=0)
    lo = scen.data.min(axis=0)
    return (hi + lo) / 2.0, (hi - lo) / 2.0


def sample(scen: ScenarioSet, n: int, seed: int) -> list[np.ndarray]:
    """n draws with replacement, uniform over scenarios, deterministic under seed."""
    if n < 1:
        raise ValueError("need at least one draw")
    rng = np.random.default_rng(seed)
    return [scen.data[i] for i in sample_indices(scen, n, rng)]


def sample_indices(scen: ScenarioSet, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, scen.n_scenarios, size=n)
