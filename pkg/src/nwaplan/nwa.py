"""Linearized non-wire alternative (NWA) blocks.

Each technology compiles to an NwaBlock: investment variables with bounds
and linear cost, operating variables with bounds, linear feasibility rows
over (investment + operating) variables, and a sparse load map giving the
block's MW contribution to system load in every (year, period) cell.
Negative load contributions offset demand (efficiency, solar); storage and
demand response shift it.

Blocks are pure data: compilation is deterministic and every block is
feasible at the all-zeros point (no investment, no operation), which the
planning decomposition relies on for its initial proposal.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from nwaplan.lp.model import EQ, LE, Row
from nwaplan.timegrid import ConfigError, TimeGrid


def grid_array(grid: TimeGrid, value) -> np.ndarray:
    """Broadcast scalar / per-period / per-(year, period) data to a flat
    (n_cells,) array in (year, period) cell order."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.n_cells, float(arr))
    if arr.shape == (grid.n_periods,):
        return np.tile(arr, grid.n_years)
    if arr.shape == (grid.n_years, grid.n_periods):
        return arr.reshape(-1).copy()
    if arr.shape == (grid.n_cells,):
        return arr.copy()
    raise ConfigError(
        f"cannot broadcast shape {arr.shape} onto grid "
        f"({grid.n_years} years x {grid.n_periods} periods)"
    )


@dataclass
class NwaBlock:
    """One linearized NWA ready to embed into a planning LP.

    Variable indexing inside the block: investment variables first
    (0..n_invest-1), then operating variables. Rows use that indexing.
    load_map is (n_cells x n_op): MW load contribution per operating variable.
    """

    name: str
    grid: TimeGrid
    n_invest: int
    n_op: int
    invest_lower: np.ndarray
    invest_upper: np.ndarray
    op_lower: np.ndarray
    op_upper: np.ndarray
    rows: list[Row]
    invest_cost: np.ndarray
    op_cost: np.ndarray
    load_map: sp.csr_matrix
    invest_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.load_map.shape != (self.grid.n_cells, self.n_op):
            raise ConfigError(
                f"{self.name}: load_map shape {self.load_map.shape} != "
                f"({self.grid.n_cells}, {self.n_op})"
            )

    @property
    def n_vars(self) -> int:
        return self.n_invest + self.n_op

    def load_profile(self, x_op: np.ndarray) -> np.ndarray:
        """MW load contribution per cell for operating values x_op."""
        return self.load_map @ x_op

    def priced(self, energy_cost_per_cell: np.ndarray) -> "NwaBlock":
        """Copy of the block with the energy cost of its load contribution
        folded into op_cost. energy_cost_per_cell is $/MW at each cell
        (tariff x dt x per-year discount), so the block's operating cost
        becomes the tariff value of the load it adds or offsets."""
        extra = self.load_map.T @ np.asarray(energy_cost_per_cell, dtype=float)
        return replace(self, op_cost=self.op_cost + extra)


@dataclass(frozen=True)
class EeSpec:
    """Energy efficiency: piecewise-linear cost of a permanent % load reduction.

    segment_sizes / segment_costs are per cost segment, in percent of the
    base-year load and $ per percent; costs must be nondecreasing so the
    cost curve is convex. accuracy scales the projected reduction
    (1 = as projected, 0.9 = 10% underdelivery); base_year_load is the
    per-period MW profile the reduction is anchored to.
    """

    segment_sizes: np.ndarray
    segment_costs: np.ndarray
    accuracy: float | np.ndarray
    base_year_load: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "segment_sizes", np.asarray(self.segment_sizes, dtype=float))
        object.__setattr__(self, "segment_costs", np.asarray(self.segment_costs, dtype=float))
        object.__setattr__(self, "base_year_load", np.asarray(self.base_year_load, dtype=float))
        if self.segment_sizes.shape != self.segment_costs.shape:
            raise ConfigError("EE segment sizes and costs must have equal length")
        if np.any(self.segment_sizes < 0):
            raise ConfigError("EE segment sizes must be nonnegative")
        if np.any(np.diff(self.segment_costs) < 0):
            raise ConfigError("EE segment costs must be nondecreasing")


@dataclass(frozen=True)
class PvSpec:
    """Solar PV: capacity investment with a per-cell production profile in [0, 1]."""

    capacity_cost: float
    max_capacity: float
    profile: float | np.ndarray


@dataclass(frozen=True)
class DrSpec:
    """Demand response: load reduced now rebounds (x rebound factor) next period."""

    capacity_cost: float
    max_capacity: float
    rebound: float = 1.1

    def __post_init__(self):
        if self.rebound < 1.0:
            raise ConfigError("DR rebound factor must be >= 1")


@dataclass(frozen=True)
class EsSpec:
    """Battery storage: energy capacity investment, efficiency losses,
    throughput-driven capacity fade, power limited by energy/power ratio."""

    energy_cost: float
    max_capacity: float
    eta_c: float = 0.97
    eta_d: float = 0.95
    degradation: float = 0.028
    epr: float = 4.0

    def __post_init__(self):
        if not (0 < self.eta_c <= 1 and 0 < self.eta_d <= 1):
            raise ConfigError("charge/discharge efficiencies must be in (0, 1]")
        if self.degradation < 0:
            raise ConfigError("degradation coefficient must be nonnegative")
        if not self.epr > 0:
            raise ConfigError("energy-to-power ratio must be positive")


def compile_ee(spec: EeSpec, grid: TimeGrid) -> NwaBlock:
    """Investment: percent reductions per cost segment. Operation: the pinned
    MW reduction accuracy * base_year_load * (total percent)/100 per cell."""
    if spec.base_year_load.shape != (grid.n_periods,):
        raise ConfigError(
            f"EE base_year_load must have one value per period "
            f"({grid.n_periods}), got {spec.base_year_load.shape}"
        )
    acc = grid_array(grid, spec.accuracy)
    nseg = len(spec.segment_sizes)
    n_cells = grid.n_cells
    base = np.tile(spec.base_year_load, grid.n_years)

    rows = []
    for cell in range(n_cells):
        coef = acc[cell] * base[cell] / 100.0
        cols = np.concatenate([np.arange(nseg), [nseg + cell]])
        vals = np.concatenate([np.full(nseg, -coef), [1.0]])
        rows.append(Row(cols, vals, EQ, 0.0))

    load_map = sp.identity(n_cells, format="csr") * -1.0
    return NwaBlock(
        name="ee",
        grid=grid,
        n_invest=nseg,
        n_op=n_cells,
        invest_lower=np.zeros(nseg),
        invest_upper=spec.segment_sizes.copy(),
        op_lower=np.zeros(n_cells),
        op_upper=np.full(n_cells, np.inf),
        rows=rows,
        invest_cost=spec.segment_costs.copy(),
        op_cost=np.zeros(n_cells),
        load_map=load_map,
        invest_labels=[f"segment_{b+1}_pct" for b in range(nseg)],
    )


def compile_pv(spec: PvSpec, grid: TimeGrid) -> NwaBlock:
    """Investment: installed capacity. Operation: generation pinned to
    profile * capacity per cell; contributes negative load."""
    prof = grid_array(grid, spec.profile)
    if np.any(prof < 0) or np.any(prof > 1):
        bad = int(np.argmax((prof < 0) | (prof > 1)))
        raise ConfigError(f"PV profile must lie in [0, 1]; cell {bad} is {prof[bad]:g}")
    n_cells = grid.n_cells
    rows = [Row(np.array([0, 1 + cell]), np.array([-prof[cell], 1.0]), EQ, 0.0) for cell in range(n_cells)]
    load_map = sp.identity(n_cells, format="csr") * -1.0
    return NwaBlock(
        name="pv",
        grid=grid,
        n_invest=1,
        n_op=n_cells,
        invest_lower=np.zeros(1),
        invest_upper=np.array([spec.max_capacity], dtype=float),
        op_lower=np.zeros(n_cells),
        op_upper=np.full(n_cells, np.inf),
        rows=rows,
        invest_cost=np.array([spec.capacity_cost], dtype=float),
        op_cost=np.zeros(n_cells),
        load_map=load_map,
        invest_labels=["capacity_mw"],
    )


def compile_dr(spec: DrSpec, grid: TimeGrid) -> NwaBlock:
    """Investment: DR-enabled capacity. Operation: per-cell reductions within
    capacity; each reduction rebounds (x rebound) in the next period of the
    same year. No carry across year boundaries: the last period of each year
    is held at zero so every rebound lands inside the horizon."""
    n_cells = grid.n_cells
    T = grid.n_periods
    op_upper = np.full(n_cells, np.inf)
    rows = []
    data, r_idx, c_idx = [], [], []
    for a in range(1, grid.n_years + 1):
        for t in range(1, T + 1):
            cell = grid.cell(a, t)
            if t == T:
                op_upper[cell] = 0.0
                continue
            rows.append(Row(np.array([0, 1 + cell]), np.array([-1.0, 1.0]), LE, 0.0))
            r_idx.append(cell)
            c_idx.append(cell)
            data.append(-1.0)
            r_idx.append(grid.cell(a, t + 1))
            c_idx.append(cell)
            data.append(spec.rebound)
    load_map = sp.csr_matrix((data, (r_idx, c_idx)), shape=(n_cells, n_cells))
    return NwaBlock(
        name="dr",
        grid=grid,
        n_invest=1,
        n_op=n_cells,
        invest_lower=np.zeros(1),
        invest_upper=np.array([spec.max_capacity], dtype=float),
        op_lower=np.zeros(n_cells),
        op_upper=op_upper,
        rows=rows,
        invest_cost=np.array([spec.capacity_cost], dtype=float),
        op_cost=np.zeros(n_cells),
        load_map=load_map,
        invest_labels=["capacity_mw"],
    )


def compile_es(spec: EsSpec, grid: TimeGrid) -> NwaBlock:
    """Investment: initial energy capacity s0. Operation per year: charge and
    discharge per period, state of charge per period plus the end-of-year
    state, and the year's degraded capacity.

    The state of charge starts each year empty and chains through every
    period (the end-of-year state is bounded like any other, so last-period
    charge/discharge is backed by real energy). Capacity in year a equals s0
    minus the degradation coefficient times total charge+discharge throughput
    of all prior years. Charge and discharge power are limited by nameplate
    capacity over the energy-to-power ratio.
    """
    A, T = grid.n_years, grid.n_periods
    dt = grid.dt_hours
    per_year = 3 * T + 1  # c(T), d(T), s(T+1)
    n_op = A * per_year + A

    def c_var(a, t):  # a, t 1-based
        return 1 + (a - 1) * per_year + (t - 1)

    def d_var(a, t):
        return 1 + (a - 1) * per_year + T + (t - 1)

    def s_var(a, t):  # t = 1..T+1
        return 1 + (a - 1) * per_year + 2 * T + (t - 1)

    def smax_var(a):
        return 1 + A * per_year + (a - 1)

    op_lower = np.zeros(n_op)
    op_upper = np.full(n_op, np.inf)
    for a in range(1, A + 1):
        op_upper[s_var(a, 1) - 1] = 0.0  # each year starts empty

    rows = []
    inv_eta_d = 1.0 / spec.eta_d
    inv_epr = 1.0 / spec.epr
    for a in range(1, A + 1):
        for t in range(1, T + 1):
            # s_{t+1} = s_t + dt*(eta_c*c - d/eta_d)
            rows.append(
                Row(
                    np.array([s_var(a, t + 1), s_var(a, t), c_var(a, t), d_var(a, t)]),
                    np.array([1.0, -1.0, -dt * spec.eta_c, dt * inv_eta_d]),
                    EQ,
                    0.0,
                )
            )
            # power limits: c, d <= s0/epr (nameplate)
            rows.append(Row(np.array([c_var(a, t), 0]), np.array([1.0, -inv_epr]), LE, 0.0))
            rows.append(Row(np.array([d_var(a, t), 0]), np.array([1.0, -inv_epr]), LE, 0.0))
        # capacity fade from prior years' throughput
        cols = [smax_var(a), 0]
        vals = [1.0, -1.0]
        for k in range(1, a):
            for t in range(1, T + 1):
                cols.extend([c_var(k, t), d_var(k, t)])
                vals.extend([spec.degradation, spec.degradation])
        rows.append(Row(np.array(cols), np.array(vals), EQ, 0.0))
        # state of charge within the year's (possibly degraded) capacity
        for t in range(2, T + 2):
            rows.append(Row(np.array([s_var(a, t), smax_var(a)]), np.array([1.0, -1.0]), LE, 0.0))

    data, r_idx, c_idx = [], [], []
    for a in range(1, A + 1):
        for t in range(1, T + 1):
            cell = grid.cell(a, t)
            r_idx.extend([cell, cell])
            c_idx.extend([c_var(a, t) - 1, d_var(a, t) - 1])
            data.extend([1.0, -1.0])
    load_map = sp.csr_matrix((data, (r_idx, c_idx)), shape=(grid.n_cells, n_op))

    return NwaBlock(
        name="es",
        grid=grid,
        n_invest=1,
        n_op=n_op,
        invest_lower=np.zeros(1),
        invest_upper=np.array([spec.max_capacity], dtype=float),
        op_lower=op_lower,
        op_upper=op_upper,
        rows=rows,
        invest_cost=np.array([spec.energy_cost], dtype=float),
        op_cost=np.zeros(n_op),
        load_map=load_map,
        invest_labels=["energy_capacity_mwh"],
    )


def es_op_index(grid: TimeGrid, kind: str, a: int, t: int = 1) -> int:
    """Operating-variable index (0-based within op vars) of an ES quantity:
    kind in {'c', 'd', 's', 'smax'}; s accepts t = 1..n_periods+1."""
    T = grid.n_periods
    per_year = 3 * T + 1
    base = (a - 1) * per_year
    if kind == "c":
        return base + (t - 1)
    if kind == "d":
        return base + T + (t - 1)
    if kind == "s":
        return base + 2 * T + (t - 1)
    if kind == "smax":
        return grid.n_years * per_year + (a - 1)
    raise ValueError(f"unknown ES quantity {kind!r}")
