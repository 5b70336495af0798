"""Configuration loading: one JSON document describing the whole instance.

Every unit is spelled out in the key names. Scenario CSV paths are resolved
relative to the config file. The base-load envelope (nominal = midpoint,
deviation = half-width) is extracted from the load scenarios after applying
the optional growth rate; PV-profile and efficiency-accuracy envelopes come
from their scenario files when present.

Validation is eager and errors are path-qualified, e.g.
"capex.discount_rate: must be positive".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from nwaplan.capex import CapexParams
from nwaplan.nwa import DrSpec, EeSpec, EsSpec, PvSpec
from nwaplan.plan import NwaSpecs, PlanningProblem, Tariff
from nwaplan.scenario import Kind, ScenarioSet, apply_growth, envelope, load_csv
from nwaplan.assess import ScenarioSets
from nwaplan.timegrid import ConfigError, Discount, TimeGrid


@dataclass
class AssessParams:
    n_draws: int = 200
    voll: float = 10000.0
    seed: int = 42


@dataclass
class LoadedConfig:
    problem: PlanningProblem
    sets: ScenarioSets
    assess: AssessParams
    raw: dict
    path: Path


class _Section:
    """Dict wrapper producing path-qualified errors."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        self.data = data
        self.path = path

    def child(self, key: str, required: bool = True):
        if key not in self.data:
            if required:
                raise ConfigError(f"{self.path}.{key}: missing section")
            return None
        return _Section(self.data[key], f"{self.path}.{key}")

    def get(self, key: str, kind, default=None, required: bool = False, positive=False, nonneg=False):
        if key not in self.data:
            if required:
                raise ConfigError(f"{self.path}.{key}: missing value")
            return default
        val = self.data[key]
        where = f"{self.path}.{key}"
        try:
            if kind is float:
                val = float(val)
            elif kind is int:
                if isinstance(val, float) and val != int(val):
                    raise ValueError("not an integer")
                val = int(val)
            elif kind is list:
                if not isinstance(val, list):
                    raise ValueError("not a list")
            elif kind is str:
                if not isinstance(val, str):
                    raise ValueError("not a string")
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
        if positive and not (isinstance(val, (int, float)) and val > 0):
            raise ConfigError(f"{where}: must be positive")
        if nonneg and not (isinstance(val, (int, float)) and val >= 0):
            raise ConfigError(f"{where}: must be nonnegative")
        return val


def _load_scenarios(sec: _Section, grid: TimeGrid, base_dir: Path):
    load_path = sec.get("load_csv", str, required=True)
    growth = sec.get("load_growth_rate", float, default=0.0)
    load_set = load_csv(base_dir / load_path, grid, Kind.LOAD)
    if growth:
        load_set = apply_growth(load_set, growth)
    pv_set = None
    pv_path = sec.get("pv_csv", str)
    if pv_path:
        pv_set = load_csv(base_dir / pv_path, grid, Kind.PV_PROFILE)
    ee_set = None
    ee_path = sec.get("ee_accuracy_csv", str)
    if ee_path:
        ee_set = load_csv(base_dir / ee_path, grid, Kind.EE_ACCURACY)
    return load_set, pv_set, ee_set


def _nwa_specs(sec: _Section | None, grid: TimeGrid, pv_set, ee_set):
    pv_nom = pv_dev = None
    ee_nom, ee_dev = 1.0, None
    if pv_set is not None:
        pv_nom, pv_dev = envelope(pv_set)
    if ee_set is not None:
        ee_nom, ee_dev = envelope(ee_set)
    if sec is None:
        return NwaSpecs(), pv_dev, ee_dev

    ee = None
    s = sec.child("ee", required=False)
    if s is not None:
        base = np.asarray(s.get("base_year_load_mw", list, required=True), dtype=float)
        if base.shape != (grid.n_periods,):
            raise ConfigError(f"{s.path}.base_year_load_mw: need {grid.n_periods} values")
        ee = EeSpec(
            segment_sizes=np.asarray(s.get("segment_sizes_pct", list, required=True), dtype=float),
            segment_costs=np.asarray(s.get("segment_costs_usd_per_pct", list, required=True), dtype=float),
            accuracy=ee_nom,
            base_year_load=base,
        )
    pv = None
    s = sec.child("pv", required=False)
    if s is not None:
        if pv_nom is None:
            raise ConfigError(f"{s.path}: PV requires scenarios.pv_csv for its production profile")
        pv = PvSpec(
            capacity_cost=s.get("capacity_cost_usd_per_mw", float, required=True, nonneg=True),
            max_capacity=s.get("max_capacity_mw", float, required=True, nonneg=True),
            profile=pv_nom,
        )
    dr = None
    s = sec.child("dr", required=False)
    if s is not None:
        dr = DrSpec(
            capacity_cost=s.get("capacity_cost_usd_per_mw", float, required=True, nonneg=True),
            max_capacity=s.get("max_capacity_mw", float, required=True, nonneg=True),
            rebound=s.get("rebound", float, default=1.1),
        )
    es = None
    s = sec.child("es", required=False)
    if s is not None:
        es = EsSpec(
            energy_cost=s.get("energy_cost_usd_per_mwh", float, required=True, nonneg=True),
            max_capacity=s.get("max_capacity_mwh", float, required=True, nonneg=True),
            eta_c=s.get("eta_charge", float, default=0.97),
            eta_d=s.get("eta_discharge", float, default=0.95),
            degradation=s.get("degradation_mwh_per_mwh", float, default=0.028),
            epr=s.get("energy_power_ratio_h", float, default=4.0),
        )
    return NwaSpecs(ee=ee, pv=pv, dr=dr, es=es), pv_dev, ee_dev


def load_config(path) -> LoadedConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    root = _Section(raw, "config")

    g = root.child("grid")
    grid = TimeGrid(
        n_years=g.get("n_years", int, required=True),
        n_periods=g.get("n_periods", int, required=True),
        dt_hours=g.get("dt_hours", float, default=1.0),
    )
    c = root.child("capex")
    rho = c.get("discount_rate", float, required=True)
    if rho <= 0:
        raise ConfigError("config.capex.discount_rate: must be positive")
    capex = CapexParams(
        cost=c.get("cost_usd", float, required=True, nonneg=True),
        limit=c.get("limit_mw", float, required=True, positive=True),
        discount=Discount(rho),
    )
    t = root.child("tariff")
    energy = t.data.get("energy_price_usd_per_mwh", 0.0)
    if isinstance(energy, list):
        energy = np.asarray(energy, dtype=float)
    else:
        energy = float(energy)
    tariff = Tariff(
        energy_price=energy,
        demand_charge=t.get("demand_charge_usd_per_mw_year", float, default=0.0, nonneg=True),
    )

    load_set, pv_set, ee_set = _load_scenarios(root.child("scenarios"), grid, path.parent)
    base_nom, base_dev = envelope(load_set)
    specs, pv_dev, ee_dev = _nwa_specs(root.child("nwa", required=False), grid, pv_set, ee_set)

    r = root.child("robust", required=False)
    gamma = r.get("gamma", float, default=0.0) if r is not None else 0.0
    problem = PlanningProblem.build(
        grid,
        capex,
        tariff,
        specs,
        base_nom,
        load_deviation=base_dev,
        pv_deviation=pv_dev,
        ee_accuracy_deviation=ee_dev,
        gamma=gamma,
    )

    a = root.child("assess", required=False)
    assess = AssessParams()
    if a is not None:
        assess = AssessParams(
            n_draws=a.get("n_draws", int, default=200, positive=True),
            voll=a.get("voll_usd_per_mwh", float, default=10000.0, nonneg=True),
            seed=a.get("seed", int, default=42),
        )
    sets = ScenarioSets(load=load_set, pv=pv_set, ee_accuracy=ee_set)
    return LoadedConfig(problem=problem, sets=sets, assess=assess, raw=raw, path=path)
