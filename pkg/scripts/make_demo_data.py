"""Regenerate the bundled demo instance (demo/).

Deterministic synthetic data: 3 planning years x 24 hourly periods (one
representative day per year). Five load-growth scenarios bracket 1.5%..5%
per year with hour-level wiggle; three PV years (sunny/average/cloudy);
two efficiency-delivery scenarios. The EE cost segments are synthetic
placeholders, not published data.

Run from the repo root: python3 scripts/make_demo_data.py
"""

import csv
import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "demo"

HOURS = np.arange(24)
SHAPE = np.array([
    0.62, 0.58, 0.56, 0.55, 0.56, 0.60, 0.68, 0.76,
    0.82, 0.86, 0.88, 0.90, 0.91, 0.92, 0.93, 0.95,
    0.97, 1.00, 0.99, 0.95, 0.88, 0.80, 0.72, 0.66,
])
BASE_MW = 57.0

# per-scenario yearly growth multipliers (year 1..3)
LOAD_GROWTH = {
    1: [0.975, 0.995, 1.020],
    2: [0.995, 1.030, 1.065],
    3: [1.000, 1.045, 1.095],
    4: [1.015, 1.065, 1.120],
    5: [1.030, 1.085, 1.150],
}

PV_BELL = np.clip(np.sin((HOURS - 5.5) / 14.0 * np.pi), 0.0, None) * (HOURS >= 6) * (HOURS <= 19)
PV_LEVELS = {1: 1.00, 2: 0.72, 3: 0.42}

EE_ACCURACY = {1: 1.0, 2: 0.88}


def write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "year", "period", "value"])
        w.writerows(rows)
    print(f"wrote {path}")


def main():
    OUT.mkdir(exist_ok=True)

    rows = []
    for s, growth in LOAD_GROWTH.items():
        wiggle = 1.0 + 0.012 * np.sin(HOURS / 24.0 * 2 * np.pi * 2 + s)
        for a in range(1, 4):
            profile = BASE_MW * SHAPE * growth[a - 1] * wiggle
            rows += [[s, a, t + 1, f"{profile[t]:.4f}"] for t in range(24)]
    write_csv(OUT / "load_scenarios.csv", rows)

    rows = []
    for s, level in PV_LEVELS.items():
        shape_shift = np.roll(PV_BELL, s - 2)  # sunrise/sunset jitter per scenario
        prof = np.clip(0.92 * level * (0.7 * PV_BELL + 0.3 * shape_shift), 0.0, 1.0)
        for a in range(1, 4):
            rows += [[s, a, t + 1, f"{prof[t]:.4f}"] for t in range(24)]
    write_csv(OUT / "pv_scenarios.csv", rows)

    rows = []
    for s, acc in EE_ACCURACY.items():
        for a in range(1, 4):
            rows += [[s, a, t + 1, f"{acc:.4f}"] for t in range(24)]
    write_csv(OUT / "ee_accuracy_scenarios.csv", rows)

    energy_price = [35.0] * 6 + [55.0] * 4 + [70.0] * 6 + [95.0, 110.0, 110.0, 95.0] + [70.0, 55.0, 45.0, 38.0]
    config = {
        "grid": {"n_years": 3, "n_periods": 24, "dt_hours": 1.0},
        "capex": {"cost_usd": 1.0e8, "limit_mw": 60.0, "discount_rate": 0.07},
        "tariff": {
            "energy_price_usd_per_mwh": energy_price,
            "demand_charge_usd_per_mw_year": 120000.0,
        },
        "nwa": {
            "ee": {
                "_comment": "synthetic placeholder cost curve, not published data",
                "segment_sizes_pct": [2.0, 2.0],
                "segment_costs_usd_per_pct": [1500000.0, 4000000.0],
                "base_year_load_mw": [round(v, 4) for v in (BASE_MW * SHAPE)],
            },
            "pv": {"capacity_cost_usd_per_mw": 2000000.0, "max_capacity_mw": 8.0},
            "dr": {"capacity_cost_usd_per_mw": 200000.0, "max_capacity_mw": 3.0, "rebound": 1.1},
            "es": {
                "energy_cost_usd_per_mwh": 250000.0,
                "max_capacity_mwh": 12.0,
                "eta_charge": 0.97,
                "eta_discharge": 0.95,
                "degradation_mwh_per_mwh": 0.028,
                "energy_power_ratio_h": 4.0,
            },
        },
        "scenarios": {
            "load_csv": "load_scenarios.csv",
            "pv_csv": "pv_scenarios.csv",
            "ee_accuracy_csv": "ee_accuracy_scenarios.csv",
            "load_growth_rate": 0.0,
        },
        "robust": {"gamma": 0.5},
        "assess": {"n_draws": 200, "voll_usd_per_mwh": 10000.0, "seed": 42},
    }
    with open(OUT / "config.json", "w") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")
    print(f"wrote {OUT / 'config.json'}")

    # 20-year peak forecast for the capex command demo: ~2.8%/year growth
    # from 47 MW crosses the 60 MW limit between years 9 and 10
    peaks = [47.0 * 1.028 ** a for a in range(20)]
    with open(OUT / "peaks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["year", "value"])
        for a, v in enumerate(peaks, start=1):
            w.writerow([a, f"{v:.3f}"])
    print(f"wrote {OUT / 'peaks.csv'}")


if __name__ == "__main__":
    main()
