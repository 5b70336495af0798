import numpy as np
import pytest

from nwaplan.capex import CapexParams, capex_year, min_present_cost, present_cost
from nwaplan.timegrid import ConfigError, Discount


@pytest.fixture
def params():
    return CapexParams(cost=1e8, limit=60.0, discount=Discount(0.07))


def test_expansion_year_examples(params):
    peaks = [50, 55, 61, 62, 63]
    assert capex_year(peaks, 60.0, 5) == 2
    assert capex_year([50, 52, 55], 60.0, 3) == 3  # never reached
    assert capex_year([61, 62], 60.0, 2) == 0  # immediate


def test_present_cost_values(params):
    assert present_cost(params, 0, 20) == pytest.approx(1e8)
    assert present_cost(params, 9, 20) == pytest.approx(5.43934e7, abs=1e2)
    assert present_cost(params, 14, 20) == pytest.approx(3.87817e7, abs=1e2)


def test_present_cost_strictly_decreasing(params):
    vals = [present_cost(params, d, 20) for d in range(21)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_present_cost_range_checked(params):
    with pytest.raises(ValueError):
        present_cost(params, -1, 20)
    with pytest.raises(ValueError):
        present_cost(params, 21, 20)


def test_min_present_cost_examples(params):
    delta, cost = min_present_cost([50, 55, 61, 62, 63], params)
    assert delta == 2
    assert cost == pytest.approx(1e8 / 1.07**2)
    delta, cost = min_present_cost([70, 70], params)
    assert delta == 0 and cost == pytest.approx(1e8)
    delta, cost = min_present_cost([50, 50, 50], params)
    assert delta == 3  # discounting favors the latest year


def test_timing_rule_equals_optimization_everywhere():
    rng = np.random.default_rng(123)
    p = CapexParams(cost=1e8, limit=60.0, discount=Discount(0.07))
    for _ in range(5000):
        n = int(rng.integers(1, 26))
        peaks = rng.uniform(30, 90, n)
        d1 = capex_year(peaks, p.limit, n)
        d2, cost = min_present_cost(peaks, p)
        assert d1 == d2
        assert present_cost(p, d1, n) == cost


def test_params_validation():
    with pytest.raises(ConfigError):
        CapexParams(-1.0, 60.0, Discount(0.07))
    with pytest.raises(ConfigError):
        CapexParams(1e8, 0.0, Discount(0.07))
