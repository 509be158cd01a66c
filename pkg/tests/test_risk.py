import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from bidask.errors import InvalidInputError
from bidask.market import ObservableSeries
from bidask.risk import MID_Q95_MULTIPLIER, mid_volatility, risk_report, spread_var95
from bidask.spread import SpreadDistParams, cdf_table

from conftest import REL_SPREAD_PARAMS


def test_mid_volatility_examples():
    assert mid_volatility([100, 100, 100]) == 0.0
    assert mid_volatility([1, -1]) == 1.0
    assert mid_volatility([1, 2, 3, 4]) == np.sqrt(1.25)


def test_mid_volatility_normal_sample():
    x = np.random.default_rng(0).normal(0, 2, 100_000)
    assert mid_volatility(x) == pytest.approx(2.0, rel=0.02)


def test_mid_volatility_errors():
    with pytest.raises(InvalidInputError):
        mid_volatility([1.0])
    with pytest.raises(InvalidInputError):
        mid_volatility([1.0, np.nan])


@settings(max_examples=100)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=50), st.floats(-1e3, 1e3), st.floats(0.01, 100))
def test_mid_volatility_affine(x, shift, scale):
    x = np.asarray(x)
    s = mid_volatility(x)
    assert mid_volatility(x + shift) == pytest.approx(s, rel=1e-6, abs=1e-6)
    assert mid_volatility(scale * x) == pytest.approx(scale * s, rel=1e-9, abs=1e-9)


def test_rayleigh_quantile():
    q = spread_var95(SpreadDistParams(0, 1, 0, 1), 100_000, seed=0)
    assert q.value == pytest.approx(np.sqrt(-2 * np.log(0.05)), rel=0.01)
    assert 0 < q.std_error < 0.02
    assert q.mean == pytest.approx(np.sqrt(np.pi / 2), rel=0.01)


def test_point_mass_quantile():
    q = spread_var95(SpreadDistParams(3, 0, 4, 0), 10_000, seed=0)
    assert q.value == 5.0 and q.std_error == 0.0


def test_msft_matches_quadrature_cdf():
    xi1, k0, k1 = REL_SPREAD_PARAMS["MSFT"]
    p = SpreadDistParams(0, xi1 * 1e-3, k0 * 1e-3, k1 * 1e-3)
    grid, cdf = cdf_table(p)
    i = np.searchsorted(cdf, 0.95)
    oracle = optimize.brentq(lambda v: np.interp(v, grid, cdf) - 0.95, grid[i - 1], grid[i])
    q = spread_var95(p, 100_000, seed=1)
    assert q.value == pytest.approx(oracle, rel=0.01)


def test_n_mc_floor():
    with pytest.raises(InvalidInputError):
        spread_var95(SpreadDistParams(0, 1, 0, 1), 9_999)


def test_monotone_in_scales():
    grid = [0.1, 0.2, 0.4, 0.8]
    for k0 in (0.0, 0.5):
        for fixed in grid:
            by_xi = [spread_var95(SpreadDistParams(0, v, k0, fixed), 10_000, seed=3, n_boot=2).value for v in grid]
            by_k = [spread_var95(SpreadDistParams(0, fixed, k0, v), 10_000, seed=3, n_boot=2).value for v in grid]
            assert np.all(np.diff(by_xi) >= 0)
            assert np.all(np.diff(by_k) >= 0)


def test_quantile_converges():
    p = SpreadDistParams(0, 0.42, 0.55, 0.07)
    a = spread_var95(p, 100_000, seed=4)
    b = spread_var95(p, 200_000, seed=4)
    assert abs(a.value - b.value) < 3 * a.std_error


def test_quantile_deterministic():
    p = SpreadDistParams(0, 1, 0.5, 0.5)
    assert spread_var95(p, 20_000, seed=9) == spread_var95(p, 20_000, seed=9)


def _obs(mids):
    return ObservableSeries(np.full(len(mids), 1e-3), np.asarray(mids, dtype=float))


def test_degenerate_report():
    rep = risk_report(_obs([50.0] * 10), SpreadDistParams(3, 0, 4, 0), n_mc=10_000)
    assert rep.mid_sigma == 0.0 and rep.mid_var95 == 0.0
    assert rep.spread_var95 == 5.0 and rep.spread_mean == 5.0


def test_report_fields():
    rep = risk_report(_obs([1, 2, 4, 8]), SpreadDistParams(0, 0.3, 0.2, 0.1), n_mc=20_000, seed=2)
    assert rep.mid_var95 == MID_Q95_MULTIPLIER * rep.mid_sigma
    assert MID_Q95_MULTIPLIER == 1.65
    assert rep.spread_var95 >= rep.spread_mean >= 0
    assert rep.n_samples_used == 20_000
    d = json.loads(rep.to_json())
    assert d["mid_var95"] == rep.mid_var95
    text = rep.to_text()
    assert "mid" in text and "spread" in text


def test_report_byte_identical():
    args = (_obs([1, 2, 4, 8]), SpreadDistParams(0, 0.3, 0.2, 0.1))
    assert risk_report(*args, n_mc=20_000, seed=5).to_json() == risk_report(*args, n_mc=20_000, seed=5).to_json()


def test_report_rejects_bad_fit():
    with pytest.raises(InvalidInputError):
        risk_report(_obs([1, 2]), {"xi1": 1})
