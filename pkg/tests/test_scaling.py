import math

import numpy as np
import pytest

from cdfsched.analytic import SinrDistribution, solve_level
from cdfsched.scaling import (
    ScalingSweep,
    concentration_window,
    eq27_bound,
    fit_lll_constant,
    gumbel_attraction_check,
    in_window_frequency,
    scaling_ratio_sweep,
)
from cdfsched.scenario import Scenario

GRID = [10**j for j in range(3, 10)]


def test_window_reference_values():
    d = SinrDistribution(1, 1.0)
    lo, hi = concentration_window(d, 1e4)
    lk = math.log(1e4)
    np.testing.assert_allclose(lo, lk - math.log(lk), rtol=1e-15)
    np.testing.assert_allclose(hi, lk + math.log(lk), rtol=1e-15)
    np.testing.assert_allclose([lo, hi], [6.990014, 11.430667], atol=1e-6)
    with pytest.raises(ValueError):
        concentration_window(d, 10)


@pytest.mark.parametrize("d", [SinrDistribution(2, 0.5, (3.0,)), SinrDistribution(4, 2.0, (1.0, 0.2))])
def test_window_width_identity(d):
    for K0 in (16, 1e3, 1e9):
        lo, hi = concentration_window(d, K0)
        np.testing.assert_allclose(hi - lo, 2 * d.rho_serving * math.log(math.log(K0)), rtol=1e-12)
        assert lo < hi


@pytest.mark.parametrize("d", [SinrDistribution(1, 1.0), SinrDistribution(1, 1.0, (1.0,))])
def test_window_holds_level_crossing_for_short_tails(d):
    for K0 in [10**j for j in range(2, 10)]:
        lo, hi = concentration_window(d, K0)
        assert lo < solve_level(d, K0).w < hi


def test_sweep_exponential_cell():
    s = Scenario.from_rhos(1, [(1.0, [])])
    sw = scaling_ratio_sweep(s, 0, [10**3, 10**8])
    r = sw.column("scaling_ratio")
    assert abs(r[1] - 1) < abs(r[0] - 1)
    assert np.all(sw.column("eq27_bound") >= sw.column("rate_bits"))
    assert sw.k0_grid == [1000, 10**8]
    assert sw.rows[0].mc_in_window_freq is None


def test_sweep_rows_consistent():
    s = Scenario.from_rhos(2, [(1.0, [0.5]), (2.0, [])])
    sw = scaling_ratio_sweep(s, 0, GRID)
    w = sw.column("w")
    assert np.all(np.diff(w) > 0)
    assert np.all((sw.column("w_lb") <= w) & (w <= sw.column("w_ub")))
    assert np.all(sw.column("scaling_ratio") > 0)
    d = SinrDistribution(2, 1.0, (0.5,))
    row = sw.rows[2]
    np.testing.assert_allclose(row.eq27_bound, eq27_bound(d, row.K0, row.w))
    np.testing.assert_allclose(
        row.scaling_ratio, row.rate_bits / (2 * math.log2(math.e) * math.log(math.log(row.K0)))
    )


def test_sweep_grid_validation():
    s = Scenario.from_rhos(1, [(1.0, [])])
    for bad in ([], [8, 100], [100, 100], [1000, 100]):
        with pytest.raises(ValueError):
            scaling_ratio_sweep(s, 0, bad)


def test_columns():
    assert ScalingSweep.columns()[-1] == "eq27_bound"
    assert ScalingSweep.columns(with_mc=True)[-1] == "mc_in_window_freq"


def test_fit_constant():
    K0 = np.array([1e3, 1e6])
    c = fit_lll_constant(K0, 2.0 * np.log(np.log(np.log(K0))))
    np.testing.assert_allclose(c, 2.0)


def test_gumbel_check():
    rep = gumbel_attraction_check(SinrDistribution(1, 1.0))
    assert rep.passed and np.all(rep.criterion == 0.0)
    rep = gumbel_attraction_check(SinrDistribution(2, 1.0, (0.5,)))
    assert rep.passed
    assert abs(rep.criterion[-1]) < 1e-9
    np.testing.assert_allclose(rep.von_mises[6], 1.0, atol=1e-6)


def test_in_window_frequency_exponential():
    s = Scenario.from_rhos(1, [(1.0, [])])
    f = in_window_frequency(s, 0, 100, trials=4000, seed=1)
    # max of 100 unit exponentials minus ln 100 is close to Gumbel
    lk = math.log(100)
    llk = math.log(lk)
    p = math.exp(-math.exp(-llk)) - math.exp(-math.exp(llk))
    assert abs(f - p) < 4 * math.sqrt(p * (1 - p) / 4000) + 0.01
