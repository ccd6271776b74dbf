import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgwfbst.exceptions import PexeFitError
from lgwfbst.mixture import Dataset
from lgwfbst.pexe import fit_pexe, survival_at, write_curve

from oracles import nelson_aalen


def censored_sample(seed, n=200, all_dead=False):
    rng = np.random.default_rng(seed)
    t = rng.weibull(2.0, n) * 10.0
    if all_dead:
        return Dataset(t, np.ones(n, dtype=int))
    c = rng.exponential(15.0, n)
    return Dataset(np.minimum(t, c), (t <= c).astype(int))


def test_single_subject():
    fit = fit_pexe(Dataset([2.0], [1]))
    np.testing.assert_array_equal(fit.breakpoints, [2.0])
    np.testing.assert_allclose(fit.rates, [0.5])
    t = np.array([0.0, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(survival_at(fit, t), np.exp(-t / 2), rtol=1e-15)
    assert survival_at(fit, 2.0) == pytest.approx(math.exp(-1))


def test_all_censored_is_an_error():
    with pytest.raises(PexeFitError):
        fit_pexe(Dataset([1.0, 2.0], [0, 0]))


def test_duplicate_deaths_collapse():
    fit = fit_pexe(Dataset([1.0, 1.0, 1.0, 3.0, 4.0], [1, 1, 1, 0, 1]))
    np.testing.assert_array_equal(fit.breakpoints, [1.0, 4.0])
    np.testing.assert_array_equal(fit.deaths, [3, 1])
    # (0,1]: five subjects at risk for one unit; (1,4]: 3 - 1 + 4 - 1 = 5
    np.testing.assert_allclose(fit.rates, [3 / 5, 1 / 5])


def test_censored_subjects_contribute_exposure():
    fit = fit_pexe(Dataset([1.0, 2.0, 3.0], [0, 1, 1]))
    # (0,2]: 1 + 2 + 2 = 5; (2,3]: 1
    np.testing.assert_allclose(fit.rates, [1 / 5, 1.0])


def test_start_and_interpolation():
    fit = fit_pexe(censored_sample(1))
    assert survival_at(fit, 0.0) == 1.0
    t0, t1 = fit.breakpoints[3], fit.breakpoints[4]
    s0, s1 = survival_at(fit, [t0, t1])
    assert survival_at(fit, 0.5 * (t0 + t1)) == pytest.approx(math.sqrt(s0 * s1), rel=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_continuity_at_breakpoints(seed):
    fit = fit_pexe(censored_sample(seed))
    b = fit.breakpoints
    left = survival_at(fit, np.nextafter(b, 0))
    at = survival_at(fit, b)
    right = survival_at(fit, np.nextafter(b, np.inf))
    np.testing.assert_allclose(left, at, rtol=1e-12)
    np.testing.assert_allclose(right, at, rtol=1e-12)
    # the left and right limits of the cumulative hazard agree exactly
    h = fit.cumulative_hazard
    left_limit = np.concatenate([[0.0], np.cumsum(fit.rates * np.diff(np.concatenate([[0.0], b])))])[1:]
    np.testing.assert_allclose(h(b), left_limit, rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 80))
def test_monotone_and_bounded(seed, n):
    d = censored_sample(seed, n)
    if not d.event.any():
        return
    fit = fit_pexe(d)
    grid = np.linspace(0.0, 2 * d.time.max(), 2_001)
    s = survival_at(fit, grid)
    assert np.all(np.diff(s) <= 0)
    assert np.all((s > 0) & (s <= 1))
    assert np.all(fit.rates >= 0) and np.all(np.diff(fit.breakpoints) > 0)


@pytest.mark.parametrize("seed", range(5))
def test_nelson_aalen_agreement_on_uncensored_data(seed):
    d = censored_sample(seed, all_dead=True)
    fit = fit_pexe(d)
    times, na = nelson_aalen(d.time, d.event)
    h_last = fit.cumulative_hazard(times[-1])
    assert abs(h_last - na[-1]) <= 0.15 * na[-1]


def test_extrapolation_uses_last_rate_and_is_flagged():
    fit = fit_pexe(Dataset([1.0, 2.0, 5.0], [1, 1, 0]))
    end = fit.support_end
    assert end == 2.0
    assert fit.extrapolated([1.5, 2.0, 3.0]).tolist() == [False, False, True]
    s_end = survival_at(fit, end)
    assert survival_at(fit, end + 2.0) == pytest.approx(s_end * math.exp(-2.0 * fit.rates[-1]), rel=1e-14)


def test_negative_time_rejected():
    fit = fit_pexe(Dataset([2.0], [1]))
    with pytest.raises(ValueError):
        survival_at(fit, -1.0)


def test_curve_export(tmp_path):
    fit = fit_pexe(censored_sample(2))
    grid = np.linspace(0, 20, 11)
    path = tmp_path / "pexe.csv"
    write_curve(fit, grid, path)
    assert path.read_text().splitlines()[0] == "t,survival"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1], survival_at(fit, grid))
