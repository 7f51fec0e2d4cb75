import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import covs, day, epi, small_panel
from multievent.panel import MobilityCategory, MobilitySeries, build_panel
from multievent.transforms import (MAIN_OUTCOMES, OutcomeKind, ihs, log_prevalence_array,
                                   log_prevalence_lag, moving_average, outcome_array,
                                   outcome_value, smoothed_cases)


def test_outcome_kinds():
    cases = [k for k in OutcomeKind if k.category is None]
    mob = [k for k in OutcomeKind if k.category is not None]
    assert len(cases) == 2 and len(mob) == 6
    assert len(MAIN_OUTCOMES) == 7 and OutcomeKind.CASES_IHS not in MAIN_OUTCOMES


@pytest.mark.parametrize("series, window, expected", [
    ([5, 5, 5], 3, [5, 5, 5]),
    ([0, 3, 6], 3, [0, 1.5, 3]),
    ([1, 2, 3, 4], 1, [1, 2, 3, 4]),
])
def test_moving_average_fixtures(series, window, expected):
    np.testing.assert_allclose(moving_average(series, window), expected, rtol=0, atol=1e-12)


def test_moving_average_rejects_zero_window_and_empty():
    with pytest.raises(ValueError):
        moving_average([1.0], 0)
    with pytest.raises(ValueError):
        moving_average([], 3)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.integers(1, 10))
def test_moving_average_matches_explicit_trailing_mean(xs, w):
    out = moving_average(xs, w)
    assert len(out) == len(xs)
    for i in range(len(xs)):
        window = xs[max(0, i - w + 1): i + 1]
        assert out[i] == pytest.approx(sum(window) / len(window), rel=1e-9, abs=1e-6)


@given(st.floats(-1e3, 1e3), st.integers(1, 50), st.integers(1, 7))
def test_moving_average_preserves_constants(c, n, w):
    np.testing.assert_allclose(moving_average([c] * n, w), c, rtol=1e-12, atol=1e-9)


def test_ihs_fixtures():
    assert ihs(0) == 0.0
    assert abs(ihs(1) - math.log(1 + math.sqrt(2))) <= 1e-12
    assert ihs(1) == pytest.approx(0.881374, abs=1e-6)
    assert ihs(-2.5) == -ihs(2.5)


def test_ihs_rejects_non_finite():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            ihs(bad)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_ihs_odd_and_increasing(a, b):
    assert ihs(-a) == -ihs(a)
    if a < b:
        assert ihs(a) <= ihs(b)
    # closed form, evaluated where it is numerically safe
    if a >= 0:
        assert ihs(a) == pytest.approx(math.log(a + math.sqrt(a * a + 1)), rel=1e-12, abs=1e-15)


@given(st.floats(10, 1e9))
def test_ihs_log_asymptote(x):
    assert abs(ihs(x) - (math.log(2) + math.log(x))) < 0.005


def _rows(panel, country):
    return [r for r in panel.iter_rows() if r.country == country]


def test_log_prevalence_lag_examples():
    panel = build_panel([], [epi("FRA", [1, 0, 19, 5])], [], [covs("FRA")])
    rows = _rows(panel, "FRA")
    assert log_prevalence_lag(rows[0]) is None          # t = 0
    assert log_prevalence_lag(rows[1]) == 0.0           # lag cumulative 1
    assert log_prevalence_lag(rows[3]) == pytest.approx(math.log(20), abs=1e-12)
    assert log_prevalence_lag(rows[3]) == pytest.approx(2.9957, abs=1e-4)


def test_log_prevalence_undefined_for_zero_lag():
    rows = _rows(build_panel([], [epi("FRA", [0, 2, 0])], [], [covs("FRA")]), "FRA")
    # series starts at the first case so only t = 0 lacks a lag
    assert [log_prevalence_lag(r) is None for r in rows] == [True, False]


def test_outcome_value_examples():
    mob = MobilitySeries("FRA", {MobilityCategory.RESIDENTIAL: {day(0): 12.0}})
    panel = small_panel(mobility=[mob], countries=("FRA",), n_days=3)
    sm = smoothed_cases(panel, "FRA")
    rows = _rows(panel, "FRA")
    const = build_panel([], [epi("FRA", [10] * 5)], [], [covs("FRA")])
    crow = _rows(const, "FRA")
    csm = smoothed_cases(const, "FRA")
    assert outcome_value(crow[4], OutcomeKind.CASES_IHS_MA3, csm) == pytest.approx(2.99822, abs=1e-5)
    assert outcome_value(rows[0], OutcomeKind.RESIDENTIAL, sm) == 12.0
    assert outcome_value(rows[1], OutcomeKind.RESIDENTIAL, sm) is None
    assert outcome_value(rows[0], OutcomeKind.CASES_IHS) == ihs(1.0)


def test_vectorised_outcomes_match_row_functions():
    rng = np.random.default_rng(0)
    countries = ("FRA", "DEU", "ITA")
    epis = [epi(c, rng.integers(0, 50, 12)) for c in countries]
    mob = [MobilitySeries(c, {cat: {day(k): float(rng.normal(0, 20)) for k in range(12)
                                    if rng.random() < 0.7} for cat in MobilityCategory})
           for c in countries[:2]]
    panel = build_panel([], epis, mob, [covs(c) for c in countries])
    lnprev = log_prevalence_array(panel)
    for kind in OutcomeKind:
        arr = outcome_array(panel, kind)
        for i, row in enumerate(panel.iter_rows()):
            v = outcome_value(row, kind, smoothed_cases(panel, row.country))
            if v is None:
                assert np.isnan(arr[i])
            else:
                assert arr[i] == pytest.approx(v, rel=1e-12, abs=1e-12)
    for i, row in enumerate(panel.iter_rows()):
        v = log_prevalence_lag(row)
        assert (np.isnan(lnprev[i]) if v is None else lnprev[i] == v)
