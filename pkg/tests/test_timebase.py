from __future__ import annotations

import calendar
import datetime as dt

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpplkit.errors import InputError
from lpplkit.timebase import date_to_decimal_year, decimal_year_to_date, parse_time


def oracle_day(d: dt.date) -> int:
    """Day count on a 365-day calendar, derived from the stdlib's tm_yday."""
    k = d.timetuple().tm_yday
    if calendar.isleap(d.year) and k >= 60:
        k -= 1
    return k


def nearest_by_enumeration(t: float) -> dt.date:
    year = int(t)
    days = [dt.date(year, 1, 1) + dt.timedelta(i) for i in range(366)]
    days = [d for d in days if d.year == year] + [dt.date(year - 1, 12, 31)]
    return min(days, key=lambda d: (abs(d.year + oracle_day(d) / 365 - t)
                                    if d.year == year else abs(year - t), d))


def test_anchor_is_exact():
    assert date_to_decimal_year(dt.date(2017, 10, 19)) == 2017.8
    assert decimal_year_to_date(2017.80) == dt.date(2017, 10, 19)


def test_first_day_of_year():
    assert date_to_decimal_year(dt.date(2017, 1, 1)) == pytest.approx(2017.00274, abs=5e-6)
    assert decimal_year_to_date(2017.00274) == dt.date(2017, 1, 1)


def test_far_singularity_by_enumeration():
    assert nearest_by_enumeration(2045.853) == dt.date(2045, 11, 7)
    assert decimal_year_to_date(2045.853) == dt.date(2045, 11, 7)
    assert date_to_decimal_year(dt.date(2045, 11, 7)) == 2045 + 311 / 365


def test_year_boundary():
    assert decimal_year_to_date(2020.0) == dt.date(2019, 12, 31)
    assert date_to_decimal_year(dt.date(2019, 12, 31)) == 2020.0


@pytest.mark.parametrize("year", [1900, 1933, 2000, 2016, 2017, 2045])
def test_every_day_round_trips(year):
    d = dt.date(year, 1, 1)
    while d.year == year:
        t = date_to_decimal_year(d)
        assert t == year + oracle_day(d) / 365
        expected = dt.date(year, 2, 28) if (d.month, d.day) == (2, 29) else d
        assert decimal_year_to_date(t) == expected
        d += dt.timedelta(1)


def test_leap_day_shares_feb_28():
    assert date_to_decimal_year(dt.date(2016, 2, 29)) == date_to_decimal_year(dt.date(2016, 2, 28))


@given(st.dates(min_value=dt.date(1801, 1, 1), max_value=dt.date(2199, 12, 30)),
       st.dates(min_value=dt.date(1801, 1, 1), max_value=dt.date(2199, 12, 30)))
def test_monotone(a, b):
    if a < b:
        assert date_to_decimal_year(a) <= date_to_decimal_year(b)


@given(st.floats(min_value=1801.0, max_value=2199.0))
def test_inverse_matches_enumeration(t):
    assert decimal_year_to_date(t) == nearest_by_enumeration(t)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), 1500.0, 2500.0])
def test_out_of_range_time(bad):
    with pytest.raises(InputError):
        decimal_year_to_date(bad)


def test_parse_time_accepts_both_forms():
    assert parse_time("2017-10-19") == 2017.8
    assert parse_time("2017.8") == 2017.8
    with pytest.raises(InputError):
        parse_time("2017-13-01")
    with pytest.raises(InputError):
        parse_time("soon")
