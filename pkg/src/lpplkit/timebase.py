"""Calendar dates <-> decimal years on a fixed 365-day calendar.

A date maps to ``year + day_of_year / 365`` where ``day_of_year`` counts
from 1 on a non-leap calendar; Feb 29 shares day 59 with Feb 28.  Under
this convention 2017-10-19 is exactly 2017.80.
"""

from __future__ import annotations

import datetime as _dt
import math

from .errors import InputError

YEAR_DAYS = 365
MIN_TIME = 1800.0
MAX_TIME = 2200.0

# cumulative days before each month on a non-leap calendar
_MONTH_START = (0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334)


def day_of_year(d: _dt.date) -> int:
    if d.month == 2 and d.day == 29:
        return 59
    return _MONTH_START[d.month - 1] + d.day


def date_to_decimal_year(d: _dt.date) -> float:
    if not isinstance(d, _dt.date):
        raise InputError(f"expected a date, got {type(d).__name__}")
    t = d.year + day_of_year(d) / YEAR_DAYS
    if not MIN_TIME <= t <= MAX_TIME:
        raise InputError(f"date {d.isoformat()} outside supported range")
    return t


def _from_day_number(year: int, k: int) -> _dt.date:
    # k in [0, 365]; k == 0 is Dec 31 of the previous year
    if k <= 0:
        return _dt.date(year - 1, 12, 31)
    month = 12
    while _MONTH_START[month - 1] >= k:
        month -= 1
    return _dt.date(year, month, k - _MONTH_START[month - 1])


def decimal_year_to_date(t: float) -> _dt.date:
    """Nearest calendar date to decimal year ``t``; ties go to the earlier date."""
    t = float(t)
    if not math.isfinite(t) or not MIN_TIME <= t <= MAX_TIME:
        raise InputError(f"time {t!r} outside [{MIN_TIME}, {MAX_TIME}]")
    year = math.floor(t)
    x = (t - year) * YEAR_DAYS
    lo = max(0, math.floor(x))
    hi = min(YEAR_DAYS, lo + 1)
    # compare in the decimal-year domain so ties are judged on the same values
    # date_to_decimal_year would produce
    d_lo = abs(year + lo / YEAR_DAYS - t)
    d_hi = abs(year + hi / YEAR_DAYS - t)
    k = hi if d_hi < d_lo else lo
    return _from_day_number(year, k)


def parse_date(text: str) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text.strip())
    except (ValueError, AttributeError) as exc:
        raise InputError(f"invalid ISO-8601 date {text!r}") from exc


def format_date(d: _dt.date) -> str:
    return d.isoformat()


def parse_time(text: str) -> float:
    """Accept either an ISO date or a decimal year."""
    text = text.strip()
    if "-" in text[1:]:
        return date_to_decimal_year(parse_date(text))
    try:
        t = float(text)
    except ValueError as exc:
        raise InputError(f"invalid time {text!r}") from exc
    if not math.isfinite(t) or not MIN_TIME <= t <= MAX_TIME:
        raise InputError(f"time {t!r} outside [{MIN_TIME}, {MAX_TIME}]")
    return t

