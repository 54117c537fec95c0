"""Price series: ingestion, validation, windowing and transforms."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Literal, TextIO

import numpy as np

from .errors import EmptyWindowError, FormatError, InputError, StateError, ValidationError
from .timebase import date_to_decimal_year, decimal_year_to_date, format_date, parse_date

log = logging.getLogger(__name__)

Scale = Literal["raw", "log"]

# smallest window the fitter accepts; FitConfig.min_points may raise it
MIN_POINTS = 8

# header names tried, in order, for each column choice
COLUMN_HEADERS = {
    "close": ("Close", "Price"),
    "adjusted_close": ("Adj Close", "Adj_Close", "Adjusted Close", "Adj. Close"),
}
COLUMN_ALIASES = {"adjclose": "adjusted_close", "adj_close": "adjusted_close"}


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Ordered ``(t, p)`` observations on the decimal-year axis.

    Arrays are copied and frozen on construction; every operation returns
    a new series.
    """

    times: np.ndarray
    prices: np.ndarray
    label: str = ""
    scale: Scale = "raw"

    def __post_init__(self) -> None:
        t = np.array(self.times, dtype=float).ravel()
        p = np.array(self.prices, dtype=float).ravel()
        if t.shape != p.shape:
            raise ValidationError("times and prices differ in length")
        if t.size < 2:
            raise ValidationError("a series needs at least 2 points")
        if not np.all(np.isfinite(t)):
            raise ValidationError("non-finite time")
        if not np.all(np.diff(t) > 0):
            raise ValidationError("times must be strictly increasing")
        if not np.all(np.isfinite(p)):
            raise ValidationError("non-finite price")
        if self.scale not in ("raw", "log"):
            raise ValidationError(f"unknown scale {self.scale!r}")
        if self.scale == "raw" and not np.all(p > 0):
            i = int(np.argmin(p > 0))
            raise ValidationError(f"non-positive price {p[i]!r} at t={t[i]!r}")
        t.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "prices", p)

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.label == other.label
            and self.scale == other.scale
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.prices, other.prices)
        )

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def last_interval(self) -> float:
        return float(self.times[-1] - self.times[-2])


def _resolve_column(header: list[str], column: str) -> int:
    key = COLUMN_ALIASES.get(column, column)
    names = COLUMN_HEADERS.get(key, (column,))
    stripped = [h.strip() for h in header]
    for name in names:
        if name in stripped:
            return stripped.index(name)
    raise FormatError(f"column {names[0]!r} not found in header {stripped}")


def parse_csv(
    source: str | TextIO, column: str = "close", label: str = "", scale: Scale = "raw"
) -> PriceSeries:
    """Read a ``Date,<price>`` CSV (a Yahoo-Finance export works as-is).

    If a ``Time`` column is present it holds exact decimal years and takes
    precedence over ``Date``; the series writer emits one so that
    non-calendar-aligned times survive a round trip.

    Feb 29 shares its decimal year with Feb 28, so when both are present
    the Feb 29 row is dropped (with a warning).
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty CSV input") from None
    header = [h.lstrip("\ufeff") for h in header]
    stripped = [h.strip() for h in header]
    if "Date" not in stripped:
        raise FormatError(f"column 'Date' not found in header {stripped}")
    i_date = stripped.index("Date")
    i_time = stripped.index("Time") if "Time" in stripped else None
    i_price = _resolve_column(header, column)

    rows: list[tuple[float, float, str]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            date_text = row[i_date]
            t = date_to_decimal_year(parse_date(date_text))
            if i_time is not None:
                t = float(row[i_time])
            p = float(row[i_price])
        except (IndexError, ValueError, InputError) as exc:
            raise FormatError(f"line {lineno}: cannot parse row {row!r}: {exc}") from None
        if not math.isfinite(p):
            raise FormatError(f"line {lineno}: non-finite price {row[i_price]!r}")
        if scale == "raw" and p <= 0:
            raise ValidationError(f"line {lineno}: non-positive price {p!r}")
        rows.append((t, p, date_text.strip()))

    rows.sort(key=lambda r: (r[0], r[2]))
    kept: list[tuple[float, float, str]] = []
    dropped = []
    for r in rows:
        if kept and kept[-1][0] == r[0]:
            if r[2] == kept[-1][2] or not r[2].endswith("-02-29"):
                raise ValidationError(f"duplicate date {r[2]}")
            dropped.append(r[2])
            continue
        kept.append(r)
    if dropped:
        log.warning("dropped %d Feb 29 row(s) sharing a decimal year with Feb 28: %s",
                    len(dropped), ", ".join(dropped))
    rows = kept
    if len(rows) < 2:
        raise ValidationError(f"need at least 2 rows, got {len(rows)}")
    return PriceSeries(
        np.array([r[0] for r in rows]), np.array([r[1] for r in rows]), label=label, scale=scale
    )


def read_csv(path, column: str = "close", scale: Scale = "raw") -> PriceSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh, column=column, label=str(path), scale=scale)


def to_csv(s: PriceSeries) -> str:
    """Serialize as ``Date,Time,Price`` (``repr`` floats, so parsing is exact)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["Date", "Time", "Price"])
    for t, p in zip(s.times, s.prices):
        w.writerow([format_date(decimal_year_to_date(t)), repr(float(t)), repr(float(p))])
    return out.getvalue()


def slice_window(s: PriceSeries, start: float, end: float, min_points: int = MIN_POINTS) -> PriceSeries:
    if not start < end:
        raise InputError(f"window start {start} must precede end {end}")
    mask = (s.times >= start) & (s.times <= end)
    n = int(mask.sum())
    if n < max(min_points, 2):
        raise EmptyWindowError(f"window [{start}, {end}] holds {n} points, need {max(min_points, 2)}")
    return PriceSeries(s.times[mask], s.prices[mask], label=s.label, scale=s.scale)


def log_transform(s: PriceSeries) -> PriceSeries:
    if s.scale != "raw":
        raise StateError("series is already log-scaled")
    return PriceSeries(s.times, np.log(s.prices), label=s.label, scale="log")


def last_per_month(s: PriceSeries) -> PriceSeries:
    """Keep the final observation of each calendar month."""
    keys = [(d.year, d.month) for d in map(decimal_year_to_date, s.times)]
    keep = [i for i in range(len(keys)) if i == len(keys) - 1 or keys[i] != keys[i + 1]]
    return PriceSeries(s.times[keep], s.prices[keep], label=s.label, scale=s.scale)

