"""Window scans: refit with a fixed end and varying start, then summarize tc."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InputError, LpplError, ScanFailedError
from .fitting import FitConfig, FitResult, fit
from .series import PriceSeries, slice_window

DEFAULT_STABILITY_THRESHOLD = 0.25
DEFAULT_MIN_SUCCESSES = 3

STABILITY_CRITERION = (
    "heuristic: stable when the interquartile range of tc over successful windows "
    "is at most the threshold and at least the minimum number of windows succeeded"
)


@dataclass(frozen=True)
class ScanEntry:
    start: float
    end: float
    result: FitResult | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None


@dataclass(frozen=True)
class ScanResult:
    entries: tuple[ScanEntry, ...]
    tc_median: float
    tc_iqr: float
    stable: bool
    stability_threshold: float
    min_successes: int

    @property
    def successes(self) -> list[ScanEntry]:
        return [e for e in self.entries if e.ok]

    def to_dict(self) -> dict:
        return {
            "tc_median": self.tc_median,
            "tc_iqr": self.tc_iqr,
            "stable": self.stable,
            "stability_threshold": self.stability_threshold,
            "min_successes": self.min_successes,
            "n_success": len(self.successes),
            "stability_criterion": STABILITY_CRITERION,
            "entries": [
                {
                    "start": e.start,
                    "end": e.end,
                    "fit": e.result.to_dict() if e.result else None,
                    "error": e.error,
                }
                for e in self.entries
            ],
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["start", "end", "tc", "sse", "converged"])
        for e in self.entries:
            if e.result:
                w.writerow([repr(e.start), repr(e.end), repr(e.result.params.tc),
                            repr(e.result.sse), e.result.converged])
            else:
                w.writerow([repr(e.start), repr(e.end), "", "", ""])
        return out.getvalue()


def tc_stats(tcs) -> tuple[float, float]:
    """Median and interquartile range (linear interpolation)."""
    tcs = np.asarray(tcs, dtype=float)
    q1, med, q3 = np.percentile(tcs, [25, 50, 75])
    return float(med), float(q3 - q1)


def scan_windows(
    s: PriceSeries,
    starts,
    end: float,
    cfg: FitConfig | None = None,
    stability_threshold: float = DEFAULT_STABILITY_THRESHOLD,
    min_successes: int = DEFAULT_MIN_SUCCESSES,
) -> ScanResult:
    cfg = cfg or FitConfig()
    starts = sorted(float(x) for x in starts)
    if not starts:
        raise InputError("no window starts given")
    bad = [x for x in starts if not x < end]
    if bad:
        raise InputError(f"window starts not before end {end}: {bad}")
    if end > s.end:
        raise InputError(f"end {end} is after the last observation {s.end}")

    def one(start: float) -> ScanEntry:
        try:
            w = slice_window(s, start, end, cfg.min_points)
            return ScanEntry(start, end, fit(w, cfg))
        except LpplError as exc:
            return ScanEntry(start, end, None, f"{type(exc).__name__}: {exc}")

    entries = tuple(one(x) for x in starts)
    good = [e.result.params.tc for e in entries if e.ok]
    if not good:
        raise ScanFailedError(
            "no window could be fitted",
            [f"[{e.start}, {e.end}]: {e.error}" for e in entries],
        )
    med, iqr = tc_stats(good)
    stable = iqr <= stability_threshold and len(good) >= min_successes
    return ScanResult(entries, med, iqr, stable, stability_threshold, min_successes)
