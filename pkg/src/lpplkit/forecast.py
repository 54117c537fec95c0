"""Calendar forecasts from a fitted critical time."""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from typing import Literal

from .errors import IndeterminateRegimeError, UnreliableForecastError
from .fitting import FitResult
from .model import LpplParams
from .timebase import decimal_year_to_date

Regime = Literal["bubble", "antibubble"]

# average lead of the crash ahead of tc, in months
CRASH_LEAD_MONTHS = 1.4
CRASH_LEAD_YEARS = CRASH_LEAD_MONTHS / 12.0


def classify_regime(params: LpplParams) -> Regime:
    """``bubble`` when the trend ``A + B tau^alpha`` rises as t approaches tc.

    d/dt (B tau^alpha) = -alpha B tau^(alpha - 1), whose sign is that of
    ``-alpha * B`` everywhere before tc.
    """
    if params.B == 0:
        raise IndeterminateRegimeError("B = 0: the trend is flat")
    return "bubble" if params.alpha * params.B < 0 else "antibubble"


@dataclass(frozen=True)
class Forecast:
    tc: float
    tc_date: _dt.date
    crash_window: tuple[_dt.date, _dt.date]
    regime: Regime
    source_fit: FitResult

    def to_dict(self) -> dict:
        return {
            "tc": self.tc,
            "tc_date": self.tc_date.isoformat(),
            "crash_window": {
                "start": self.crash_window[0].isoformat(),
                "end": self.crash_window[1].isoformat(),
            },
            "regime": self.regime,
            "lead_time": {
                "months": CRASH_LEAD_MONTHS,
                "years": CRASH_LEAD_YEARS,
                "convention": "average lead of the crash ahead of tc, "
                "1.4/12 decimal years on a fixed 365-day calendar",
            },
            "source_fit": self.source_fit.to_dict(),
        }

    def summary(self) -> str:
        start, end = self.crash_window
        kind = "bubble (growth accelerating toward tc)" if self.regime == "bubble" else (
            "anti-bubble (trend unwinding)"
        )
        return (
            f"Critical time tc = {self.tc:.3f} ({self.tc_date.isoformat()}). "
            f"Regime: {kind}. Expected crash window {start.isoformat()} to {end.isoformat()}, "
            f"i.e. starting {CRASH_LEAD_MONTHS} months (average lead) before tc, "
            f"with months converted as 1/12 year on a 365-day calendar. "
            f"Fit: {self.source_fit.n_points} points, RMSE {self.source_fit.rmse:.4g}."
        )


def crash_window(fr: FitResult) -> Forecast:
    if not fr.converged:
        raise UnreliableForecastError("fit did not converge; refusing to forecast")
    tc = fr.params.tc
    return Forecast(
        tc=tc,
        tc_date=decimal_year_to_date(tc),
        crash_window=(decimal_year_to_date(tc - CRASH_LEAD_YEARS), decimal_year_to_date(tc)),
        regime=classify_regime(fr.params),
        source_fit=fr,
    )
