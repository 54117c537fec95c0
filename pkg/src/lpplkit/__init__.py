"""Log-periodic power-law (LPPL) fitting for financial time series."""

__version__ = "0.1.0"

from .fitting import FitConfig, FitResult, fit, grid_search, refine_local, solve_linear
from .forecast import Forecast, classify_regime, crash_window
from .model import LpplParams, PaperParams, evaluate, from_paper, residuals, sse, to_paper
from .series import PriceSeries, log_transform, parse_csv, read_csv, slice_window
from .synth import SynthSpec, generate
from .timebase import date_to_decimal_year, decimal_year_to_date
from .windows import ScanResult, scan_windows

__all__ = [
    "FitConfig", "FitResult", "fit", "grid_search", "refine_local", "solve_linear",
    "Forecast", "classify_regime", "crash_window",
    "LpplParams", "PaperParams", "evaluate", "from_paper", "residuals", "sse", "to_paper",
    "PriceSeries", "log_transform", "parse_csv", "read_csv", "slice_window",
    "SynthSpec", "generate",
    "date_to_decimal_year", "decimal_year_to_date",
    "ScanResult", "scan_windows",
]
