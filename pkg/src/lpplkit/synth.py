"""Synthetic LPPL series with seeded Gaussian noise.

Noise comes from ``numpy.random.Generator(PCG64(seed)).normal`` and is
added in the units of ``params.scale``: additive on raw prices, and on
log-prices (hence multiplicative on price) for log-scale params.  The
generator algorithm is part of the contract; fixtures depend on it.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigError, GenerationError
from .model import LpplParams, evaluate
from .series import PriceSeries
from .timebase import date_to_decimal_year, decimal_year_to_date

Spacing = Literal["uniform", "trading"]


@dataclass(frozen=True)
class SynthSpec:
    params: LpplParams
    t_start: float
    t_end: float
    n_points: int
    spacing: Spacing = "uniform"
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.t_start < self.t_end:
            raise ConfigError("t_start must precede t_end")
        if not self.t_end < self.params.tc:
            raise ConfigError("t_end must precede tc")
        if self.n_points < 2:
            raise ConfigError("n_points must be at least 2")
        if not self.noise_sigma >= 0:
            raise ConfigError("noise_sigma must be non-negative")
        if self.spacing not in ("uniform", "trading"):
            raise ConfigError(f"unknown spacing {self.spacing!r}")

    def to_dict(self) -> dict:
        d = self.params.to_dict()
        d.update(t_start=self.t_start, t_end=self.t_end, n_points=self.n_points,
                 spacing=self.spacing, noise_sigma=self.noise_sigma, seed=self.seed)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SynthSpec:
        try:
            params = LpplParams.from_dict(d)
            return cls(
                params=params, t_start=float(d["t_start"]), t_end=float(d["t_end"]),
                n_points=int(d["n_points"]), spacing=d.get("spacing", "uniform"),
                noise_sigma=float(d.get("noise_sigma", 0.0)), seed=int(d.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid synth spec: {exc}") from exc

    @classmethod
    def load(cls, path) -> SynthSpec:
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read synth spec {path}: {exc}") from exc


def sample_times(spec: SynthSpec) -> np.ndarray:
    if spec.spacing == "uniform":
        return np.linspace(spec.t_start, spec.t_end, spec.n_points)
    # weekdays between the two dates, thinned evenly to n_points
    first = decimal_year_to_date(spec.t_start).toordinal()
    last = decimal_year_to_date(spec.t_end).toordinal()
    days = [o for o in range(first, last + 1) if (o - 1) % 7 < 5]  # ordinal 1 is a Monday
    times = np.unique([date_to_decimal_year(datetime.date.fromordinal(o)) for o in days])
    times = times[(times >= spec.t_start) & (times <= spec.t_end)]
    if times.size < spec.n_points:
        raise GenerationError(f"only {times.size} weekdays in range, {spec.n_points} requested")
    idx = np.unique(np.round(np.linspace(0, times.size - 1, spec.n_points)).astype(int))
    return times[idx]


def generate(spec: SynthSpec) -> PriceSeries:
    t = sample_times(spec)
    p = evaluate(spec.params, t)
    if spec.noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        p = p + rng.normal(0.0, spec.noise_sigma, size=t.size)
    if spec.params.scale == "raw" and np.any(p <= 0):
        i = int(np.argmax(p <= 0))
        raise GenerationError(f"non-positive price {p[i]!r} at t={t[i]!r} (point {i})")
    return PriceSeries(t, p, label="synthetic", scale=spec.params.scale)
