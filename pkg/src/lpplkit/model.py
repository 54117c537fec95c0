"""The log-periodic power-law model.

Two parameterizations are supported.  The *published* form

    p(t) = A - m * tau**alpha * (1 + C * cos(omega * ln(tau) + phi)),  tau = tc - t

and the *linearized* form used internally

    p(t) = A + B * tau**alpha + tau**alpha * (C1 * cos(omega * ln tau) + C2 * sin(omega * ln tau))

in which A, B, C1, C2 enter linearly.  ``scale`` records whether ``p`` is a
raw price or a log-price.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateParameterError, DomainError, StateError, ValidationError
from .series import PriceSeries, Scale

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LpplParams:
    tc: float
    alpha: float
    omega: float
    A: float
    B: float
    C1: float
    C2: float
    scale: Scale = "raw"

    def __post_init__(self) -> None:
        vals = (self.tc, self.alpha, self.omega, self.A, self.B, self.C1, self.C2)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"non-finite parameter in {self}")
        if self.alpha == 0:
            raise ValidationError("alpha must be non-zero")
        if not self.omega > 0:
            raise ValidationError("omega must be positive")
        if self.scale not in ("raw", "log"):
            raise ValidationError(f"unknown scale {self.scale!r}")

    @property
    def linear(self) -> tuple[float, float, float, float]:
        return (self.A, self.B, self.C1, self.C2)

    @property
    def nonlinear(self) -> tuple[float, float, float]:
        return (self.tc, self.alpha, self.omega)

    def oscillation_amplitude(self) -> float:
        return math.hypot(self.C1, self.C2)

    def to_dict(self) -> dict:
        return {k: (float(v) if k != "scale" else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> LpplParams:
        return cls(
            tc=float(d["tc"]), alpha=float(d["alpha"]), omega=float(d["omega"]),
            A=float(d["A"]), B=float(d["B"]), C1=float(d["C1"]), C2=float(d["C2"]),
            scale=d.get("scale", "raw"),
        )


@dataclass(frozen=True)
class PaperParams:
    """Published form: ``A - m tau^alpha (1 + C cos(omega ln tau + phi))``."""

    A: float
    m: float
    C: float
    alpha: float
    omega: float
    phi: float
    tc: float
    scale: Scale = "raw"

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ValidationError("omega must be positive")
        if not 0.0 <= self.phi < TWO_PI:
            raise ValidationError(f"phi={self.phi} outside [0, 2*pi)")

    def to_dict(self) -> dict:
        return {k: (float(v) if k != "scale" else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> PaperParams:
        return cls(
            A=float(d["A"]), m=float(d["m"]), C=float(d["C"]), alpha=float(d["alpha"]),
            omega=float(d["omega"]), phi=float(d["phi"]), tc=float(d["tc"]),
            scale=d.get("scale", "raw"),
        )


def from_expanded(
    A: float, B: float, amplitude: float, alpha: float, omega: float, phi: float, tc: float,
    scale: Scale = "raw",
) -> LpplParams:
    """Build params from ``A + B tau^a + amplitude tau^a cos(omega ln tau + phi)``.

    This is the shape in which fitted vectors are usually quoted.
    """
    return LpplParams(
        tc=tc, alpha=alpha, omega=omega, A=A, B=B,
        C1=amplitude * math.cos(phi), C2=-amplitude * math.sin(phi), scale=scale,
    )


def _tau(params: LpplParams, t) -> np.ndarray:
    tau = params.tc - np.asarray(t, dtype=float)
    if np.any(~(tau > 0)):
        raise DomainError(f"model undefined at t >= tc={params.tc}")
    return tau


def evaluate(params: LpplParams, t):
    """Model value at ``t`` (scalar or array), in ``params.scale`` units."""
    tau = _tau(params, t)
    g = tau ** params.alpha
    phase = params.omega * np.log(tau)
    out = params.A + params.B * g + g * (params.C1 * np.cos(phase) + params.C2 * np.sin(phase))
    return float(out) if np.ndim(out) == 0 else out


def trend(params: LpplParams, t):
    """The power-law component ``A + B tau^alpha`` alone."""
    tau = _tau(params, t)
    out = params.A + params.B * tau ** params.alpha
    return float(out) if np.ndim(out) == 0 else out


def envelope(params: LpplParams, t):
    """Amplitude of the oscillating term, ``tau^alpha * hypot(C1, C2)``."""
    tau = _tau(params, t)
    out = tau ** params.alpha * params.oscillation_amplitude()
    return float(out) if np.ndim(out) == 0 else out


def from_paper(pp: PaperParams) -> LpplParams:
    # -m C cos(x + phi) = (-m C cos phi) cos x + (m C sin phi) sin x
    return LpplParams(
        tc=pp.tc, alpha=pp.alpha, omega=pp.omega, A=pp.A, B=-pp.m,
        C1=-pp.m * pp.C * math.cos(pp.phi), C2=pp.m * pp.C * math.sin(pp.phi),
        scale=pp.scale,
    )


def to_paper(lp: LpplParams) -> PaperParams:
    """Inverse of :func:`from_paper` with the gauge ``C >= 0``, ``phi`` in [0, 2 pi)."""
    if lp.B == 0:
        raise DegenerateParameterError("B = 0: m and C are not separately identifiable")
    m = -lp.B
    if lp.C1 == 0 and lp.C2 == 0:
        C, phi = 0.0, 0.0
    else:
        c_cos = lp.C1 / lp.B
        c_sin = -lp.C2 / lp.B
        C = math.hypot(c_cos, c_sin)
        phi = math.atan2(c_sin, c_cos) % TWO_PI
        if phi >= TWO_PI:  # -tiny % 2pi can round up to 2pi
            phi = 0.0
    return PaperParams(A=lp.A, m=m, C=C, alpha=lp.alpha, omega=lp.omega, phi=phi, tc=lp.tc, scale=lp.scale)


def residuals(params: LpplParams, s: PriceSeries) -> np.ndarray:
    if params.scale != s.scale:
        raise StateError(f"params are {params.scale}-scale but series is {s.scale}-scale")
    return s.prices - evaluate(params, s.times)


def sse(params: LpplParams, s: PriceSeries) -> float:
    r = residuals(params, s)
    return float(r @ r)


def params_document(params: LpplParams) -> dict:
    """Both parameterizations, ready for JSON."""
    doc = {"scale": params.scale, "linear": params.to_dict()}
    try:
        doc["published"] = to_paper(params).to_dict()
        doc["published"]["gauge"] = "C >= 0, 0 <= phi < 2*pi"
    except DegenerateParameterError:
        doc["published"] = None
    return doc
