"""Separable least-squares estimation of LPPL parameters.

For fixed ``(tc, alpha, omega)`` the four coefficients ``A, B, C1, C2``
enter linearly, so the sum of squared errors can be minimized exactly.
The fit therefore searches only the three nonlinear parameters: a full
grid pass ranks every ``(tc, alpha, omega)`` triple by its profiled SSE,
and the best few are polished by a bounded Nelder-Mead simplex.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    ConfigError,
    DegenerateDesignError,
    DomainError,
    FitFailedError,
    RefinementFailedError,
)
from .model import LpplParams, params_document
from .series import PriceSeries

# relative size below which a pivot of the column-normalized design counts as zero
RANK_TOL = 1e-10
# screening drops triples whose oscillation block is this close to singular
SCREEN_TOL = 1e-10
# simplex diameter, in units of the grid step, at which refinement stops
SIMPLEX_XTOL = 1e-9


@dataclass(frozen=True)
class FitConfig:
    """Search grid and refinement settings.

    The ``tc`` grid is laid out as offsets beyond the last observation of
    the window being fitted; offsets not exceeding one sample interval are
    skipped.  The ``alpha`` grid skips ``|alpha| < alpha_dead_zone``.
    """

    tc_offset_min: float = 0.05
    tc_offset_max: float = 5.0
    tc_step: float = 0.05
    alpha_min: float = -3.0
    alpha_max: float = 1.0
    alpha_step: float = 0.05
    alpha_dead_zone: float = 0.05
    omega_min: float = 2.0
    omega_max: float = 30.0
    omega_step: float = 0.5
    min_points: int = 8
    refine_max_iters: int = 1000
    refine_tol: float = 1e-9
    scale: str = "raw"
    multistart_top_k: int = 10
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.tc_offset_min > 0:
            raise ConfigError("tc grid must start strictly after the window end")
        if not self.tc_offset_max >= self.tc_offset_min:
            raise ConfigError("tc_offset_max < tc_offset_min")
        for name in ("tc_step", "alpha_step", "omega_step"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.alpha_dead_zone < 0.05:
            raise ConfigError("alpha_dead_zone must be at least 0.05")
        if not self.alpha_max >= self.alpha_min:
            raise ConfigError("alpha_max < alpha_min")
        if not (self.omega_min > 0 and self.omega_max >= self.omega_min):
            raise ConfigError("omega range must be positive and non-empty")
        if self.min_points < 8:
            raise ConfigError("min_points must be at least 8")
        if self.refine_max_iters < 0 or self.refine_tol < 0:
            raise ConfigError("refinement budget and tolerance must be non-negative")
        if self.scale not in ("raw", "log"):
            raise ConfigError(f"unknown scale {self.scale!r}")
        if self.multistart_top_k < 1:
            raise ConfigError("multistart_top_k must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    # -- grids ---------------------------------------------------------

    def tc_values(self, window_end: float, sample_interval: float = 0.0) -> np.ndarray:
        offsets = _arange(self.tc_offset_min, self.tc_offset_max, self.tc_step)
        offsets = offsets[offsets > sample_interval]
        return window_end + offsets

    def alpha_values(self) -> np.ndarray:
        a = _arange(self.alpha_min, self.alpha_max, self.alpha_step)
        return a[np.abs(a) >= self.alpha_dead_zone - 1e-12]

    def omega_values(self) -> np.ndarray:
        return _arange(self.omega_min, self.omega_max, self.omega_step)

    # -- persistence ---------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> FitConfig:
        known = {f.name: f for f in fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for k, v in d.items():
            typ = type(getattr(cls, k, None)) if k in known else None
            try:
                kwargs[k] = typ(v) if typ in (int, float, str) else v
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {k}: {v!r}") from exc
            if typ is int and kwargs[k] != v:
                raise ConfigError(f"{k} must be an integer, got {v!r}")
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> FitConfig:
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config file must hold a flat JSON object")
        return cls.from_dict(d)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _arange(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


# ----------------------------------------------------------------------
# linear subproblem


class LinearSolution(NamedTuple):
    A: float
    B: float
    C1: float
    C2: float
    sse: float


def design_matrix(tc: float, alpha: float, omega: float, t: np.ndarray) -> np.ndarray:
    tau = tc - t
    if np.any(~(tau > 0)):
        raise DomainError(f"observation at or after tc={tc}")
    g = tau ** alpha
    phase = omega * np.log(tau)
    return np.column_stack([np.ones_like(tau), g, g * np.cos(phase), g * np.sin(phase)])


def solve_linear(tc: float, alpha: float, omega: float, s: PriceSeries) -> LinearSolution:
    """Exact least-squares ``A, B, C1, C2`` for a fixed nonlinear triple.

    Uses a Householder QR of the column-normalized design.
    """
    if len(s) < 4:
        raise DegenerateDesignError(f"{len(s)} points cannot determine 4 coefficients")
    X = design_matrix(tc, alpha, omega, s.times)
    norms = np.sqrt((X * X).sum(axis=0))
    if not np.all(np.isfinite(norms)) or np.any(norms == 0):
        raise DegenerateDesignError("design has a zero or non-finite column")
    Xn = X / norms
    Q, R = np.linalg.qr(Xn)
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_TOL * diag.max():
        raise DegenerateDesignError(f"rank-deficient design at tc={tc}, alpha={alpha}, omega={omega}")
    y = s.prices
    coef = solve_triangular(R, Q.T @ y) / norms
    r = y - X @ coef
    return LinearSolution(*map(float, coef), float(r @ r))


def profiled_sse(tc: float, alpha: float, omega: float, s: PriceSeries) -> float:
    return solve_linear(tc, alpha, omega, s).sse


def params_at(tc: float, alpha: float, omega: float, s: PriceSeries) -> tuple[LpplParams, float]:
    sol = solve_linear(tc, alpha, omega, s)
    p = LpplParams(tc=float(tc), alpha=float(alpha), omega=float(omega),
                   A=sol.A, B=sol.B, C1=sol.C1, C2=sol.C2, scale=s.scale)
    return p, sol.sse


# ----------------------------------------------------------------------
# grid stage


def screen_tc(tau: np.ndarray, y: np.ndarray, alphas: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Profiled SSE for one ``tc`` over the whole (alpha, omega) grid.

    The trend part ``[1, tau^alpha]`` is projected out exactly for every
    alpha; the remaining two oscillation columns are handled through their
    2x2 Gram matrix, with all inner products formed as matrix products so
    the grid costs a few BLAS calls per ``tc``.  Degenerate triples get
    ``inf``.  Returns an ``(n_alpha, n_omega)`` array.
    """
    n = tau.size
    logtau = np.log(tau)
    phase = np.multiply.outer(omegas, logtau)
    cos, sin = np.cos(phase), np.sin(phase)

    G = tau[None, :] ** alphas[:, None]
    Gc = G - G.mean(axis=1, keepdims=True)
    gnorm = np.sqrt((Gc * Gc).sum(axis=1, keepdims=True))
    trend_ok = gnorm[:, 0] > 1e-12 * np.sqrt((G * G).sum(axis=1))
    E1 = Gc / np.where(gnorm > 0, gnorm, 1.0)

    yc = y - y.mean()
    r0 = yc[None, :] - (E1 @ yc)[:, None] * E1
    rr = (r0 * r0).sum(axis=1)

    G2 = G * G
    uu = (cos * cos) @ G2.T
    vv = (sin * sin) @ G2.T
    uv = (cos * sin) @ G2.T
    root_n = math.sqrt(n)
    ue0 = cos @ G.T / root_n
    ve0 = sin @ G.T / root_n
    GE = G * E1
    ue1 = cos @ GE.T
    ve1 = sin @ GE.T
    GR = G * r0
    ur = cos @ GR.T
    vr = sin @ GR.T

    a = uu - ue0 ** 2 - ue1 ** 2
    c = vv - ve0 ** 2 - ve1 ** 2
    b = uv - ue0 * ve0 - ue1 * ve1
    det = a * c - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = (a > SCREEN_TOL * uu) & (c > SCREEN_TOL * vv) & (det > SCREEN_TOL * a * c)
        explained = (c * ur * ur - 2.0 * b * ur * vr + a * vr * vr) / det
        sse = np.maximum(rr[None, :] - explained, 0.0)
    ok &= trend_ok[None, :] & np.isfinite(sse)
    return np.where(ok, sse, np.inf).T


@dataclass(frozen=True)
class Candidate:
    tc: float
    alpha: float
    omega: float
    sse: float

    @property
    def triple(self) -> tuple[float, float, float]:
        return (self.tc, self.alpha, self.omega)


class CandidateList(Sequence):
    """Grid candidates, best first.

    Backed by flat arrays; items are materialized as :class:`Candidate`
    on access.  ``n_evaluated`` counts every grid point, including the
    degenerate ones that were dropped.
    """

    def __init__(self, tc, alpha, omega, sse, n_evaluated: int):
        self.tc = np.asarray(tc, dtype=float)
        self.alpha = np.asarray(alpha, dtype=float)
        self.omega = np.asarray(omega, dtype=float)
        self.sse = np.asarray(sse, dtype=float)
        self.n_evaluated = n_evaluated

    def __len__(self) -> int:
        return self.sse.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return Candidate(float(self.tc[i]), float(self.alpha[i]), float(self.omega[i]), float(self.sse[i]))

    def __iter__(self) -> Iterator[Candidate]:
        return (self[i] for i in range(len(self)))


def rank_order(sse, tc, omega, alpha) -> np.ndarray:
    """Indices sorting by SSE, then smaller tc, smaller omega, smaller |alpha|."""
    return np.lexsort((np.abs(alpha), omega, tc, sse))


def _map(fn: Callable, items: Iterable, workers: int) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def grid_search(s: PriceSeries, cfg: FitConfig) -> CandidateList:
    if len(s) < cfg.min_points:
        raise ConfigError(f"series has {len(s)} points, min_points is {cfg.min_points}")
    tcs = cfg.tc_values(s.end, s.last_interval)
    alphas = cfg.alpha_values()
    omegas = cfg.omega_values()
    if not (tcs.size and alphas.size and omegas.size):
        raise ConfigError("search grid is empty")
    y = s.prices
    blocks = _map(lambda tc: screen_tc(tc - s.times, y, alphas, omegas), tcs, cfg.workers)
    sse = np.stack(blocks).ravel()
    T, Al, Om = (a.ravel() for a in np.meshgrid(tcs, alphas, omegas, indexing="ij"))
    keep = np.isfinite(sse)
    T, Al, Om, sse = T[keep], Al[keep], Om[keep], sse[keep]
    order = rank_order(sse, T, Om, Al)
    return CandidateList(T[order], Al[order], Om[order], sse[order], n_evaluated=int(keep.size))


# ----------------------------------------------------------------------
# local stage


@dataclass(frozen=True)
class FitResult:
    params: LpplParams
    sse: float
    rmse: float
    n_points: int
    window: tuple[float, float]
    converged: bool
    iterations: int
    candidates_evaluated: int

    def to_dict(self) -> dict:
        doc = params_document(self.params)
        doc.update(
            sse=self.sse, rmse=self.rmse, n_points=self.n_points,
            window={"start": self.window[0], "end": self.window[1]},
            converged=self.converged, iterations=self.iterations,
            candidates_evaluated=self.candidates_evaluated,
        )
        return doc

    @classmethod
    def from_dict(cls, d: dict) -> FitResult:
        return cls(
            params=LpplParams.from_dict(d["linear"]),
            sse=float(d["sse"]), rmse=float(d["rmse"]), n_points=int(d["n_points"]),
            window=(float(d["window"]["start"]), float(d["window"]["end"])),
            converged=bool(d["converged"]), iterations=int(d["iterations"]),
            candidates_evaluated=int(d["candidates_evaluated"]),
        )


def _bounds(candidate: Candidate, s: PriceSeries, cfg: FitConfig) -> tuple[np.ndarray, np.ndarray]:
    tc_lo = s.end + max(s.last_interval, 1e-9)
    tc_hi = max(s.end + cfg.tc_offset_max, tc_lo)
    if candidate.alpha > 0:
        a_lo, a_hi = max(cfg.alpha_min, cfg.alpha_dead_zone), cfg.alpha_max
    else:
        a_lo, a_hi = cfg.alpha_min, min(cfg.alpha_max, -cfg.alpha_dead_zone)
    return (np.array([tc_lo, a_lo, cfg.omega_min]), np.array([tc_hi, a_hi, cfg.omega_max]))


def _result(p: LpplParams, sse: float, s: PriceSeries, converged: bool, iterations: int, evaluated: int) -> FitResult:
    return FitResult(
        params=p, sse=sse, rmse=math.sqrt(sse / len(s)), n_points=len(s),
        window=(s.start, s.end), converged=converged, iterations=iterations,
        candidates_evaluated=evaluated,
    )


def refine_local(candidate: Candidate, s: PriceSeries, cfg: FitConfig) -> FitResult:
    """Bounded Nelder-Mead over ``(tc, alpha, omega)`` with profiled SSE.

    Stops when the spread of SSE across the simplex falls below
    ``refine_tol`` relative to the best value, when the simplex has
    collapsed to ``SIMPLEX_XTOL`` grid steps, or after
    ``refine_max_iters`` iterations (``converged=False``).  The returned
    SSE never exceeds the candidate's.
    """
    lo, hi = _bounds(candidate, s, cfg)
    step = np.array([cfg.tc_step, cfg.alpha_step, cfg.omega_step])
    floor = 1e-24 * float(s.prices @ s.prices)
    evaluations = 0

    def f(x: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            return profiled_sse(x[0], x[1], x[2], s)
        except (DegenerateDesignError, DomainError):
            return math.inf

    x0 = np.clip(np.array(candidate.triple, dtype=float), lo, hi)
    f0 = f(x0)
    if cfg.refine_max_iters == 0:
        if not math.isfinite(f0):
            raise RefinementFailedError("candidate is degenerate", candidate)
        p, sse = params_at(*x0, s)
        return _result(p, sse, s, False, 0, evaluations)

    simplex = [x0]
    for i in range(3):
        x = x0.copy()
        x[i] += step[i] if x0[i] + step[i] <= hi[i] else -step[i]
        simplex.append(np.clip(x, lo, hi))
    values = [f0] + [f(x) for x in simplex[1:]]

    converged = False
    it = 0
    while it < cfg.refine_max_iters:
        order = sorted(range(4), key=lambda k: values[k])
        simplex = [simplex[k] for k in order]
        values = [values[k] for k in order]
        best, worst = values[0], values[-1]
        if math.isfinite(best):
            spread = worst - best
            size = max(np.max(np.abs(x - simplex[0]) / step) for x in simplex[1:])
            if spread <= cfg.refine_tol * max(best, floor) or size <= SIMPLEX_XTOL:
                converged = True
                break
        it += 1
        centroid = np.mean(simplex[:-1], axis=0)
        xr = np.clip(centroid + (centroid - simplex[-1]), lo, hi)
        fr = f(xr)
        if fr < values[0]:
            xe = np.clip(centroid + 2.0 * (centroid - simplex[-1]), lo, hi)
            fe = f(xe)
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = np.clip(centroid + 0.5 * (xr - centroid), lo, hi)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = np.clip(centroid + 0.5 * (simplex[-1] - centroid), lo, hi)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        for k in range(1, 4):
            simplex[k] = np.clip(simplex[0] + 0.5 * (simplex[k] - simplex[0]), lo, hi)
            values[k] = f(simplex[k])

    k = int(np.argmin(values))
    if not math.isfinite(values[k]):
        raise RefinementFailedError("every trial point was degenerate", candidate)
    xb = simplex[k] if values[k] < f0 else x0
    p, sse = params_at(*xb, s)
    return _result(p, sse, s, converged, it, evaluations)


def _tie_key(r: FitResult) -> tuple:
    return (r.sse, r.params.tc, r.params.omega, abs(r.params.alpha))


def fit(s: PriceSeries, cfg: FitConfig | None = None) -> FitResult:
    cfg = cfg or FitConfig()
    if s.scale != cfg.scale:
        raise ConfigError(f"config scale {cfg.scale!r} does not match series scale {s.scale!r}")
    grid = grid_search(s, cfg)
    if not len(grid):
        raise FitFailedError("every grid point was degenerate")
    starts = grid[: cfg.multistart_top_k]

    def attempt(c: Candidate):
        try:
            return refine_local(c, s, cfg)
        except RefinementFailedError:
            return None

    results = [r for r in _map(attempt, starts, cfg.workers) if r is not None]
    if not results:
        raise FitFailedError(f"all {len(starts)} refinements failed")
    best = min(results, key=_tie_key)
    total = grid.n_evaluated + sum(r.candidates_evaluated for r in results)
    return replace(best, candidates_evaluated=total)
