"""Censored-Weibull maximum likelihood.

The shape estimate is the root of ``f(p) = g(p)`` with

    f(p) = sum_i t_i^p ln t_i / sum_i t_i^p
    g(p) = 1/p + sum_i d_i ln t_i / sum_i d_i

and the scale then follows in closed form from
``scale^p = sum_i t_i^p / sum_i d_i``.  The root finder is a safeguarded
Newton iteration (numeric derivative) that falls back to bisection, since
``g`` has a ``1/p`` pole that makes naive Newton divergent for small ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EstimationError, SurvivalDataset, WeibullParams, csum

__all__ = [
    "RootSolverConfig",
    "ScoreFunctions",
    "log_likelihood",
    "score_gap",
    "solve_shape",
    "solve_scale",
    "fit_mle",
]

# Newton gives a bisection step after this many consecutive non-contracting
# updates.
_STALL_LIMIT = 5
_MAX_BISECT_ITERS = 200


@dataclass(frozen=True)
class RootSolverConfig:
    """Tolerances and search interval for the shape root."""

    abs_tol: float = 1e-10
    max_newton_iters: int = 100
    bracket: tuple[float, float] = (1e-8, 10.0)

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise ValueError("abs_tol must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be >= 1")
        lo, hi = self.bracket
        if not (0.0 < lo < hi):
            raise ValueError("bracket must satisfy 0 < lower < upper")


class ScoreFunctions:
    """Both sides of the shape score equation, bound to one dataset.

    ``f(p) <= 0`` for every ``p > 0`` because all normalized log-times are
    non-positive.  Requires at least one uncensored record (``g`` divides by
    the event count).
    """

    def __init__(self, d: SurvivalDataset):
        events = d.events
        self._log_t = np.log(d.times)
        self._sum_d = csum(events)
        if self._sum_d < 1.0:
            raise EstimationError("all records censored: shape equation undefined")
        self._sum_d_log_t = csum(events * self._log_t)

    @property
    def num_events(self) -> float:
        return self._sum_d

    def f_g(self, p: float) -> tuple[float, float]:
        """Evaluate both sides at once (shares the power computation)."""
        if not p > 0.0:
            raise ValueError("p must be positive")
        powers = np.exp(p * self._log_t)
        f = csum(powers * self._log_t) / csum(powers)
        g = 1.0 / p + self._sum_d_log_t / self._sum_d
        return f, g

    def f(self, p: float) -> float:
        return self.f_g(p)[0]

    def g(self, p: float) -> float:
        return self.f_g(p)[1]

    def gap(self, p: float) -> float:
        f, g = self.f_g(p)
        return f - g


def log_likelihood(d: SurvivalDataset, params: WeibullParams) -> float:
    """Censored-Weibull log-likelihood at the given parameters."""
    p, lam = params.shape, params.scale
    if not (p > 0.0 and lam > 0.0):
        raise ValueError("log-likelihood requires strictly positive parameters")
    log_t = np.log(d.times)
    log_lam = math.log(lam)
    hazard_terms = d.events * (math.log(p) + (p - 1.0) * log_t - p * log_lam)
    survival_terms = np.exp(p * (log_t - log_lam))
    value = csum(hazard_terms - survival_terms)
    if not math.isfinite(value):
        raise EstimationError(f"non-finite log-likelihood at shape={p}, scale={lam}")
    return value


def score_gap(d: SurvivalDataset, p: float) -> float:
    """``f(p) - g(p)``; zero exactly at the maximum-likelihood shape."""
    return ScoreFunctions(d).gap(p)


def _converged(gap: float, f: float, abs_tol: float) -> bool:
    return abs(gap) <= abs_tol * (1.0 + abs(f))


def _bisect(sf: ScoreFunctions, a: float, b: float, sign_a: bool, cfg: RootSolverConfig) -> float:
    for _ in range(_MAX_BISECT_ITERS):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        f, g = sf.f_g(mid)
        gap = f - g
        if _converged(gap, f, cfg.abs_tol):
            return mid
        if (gap > 0.0) == sign_a:
            a = mid
        else:
            b = mid
    raise EstimationError("shape root search did not converge to tolerance")


def solve_shape(d: SurvivalDataset, cfg: RootSolverConfig | None = None) -> float:
    """Maximum-likelihood shape: the root of the score gap on the bracket.

    Newton starts from 1.0 (the exponential model) with a central-difference
    derivative; it hands over to bisection if a step leaves the bracket or
    updates stop contracting.  The result satisfies
    ``|gap(p)| <= abs_tol * (1 + |f(p)|)``.
    """
    if cfg is None:
        cfg = RootSolverConfig()
    sf = ScoreFunctions(d)
    lo, hi = cfg.bracket
    f_lo, g_lo = sf.f_g(lo)
    gap_lo = f_lo - g_lo
    if _converged(gap_lo, f_lo, cfg.abs_tol):
        return lo
    f_hi, g_hi = sf.f_g(hi)
    gap_hi = f_hi - g_hi
    if _converged(gap_hi, f_hi, cfg.abs_tol):
        return hi
    sign_lo = gap_lo > 0.0
    if sign_lo == (gap_hi > 0.0):
        raise EstimationError(
            "score gap has no sign change on bracket: "
            f"gap({lo:g})={gap_lo:.6g}, gap({hi:g})={gap_hi:.6g}"
        )

    a, b = lo, hi
    p = min(max(1.0, lo), hi)
    prev_step = math.inf
    stalls = 0
    for _ in range(cfg.max_newton_iters):
        f, g = sf.f_g(p)
        gap = f - g
        if _converged(gap, f, cfg.abs_tol):
            return p
        if (gap > 0.0) == sign_lo:
            a = p
        else:
            b = p
        h = max(1e-6, 1e-6 * p)
        if p - h <= 0.0:
            h = 0.5 * p
        slope = (sf.gap(p + h) - sf.gap(p - h)) / (2.0 * h)
        if not math.isfinite(slope) or slope == 0.0:
            break
        step = gap / slope
        candidate = p - step
        if not (a < candidate < b):
            break
        if abs(step) >= abs(prev_step):
            stalls += 1
            if stalls >= _STALL_LIMIT:
                break
        else:
            stalls = 0
        prev_step = step
        p = candidate
    return _bisect(sf, a, b, sign_lo, cfg)


def solve_scale(d: SurvivalDataset, p: float) -> float:
    """Closed-form scale at a given shape: ``(sum t_i^p / sum d_i)**(1/p)``."""
    if not p > 0.0:
        raise ValueError("p must be positive")
    sum_d = csum(d.events)
    if sum_d < 1.0:
        raise EstimationError("all records censored: scale undefined")
    sum_tp = csum(np.exp(p * np.log(d.times)))
    return (sum_tp / sum_d) ** (1.0 / p)


def fit_mle(d: SurvivalDataset, cfg: RootSolverConfig | None = None) -> WeibullParams:
    """Fit shape then scale by maximum likelihood."""
    p = solve_shape(d, cfg)
    return WeibullParams(shape=p, scale=solve_scale(d, p))
