"""Local-sensitivity interval ladder for the Weibull shape root.

For a dataset ``D`` and modification distance ``k`` (number of replaced
records), the four bound families

    f_lower_k(p) = (sum_i t_i^p ln t_i - k/(e p)) / (sum of n-k smallest t_i^p)
    f_upper_k(p) = (sum_i t_i^p ln t_i + k/(e p)) / (sum_i t_i^p + k)
    g_lower_k(p) = 1/p + (sum_i d_i ln t_i - k w) / (sum_i d_i - k)
    g_upper_k(p) = 1/p + (sum_i d_i ln t_i + k w) / (sum_i d_i + k)

envelope the two sides of the shape score equation over every dataset within
distance ``k`` of ``D`` (``w`` is the time-floor exponent; each ``t_i^p ln t_i``
term lies in ``[-1/(e p), 0]`` and each ``d_i ln t_i`` in ``[-w, 0]``).  The
roots of ``f_upper_k = g_lower_k`` and ``f_lower_k = g_upper_k`` then bound
the shape root of any such dataset from below and above; stacking those
intervals for k = 0..K and adding the ``[0, gamma]`` floor rung yields the
ladder consumed by the exponential-mechanism release.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .core import EstimationError, MechanismConfig, SurvivalDataset, csum
from .estimator import RootSolverConfig, solve_shape

__all__ = [
    "BoundDomainError",
    "BoundValues",
    "BoundFamilies",
    "Ladder",
    "min_tp_log_t",
    "compute_lsis",
    "rung_index",
    "write_ladder_csv",
]

_PROBE_POINTS = 64
_RUNG_REL_TOL = 1e-10


class BoundDomainError(EstimationError):
    """A bound family is undefined at this distance (rung must floor)."""


def min_tp_log_t(p: float) -> float:
    """Minimum of ``t^p * ln(t)`` over ``t`` in ``(0, 1]``: ``-1/(e p)``.

    Attained at ``t = exp(-1/p)``; this is the per-record slack used in the
    numerators of the f-side bounds.
    """
    if not p > 0.0:
        raise ValueError("p must be positive")
    return -1.0 / (math.e * p)


class BoundValues(NamedTuple):
    f_lower: float
    f_upper: float
    g_lower: float
    g_upper: float


class BoundFamilies:
    """Distance-k envelopes of the score equation, bound to one dataset.

    At ``k = 0`` all four functions coincide with the exact ``f`` and ``g``.
    ``g_lower`` requires ``k < sum d_i`` and ``f_lower`` requires ``k < n``;
    beyond those the corresponding rung has no usable bound.
    """

    def __init__(self, d: SurvivalDataset, omega: float):
        if not omega > 0.0:
            raise ValueError("omega must be positive")
        order = np.argsort(d.times, kind="stable")
        self._log_t_sorted = np.log(d.times[order])
        self._n = d.n
        self._omega = float(omega)
        self._sum_d = csum(d.events)
        self._sum_d_log_t = csum(d.events * np.log(d.times))

    @property
    def n(self) -> int:
        return self._n

    @property
    def num_events(self) -> float:
        return self._sum_d

    def _check(self, k: int, p: float) -> None:
        if k < 0:
            raise ValueError("k must be >= 0")
        if not p > 0.0:
            raise ValueError("p must be positive")

    def _powers(self, p: float) -> np.ndarray:
        return np.exp(p * self._log_t_sorted)

    def f_lower(self, k: int, p: float) -> float:
        self._check(k, p)
        if k >= self._n:
            raise BoundDomainError(f"f_lower undefined for k={k} >= n={self._n}")
        powers = self._powers(p)
        numer = csum(powers * self._log_t_sorted) + k * min_tp_log_t(p)
        return numer / csum(powers[: self._n - k])

    def f_upper(self, k: int, p: float) -> float:
        self._check(k, p)
        powers = self._powers(p)
        numer = csum(powers * self._log_t_sorted) - k * min_tp_log_t(p)
        return numer / (csum(powers) + k)

    def g_lower(self, k: int, p: float) -> float:
        self._check(k, p)
        if k >= self._sum_d:
            raise BoundDomainError(f"g_lower undefined for k={k} >= event count {self._sum_d:g}")
        return 1.0 / p + (self._sum_d_log_t - k * self._omega) / (self._sum_d - k)

    def g_upper(self, k: int, p: float) -> float:
        self._check(k, p)
        return 1.0 / p + (self._sum_d_log_t + k * self._omega) / (self._sum_d + k)

    def eval_bounds(self, k: int, p: float) -> BoundValues:
        """All four bounds at ``(k, p)``; raises BoundDomainError past a pole."""
        powers = self._powers(p)
        plog = csum(powers * self._log_t_sorted)
        self._check(k, p)
        if k >= self._n:
            raise BoundDomainError(f"f_lower undefined for k={k} >= n={self._n}")
        if k >= self._sum_d:
            raise BoundDomainError(f"g_lower undefined for k={k} >= event count {self._sum_d:g}")
        slack = k * min_tp_log_t(p)
        return BoundValues(
            f_lower=(plog + slack) / csum(powers[: self._n - k]),
            f_upper=(plog - slack) / (csum(powers) + k),
            g_lower=1.0 / p + (self._sum_d_log_t - k * self._omega) / (self._sum_d - k),
            g_upper=1.0 / p + (self._sum_d_log_t + k * self._omega) / (self._sum_d + k),
        )


@dataclass(frozen=True)
class Ladder:
    """Nested shape intervals by modification distance.

    ``lowers[k]``/``uppers[k]`` for k = 0..K+1: entry 0 is the exact shape
    root (degenerate interval), entry K+1 is the ``[0, gamma]`` floor rung.
    Lowers are non-increasing and uppers non-decreasing; every endpoint lies
    in ``[0, gamma]``.
    """

    lowers: np.ndarray
    uppers: np.ndarray
    gamma: float

    def __post_init__(self):
        lowers = np.asarray(self.lowers, dtype=float)
        uppers = np.asarray(self.uppers, dtype=float)
        if lowers.ndim != 1 or lowers.shape != uppers.shape or lowers.size < 2:
            raise ValueError("lowers and uppers must be equal-length 1-d arrays of size >= 2")
        if lowers[0] != uppers[0]:
            raise ValueError("rung 0 must be degenerate at the shape root")
        if lowers[-1] != 0.0 or uppers[-1] != self.gamma:
            raise ValueError("final rung must be the [0, gamma] floor")
        if np.any(np.diff(lowers) > 0.0) or np.any(np.diff(uppers) < 0.0):
            raise ValueError("rungs must be nested")
        if np.any(lowers < 0.0) or np.any(uppers > self.gamma) or np.any(lowers > uppers):
            raise ValueError("rung endpoints must satisfy 0 <= lower <= upper <= gamma")
        for name, arr in (("lowers", lowers), ("uppers", uppers)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def rungs(self) -> int:
        """K: the number of computed rungs (excluding root and floor)."""
        return int(self.lowers.size - 2)

    @property
    def root(self) -> float:
        return float(self.lowers[0])


def _bracketed_root(
    h_exact,
    probe_vals: np.ndarray,
    grid: np.ndarray,
    rightmost: bool,
) -> float | None:
    """Bisect ``h_exact`` inside a sign-change cell of the probe grid.

    ``rightmost`` selects which sign change to refine when there are several.
    The score gap of any dataset is strictly increasing in p, so the rung
    endpoint adjacent to the root is the sound one: for the lower equation
    every crossing lies below the root and the *last* one applies; for the
    upper equation every crossing lies above the root and the *first* one
    applies (the upper equation picks up a spurious far crossing because its
    truncated denominator decays exponentially).  Returns None when no sign
    change exists.
    """
    with np.errstate(invalid="ignore"):
        products = probe_vals[:-1] * probe_vals[1:]
    cells = np.flatnonzero(products < 0.0)
    exact_zero = np.flatnonzero(probe_vals == 0.0)
    candidates: list[tuple[float, float | None]] = []
    for j in exact_zero:
        candidates.append((float(grid[j]), None))
    for j in cells:
        candidates.append((float(grid[j]), float(grid[j + 1])))
    if not candidates:
        return None
    candidates.sort(key=lambda c: c[0])
    a, b = candidates[-1] if rightmost else candidates[0]
    if b is None:
        return a
    ha = h_exact(a)
    hb = h_exact(b)
    if ha == 0.0:
        return a
    if hb == 0.0:
        return b
    if (ha > 0.0) == (hb > 0.0):
        # Probe sums are uncompensated; re-locate the change with exact values.
        exact_vals = np.array([h_exact(x) for x in grid])
        return _bracketed_root(h_exact, exact_vals, grid, rightmost)
    sign_a = ha > 0.0
    while b - a > _RUNG_REL_TOL * max(1.0, b):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        hm = h_exact(mid)
        if hm == 0.0:
            return mid
        if (hm > 0.0) == sign_a:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


class _ProbeCache:
    """Power sums of the sorted times at a fixed probe grid.

    ``cum[j, m-1]`` is the (plain) sum of the m smallest ``t_i^p`` at probe j,
    so every truncated denominator is an O(1) lookup.  Probe values only seed
    brackets; the bisection itself re-evaluates with compensated sums.
    """

    def __init__(self, log_t_sorted: np.ndarray, grid: np.ndarray):
        powers = np.exp(np.outer(grid, log_t_sorted))
        self.cum = np.cumsum(powers, axis=1)
        self.plog = powers @ log_t_sorted
        self.full = self.cum[:, -1]
        self.grid = grid


def compute_lsis(
    d: SurvivalDataset,
    cfg: MechanismConfig,
    solver: RootSolverConfig | None = None,
) -> Ladder:
    """Build the shape-interval ladder for k = 0..K plus the floor rung.

    Rung k's endpoints are the roots of ``f_upper_k = g_lower_k`` (lower) and
    ``f_lower_k = g_upper_k`` (upper) on ``(0, gamma]``, clamped into
    ``[0, gamma]`` with nesting enforced numerically.  A rung whose equations
    have no root there, or whose distance crosses a bound-family pole,
    collapses to the ``(0, gamma)`` floor along with every deeper rung, which
    keeps the nesting guarantee intact.
    """
    if solver is None:
        solver = RootSolverConfig()
    lo = solver.bracket[0]
    gamma = cfg.gamma
    if not lo < gamma:
        raise ValueError("bracket lower bound must be below gamma")
    solver = replace(solver, bracket=(lo, gamma))
    root = solve_shape(d, solver)
    root = min(max(root, 0.0), gamma)

    bf = BoundFamilies(d, cfg.omega)
    n = bf.n
    sum_d = bf.num_events
    sum_d_log_t = bf._sum_d_log_t
    omega = cfg.omega

    grid = np.geomspace(lo, gamma, _PROBE_POINTS)
    cache = _ProbeCache(bf._log_t_sorted, grid)
    inv_ep = 1.0 / (math.e * grid)

    lowers = [root]
    uppers = [root]
    floored = False
    for k in range(1, cfg.rungs + 1):
        if not floored and k < sum_d and k < n:
            lower_vals = (cache.plog + k * inv_ep) / (cache.full + k) - (
                1.0 / grid + (sum_d_log_t - k * omega) / (sum_d - k)
            )
            upper_vals = (cache.plog - k * inv_ep) / cache.cum[:, n - k - 1] - (
                1.0 / grid + (sum_d_log_t + k * omega) / (sum_d + k)
            )
            l_k = _bracketed_root(
                lambda p, k=k: bf.f_upper(k, p) - bf.g_lower(k, p),
                lower_vals,
                grid,
                rightmost=True,
            )
            u_k = _bracketed_root(
                lambda p, k=k: bf.f_lower(k, p) - bf.g_upper(k, p),
                upper_vals,
                grid,
                rightmost=False,
            )
            if l_k is None or u_k is None:
                floored = True
        else:
            floored = True
        if floored:
            l_k, u_k = 0.0, gamma
        l_k = min(max(l_k, 0.0), gamma)
        u_k = min(max(u_k, 0.0), gamma)
        # Root noise at tolerance scale must not break the nesting invariant.
        l_k = min(l_k, lowers[-1])
        u_k = max(u_k, uppers[-1])
        lowers.append(l_k)
        uppers.append(u_k)
    lowers.append(0.0)
    uppers.append(gamma)
    return Ladder(np.array(lowers), np.array(uppers), gamma)


def rung_index(ladder: Ladder, p: float) -> int:
    """Ladder distance of a shape value: 0 at the root, K+1 at the floor.

    Rung k covers ``[lowers[k], lowers[k-1]) + (uppers[k-1], uppers[k]]``;
    the negated index is the utility driving the exponential mechanism.
    """
    if p < 0.0 or p > ladder.gamma:
        raise ValueError(f"p={p} outside [0, {ladder.gamma}]")
    root = ladder.root
    if p == root:
        return 0
    if p < root:
        # First k with lowers[k] <= p; lowers is non-increasing.
        return int(np.searchsorted(-ladder.lowers, -p, side="left"))
    return int(np.searchsorted(ladder.uppers, p, side="left"))


def write_ladder_csv(ladder: Ladder, path) -> None:
    """Dump (k, lower, upper) rows for staircase plots and diagnostics."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "lower", "upper"])
        for k, (low, high) in enumerate(zip(ladder.lowers, ladder.uppers)):
            writer.writerow([k, repr(float(low)), repr(float(high))])
