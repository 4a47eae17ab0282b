"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's code paths: plain Python
floats, ``t ** p`` instead of exp/log, and pure bisection.  They are the
reference implementations the solver and bound tests compare against.
"""

from __future__ import annotations

import math

import numpy as np

from dpweibull import SurvivalDataset, WeibullParams, generate_synthetic


def oracle_f(times, events, p: float) -> float:
    """Left score function: power-weighted mean of the log-times."""
    times = [float(t) for t in times]
    tp = [t**p for t in times]
    num = math.fsum(tp[i] * math.log(times[i]) for i in range(len(times)))
    return num / math.fsum(tp)


def oracle_gap(times, events, p: float) -> float:
    """Score gap f(p) - g(p) computed term by term with plain arithmetic."""
    times = [float(t) for t in times]
    events = [float(e) for e in events]
    sum_d = math.fsum(events)
    sum_d_log = math.fsum(events[i] * math.log(times[i]) for i in range(len(times)))
    return oracle_f(times, events, p) - (1.0 / p + sum_d_log / sum_d)


def oracle_root(times, events, lo: float = 1e-8, hi: float = 10.0, tol: float = 1e-12):
    """Pure-bisection root of the score gap; None if no sign change."""
    ga = oracle_gap(times, events, lo)
    gb = oracle_gap(times, events, hi)
    if ga == 0.0:
        return lo
    if gb == 0.0:
        return hi
    if (ga > 0.0) == (gb > 0.0):
        return None
    sign_lo = ga > 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = oracle_gap(times, events, mid)
        if gm == 0.0:
            return mid
        if (gm > 0.0) == sign_lo:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def oracle_scale(times, events, p: float) -> float:
    """Closed-form scale from plain sums."""
    sum_tp = math.fsum(float(t) ** p for t in times)
    sum_d = math.fsum(float(e) for e in events)
    return (sum_tp / sum_d) ** (1.0 / p)


def random_dataset(
    gen: np.random.Generator,
    n: int,
    shape_range=(0.6, 4.0),
    scale_range=(0.2, 2.0),
    max_censor: float = 0.5,
) -> SurvivalDataset:
    """A synthetic dataset with randomized generating parameters."""
    shape = float(gen.uniform(*shape_range))
    scale = float(gen.uniform(*scale_range))
    censor = float(gen.uniform(0.0, max_censor))
    seed = int(gen.integers(2**31))
    return generate_synthetic(n, WeibullParams(shape, scale), censor, 6.0, seed)


def adjacent_dataset(
    d: SurvivalDataset, gen: np.random.Generator, omega: float = 6.0
) -> SurvivalDataset:
    """Replace one record by a random (time, event) pair, keeping one event."""
    times = d.times.copy()
    events = d.events.copy()
    i = int(gen.integers(d.n))
    times[i] = float(gen.uniform(math.exp(-omega), 1.0))
    events[i] = float(gen.integers(2))
    if events.sum() < 1.0:
        events[i] = 1.0
    return SurvivalDataset(times, events)


def tiny_dataset(seed: int, n: int = 6, min_events: int = 3, omega: float = 6.0) -> SurvivalDataset:
    """A small dataset whose score equation has an interior root."""
    gen = np.random.default_rng(seed)
    while True:
        times = gen.uniform(math.exp(-omega), 1.0, n)
        events = (gen.random(n) < 0.7).astype(float)
        if events.sum() < min_events:
            continue
        d = SurvivalDataset(times, events)
        if oracle_root(d.times, d.events) is not None:
            return d


def grid_modifications(d: SurvivalDataset, points: int = 50, omega: float = 6.0):
    """Every one-record replacement with times on a grid, keeping >= 2 events."""
    t_grid = np.linspace(math.exp(-omega), 1.0, points)
    for i in range(d.n):
        for t_new in t_grid:
            for e_new in (0.0, 1.0):
                events = d.events.copy()
                events[i] = e_new
                if events.sum() < 2:
                    continue
                times = d.times.copy()
                times[i] = t_new
                yield SurvivalDataset(times, events)
