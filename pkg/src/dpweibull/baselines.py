"""Comparison mechanisms: global-sensitivity Laplace noise and sample-and-aggregate.

Both treat ``gamma`` as the global sensitivity of each parameter (the
parameters are assumed to lie in ``[0, gamma]``) and split the total budget
evenly between shape and scale.  Outputs are published as noised, without a
projection back into the parameter range: at small budgets the noise scale
exceeds ``gamma`` and projecting would silently shrink the reported error of
these baselines by an order of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from .core import EstimationError, SurvivalDataset, WeibullParams
from .estimator import RootSolverConfig, fit_mle
from .mechanisms import RandomSource

__all__ = ["SaaConfig", "laplace_baseline", "saa_release"]


@dataclass(frozen=True)
class SaaConfig:
    """Sample-and-aggregate settings; ``epsilon`` is the total budget."""

    epsilon: float
    gamma: float = 10.0
    target_subset_size: int = 500
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if self.target_subset_size < 1:
            raise ValueError("target_subset_size must be >= 1")

    def partitions(self, n: int) -> int:
        return max(1, n // self.target_subset_size)


def _clamp(x: float, gamma: float) -> float:
    return min(max(x, 0.0), gamma)


def laplace_baseline(
    d: SurvivalDataset,
    epsilon: float,
    gamma: float,
    rng: RandomSource,
    mle: WeibullParams | None = None,
) -> WeibullParams:
    """Add Laplace(gamma / (epsilon/2)) noise to each fitted parameter.

    A precomputed fit may be passed to avoid refitting across repeated
    trials on the same dataset.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    if not gamma > 0.0:
        raise ValueError("gamma must be positive")
    if mle is None:
        mle = fit_mle(d, RootSolverConfig(bracket=(1e-8, gamma)))
    noise_scale = gamma / (epsilon / 2.0)
    return WeibullParams(
        shape=mle.shape + rng.laplace(noise_scale),
        scale=mle.scale + rng.laplace(noise_scale),
    )


def saa_release(d: SurvivalDataset, cfg: SaaConfig, rng: RandomSource) -> WeibullParams:
    """Partition, fit per subset, average, and noise the averages.

    The shuffled dataset is cut into ``m = max(1, n // target_subset_size)``
    equal subsets (remainder records go to the last one).  Subset fits are
    clamped into ``[0, gamma]`` before averaging so the per-mean sensitivity
    ``gamma / m'`` actually holds; subsets whose fit fails are skipped and
    ``m'`` is the count of successes.  Each averaged parameter then receives
    Laplace(gamma / (m' * epsilon/2)) noise.
    """
    n = d.n
    m = cfg.partitions(n)
    perm = rng.permutation(n)
    size = n // m
    solver = RootSolverConfig(bracket=(1e-8, cfg.gamma))
    shapes: list[float] = []
    scales: list[float] = []
    for i in range(m):
        stop = (i + 1) * size if i < m - 1 else n
        idx = perm[i * size : stop]
        subset = SurvivalDataset(d.times[idx], d.events[idx])
        try:
            fit = fit_mle(subset, solver)
        except EstimationError:
            continue
        shapes.append(_clamp(fit.shape, cfg.gamma))
        scales.append(_clamp(fit.scale, cfg.gamma))
    if not shapes:
        raise EstimationError("every subset fit failed")
    noise_scale = cfg.gamma / (len(shapes) * (cfg.epsilon / 2.0))
    return WeibullParams(
        shape=fmean(shapes) + rng.laplace(noise_scale),
        scale=fmean(scales) + rng.laplace(noise_scale),
    )
