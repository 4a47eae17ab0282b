"""Private release mechanisms for the Weibull parameters.

The shape is released by an exponential mechanism over the ladder's levels:
level i (the set difference between rung i and rung i-1, a union of two
half-open intervals) gets weight ``length_i * exp(-i * eps/4)``; a level is
drawn by weight and the value uniformly within it.  The scale is released by
adding Laplace noise to the two sufficient sums ``sum d_i`` and
``sum t_i^p`` (each has global sensitivity 1) and recombining.

Every function here takes the *total* privacy budget ``eps`` for the pair
and applies the internal splits itself (half per parameter, and for the
scale a further half per noisy sum), so callers never divide.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .core import EstimationError, MechanismConfig, SurvivalDataset, WeibullParams, csum
from .ladder import Ladder, compute_lsis, rung_index

__all__ = [
    "RandomSource",
    "derive_seed",
    "LevelWeights",
    "NoisySums",
    "build_level_weights",
    "draw_shape",
    "lsp_release",
    "lsp_density",
    "noisy_sufficient_sums",
    "tll_release",
    "release_params",
]

# Non-positive noisy sums are clamped here before recombination; clamping is
# post-processing and cannot weaken the privacy guarantee.
_SUM_FLOOR = 1e-9


class RandomSource:
    """Seedable deterministic stream of the draws the mechanisms need.

    Laplace variates use the inverse CDF ``u in (-1/2, 1/2) ->
    -s*sign(u)*ln(1-2|u|)`` so one uniform maps to one variate.  ``draws``
    counts consumed uniforms, which makes budget audits in tests direct.
    """

    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self.draws = 0

    def random(self) -> float:
        """Uniform on the open interval (0, 1)."""
        while True:
            self.draws += 1
            r = float(self._gen.random())
            if r != 0.0:
                return r

    def uniform(self, low: float, high: float) -> float:
        """Uniform on (low, high)."""
        if not high >= low:
            raise ValueError("uniform requires high >= low")
        return low + (high - low) * self.random()

    def laplace(self, scale: float) -> float:
        """Zero-mean Laplace variate with the given scale."""
        if not scale > 0.0:
            raise ValueError("laplace scale must be positive")
        u = self.random() - 0.5
        return -scale * math.copysign(1.0, u) * math.log1p(-2.0 * abs(u))

    def categorical(self, weights) -> int:
        """Index drawn proportionally to non-negative weights (one uniform)."""
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise ValueError("weights must be finite and non-negative")
        cdf = np.cumsum(w)
        total = float(cdf[-1])
        if not total > 0.0:
            raise ValueError("weights must not all be zero")
        r = self.random() * total
        idx = int(np.searchsorted(cdf, r, side="right"))
        return min(idx, int(w.size) - 1)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def derive_seed(master_seed: int, *parts) -> int:
    """Hash (master seed, labels...) into a 64-bit stream seed.

    Stable across runs and platforms, so concurrent trials can derive
    independent streams without coordinating.
    """
    pieces = [str(int(master_seed))]
    for part in parts:
        pieces.append(repr(float(part)) if isinstance(part, float) else str(part))
    digest = hashlib.sha256("|".join(pieces).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class LevelWeights:
    """Per-level geometry and exponential-mechanism weights.

    Index i corresponds to level i+1 of the ladder.  Level i covers
    ``[left_lower, left_upper) + (right_lower, right_upper]``.  ``weights``
    can underflow to zero for deep ladders at large budgets; ``log_weights``
    never does and is what the sampler uses.
    """

    left_lower: np.ndarray
    left_upper: np.ndarray
    right_lower: np.ndarray
    right_upper: np.ndarray
    lengths: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray

    def probabilities(self) -> np.ndarray:
        """Normalized level probabilities, computed in log space."""
        top = float(np.max(self.log_weights))
        if not math.isfinite(top):
            raise EstimationError("all level weights are zero")
        z = np.exp(self.log_weights - top)
        return z / z.sum()


def build_level_weights(ladder: Ladder, epsilon: float) -> LevelWeights:
    """Level lengths and weights ``length_i * exp(-i * epsilon/4)``.

    ``epsilon`` is the total budget for the parameter pair; the shape release
    spends half of it, which is exactly the ``epsilon/4`` per-level decay for
    a utility of sensitivity 1.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    lowers, uppers = ladder.lowers, ladder.uppers
    left_lower, left_upper = lowers[1:], lowers[:-1]
    right_lower, right_upper = uppers[:-1], uppers[1:]
    lengths = (left_upper - left_lower) + (right_upper - right_lower)
    levels = np.arange(1, lengths.size + 1, dtype=float)
    decay = levels * (epsilon / 4.0)
    with np.errstate(divide="ignore"):
        log_weights = np.log(lengths) - decay
    weights = lengths * np.exp(-decay)
    if not np.any(lengths > 0.0):
        raise EstimationError("all level lengths are zero")
    return LevelWeights(
        left_lower=left_lower,
        left_upper=left_upper,
        right_lower=right_lower,
        right_upper=right_upper,
        lengths=lengths,
        weights=weights,
        log_weights=log_weights,
    )


def draw_shape(ladder: Ladder, level_weights: LevelWeights, rng: RandomSource) -> float:
    """Sample a level by weight, then a value uniformly over its two intervals.

    The side is implicitly chosen proportionally to sub-interval length by
    drawing one offset across the joint length, which is exactly the uniform
    law on the union.
    """
    i = rng.categorical(level_weights.probabilities())
    left_len = float(level_weights.left_upper[i] - level_weights.left_lower[i])
    offset = rng.uniform(0.0, float(level_weights.lengths[i]))
    if offset < left_len:
        return float(level_weights.left_lower[i]) + offset
    return float(level_weights.right_lower[i]) + (offset - left_len)


def lsp_release(
    d: SurvivalDataset,
    cfg: MechanismConfig,
    rng: RandomSource,
    ladder: Ladder | None = None,
) -> float:
    """Release the shape privately (consumes half of ``cfg.epsilon``).

    A precomputed ladder may be supplied; it depends only on the dataset and
    (rungs, gamma, omega), so repeated releases can share it.
    """
    if ladder is None:
        ladder = compute_lsis(d, cfg)
    return draw_shape(ladder, build_level_weights(ladder, cfg.epsilon), rng)


def lsp_density(ladder: Ladder, epsilon: float, p: float) -> float:
    """Analytic density of the shape release at ``p`` in ``[0, gamma]``.

    Piecewise constant: ``exp(-k * epsilon/4) / Z`` on level k, where Z sums
    the level weights; integrates to 1.  Used by the privacy ratio checks.
    """
    level_weights = build_level_weights(ladder, epsilon)
    k = rung_index(ladder, p)
    finite = level_weights.log_weights[np.isfinite(level_weights.log_weights)]
    top = float(finite.max())
    log_z = top + math.log(float(np.sum(np.exp(level_weights.log_weights - top))))
    return math.exp(-k * epsilon / 4.0 - log_z)


@dataclass(frozen=True)
class NoisySums:
    """Laplace-noised sufficient sums (may be negative before clamping)."""

    delta: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.tau)):
            raise ValueError("noisy sums must be finite")


def noisy_sufficient_sums(
    d: SurvivalDataset, shape: float, epsilon: float, rng: RandomSource
) -> NoisySums:
    """Add Laplace(4/epsilon) to ``sum d_i`` and to ``sum t_i^shape``.

    Each sum has global sensitivity 1 and gets a quarter of the total
    budget.  The event-count draw comes first.
    """
    if not shape > 0.0:
        raise ValueError("shape must be positive")
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    scale = 4.0 / epsilon
    delta = csum(d.events) + rng.laplace(scale)
    tau = csum(np.exp(shape * np.log(d.times))) + rng.laplace(scale)
    return NoisySums(delta=delta, tau=tau)


def tll_release(d: SurvivalDataset, shape: float, epsilon: float, rng: RandomSource) -> float:
    """Release the scale privately (consumes half of ``epsilon``).

    Recombines the clamped noisy sums as ``(tau / delta)**(1/shape)``.  The
    result is not projected into [0, gamma]; the cap is an assumption on the
    parameter range, not a post-processing step.
    """
    sums = noisy_sufficient_sums(d, shape, epsilon, rng)
    delta = max(sums.delta, _SUM_FLOOR)
    tau = max(sums.tau, _SUM_FLOOR)
    return float(np.exp((math.log(tau) - math.log(delta)) / shape))


def release_params(
    d: SurvivalDataset,
    cfg: MechanismConfig,
    rng: RandomSource,
    ladder: Ladder | None = None,
) -> WeibullParams:
    """Release both parameters under the total budget ``cfg.epsilon``.

    The shape consumes half the budget; the scale release consumes the other
    half and uses the *released* shape, so the pair composes to the full
    budget.
    """
    shape = lsp_release(d, cfg, rng, ladder=ladder)
    scale = tll_release(d, shape, cfg.epsilon, rng)
    return WeibullParams(shape=shape, scale=scale)
