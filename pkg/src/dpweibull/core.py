"""Domain types, CSV ingestion, normalization, and synthetic censored data.

Survival records are pairs ``(t_i, d_i)``: a positive survival time and a
0/1 death indicator (``d_i = 0`` means the record is right-censored).  All
estimation code in this package operates on times normalized into
``[exp(-omega), 1]``; raw (on-disk) times are positive reals in any unit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DataError",
    "EstimationError",
    "RawDataset",
    "SurvivalDataset",
    "WeibullParams",
    "MechanismConfig",
    "DatasetSummary",
    "load_csv",
    "write_raw_csv",
    "normalize",
    "synthesize_raw",
    "generate_synthetic",
    "summarize",
    "csum",
]


class DataError(ValueError):
    """Malformed or out-of-contract input data."""


class EstimationError(RuntimeError):
    """A fit or root search could not be completed."""


def csum(values) -> float:
    """Error-compensated sum (exact rounding via math.fsum).

    Power sums here mix magnitudes from exp(-omega*p) up to 1, so naive
    accumulation loses the small terms; fsum does not.
    """
    if isinstance(values, np.ndarray):
        return math.fsum(values.tolist())
    return math.fsum(values)


def _as_1d_float(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{what} must be one-dimensional")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _check_events(events: np.ndarray) -> None:
    if not np.all((events == 0.0) | (events == 1.0)):
        raise DataError("event indicators must be 0 or 1")


@dataclass(frozen=True)
class RawDataset:
    """Unnormalized survival records: positive finite times, 0/1 events."""

    times: np.ndarray
    events: np.ndarray

    def __post_init__(self):
        times = _as_1d_float(self.times, "times")
        events = _as_1d_float(self.events, "events")
        if times.size == 0:
            raise DataError("empty dataset")
        if times.size != events.size:
            raise DataError("times and events differ in length")
        if not np.all(np.isfinite(times)):
            raise DataError("non-finite survival time")
        if np.any(times <= 0.0):
            raise DataError("survival times must be positive")
        _check_events(events)
        object.__setattr__(self, "times", _freeze(times))
        object.__setattr__(self, "events", _freeze(events))

    @property
    def n(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class SurvivalDataset:
    """Normalized right-censored observations.

    ``times`` lie in ``(0, 1]`` (``normalize`` additionally guarantees the
    ``exp(-omega)`` floor and that the largest observation maps to exactly 1);
    ``events`` are 0/1 death indicators.  ``raw_min``/``raw_max`` keep the
    pre-normalization extrema for reporting.
    """

    times: np.ndarray
    events: np.ndarray
    raw_min: float | None = None
    raw_max: float | None = None

    def __post_init__(self):
        times = _as_1d_float(self.times, "times")
        events = _as_1d_float(self.events, "events")
        if times.size == 0:
            raise DataError("empty dataset")
        if times.size != events.size:
            raise DataError("times and events differ in length")
        if not np.all(np.isfinite(times)):
            raise DataError("non-finite survival time")
        if np.any(times <= 0.0) or np.any(times > 1.0):
            raise DataError("normalized times must lie in (0, 1]")
        _check_events(events)
        object.__setattr__(self, "times", _freeze(times))
        object.__setattr__(self, "events", _freeze(events))
        if self.raw_min is None:
            object.__setattr__(self, "raw_min", float(times.min()))
        if self.raw_max is None:
            object.__setattr__(self, "raw_max", float(times.max()))

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def num_events(self) -> int:
        return int(round(csum(self.events)))


@dataclass(frozen=True)
class WeibullParams:
    """Weibull shape/scale pair.

    The producer constrains the range: estimators yield strictly positive
    values and the ladder mechanism stays within ``[0, gamma]``, while the
    additive-noise baselines can report values outside the parameter space.
    Consumers that need positivity (the likelihood, the data generator)
    check it themselves.
    """

    shape: float
    scale: float

    def __post_init__(self):
        if math.isnan(self.shape) or math.isnan(self.scale):
            raise ValueError("parameters must not be NaN")


@dataclass(frozen=True)
class MechanismConfig:
    """Privacy and release configuration.

    ``epsilon`` is the *total* privacy budget for releasing both parameters;
    the mechanisms apply their internal splits.  ``rungs`` is the ladder
    depth, ``gamma`` the output cap for the shape, ``omega`` the time-floor
    exponent used at normalization time.
    """

    epsilon: float
    rungs: int = 500
    gamma: float = 10.0
    omega: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")
        if not self.omega > 0.0:
            raise ValueError("omega must be positive")
        if self.rungs < 0:
            raise ValueError("rungs must be >= 0")


@dataclass(frozen=True)
class DatasetSummary:
    """Sufficient statistics plus pre-normalization extrema."""

    n: int
    uncensored: int
    sum_log_t_events: float
    t_min: float
    t_max: float

    def __post_init__(self):
        if not 0 <= self.uncensored <= self.n:
            raise ValueError("uncensored count out of range")
        if self.sum_log_t_events > 0.0:
            raise ValueError("sum of event log-times must be <= 0")


def load_csv(path, time_column: str, event_column: str) -> RawDataset:
    """Read survival records from a headered CSV file.

    Times must parse as positive reals and events as exactly "0" or "1";
    violations are reported with their 1-based data row number.  Extra
    columns are ignored.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        for col in (time_column, event_column):
            if col not in reader.fieldnames:
                raise DataError(f"{path}: missing column {col!r}")
        times: list[float] = []
        events: list[float] = []
        for row_num, row in enumerate(reader, start=1):
            t_text = row.get(time_column)
            e_text = row.get(event_column)
            try:
                t = float(t_text)
            except (TypeError, ValueError):
                raise DataError(f"{path}: row {row_num}: unparseable time {t_text!r}") from None
            if not math.isfinite(t) or t <= 0.0:
                raise DataError(f"{path}: row {row_num}: non-positive time {t_text!r}")
            if e_text not in ("0", "1"):
                raise DataError(f"{path}: row {row_num}: event must be 0 or 1, got {e_text!r}")
            times.append(t)
            events.append(float(e_text))
        if not times:
            raise DataError(f"{path}: no data rows")
    return RawDataset(np.array(times), np.array(events))


def write_raw_csv(raw: RawDataset, path, time_column: str = "time", event_column: str = "event") -> None:
    """Write a raw dataset in the format load_csv reads back."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([time_column, event_column])
        for t, e in zip(raw.times, raw.events):
            writer.writerow([repr(float(t)), int(e)])


def normalize(data, omega: float) -> SurvivalDataset:
    """Rescale times by the dataset maximum and clamp below at exp(-omega).

    The record with the maximal time maps to exactly 1; events are unchanged.
    Accepts raw or already-normalized datasets (idempotent on the latter).
    Zero or negative raw times are rejected rather than clamped: they signal
    data errors.
    """
    if not omega > 0.0:
        raise ValueError("omega must be positive")
    times = _as_1d_float(data.times, "times")
    events = _as_1d_float(data.events, "events")
    if times.size == 0:
        raise DataError("empty dataset")
    if not np.all(np.isfinite(times)):
        raise DataError("non-finite survival time")
    if np.any(times <= 0.0):
        raise DataError("survival times must be positive")
    top = float(times.max())
    scaled = np.maximum(times / top, math.exp(-omega))
    return SurvivalDataset(scaled, events, raw_min=float(times.min()), raw_max=top)


def _open_unit(gen: np.random.Generator, n: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    u = gen.random(n)
    while True:
        zero = u == 0.0
        if not zero.any():
            return u
        u[zero] = gen.random(int(zero.sum()))


def synthesize_raw(n: int, true_params: WeibullParams, censor_fraction: float, seed: int) -> RawDataset:
    """Draw raw censored-Weibull records, deterministic per seed.

    Event times come from the Weibull inverse CDF
    ``t = scale * (-ln(1 - u))**(1/shape)``.  Censoring is end-of-study: the
    horizon is the ``1 - censor_fraction`` quantile of the event
    distribution, so each record is uncensored with probability exactly
    ``1 - censor_fraction`` and censored records carry the horizon time.
    This mirrors how registry and clinical cohorts are censored (subjects
    still event-free when the data were collected).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= censor_fraction < 1.0:
        raise ValueError("censor_fraction must lie in [0, 1)")
    if not (true_params.shape > 0.0 and true_params.scale > 0.0):
        raise ValueError("true parameters must be strictly positive")
    shape, scale = true_params.shape, true_params.scale
    gen = np.random.default_rng(seed)
    u = _open_unit(gen, n)
    event_times = scale * (-np.log1p(-u)) ** (1.0 / shape)
    if censor_fraction == 0.0:
        return RawDataset(event_times, np.ones(n))
    horizon = scale * (-math.log(censor_fraction)) ** (1.0 / shape)
    events = (event_times <= horizon).astype(float)
    times = np.minimum(event_times, horizon)
    return RawDataset(times, events)


def generate_synthetic(
    n: int,
    true_params: WeibullParams,
    censor_fraction: float,
    omega: float,
    seed: int,
) -> SurvivalDataset:
    """Synthesize a censored-Weibull dataset and normalize it."""
    return normalize(synthesize_raw(n, true_params, censor_fraction, seed), omega)


def summarize(d: SurvivalDataset) -> DatasetSummary:
    """Record count, uncensored count, event log-time sum, raw extrema."""
    log_t = np.log(d.times)
    return DatasetSummary(
        n=d.n,
        uncensored=d.num_events,
        sum_log_t_events=csum(d.events * log_t),
        t_min=float(d.raw_min),
        t_max=float(d.raw_max),
    )
