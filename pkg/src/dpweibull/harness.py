"""Benchmark runner: MdAE sweeps over datasets, mechanisms, and budgets.

The sweep convention follows the usual per-parameter axis: a grid value
``eps`` is the budget spent on *each* parameter, so the private pair release
runs at total budget ``2 * eps``.  Errors are measured as the median
absolute deviation of the released values from the dataset's own non-private
fit.  Reports serialize to ``mdae.csv`` (the compatibility contract) plus a
gnuplot script that draws MdAE against the budget per dataset/parameter.
"""

from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .baselines import SaaConfig, laplace_baseline, saa_release
from .core import (
    DataError,
    EstimationError,
    MechanismConfig,
    WeibullParams,
    generate_synthetic,
    load_csv,
    normalize,
)
from .estimator import RootSolverConfig, fit_mle
from .ladder import compute_lsis
from .mechanisms import RandomSource, derive_seed, release_params

__all__ = [
    "DEFAULT_EPSILONS",
    "MECHANISM_NAMES",
    "REPORT_COLUMNS",
    "SyntheticSource",
    "CsvSource",
    "DatasetSpec",
    "BenchmarkSpec",
    "BenchmarkRow",
    "BenchmarkReport",
    "mdae",
    "run_benchmark",
    "emit_report",
    "load_report",
    "load_spec",
]

DEFAULT_EPSILONS = (0.05, 0.1, 0.2, 0.4, 0.8, 1.6)
MECHANISM_NAMES = ("lsp_tll", "laplace", "saa")
REPORT_COLUMNS = (
    "dataset",
    "mechanism",
    "epsilon_per_param",
    "parameter",
    "mdae",
    "trials",
    "exact_value",
    "master_seed",
)
SHAPE_LABEL = "p"
SCALE_LABEL = "λ"


@dataclass(frozen=True)
class SyntheticSource:
    """Generate-and-normalize dataset source."""

    n: int
    shape: float
    scale: float
    censor_fraction: float
    seed: int = 0

    def load(self, omega: float):
        params = WeibullParams(shape=self.shape, scale=self.scale)
        return generate_synthetic(self.n, params, self.censor_fraction, omega, self.seed)


@dataclass(frozen=True)
class CsvSource:
    """Load-and-normalize dataset source."""

    path: str
    time_column: str = "time"
    event_column: str = "event"

    def load(self, omega: float):
        return normalize(load_csv(self.path, self.time_column, self.event_column), omega)


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    source: SyntheticSource | CsvSource


@dataclass(frozen=True)
class BenchmarkSpec:
    """Full experiment grid; ``epsilons`` are per-parameter budgets."""

    datasets: tuple[DatasetSpec, ...]
    mechanisms: tuple[str, ...] = MECHANISM_NAMES
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    trials: int = 500
    rungs: int = 500
    gamma: float = 10.0
    omega: float = 6.0
    subset_size: int = 500
    master_seed: int = 0

    def __post_init__(self):
        if not self.datasets:
            raise ValueError("at least one dataset is required")
        unknown = set(self.mechanisms) - set(MECHANISM_NAMES)
        if unknown:
            raise ValueError(f"unknown mechanisms: {sorted(unknown)}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.epsilons or any(e <= 0.0 for e in self.epsilons):
            raise ValueError("epsilons must be positive")


@dataclass(frozen=True)
class BenchmarkRow:
    dataset: str
    mechanism: str
    epsilon_per_param: float
    parameter: str
    mdae: float
    trials: int
    exact_value: float
    master_seed: int


@dataclass(frozen=True)
class BenchmarkReport:
    rows: tuple[BenchmarkRow, ...]


def mdae(answers, exact: float) -> float:
    """Median of ``|answer - exact|`` (even length: mean of the middle two)."""
    answers = list(answers)
    if not answers:
        raise ValueError("answers must be non-empty")
    if not math.isfinite(exact):
        raise ValueError("exact value must be finite")
    return float(statistics.median(abs(float(a) - exact) for a in answers))


def _nan_rows(spec: BenchmarkSpec, name: str, mech: str, eps: float) -> list[BenchmarkRow]:
    nan = float("nan")
    return [
        BenchmarkRow(name, mech, float(eps), label, nan, spec.trials, nan, spec.master_seed)
        for label in (SHAPE_LABEL, SCALE_LABEL)
    ]


def _error_rows(spec: BenchmarkSpec, name: str, mechanisms) -> list[BenchmarkRow]:
    rows: list[BenchmarkRow] = []
    for mech in mechanisms:
        for eps in spec.epsilons:
            rows.extend(_nan_rows(spec, name, mech, eps))
    return rows


def run_benchmark(spec: BenchmarkSpec) -> BenchmarkReport:
    """Run the grid; rows come out in (dataset, mechanism, epsilon) order.

    Every trial draws from its own stream seeded by hashing (master seed,
    dataset, mechanism, epsilon, trial), so results do not depend on
    execution order.  Failures (unfittable dataset or mechanism error) are
    recorded as NaN rows and the run continues.
    """
    solver = RootSolverConfig(bracket=(1e-8, spec.gamma))
    rows: list[BenchmarkRow] = []
    for ds in spec.datasets:
        try:
            data = ds.source.load(spec.omega)
            exact = fit_mle(data, solver)
        except (DataError, EstimationError, OSError):
            rows.extend(_error_rows(spec, ds.name, spec.mechanisms))
            continue
        ladder = None
        if "lsp_tll" in spec.mechanisms:
            try:
                ladder_cfg = MechanismConfig(
                    epsilon=1.0, rungs=spec.rungs, gamma=spec.gamma, omega=spec.omega
                )
                ladder = compute_lsis(data, ladder_cfg, solver)
            except EstimationError:
                ladder = None
        for mech in spec.mechanisms:
            for eps in spec.epsilons:
                total_epsilon = 2.0 * eps
                try:
                    if mech == "lsp_tll" and ladder is None:
                        raise EstimationError("ladder unavailable")
                    shapes: list[float] = []
                    scales: list[float] = []
                    for trial in range(spec.trials):
                        rng = RandomSource(derive_seed(spec.master_seed, ds.name, mech, float(eps), trial))
                        if mech == "lsp_tll":
                            cfg = MechanismConfig(
                                epsilon=total_epsilon,
                                rungs=spec.rungs,
                                gamma=spec.gamma,
                                omega=spec.omega,
                            )
                            released = release_params(data, cfg, rng, ladder=ladder)
                        elif mech == "laplace":
                            released = laplace_baseline(data, total_epsilon, spec.gamma, rng, mle=exact)
                        else:
                            saa_cfg = SaaConfig(
                                epsilon=total_epsilon,
                                gamma=spec.gamma,
                                target_subset_size=spec.subset_size,
                            )
                            released = saa_release(data, saa_cfg, rng)
                        shapes.append(released.shape)
                        scales.append(released.scale)
                except EstimationError:
                    rows.extend(_nan_rows(spec, ds.name, mech, eps))
                    continue
                rows.append(
                    BenchmarkRow(
                        ds.name, mech, float(eps), SHAPE_LABEL,
                        mdae(shapes, exact.shape), spec.trials, exact.shape, spec.master_seed,
                    )
                )
                rows.append(
                    BenchmarkRow(
                        ds.name, mech, float(eps), SCALE_LABEL,
                        mdae(scales, exact.scale), spec.trials, exact.scale, spec.master_seed,
                    )
                )
    return BenchmarkReport(tuple(rows))


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: BenchmarkReport, out_dir) -> list[Path]:
    """Write ``mdae.csv`` and the companion gnuplot script; returns the paths.

    Floats use shortest round-trip formatting, so two runs of the same spec
    and seed produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "mdae.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for row in report.rows:
            writer.writerow(
                [
                    row.dataset,
                    row.mechanism,
                    _format_value(row.epsilon_per_param),
                    row.parameter,
                    _format_value(row.mdae),
                    row.trials,
                    _format_value(row.exact_value),
                    row.master_seed,
                ]
            )
    gp_path = out / "plot_mdae.gp"
    gp_path.write_text(_plot_script(report), encoding="utf-8")
    return [csv_path, gp_path]


def _plot_script(report: BenchmarkReport) -> str:
    datasets = list(dict.fromkeys(row.dataset for row in report.rows))
    mechanisms = list(dict.fromkeys(row.mechanism for row in report.rows))
    parameters = list(dict.fromkeys(row.parameter for row in report.rows))
    panels = [(ds, param) for ds in datasets for param in parameters]
    lines = [
        "# MdAE against per-parameter privacy budget, one panel per",
        "# dataset/parameter, one series per mechanism.",
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'per-parameter privacy budget'",
        "set ylabel 'MdAE'",
        "set key outside right",
        "set terminal pngcairo size 1600,900 enhanced",
        "set output 'mdae.png'",
    ]
    if panels:
        cols = max(1, len(parameters))
        rows_needed = max(1, (len(panels) + cols - 1) // cols)
        lines.append(f"set multiplot layout {rows_needed},{cols}")
        for ds, param in panels:
            lines.append(f"set title '{ds}: {param}'")
            series = []
            for mech in mechanisms:
                cond = (
                    f"strcol(1) eq '{ds}' && strcol(2) eq '{mech}' && strcol(4) eq '{param}'"
                )
                series.append(
                    f"'mdae.csv' every ::1 using (column(3)):({cond} ? column(5) : 1/0) "
                    f"with linespoints title '{mech}'"
                )
            lines.append("plot " + ", \\\n     ".join(series))
        lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def load_report(path) -> BenchmarkReport:
    """Parse a ``mdae.csv`` produced by emit_report."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != REPORT_COLUMNS:
            raise DataError(f"{path}: unexpected report header {header!r}")
        for record in reader:
            if len(record) != len(REPORT_COLUMNS):
                raise DataError(f"{path}: malformed row {record!r}")
            rows.append(
                BenchmarkRow(
                    dataset=record[0],
                    mechanism=record[1],
                    epsilon_per_param=float(record[2]),
                    parameter=record[3],
                    mdae=float(record[4]),
                    trials=int(record[5]),
                    exact_value=float(record[6]),
                    master_seed=int(record[7]),
                )
            )
    return BenchmarkReport(tuple(rows))


def _dataset_from_table(table: dict) -> DatasetSpec:
    if "name" not in table:
        raise DataError("dataset entry missing 'name'")
    name = str(table["name"])
    if "path" in table:
        source = CsvSource(
            path=str(table["path"]),
            time_column=str(table.get("time_column", "time")),
            event_column=str(table.get("event_column", "event")),
        )
    elif "n" in table:
        source = SyntheticSource(
            n=int(table["n"]),
            shape=float(table["shape"]),
            scale=float(table["scale"]),
            censor_fraction=float(table.get("censor_fraction", 0.0)),
            seed=int(table.get("seed", 0)),
        )
    else:
        raise DataError(f"dataset {name!r} needs either 'path' or synthetic parameters")
    return DatasetSpec(name=name, source=source)


def load_spec(path, default_seed: int = 0) -> BenchmarkSpec:
    """Read a benchmark spec from a TOML document."""
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise DataError(f"{path}: invalid config: {exc}") from None
    try:
        datasets = tuple(_dataset_from_table(t) for t in doc.get("datasets", []))
        spec = BenchmarkSpec(
            datasets=datasets,
            mechanisms=tuple(doc.get("mechanisms", MECHANISM_NAMES)),
            epsilons=tuple(float(e) for e in doc.get("epsilons", DEFAULT_EPSILONS)),
            trials=int(doc.get("trials", 500)),
            rungs=int(doc.get("rungs", 500)),
            gamma=float(doc.get("gamma", 10.0)),
            omega=float(doc.get("omega", 6.0)),
            subset_size=int(doc.get("subset_size", 500)),
            master_seed=int(doc.get("seed", default_seed)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: invalid config: {exc}") from None
    return spec
