"""Differentially private parametric survival analysis with Weibull models.

Fits shape/scale parameters to right-censored data by maximum likelihood and
releases them under a total privacy budget: the shape through an exponential
mechanism over nested local-sensitivity intervals, the scale through Laplace
noise on its two sufficient sums.  Includes global-sensitivity Laplace and
sample-and-aggregate baselines plus a median-absolute-error benchmark
harness and CLI.
"""

from .baselines import SaaConfig, laplace_baseline, saa_release
from .core import (
    DataError,
    DatasetSummary,
    EstimationError,
    MechanismConfig,
    RawDataset,
    SurvivalDataset,
    WeibullParams,
    generate_synthetic,
    load_csv,
    normalize,
    summarize,
    synthesize_raw,
    write_raw_csv,
)
from .estimator import (
    RootSolverConfig,
    ScoreFunctions,
    fit_mle,
    log_likelihood,
    score_gap,
    solve_scale,
    solve_shape,
)
from .harness import (
    BenchmarkReport,
    BenchmarkRow,
    BenchmarkSpec,
    CsvSource,
    DatasetSpec,
    SyntheticSource,
    emit_report,
    load_report,
    load_spec,
    mdae,
    run_benchmark,
)
from .ladder import (
    BoundDomainError,
    BoundFamilies,
    Ladder,
    compute_lsis,
    min_tp_log_t,
    rung_index,
    write_ladder_csv,
)
from .mechanisms import (
    LevelWeights,
    NoisySums,
    RandomSource,
    build_level_weights,
    derive_seed,
    draw_shape,
    lsp_density,
    lsp_release,
    noisy_sufficient_sums,
    release_params,
    tll_release,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkReport",
    "BenchmarkRow",
    "BenchmarkSpec",
    "BoundDomainError",
    "BoundFamilies",
    "CsvSource",
    "DataError",
    "DatasetSpec",
    "DatasetSummary",
    "EstimationError",
    "Ladder",
    "LevelWeights",
    "MechanismConfig",
    "NoisySums",
    "RandomSource",
    "RawDataset",
    "RootSolverConfig",
    "SaaConfig",
    "ScoreFunctions",
    "SurvivalDataset",
    "SyntheticSource",
    "WeibullParams",
    "build_level_weights",
    "compute_lsis",
    "derive_seed",
    "draw_shape",
    "emit_report",
    "fit_mle",
    "generate_synthetic",
    "laplace_baseline",
    "load_csv",
    "load_report",
    "load_spec",
    "log_likelihood",
    "lsp_density",
    "lsp_release",
    "mdae",
    "min_tp_log_t",
    "noisy_sufficient_sums",
    "normalize",
    "release_params",
    "rung_index",
    "run_benchmark",
    "saa_release",
    "score_gap",
    "solve_scale",
    "solve_shape",
    "summarize",
    "synthesize_raw",
    "tll_release",
    "write_ladder_csv",
    "write_raw_csv",
]
