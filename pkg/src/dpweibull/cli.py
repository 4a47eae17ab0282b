"""Command-line front end.

Subcommands: ``fit`` (non-private estimate), ``release`` (one private
release), ``ladder`` (dump the interval staircase), ``synth`` (write a
synthetic CSV), ``bench`` (run a benchmark config).  Exit codes: 0 success,
1 usage error, 2 data or numeric error.  ``DPWEIBULL_SEED`` supplies the
seed when ``--seed`` is omitted.
"""

from __future__ import annotations

import argparse
import os
import sys

from .baselines import SaaConfig, laplace_baseline, saa_release
from .core import (
    DataError,
    EstimationError,
    MechanismConfig,
    WeibullParams,
    load_csv,
    normalize,
    synthesize_raw,
    write_raw_csv,
)
from .estimator import fit_mle, log_likelihood
from .harness import emit_report, load_spec, run_benchmark
from .ladder import compute_lsis, write_ladder_csv
from .mechanisms import RandomSource, release_params

__all__ = ["cli_main", "main"]


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    return int(os.environ.get("DPWEIBULL_SEED", "0"))


def _add_input_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--input", required=True, help="CSV file of survival records")
    sub.add_argument("--time", required=True, help="name of the time column")
    sub.add_argument("--event", required=True, help="name of the 0/1 event column")


def _load_dataset(args):
    raw = load_csv(args.input, args.time, args.event)
    return normalize(raw, args.omega)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpweibull", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="non-private maximum-likelihood fit")
    _add_input_args(fit)
    fit.add_argument("--omega", type=float, default=6.0)
    fit.set_defaults(func=_cmd_fit)

    release = sub.add_parser("release", help="one private release of (shape, scale)")
    _add_input_args(release)
    release.add_argument(
        "--mechanism", required=True, choices=("lsp-tll", "laplace", "saa")
    )
    release.add_argument("--epsilon", type=float, required=True, help="total privacy budget")
    release.add_argument("--seed", type=int, default=None)
    release.add_argument("--rungs", type=int, default=500)
    release.add_argument("--gamma", type=float, default=10.0)
    release.add_argument("--omega", type=float, default=6.0)
    release.add_argument("--subset-size", type=int, default=500)
    release.set_defaults(func=_cmd_release)

    ladder = sub.add_parser("ladder", help="dump the local-sensitivity staircase to CSV")
    _add_input_args(ladder)
    ladder.add_argument("--rungs", type=int, default=500)
    ladder.add_argument("--gamma", type=float, default=10.0)
    ladder.add_argument("--omega", type=float, default=6.0)
    ladder.add_argument("--output", required=True)
    ladder.set_defaults(func=_cmd_ladder)

    synth = sub.add_parser("synth", help="generate a synthetic censored-Weibull CSV")
    synth.add_argument("--n", type=int, required=True)
    synth.add_argument("--shape", type=float, required=True)
    synth.add_argument("--scale", type=float, required=True)
    synth.add_argument("--censor-fraction", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=None)
    synth.add_argument("--output", required=True)
    synth.set_defaults(func=_cmd_synth)

    bench = sub.add_parser("bench", help="run a benchmark spec from a config file")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out-dir", required=True)
    bench.set_defaults(func=_cmd_bench)
    return parser


def _cmd_fit(args) -> int:
    data = _load_dataset(args)
    fit = fit_mle(data)
    print(f"shape p = {fit.shape!r}")
    print(f"scale lambda = {fit.scale!r}")
    print(f"log_likelihood = {log_likelihood(data, fit)!r}")
    return 0


def _cmd_release(args) -> int:
    data = _load_dataset(args)
    seed = _resolve_seed(args.seed)
    rng = RandomSource(seed)
    if args.mechanism == "lsp-tll":
        cfg = MechanismConfig(
            epsilon=args.epsilon,
            rungs=args.rungs,
            gamma=args.gamma,
            omega=args.omega,
            seed=seed,
        )
        released = release_params(data, cfg, rng)
    elif args.mechanism == "laplace":
        released = laplace_baseline(data, args.epsilon, args.gamma, rng)
    else:
        cfg = SaaConfig(
            epsilon=args.epsilon,
            gamma=args.gamma,
            target_subset_size=args.subset_size,
            seed=seed,
        )
        released = saa_release(data, cfg, rng)
    print(f"mechanism = {args.mechanism}")
    print(f"epsilon_total = {args.epsilon!r}")
    print(f"seed = {seed}")
    print(f"shape p = {released.shape!r}")
    print(f"scale lambda = {released.scale!r}")
    return 0


def _cmd_ladder(args) -> int:
    data = _load_dataset(args)
    cfg = MechanismConfig(epsilon=1.0, rungs=args.rungs, gamma=args.gamma, omega=args.omega)
    ladder = compute_lsis(data, cfg)
    write_ladder_csv(ladder, args.output)
    print(f"wrote {args.output}")
    return 0


def _cmd_synth(args) -> int:
    params = WeibullParams(shape=args.shape, scale=args.scale)
    raw = synthesize_raw(args.n, params, args.censor_fraction, _resolve_seed(args.seed))
    write_raw_csv(raw, args.output)
    print(f"wrote {args.output}")
    return 0


def _cmd_bench(args) -> int:
    spec = load_spec(args.config, default_seed=_resolve_seed(None))
    report = run_benchmark(spec)
    for path in emit_report(report, args.out_dir):
        print(f"wrote {path}")
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (DataError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, OverflowError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
