"""
Command-line entry point for censored expectile regression
"""
import argparse
import logging
import sys
from typing import List, Optional

import pandas as pd
from pydantic import ValidationError

from config.settings import build_run_config, configure_logging
from core.censoring import inject_censoring
from core.datasets import (
    metadata_path,
    read_covariates,
    read_observations,
    read_responses,
    write_metadata,
    write_observations,
    write_predictions,
)
from core.exceptions import (
    ConfigError,
    DaernnError,
    DomainError,
    NumericalError,
    SchemaError,
)
from core.harness import cross_validate_dataset, run_benchmark, tune_on_uncensored, write_reports
from core.predictor import load_predictor, save_predictor
from core.simulation import gen_scenario, verify_design_rates
from methods.manager import MethodManager
from models.schemas import BoundSampler, CensoringScheme, RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2
EXIT_SCHEMA = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


def _require(config: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(config, name) is None:
            raise ConfigError(f"'{config.subcommand}' needs --{name.replace('_', '-')}")


def cmd_simulate(config: RunConfig) -> int:
    _require(config, "output")
    data = gen_scenario(config.scenario())
    write_observations(data, config.output)
    print(f"✅ Wrote {data.n} observations to {config.output}")
    print(f"Realized censoring rate: {data.censoring_rate:.4f}")
    return EXIT_OK


def cmd_inject(config: RunConfig) -> int:
    _require(config, "input", "output")
    try:
        scheme = CensoringScheme(
            kind=config.kind,
            lower=BoundSampler.parse(config.lower_sampler) if config.lower_sampler else None,
            upper=BoundSampler.parse(config.upper_sampler) if config.upper_sampler else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    X, y, covariates = read_responses(config.input, config.response)
    data, rate = inject_censoring(X, y, scheme, config.seed, covariates)
    write_observations(data, config.output)
    print(f"✅ Wrote {data.n} observations to {config.output}")
    print(f"Realized censoring rate: {rate:.4f}")
    return EXIT_OK


def _tuned_hyper(config: RunConfig, data):
    if not config.tune:
        return config.hyper_point(), 0.0
    tuning = tune_on_uncensored(data, config.hyper_grid(), k=config.folds, tau=config.tune_level,
                                seed=config.seed, n_jobs=config.jobs)
    print(f"Selected hyperparameters: {tuning.best.model_dump(mode='json')}")
    return tuning.best, tuning.seconds


def cmd_fit(config: RunConfig) -> int:
    _require(config, "train")
    if config.test is None and config.model_dir is None:
        raise ConfigError("'fit' needs --test or --model-dir")
    data = read_observations(config.train)
    method = MethodManager().get_method(config.method)
    if method.requires_truth and not data.has_y_true:
        raise SchemaError(f"Training file lacks column 'y_true' required by {config.method.value}",
                          column="y_true")
    hyper, _ = _tuned_hyper(config, data)
    settings = config.method_settings(hyper).model_copy(update={"n_jobs": config.jobs})
    fitted = method.fit(data, settings)
    print(f"✅ Fitted {config.method.value} in {fitted.seconds:.1f}s")

    if config.model_dir is not None:
        save_predictor(fitted.predictor, config.model_dir, fitted.metadata)
        print(f"Saved model bundle to {config.model_dir}")
    if config.test is not None:
        _require(config, "output")
        X = read_covariates(config.test, data.covariates)
        predictions = fitted.predict(X)
        write_predictions(predictions, config.output, config.detail)
        write_metadata(fitted.metadata, metadata_path(config.output))
        print(f"Wrote {predictions.n} predictions to {config.output}")
    return EXIT_OK


def cmd_predict(config: RunConfig) -> int:
    _require(config, "model_dir", "input", "output")
    predictor, metadata = load_predictor(config.model_dir)
    X = read_covariates(config.input, metadata.covariates)
    predictions = predictor.predict(X)
    write_predictions(predictions, config.output, config.detail)
    write_metadata(metadata, metadata_path(config.output))
    print(f"✅ Wrote {predictions.n} predictions to {config.output}")
    return EXIT_OK


def cmd_benchmark(config: RunConfig) -> int:
    _require(config, "output_dir")
    scenario = config.scenario()
    data = gen_scenario(scenario) if config.tune else None
    hyper, tuning_seconds = _tuned_hyper(config, data)
    summary, predictions = run_benchmark(
        scenario,
        config.methods,
        config.replications,
        config.seed,
        config.method_settings(hyper),
        n_jobs=config.jobs,
        progress=True,
        tuning_seconds=tuning_seconds,
    )
    paths = write_reports(summary, config.output_dir, predictions)
    print(f"✅ {summary.replications} replications of {summary.scenario}")
    for row in summary.rows:
        ratio = "" if row.mean_ratio is None else f"  ratio {row.mean_ratio:.3f}"
        print(f"  {row.method.value:<9} tau={row.tau:<4g} EL {row.mean_el:.4f}{ratio}")
    print(f"Reports: {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


def cmd_tune(config: RunConfig) -> int:
    data = read_observations(config.input) if config.input else gen_scenario(config.scenario())
    tuning = tune_on_uncensored(data, config.hyper_grid(), k=config.folds, tau=config.tune_level,
                                seed=config.seed, n_jobs=config.jobs, progress=True)
    if config.output:
        tuning.table.to_csv(config.output, index=False)
    print(f"✅ Best: {tuning.best.model_dump(mode='json')} ({tuning.seconds:.1f}s)")
    return EXIT_OK


def cmd_crossval(config: RunConfig) -> int:
    _require(config, "input", "output")
    data = read_observations(config.input)
    hyper, _ = _tuned_hyper(config, data)
    table = cross_validate_dataset(data, config.methods, config.method_settings(hyper),
                                   k=config.folds, seed=config.seed)
    table.to_csv(config.output, index=False)
    print(f"✅ Wrote {len(table)} fold scores to {config.output}")
    return EXIT_OK


def cmd_rates(config: RunConfig) -> int:
    reports = verify_design_rates(n=config.n, seed=config.seed)
    frame = pd.DataFrame([r.model_dump(mode="json") for r in reports])
    if config.output:
        frame.to_csv(config.output, index=False)
    for r in reports:
        mark = "ok " if r.within_tolerance else "off"
        print(f"{mark} {r.model.value} {r.error.value:<6} {r.kind.name.lower():<8} "
              f"nominal {r.nominal:.2f} realized {r.realized:.3f}  {r.bounds}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "inject": cmd_inject,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "benchmark": cmd_benchmark,
    "tune": cmd_tune,
    "crossval": cmd_crossval,
    "rates": cmd_rates,
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="KEY=VALUE run-config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--log-level", dest="log_level")
    parser.add_argument("--output")


def _add_scenario(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=["model1", "model2"])
    parser.add_argument("--error", choices=["normal", "t3"])
    parser.add_argument("--censor-kind", dest="censor_kind", help="right, left or interval")
    parser.add_argument("--target-rate", dest="target_rate", help="25 or 50")
    parser.add_argument("--n", type=int)


def _add_method(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--levels", help="comma-separated reporting levels")
    parser.add_argument("--grid-size", dest="grid_size", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--warm-start", dest="warm_start", action="store_true", default=None)
    parser.add_argument("--iteration-seeding", dest="iteration_seeding", choices=["per_iteration", "shared"])
    parser.add_argument("--standardize", action="store_true", default=None)
    parser.add_argument("--layers", type=int)
    parser.add_argument("--nodes", type=int)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--dropout", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch", type=int)


def _add_tuning(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tune", action="store_true", default=None)
    parser.add_argument("--tune-level", dest="tune_level", type=float)
    parser.add_argument("--folds", type=int)
    for axis in ("layers", "nodes", "learning_rate", "dropout", "epochs", "batch"):
        parser.add_argument(f"--grid-{axis.replace('_', '-')}", dest=f"grid_{axis}",
                            help="comma-separated grid values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="daernn", description="Censored expectile regression")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a censored scenario CSV")
    _add_common(p)
    _add_scenario(p)

    p = sub.add_parser("inject", help="artificially censor a fully observed CSV")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--response")
    p.add_argument("--kind", help="right, left or interval")
    p.add_argument("--lower-sampler", dest="lower_sampler", help="e.g. normal:0,2")
    p.add_argument("--upper-sampler", dest="upper_sampler", help="e.g. exponential:4")

    p = sub.add_parser("fit", help="fit a method; predict --test and/or save --model-dir")
    _add_common(p)
    _add_method(p)
    _add_tuning(p)
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--method", choices=["daernn", "full", "oracle", "dalinear"])
    p.add_argument("--model-dir", dest="model_dir")
    p.add_argument("--detail", help="per-iteration prediction CSV")

    p = sub.add_parser("predict", help="apply a saved model bundle")
    _add_common(p)
    p.add_argument("--model-dir", dest="model_dir")
    p.add_argument("--input")
    p.add_argument("--detail")

    p = sub.add_parser("benchmark", help="replication study on a simulated scenario")
    _add_common(p)
    _add_scenario(p)
    _add_method(p)
    _add_tuning(p)
    p.add_argument("--methods", help="comma-separated methods")
    p.add_argument("--replications", type=int)
    p.add_argument("--output-dir", dest="output_dir")

    p = sub.add_parser("tune", help="grid search on uncensored rows")
    _add_common(p)
    _add_scenario(p)
    _add_tuning(p)
    p.add_argument("--input")

    p = sub.add_parser("crossval", help="k-fold evaluation of a CSV dataset")
    _add_common(p)
    _add_method(p)
    _add_tuning(p)
    p.add_argument("--input")
    p.add_argument("--methods")

    p = sub.add_parser("rates", help="realized censoring rate of every design cell")
    _add_common(p)
    p.add_argument("--n", type=int)
    return parser


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.command == "crossval" and flags.get("folds") is None:
        flags["folds"] = 10
    if args.command == "rates" and flags.get("n") is None:
        flags["n"] = 5000
    return build_run_config(args.command, flags, args.config)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = parse_config(argv)
        configure_logging(config.log_level)
        return COMMANDS[config.subcommand](config)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SchemaError as e:
        print(f"❌ Schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except NumericalError as e:
        print(f"❌ Numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, DaernnError, ValidationError, ValueError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
