"""
Replication studies, k-fold evaluation of CSV datasets and CSV reports
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from core.censoring import CensoredDataset
from core.evaluation import TuningResult, el_ratio, expectile_loss_metric, grid_search_cv, kfold_split
from core.simulation import gen_scenario, train_test_split
from methods.manager import MethodManager
from models.schemas import (
    HyperGrid,
    MethodName,
    MethodSettings,
    ReplicationRecord,
    ReplicationSummary,
    ScenarioSpec,
    SummaryRow,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PLOT_LEVELS = (0.1, 0.3, 0.5, 0.7, 0.9)
REFERENCE = MethodName.DAERNN


@dataclass
class ReplicationOutcome:
    replication: int
    records: List[ReplicationRecord] = field(default_factory=list)
    seconds: Dict[str, float] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    predictions: Optional[pd.DataFrame] = None


def _score(
    scenario: str,
    replication: int,
    predictions: Dict[MethodName, object],
    truth: np.ndarray,
    levels: Sequence[float],
) -> List[ReplicationRecord]:
    """EL per method and level; ratio is EL(reference) / EL(method) when the reference ran"""
    records = []
    for tau in levels:
        els = {name: expectile_loss_metric(truth, pred.column(tau), tau) for name, pred in predictions.items()}
        reference = els.get(REFERENCE)
        for name, el in els.items():
            ratio = None
            if reference is not None and name != REFERENCE and el > 0:
                ratio = el_ratio(reference, el)
            records.append(ReplicationRecord(scenario=scenario, replication=replication, method=name,
                                             tau=tau, el=el, ratio=ratio))
    return records


def _prediction_rows(
    scenario: str, replication: int, predictions: Dict[MethodName, object], truth: np.ndarray
) -> pd.DataFrame:
    frames = []
    for name, pred in predictions.items():
        for tau in PLOT_LEVELS:
            try:
                column = pred.column(tau)
            except KeyError:
                continue
            frames.append(pd.DataFrame({
                "scenario": scenario,
                "replication": replication,
                "method": name.value,
                "tau": tau,
                "row": np.arange(column.size),
                "prediction": column,
                "y_true": truth,
            }))
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def run_replication(
    scenario: ScenarioSpec,
    methods: Sequence[MethodName],
    replication: int,
    base_seed: int,
    settings: MethodSettings,
) -> ReplicationOutcome:
    """Generate, split 80/20, fit every method and score on the test set's y_true"""
    seed = base_seed + replication
    data = gen_scenario(scenario.model_copy(update={"seed": seed}))
    train, test = train_test_split(data, 0.8, seed)
    rep_settings = settings.model_copy(update={"seed": seed})
    manager = MethodManager()

    outcome = ReplicationOutcome(replication=replication)
    predictions = {}
    for name in methods:
        result = manager.execute_method(name, data=train, settings=rep_settings, test_X=test.X)
        if not result.success:
            logger.warning("Replication %d: %s", replication, result.error)
            outcome.failures.append(MethodName(name).value)
            continue
        predictions[MethodName(name)] = result.result[1]
        outcome.seconds[MethodName(name).value] = result.seconds
    outcome.records = _score(scenario.scenario_id, replication, predictions, test.y_true, settings.levels)
    outcome.predictions = _prediction_rows(scenario.scenario_id, replication, predictions, test.y_true)
    logger.info("Replication %d of %s done", replication, scenario.scenario_id)
    return outcome


def summarize(
    scenario: str,
    outcomes: Sequence[ReplicationOutcome],
    methods: Sequence[MethodName],
    levels: Sequence[float],
    tuning_seconds: float = 0.0,
) -> ReplicationSummary:
    """Means over completed replications, in replication order"""
    outcomes = sorted(outcomes, key=lambda o: o.replication)
    records = [record for outcome in outcomes for record in outcome.records]
    failures = {MethodName(m).value: sum(MethodName(m).value in o.failures for o in outcomes) for m in methods}
    seconds = {}
    for m in methods:
        times = [o.seconds[MethodName(m).value] for o in outcomes if MethodName(m).value in o.seconds]
        seconds[MethodName(m).value] = float(np.mean(times)) if times else math.nan

    rows = []
    for m in methods:
        name = MethodName(m)
        for tau in levels:
            mine = [r for r in records if r.method == name and math.isclose(r.tau, tau)]
            ratios = [r.ratio for r in mine if r.ratio is not None]
            rows.append(SummaryRow(
                scenario=scenario,
                method=name,
                tau=tau,
                mean_el=float(np.mean([r.el for r in mine])) if mine else math.nan,
                mean_ratio=float(np.mean(ratios)) if ratios else None,
                median_ratio=float(np.median(ratios)) if ratios else None,
                completed=len(mine),
                failures=failures[name.value],
            ))
    return ReplicationSummary(
        scenario=scenario,
        replications=len(outcomes),
        rows=rows,
        seconds=seconds,
        failures=failures,
        tuning_seconds=tuning_seconds,
        records=records,
    )


def run_benchmark(
    scenario: ScenarioSpec,
    methods: Sequence[MethodName],
    replications: int,
    base_seed: int,
    settings: Optional[MethodSettings] = None,
    n_jobs: int = 1,
    progress: bool = False,
    tuning_seconds: float = 0.0,
) -> Tuple[ReplicationSummary, pd.DataFrame]:
    """Replication study plus the long-format predictions behind the box plots"""
    if replications < 1:
        raise ValueError("At least one replication is required")
    settings = settings or MethodSettings()
    reps = tqdm(range(1, replications + 1), desc=scenario.scenario_id, disable=not progress)
    if n_jobs > 1:
        outcomes = Parallel(n_jobs=n_jobs)(
            delayed(run_replication)(scenario, methods, r, base_seed, settings) for r in reps
        )
    else:
        outcomes = [run_replication(scenario, methods, r, base_seed, settings) for r in reps]
    summary = summarize(scenario.scenario_id, outcomes, methods, settings.levels, tuning_seconds)
    frames = [o.predictions for o in sorted(outcomes, key=lambda o: o.replication)
              if o.predictions is not None and not o.predictions.empty]
    predictions = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    return summary, predictions


def run_replications(
    scenario: ScenarioSpec,
    methods: Sequence[MethodName],
    replications: int,
    base_seed: int,
    settings: Optional[MethodSettings] = None,
    n_jobs: int = 1,
) -> ReplicationSummary:
    summary, _ = run_benchmark(scenario, methods, replications, base_seed, settings, n_jobs)
    return summary


def tune_on_uncensored(
    data: CensoredDataset,
    grid: HyperGrid,
    k: int = 5,
    tau: float = 0.5,
    seed: int = 0,
    n_jobs: int = 1,
    progress: bool = False,
) -> TuningResult:
    """Grid search over the uncensored rows only"""
    observed = data.uncensored()
    return grid_search_cv(observed.X, observed.t, grid, k=k, tau=tau, seed=seed, n_jobs=n_jobs,
                          progress=progress)


def cross_validate_dataset(
    data: CensoredDataset,
    methods: Sequence[MethodName],
    settings: MethodSettings,
    k: int = 10,
    seed: int = 0,
) -> pd.DataFrame:
    """Per-fold EL and ratio for each method.

    Folds are scored on y_true when the data carries it, otherwise on the
    uncensored rows of the held-out fold.
    """
    manager = MethodManager()
    use_truth = data.has_y_true
    rows = []
    for fold, test_idx in enumerate(kfold_split(data.n, k, seed), start=1):
        train_idx = np.setdiff1d(np.arange(data.n), test_idx)
        train, test = data.subset(train_idx), data.subset(test_idx)
        if not use_truth:
            test = test.uncensored()
            if test.n == 0:
                logger.warning("Fold %d has no uncensored rows to score", fold)
                continue
        truth = test.y_true if use_truth else test.t
        predictions = {}
        for name in methods:
            result = manager.execute_method(name, data=train, settings=settings, test_X=test.X)
            if not result.success:
                logger.warning("Fold %d: %s", fold, result.error)
                continue
            predictions[MethodName(name)] = result.result[1]
        for record in _score("crossval", fold, predictions, truth, settings.levels):
            rows.append({"fold": fold, "method": record.method.value, "tau": record.tau,
                         "el": record.el, "ratio": record.ratio})
    return pd.DataFrame(rows, columns=["fold", "method", "tau", "el", "ratio"])


def summary_frame(summary: ReplicationSummary) -> pd.DataFrame:
    columns = ["scenario", "method", "tau", "mean_el", "mean_ratio", "median_ratio", "completed", "failures"]
    return pd.DataFrame([row.model_dump(mode="json") for row in summary.rows], columns=columns)


def detail_frame(summary: ReplicationSummary) -> pd.DataFrame:
    columns = ["scenario", "replication", "method", "tau", "el", "ratio"]
    return pd.DataFrame([r.model_dump(mode="json") for r in summary.records], columns=columns)


def timing_frame(summary: ReplicationSummary) -> pd.DataFrame:
    rows = [{"scenario": summary.scenario, "method": method, "mean_seconds": seconds,
             "failures": summary.failures.get(method, 0)}
            for method, seconds in summary.seconds.items()]
    rows.append({"scenario": summary.scenario, "method": "tuning",
                 "mean_seconds": summary.tuning_seconds, "failures": 0})
    return pd.DataFrame(rows, columns=["scenario", "method", "mean_seconds", "failures"])


def write_reports(
    summary: ReplicationSummary,
    output_dir: PathLike,
    predictions: Optional[pd.DataFrame] = None,
) -> Dict[str, Path]:
    """summary.csv, detail.csv, timing.csv and predictions.csv under output_dir"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "summary": output_dir / "summary.csv",
        "detail": output_dir / "detail.csv",
        "timing": output_dir / "timing.csv",
    }
    summary_frame(summary).to_csv(paths["summary"], index=False)
    detail_frame(summary).to_csv(paths["detail"], index=False)
    timing_frame(summary).to_csv(paths["timing"], index=False)
    if predictions is not None and not predictions.empty:
        paths["predictions"] = output_dir / "predictions.csv"
        predictions.to_csv(paths["predictions"], index=False)
    return paths
