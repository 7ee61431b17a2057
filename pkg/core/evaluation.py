"""
Expectile loss metrics, k-fold splits and cross-validated hyperparameter search
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import List

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.model_selection import KFold
from tqdm import tqdm

from core.exceptions import DomainError, NumericalError
from core.expectile import Level, as_tau, check_loss, derive_seed
from core.network import predict, train_mbgd
from models.schemas import HyperGrid, HyperPoint

logger = logging.getLogger(__name__)


def expectile_loss_metric(y, yhat, tau: Level) -> float:
    """EL = mean check_loss(y - yhat, tau)"""
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if y.size != yhat.size:
        raise DomainError(f"Length mismatch: {y.size} responses, {yhat.size} predictions")
    if y.size == 0:
        raise DomainError("Expectile loss of an empty sample")
    return float(np.mean(check_loss(y - yhat, tau)))


def el_ratio(el_method: float, el_compete: float) -> float:
    if not el_compete > 0:
        raise DomainError(f"EL ratio needs a positive denominator, got {el_compete}")
    return el_method / el_compete


def kfold_split(n: int, k: int, seed: int) -> List[np.ndarray]:
    """k disjoint, exhaustive index sets whose sizes differ by at most one"""
    if k < 2 or k > n:
        raise DomainError(f"Need 2 <= k <= n, got k={k}, n={n}")
    splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    return [np.sort(test_idx) for _, test_idx in splitter.split(np.arange(n))]


@dataclass
class TuningResult:
    best: HyperPoint
    table: pd.DataFrame
    seconds: float


def score_point(point: HyperPoint, X: np.ndarray, y: np.ndarray, folds: List[np.ndarray],
                tau: float, seed: int) -> float:
    """Mean held-out EL over the folds; +inf when any fold diverges"""
    losses = []
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(y.size), test_idx)
        spec = point.to_mlp_spec(X.shape[1])
        try:
            params = train_mbgd(X[train_idx], y[train_idx], spec,
                                point.to_train_config(derive_seed(seed, f + 1, 0)), tau)
            losses.append(expectile_loss_metric(y[test_idx], predict(params, X[test_idx]), tau))
        except NumericalError as exc:
            logger.warning("Grid point %s scored +inf: %s", point.model_dump(), exc)
            return math.inf
    return float(np.mean(losses))


def grid_search_cv(
    X,
    y,
    grid: HyperGrid,
    k: int = 5,
    tau: Level = 0.5,
    seed: int = 0,
    n_jobs: int = 1,
    progress: bool = False,
) -> TuningResult:
    """Pick the grid point with the lowest k-fold CV expectile loss.

    Ties go to fewer layers, then fewer nodes, lower learning rate, lower
    dropout, fewer epochs and smaller batch.
    """
    tau = as_tau(tau)
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("Grid search needs uncensored data")
    X = np.asarray(X, dtype=float).reshape(y.size, -1)
    folds = kfold_split(y.size, k, seed)
    points = grid.points()

    start = time.perf_counter()
    iterator = tqdm(points, desc="grid search", disable=not progress)
    if n_jobs > 1:
        scores = Parallel(n_jobs=n_jobs)(
            delayed(score_point)(point, X, y, folds, tau, seed) for point in iterator
        )
    else:
        scores = [score_point(point, X, y, folds, tau, seed) for point in iterator]

    table = pd.DataFrame([{**point.model_dump(mode="json"), "cv_loss": score}
                          for point, score in zip(points, scores)])
    best_index = min(range(len(points)), key=lambda i: (scores[i], points[i].sort_key()))
    best = points[best_index]
    if math.isinf(scores[best_index]):
        raise NumericalError("Every grid point diverged")
    logger.info("Best grid point %s with CV loss %.6g", best.model_dump(mode="json"), scores[best_index])
    return TuningResult(best=best, table=table, seconds=time.perf_counter() - start)
