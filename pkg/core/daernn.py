"""
Data-augmented expectile regression for censored responses.

The loop fits one learner per level of the imputation grid on the uncensored
rows, then alternates augmentation (impute each censored response with a
feasible fitted expectile drawn at random) and refitting on the augmented
responses. Predictions of every iteration are kept and averaged.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from core.censoring import CensoredDataset, boundary_values, feasible_mask
from core.exceptions import DomainError, InitializationError, TrainingDivergenceError
from core.expectile import default_grid_size, derive_seed, expectile_grid, nearest_level_index
from core.linear import linear_expectile_fit
from core.network import MlpParams, train_mbgd
from core.predictor import EnsemblePredictor, ExpectilePredictionSet, Member, Standardizer
from models.schemas import AugmentationStats, DaernnConfig, HyperPoint, LevelGrid, MlpSpec, TrainConfig

logger = logging.getLogger(__name__)

MIN_RECOMMENDED_UNCENSORED = 30


class Provenance(IntEnum):
    OBSERVED = 0
    IMPUTED = 1
    FALLBACK = 2


class LevelLearner(ABC):
    """Fits one member of a model bank"""

    name: str = "learner"

    @abstractmethod
    def fit(self, X: np.ndarray, targets: np.ndarray, tau: float, seed: int,
            init: Optional[Member] = None) -> Member:
        pass


class MlpLearner(LevelLearner):
    name = "mlp"

    def __init__(self, spec: MlpSpec, train: TrainConfig):
        self.spec = spec
        self.train = train

    def fit(self, X, targets, tau, seed, init=None) -> MlpParams:
        config = self.train.model_copy(update={"seed": seed})
        return train_mbgd(X, targets, self.spec, config, tau, init=init)


class LinearLearner(LevelLearner):
    """IRLS linear expectile fit; seeds and warm starts do not apply"""
    name = "linear"

    def fit(self, X, targets, tau, seed, init=None):
        return linear_expectile_fit(X, targets, tau)


@dataclass(frozen=True, eq=False)
class ModelBank:
    """Iteration h and one fitted member per grid level, ordered by level"""
    iteration: int
    grid: LevelGrid
    members: Tuple[Member, ...]

    def __post_init__(self):
        if len(self.members) != self.grid.m:
            raise DomainError(f"Bank has {len(self.members)} members for {self.grid.m} levels")

    def predict(self, X) -> np.ndarray:
        """Fitted values (n, m)"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], self.grid.m))
        for k, member in enumerate(self.members):
            out[:, k] = member.predict(X)
        return out


@dataclass(frozen=True, eq=False)
class AugmentedDataset:
    """Pseudo fully observed responses of one iteration"""
    iteration: int
    targets: np.ndarray
    provenance: np.ndarray

    def count(self, kind: Provenance) -> int:
        return int(np.sum(self.provenance == kind))

    def stats(self) -> AugmentationStats:
        return AugmentationStats(
            iteration=self.iteration,
            observed=self.count(Provenance.OBSERVED),
            imputed=self.count(Provenance.IMPUTED),
            fallback=self.count(Provenance.FALLBACK),
        )


def _fit_level(learner: LevelLearner, X, targets, tau, seed, init, h, k) -> Member:
    try:
        return learner.fit(X, targets, tau, seed, init=init)
    except TrainingDivergenceError as exc:
        raise exc.with_context(h, k) from exc


def _level_seeds(config: DaernnConfig, grid: LevelGrid, h: int) -> List[int]:
    stream = 0 if config.iteration_seeding == "shared" else h
    return [derive_seed(config.train.seed, stream, k) for k in range(1, grid.m + 1)]


def train_bank(
    X: np.ndarray,
    targets: np.ndarray,
    grid: LevelGrid,
    learner: LevelLearner,
    seeds: Sequence[int],
    h: int,
    n_jobs: int = 1,
    previous: Optional[ModelBank] = None,
) -> ModelBank:
    """Fit every grid level; levels are independent so they may run in parallel"""
    inits = previous.members if previous is not None else [None] * grid.m
    jobs = [
        (learner, X, targets, tau, seed, init, h, k)
        for k, (tau, seed, init) in enumerate(zip(grid.levels, seeds, inits), start=1)
    ]
    if n_jobs > 1:
        members = Parallel(n_jobs=n_jobs)(delayed(_fit_level)(*job) for job in jobs)
    else:
        members = [_fit_level(*job) for job in jobs]
    return ModelBank(iteration=h, grid=grid, members=tuple(members))


def default_learner(config: DaernnConfig, input_dim: int) -> MlpLearner:
    spec = config.spec or HyperPoint().to_mlp_spec(input_dim)
    if spec.input_dim != input_dim:
        raise DomainError(f"Network expects {spec.input_dim} covariates, data has {input_dim}")
    return MlpLearner(spec, config.train)


def initialize(
    data: CensoredDataset,
    config: DaernnConfig,
    learner: Optional[LevelLearner] = None,
    grid: Optional[LevelGrid] = None,
) -> ModelBank:
    """Bank M(0): one member per grid level fitted on the uncensored rows only"""
    grid = grid or expectile_grid(config.grid_size or default_grid_size(data.n))
    learner = learner or default_learner(config, data.p)
    observed = data.uncensored()
    if observed.n == 0:
        raise InitializationError()
    if observed.n < MIN_RECOMMENDED_UNCENSORED:
        logger.warning("Only %d uncensored observations to initialize from", observed.n)
    seeds = [derive_seed(config.train.seed, 0, k) for k in range(1, grid.m + 1)]
    bank = train_bank(observed.X, observed.t, grid, learner, seeds, 0, config.n_jobs)
    logger.debug("Initialized %d-level bank on %d uncensored rows", grid.m, observed.n)
    return bank


def augment(bank: ModelBank, data: CensoredDataset, rng: np.random.Generator,
            iteration: Optional[int] = None) -> AugmentedDataset:
    """Impute each censored response with a uniformly drawn feasible fitted expectile.

    Rows with no feasible candidate take their censoring boundary.
    """
    targets = data.t.copy()
    provenance = np.full(data.n, Provenance.OBSERVED, dtype=int)
    censored = np.flatnonzero(data.censored)
    if censored.size:
        sub = data.subset(censored)
        candidates = bank.predict(sub.X)
        mask = feasible_mask(sub, candidates)
        counts = mask.sum(axis=1)
        draws = np.floor(rng.random(censored.size) * counts).astype(int)
        # position of the draws-th feasible candidate in each row
        picked = np.argmax(np.cumsum(mask, axis=1) > draws[:, None], axis=1)
        has_feasible = counts > 0
        targets[censored] = np.where(
            has_feasible,
            candidates[np.arange(censored.size), picked],
            boundary_values(sub),
        )
        provenance[censored] = np.where(has_feasible, Provenance.IMPUTED, Provenance.FALLBACK)
    h = bank.iteration + 1 if iteration is None else iteration
    return AugmentedDataset(iteration=h, targets=targets, provenance=provenance)


def update(
    augmented: AugmentedDataset,
    data: CensoredDataset,
    config: DaernnConfig,
    grid: LevelGrid,
    learner: Optional[LevelLearner] = None,
    previous: Optional[ModelBank] = None,
) -> ModelBank:
    """Refit every grid level on the augmented responses; fresh initialization unless warm_start"""
    if augmented.targets.size != data.n:
        raise DomainError("Augmented responses do not cover the training data")
    learner = learner or default_learner(config, data.p)
    h = augmented.iteration
    warm = previous if config.warm_start and isinstance(learner, MlpLearner) else None
    return train_bank(data.X, augmented.targets, grid, learner, _level_seeds(config, grid, h), h,
                      config.n_jobs, warm)


@dataclass(frozen=True, eq=False)
class DaernnFit:
    """All banks of a fitted run plus the augmentation history"""
    grid: LevelGrid
    initial: ModelBank
    banks: Tuple[ModelBank, ...]
    history: Tuple[AugmentationStats, ...]
    target_levels: Tuple[float, ...]
    served_index: Tuple[int, ...]

    @property
    def served(self) -> Tuple[float, ...]:
        return tuple(self.grid.levels[k - 1] for k in self.served_index)

    def predictor(self, standardizer: Optional[Standardizer] = None) -> EnsemblePredictor:
        members = tuple(
            tuple(bank.members[k - 1] for k in self.served_index) for bank in self.banks
        )
        return EnsemblePredictor(levels=self.target_levels, served=self.served, members=members,
                                 standardizer=standardizer)

    def predict(self, X) -> ExpectilePredictionSet:
        return self.predictor().predict(X)

    def predict_grid(self, X) -> ExpectilePredictionSet:
        """Per-iteration predictions at every grid level"""
        stack = np.stack([bank.predict(X) for bank in self.banks])
        return ExpectilePredictionSet.from_iterations(self.grid.levels, self.grid.levels, stack)


def serve_levels(levels: Sequence[float], grid: LevelGrid) -> Tuple[int, ...]:
    """1-based grid index serving each reporting level"""
    served = []
    for tau in levels:
        k, level = nearest_level_index(tau, grid)
        if abs(level - tau) > 1e-12:
            logger.info("Level %g served by grid level %.6f", tau, level)
        served.append(k)
    return tuple(served)


def fit(
    data: CensoredDataset,
    config: DaernnConfig,
    learner: Optional[LevelLearner] = None,
) -> DaernnFit:
    if data.n == 0:
        raise DomainError("Training data is empty")
    grid = expectile_grid(config.grid_size or default_grid_size(data.n))
    learner = learner or default_learner(config, data.p)

    bank = initialize(data, config, learner, grid)
    initial = bank
    banks, history = [], []
    for h in range(1, config.iterations + 1):
        rng = np.random.default_rng(derive_seed(config.train.seed, h, 0))
        augmented = augment(bank, data, rng, iteration=h)
        stats = augmented.stats()
        logger.info("Iteration %d/%d: %d observed, %d imputed, %d boundary fallbacks",
                    h, config.iterations, stats.observed, stats.imputed, stats.fallback)
        bank = update(augmented, data, config, grid, learner, previous=bank)
        banks.append(bank)
        history.append(stats)
    return DaernnFit(
        grid=grid,
        initial=initial,
        banks=tuple(banks),
        history=tuple(history),
        target_levels=tuple(config.target_levels),
        served_index=serve_levels(config.target_levels, grid),
    )


def run(
    data: CensoredDataset,
    test_X,
    config: DaernnConfig,
    learner: Optional[LevelLearner] = None,
) -> ExpectilePredictionSet:
    """fit then predict the test covariates"""
    test_X = np.atleast_2d(np.asarray(test_X, dtype=float))
    if test_X.size and test_X.shape[1] != data.p:
        raise DomainError(f"Test covariates have {test_X.shape[1]} columns, training data {data.p}")
    return fit(data, config, learner).predict(test_X)
