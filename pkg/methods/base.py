"""
Base classes for methods
"""
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

from core.censoring import CensoredDataset
from core.daernn import serve_levels
from core.expectile import default_grid_size, derive_seed, expectile_grid
from core.predictor import EnsemblePredictor, ExpectilePredictionSet, Member, Standardizer
from models.schemas import (
    AugmentationStats,
    DaernnConfig,
    MethodName,
    MethodResult,
    MethodSettings,
    PredictionMetadata,
)


@dataclass(frozen=True, eq=False)
class FittedMethod:
    """A trained method ready to predict"""
    predictor: EnsemblePredictor
    metadata: PredictionMetadata
    seconds: float

    def predict(self, X) -> ExpectilePredictionSet:
        return self.predictor.predict(X)


def daernn_config(settings: MethodSettings, input_dim: int) -> DaernnConfig:
    return DaernnConfig(
        grid_size=settings.grid_size,
        iterations=settings.iterations,
        target_levels=settings.levels,
        spec=settings.hyper.to_mlp_spec(input_dim),
        train=settings.hyper.to_train_config(settings.seed),
        warm_start=settings.warm_start,
        iteration_seeding=settings.iteration_seeding,
        n_jobs=settings.n_jobs,
    )


def fit_reporting_levels(
    settings: MethodSettings,
    n: int,
    train_level: Callable[[float, int], Member],
) -> EnsemblePredictor:
    """One member per reporting level, trained at its serving grid level.

    Seeds match the initialization bank of the augmented loop on the same grid.
    """
    grid = expectile_grid(settings.grid_size or default_grid_size(n))
    index = serve_levels(settings.levels, grid)
    members = tuple(
        train_level(grid.levels[k - 1], derive_seed(settings.seed, 0, k))
        for k in index
    )
    return EnsemblePredictor(
        levels=tuple(settings.levels),
        served=tuple(grid.levels[k - 1] for k in index),
        members=(members,),
    )


class BaseMethod(ABC):
    """Abstract base class for all methods"""

    requires_truth = False

    def __init__(self, name: MethodName, description: str):
        self.name = name
        self.description = description

    @abstractmethod
    def _fit(
        self, data: CensoredDataset, settings: MethodSettings
    ) -> Tuple[EnsemblePredictor, List[AugmentationStats]]:
        """Train on (possibly standardized) data"""
        pass

    def _hyper(self, settings: MethodSettings):
        return settings.hyper

    def fit(self, data: CensoredDataset, settings: MethodSettings) -> FittedMethod:
        start = time.perf_counter()
        standardizer = Standardizer.fit(data.X) if settings.standardize else None
        if standardizer is not None:
            data = replace(data, X=standardizer.transform(data.X))
        predictor, augmentation = self._fit(data, settings)
        predictor = replace(predictor, standardizer=standardizer)
        metadata = PredictionMetadata(
            method=self.name,
            grid_size=settings.grid_size or default_grid_size(data.n),
            iterations=predictor.iterations,
            hyper=self._hyper(settings),
            seed=settings.seed,
            level_mapping={f"{tau:g}": served for tau, served in zip(predictor.levels, predictor.served)},
            covariates=list(data.covariates),
            standardize=settings.standardize,
            augmentation=augmentation,
        )
        return FittedMethod(predictor=predictor, metadata=metadata, seconds=time.perf_counter() - start)

    def execute(
        self,
        data: CensoredDataset,
        settings: MethodSettings,
        test_X: Optional[Sequence] = None,
    ) -> MethodResult:
        """Fit, and predict test_X when given; failures become error results"""
        start = time.perf_counter()
        try:
            fitted = self.fit(data, settings)
            result = fitted if test_X is None else (fitted, fitted.predict(test_X))
            return self._create_success_result(result, time.perf_counter() - start)
        except Exception as e:
            return self._create_error_result(f"{self.name.value} failed: {e}", time.perf_counter() - start)

    def _create_success_result(self, result, seconds: float = 0.0) -> MethodResult:
        """Helper method to create successful result"""
        return MethodResult(success=True, result=result, seconds=seconds)

    def _create_error_result(self, error: str, seconds: float = 0.0) -> MethodResult:
        """Helper method to create error result"""
        return MethodResult(success=False, result=None, error=error, seconds=seconds)
