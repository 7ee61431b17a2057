"""
Data-augmented linear expectile regression: the augmented loop with an IRLS learner
"""
import numpy as np

from core import daernn
from core.censoring import CensoredDataset
from core.exceptions import DomainError
from core.predictor import ExpectilePredictionSet
from methods.base import BaseMethod
from models.schemas import DaernnConfig, MethodName, MethodSettings


def linear_config(settings: MethodSettings) -> DaernnConfig:
    return DaernnConfig(
        grid_size=settings.grid_size,
        iterations=settings.iterations,
        target_levels=settings.levels,
        train={"seed": settings.seed},
        iteration_seeding=settings.iteration_seeding,
        n_jobs=settings.n_jobs,
    )


def fit_dalinear(data: CensoredDataset, config: DaernnConfig) -> daernn.DaernnFit:
    """Augmented loop with linear_expectile_fit in place of network training"""
    return daernn.fit(data, config, learner=daernn.LinearLearner())


def run_dalinear(data: CensoredDataset, test_X, config: DaernnConfig) -> ExpectilePredictionSet:
    test_X = np.atleast_2d(np.asarray(test_X, dtype=float))
    if test_X.size and test_X.shape[1] != data.p:
        raise DomainError(f"Test covariates have {test_X.shape[1]} columns, training data {data.p}")
    return fit_dalinear(data, config).predict(test_X)


class DalinearMethod(BaseMethod):

    def __init__(self):
        super().__init__(MethodName.DALINEAR, "Data-augmented linear expectile regression")

    def _hyper(self, settings):
        return None

    def _fit(self, data, settings):
        fitted = fit_dalinear(data, linear_config(settings))
        return fitted.predictor(), list(fitted.history)
