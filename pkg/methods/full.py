"""
FULL baseline: expectile network on observed responses with censoring ignored
"""
from core.censoring import CensoredDataset
from core.exceptions import DomainError
from core.expectile import Level, as_tau
from core.network import MlpParams, train_mbgd
from methods.base import BaseMethod, fit_reporting_levels
from models.schemas import MethodName, MlpSpec, TrainConfig


def train_full(data: CensoredDataset, spec: MlpSpec, train: TrainConfig, tau: Level) -> MlpParams:
    """Fit (x_i, t_i) for every row as if t were the response"""
    if data.n == 0:
        raise DomainError("Training data is empty")
    return train_mbgd(data.X, data.t, spec, train, as_tau(tau))


class FullMethod(BaseMethod):
    """Expectile network trained on observed responses"""

    def __init__(self):
        super().__init__(MethodName.FULL, "Expectile network on observed responses, censoring ignored")

    def _fit(self, data, settings):
        spec = settings.hyper.to_mlp_spec(data.p)

        def train_level(tau, seed):
            return train_full(data, spec, settings.hyper.to_train_config(seed), tau)

        return fit_reporting_levels(settings, data.n, train_level), []
