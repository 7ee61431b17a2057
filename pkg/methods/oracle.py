"""
Oracle reference: expectile network on the true responses
"""
from core.censoring import CensoredDataset
from core.exceptions import DomainError
from core.expectile import Level, as_tau
from core.network import MlpParams, train_mbgd
from methods.base import BaseMethod, fit_reporting_levels
from models.schemas import MethodName, MlpSpec, TrainConfig


def _require_truth(data: CensoredDataset) -> None:
    if data.n == 0:
        raise DomainError("Training data is empty")
    if not data.has_y_true:
        raise DomainError("Oracle needs y_true for every observation")


def train_oracle(data: CensoredDataset, spec: MlpSpec, train: TrainConfig, tau: Level) -> MlpParams:
    _require_truth(data)
    return train_mbgd(data.X, data.y_true, spec, train, as_tau(tau))


class OracleMethod(BaseMethod):
    """Expectile network trained on y_true; simulation only"""

    requires_truth = True

    def __init__(self):
        super().__init__(MethodName.ORACLE, "Expectile network on true responses (simulation only)")

    def _fit(self, data, settings):
        _require_truth(data)
        spec = settings.hyper.to_mlp_spec(data.p)

        def train_level(tau, seed):
            return train_oracle(data, spec, settings.hyper.to_train_config(seed), tau)

        return fit_reporting_levels(settings, data.n, train_level), []
