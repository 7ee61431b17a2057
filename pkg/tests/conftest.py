"""
Pytest configuration and fixtures
"""
import logging
import shutil
import tempfile
from pathlib import Path
from typing import Callable, Generator

import numpy as np
import pytest

from core.censoring import CensoredDataset
from core.simulation import gen_model1, gen_scenario
from methods.manager import MethodManager
from models.schemas import (
    CensorType,
    ErrorLaw,
    HyperPoint,
    MethodSettings,
    MlpSpec,
    ScenarioSpec,
    SimModel,
    TrainConfig,
)


@pytest.fixture(autouse=True)
def restore_logging() -> Generator[None, None, None]:
    """Undo root-logger changes made by configure_logging"""
    root = logging.getLogger()
    level = root.level
    yield
    for handler in list(root.handlers):
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)
    root.setLevel(level)


@pytest.fixture
def temp_data_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for file output"""
    temp_dir = tempfile.mkdtemp()
    yield Path(temp_dir)
    shutil.rmtree(temp_dir)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def small_spec() -> MlpSpec:
    """Two inputs, one hidden layer of 8, no dropout"""
    return MlpSpec(input_dim=2, hidden_widths=(8,))


@pytest.fixture
def fast_train() -> TrainConfig:
    return TrainConfig(learning_rate=0.05, epochs=5, batch_size=32, seed=3)


@pytest.fixture
def fast_hyper() -> HyperPoint:
    return HyperPoint(layers=1, nodes=8, learning_rate=0.05, dropout=0.0, epochs=5, batch=32)


@pytest.fixture
def fast_settings(fast_hyper) -> MethodSettings:
    """Grid of 9 levels so every reporting level is a grid point"""
    return MethodSettings(hyper=fast_hyper, grid_size=9, iterations=2, seed=11)


@pytest.fixture
def dataset_factory() -> Callable[..., CensoredDataset]:
    """Factory for simulated censored datasets"""
    def make(n=80, kind=CensorType.RIGHT, rate=25, seed=0, model=SimModel.MODEL1,
             error=ErrorLaw.STD_NORMAL) -> CensoredDataset:
        return gen_scenario(ScenarioSpec(model=model, error=error, censor_kind=kind,
                                         target_rate=rate, n=n, seed=seed))
    return make


@pytest.fixture
def censored_data(dataset_factory) -> CensoredDataset:
    return dataset_factory(n=80, seed=7)


@pytest.fixture
def uncensored_data() -> CensoredDataset:
    """Model 1 data with every response observed"""
    X, y = gen_model1(60, ErrorLaw.STD_NORMAL, seed=5)
    nan = np.full(y.size, np.nan)
    return CensoredDataset(X=X, t=y, delta=np.zeros(y.size, dtype=int), lower=nan, upper=nan, y_true=y)


@pytest.fixture
def method_manager() -> MethodManager:
    return MethodManager()
