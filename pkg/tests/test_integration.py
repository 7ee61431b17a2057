"""
Integration tests: end-to-end workflows and scaled replication studies
"""
import time

import numpy as np
import pytest

from core import daernn
from core.censoring import feasible_mask
from core.datasets import read_observations, write_observations
from core.harness import run_replication, run_replications, tune_on_uncensored
from core.predictor import load_predictor, save_predictor
from core.simulation import CENSORING_DESIGN, gen_scenario, train_test_split
from methods.base import daernn_config
from methods.manager import MethodManager
from models.schemas import HyperGrid, HyperPoint, MethodName, MethodSettings, ScenarioSpec, SimModel


@pytest.mark.integration
class TestWorkflows:
    """End-to-end runs at toy scale"""

    def test_censoring_consistency_on_every_cell(self):
        for (model, error, rate), cell in CENSORING_DESIGN.items():
            for kind in cell:
                data = gen_scenario(ScenarioSpec(model=model, error=error, censor_kind=kind,
                                                 target_rate=rate, n=10000, seed=0))
                censored = data.censored
                assert np.all(feasible_mask(data, data.y_true[:, None])[censored])
                assert np.all(data.t[~censored] == data.y_true[~censored])

    def test_simulate_fit_save_predict(self, temp_data_dir, fast_settings):
        data = gen_scenario(ScenarioSpec(n=120, seed=1))
        path = temp_data_dir / "obs.csv"
        write_observations(data, path)
        train, test = train_test_split(read_observations(path), seed=1)

        settings = fast_settings.model_copy(update={"standardize": True})
        result = MethodManager().execute_method("daernn", data=train, settings=settings, test_X=test.X)
        assert result.success, result.error
        fitted, predictions = result.result

        save_predictor(fitted.predictor, temp_data_dir / "bundle", fitted.metadata)
        loaded, metadata = load_predictor(temp_data_dir / "bundle")
        np.testing.assert_array_equal(loaded.predict(test.X).average, predictions.average)
        assert metadata.standardize and len(metadata.augmentation) == settings.iterations

    def test_more_censoring_means_more_imputation(self, fast_settings):
        light = gen_scenario(ScenarioSpec(n=200, seed=2, target_rate=25))
        heavy = gen_scenario(ScenarioSpec(n=200, seed=2, target_rate=50))
        config = daernn_config(fast_settings, 2)
        imputed = [
            sum(s.imputed + s.fallback for s in daernn.fit(data, config).history)
            for data in (light, heavy)
        ]
        assert imputed[0] < imputed[1]


def tuned_settings(scenario: ScenarioSpec) -> MethodSettings:
    """Tune once on a reduced version of the benchmark grid"""
    data = gen_scenario(scenario.model_copy(update={"seed": 10_000}))
    grid = HyperGrid(layers=(2, 3), nodes=(32, 64), learning_rate=(0.01,), dropout=(0.1,),
                     epochs=(100,), batch=(64,))
    best = tune_on_uncensored(data, grid, k=5, seed=0, n_jobs=4).best
    return MethodSettings(hyper=best)


@pytest.mark.slow
class TestScaledStudies:
    """Scaled-down replication studies; minutes each"""

    def test_daernn_beats_full(self):
        scenario = ScenarioSpec(n=1000)
        settings = tuned_settings(scenario)
        summary = run_replications(scenario, [MethodName.DAERNN, MethodName.FULL], 20, 2024, settings, n_jobs=4)
        for tau in settings.levels:
            ratio = summary.row(MethodName.FULL, tau).mean_ratio
            assert ratio < 1.0
            if tau in (0.3, 0.5, 0.7):
                assert ratio < 0.8

    def test_daernn_beats_dalinear_on_nonlinear_model(self):
        scenario = ScenarioSpec(model=SimModel.MODEL2, n=1000)
        settings = tuned_settings(scenario)
        summary = run_replications(scenario, [MethodName.DAERNN, MethodName.DALINEAR], 10, 2024, settings,
                                   n_jobs=4)
        assert summary.row(MethodName.DALINEAR, 0.5).mean_ratio < 1.0

    def test_close_to_oracle(self):
        scenario = ScenarioSpec(n=1000)
        settings = tuned_settings(scenario)
        summary = run_replications(scenario, [MethodName.DAERNN, MethodName.ORACLE], 10, 2024, settings,
                                   n_jobs=4)
        # ratio is EL(daernn) / EL(oracle)
        assert summary.row(MethodName.ORACLE, 0.5).median_ratio <= 1.5

    def test_levels_rarely_cross(self):
        data = gen_scenario(ScenarioSpec(n=1000, seed=3))
        train, test = train_test_split(data, seed=3)
        settings = MethodSettings(hyper=HyperPoint(), grid_size=99, iterations=2, n_jobs=4)
        predictions = MethodManager().get_method("daernn").fit(train, settings).predict(test.X)
        low, mid, high = (predictions.average[:, predictions.levels.index(tau)] for tau in (0.1, 0.5, 0.9))
        ordered = (low <= mid) & (mid <= high)
        assert ordered.mean() > 0.9

    def test_single_replication_time(self):
        settings = MethodSettings(hyper=HyperPoint(), grid_size=99, iterations=5)
        start = time.perf_counter()
        outcome = run_replication(ScenarioSpec(n=1000), [MethodName.DAERNN], 1, 2024, settings)
        assert not outcome.failures
        assert time.perf_counter() - start < 240
