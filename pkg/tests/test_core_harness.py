"""
Tests for replication studies, dataset cross-validation and reports
"""
import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from core.harness import (
    PLOT_LEVELS,
    cross_validate_dataset,
    detail_frame,
    run_benchmark,
    run_replication,
    run_replications,
    summary_frame,
    timing_frame,
    tune_on_uncensored,
    write_reports,
)
from methods.full import FullMethod
from models.schemas import HyperGrid, MethodName, ScenarioSpec

SCENARIO = ScenarioSpec(n=60)


class TestReplications:
    """Test the replication runner"""

    def test_single_oracle_replication(self, fast_settings):
        summary = run_replications(SCENARIO, [MethodName.ORACLE], 1, base_seed=3, settings=fast_settings)
        assert summary.replications == 1
        for tau in fast_settings.levels:
            row = summary.row(MethodName.ORACLE, tau)
            record = next(r for r in summary.records if math.isclose(r.tau, tau))
            assert row.mean_el == record.el
            assert row.mean_ratio is None
            assert row.completed == 1

    def test_ratio_is_reference_over_competitor(self, fast_settings):
        outcome = run_replication(SCENARIO, [MethodName.DAERNN, MethodName.FULL], 1, 0, fast_settings)
        assert not outcome.failures
        for tau in fast_settings.levels:
            mine = {r.method: r for r in outcome.records if math.isclose(r.tau, tau)}
            assert mine[MethodName.DAERNN].ratio is None
            assert mine[MethodName.FULL].ratio == pytest.approx(mine[MethodName.DAERNN].el / mine[MethodName.FULL].el)

    def test_replication_seed(self, fast_settings):
        first = run_replication(SCENARIO, [MethodName.FULL], 2, 5, fast_settings)
        second = run_replication(SCENARIO, [MethodName.FULL], 1, 6, fast_settings)
        assert [r.el for r in first.records] == [r.el for r in second.records]

    def test_summary_is_recomputable_from_detail(self, fast_settings):
        summary = run_replications(SCENARIO, [MethodName.DAERNN, MethodName.FULL], 2, 1, fast_settings)
        detail = detail_frame(summary)
        means = detail.groupby(["method", "tau"])["el"].mean()
        for row in summary.rows:
            assert abs(means[(row.method.value, row.tau)] - row.mean_el) <= 1e-12
        ratios = detail[detail.method == "full"].groupby("tau")["ratio"].mean()
        for tau, value in ratios.items():
            assert abs(summary.row(MethodName.FULL, tau).mean_ratio - value) <= 1e-12

    def test_failures_are_counted(self, mocker, fast_settings):
        mocker.patch.object(FullMethod, "_fit", side_effect=RuntimeError("boom"))
        summary = run_replications(SCENARIO, [MethodName.DAERNN, MethodName.FULL], 1, 0, fast_settings)
        assert summary.failures == {"daernn": 0, "full": 1}
        row = summary.row(MethodName.FULL, 0.5)
        assert row.completed == 0 and math.isnan(row.mean_el)
        assert summary.row(MethodName.DAERNN, 0.5).completed == 1

    def test_needs_a_replication(self, fast_settings):
        with pytest.raises(ValueError):
            run_benchmark(SCENARIO, [MethodName.FULL], 0, 0, fast_settings)


class TestReports:
    """Test CSV reports"""

    def test_summary_csv_is_reproducible(self, temp_data_dir, fast_settings):
        for name in ("a", "b"):
            summary, predictions = run_benchmark(SCENARIO, [MethodName.DAERNN, MethodName.FULL], 1, 4,
                                                 fast_settings)
            write_reports(summary, temp_data_dir / name, predictions)
        for report in ("summary.csv", "detail.csv", "predictions.csv"):
            assert (temp_data_dir / "a" / report).read_bytes() == (temp_data_dir / "b" / report).read_bytes()

    def test_frames(self, fast_settings):
        summary, predictions = run_benchmark(SCENARIO, [MethodName.FULL], 1, 0, fast_settings,
                                             tuning_seconds=2.5)
        frame = summary_frame(summary)
        assert len(frame) == len(fast_settings.levels)
        assert list(frame.columns)[:3] == ["scenario", "method", "tau"]
        timing = timing_frame(summary)
        assert timing.method.tolist() == ["full", "tuning"]
        assert timing.mean_seconds.iloc[1] == 2.5
        assert sorted(predictions.tau.unique()) == list(PLOT_LEVELS)
        assert len(predictions) == len(PLOT_LEVELS) * 12

    def test_written_files(self, temp_data_dir, fast_settings):
        summary, _ = run_benchmark(SCENARIO, [MethodName.FULL], 1, 0, fast_settings)
        paths = write_reports(summary, temp_data_dir / "out")
        assert set(paths) == {"summary", "detail", "timing"}
        assert len(pd.read_csv(paths["detail"])) == len(fast_settings.levels)


class TestDatasetEvaluation:
    """Test tuning and k-fold evaluation of a single dataset"""

    def test_cross_validate_with_truth(self, censored_data, fast_settings):
        frame = cross_validate_dataset(censored_data, [MethodName.DAERNN, MethodName.FULL], fast_settings, k=3)
        assert len(frame) == 3 * 2 * len(fast_settings.levels)
        assert frame[frame.method == "daernn"].ratio.isna().all()
        assert frame[frame.method == "full"].ratio.notna().all()

    def test_cross_validate_without_truth(self, censored_data, fast_settings):
        data = replace(censored_data, y_true=None)
        frame = cross_validate_dataset(data, [MethodName.FULL], fast_settings, k=4, seed=1)
        assert sorted(frame.fold.unique()) == [1, 2, 3, 4]
        assert np.all(frame.el >= 0)

    def test_tune_on_uncensored(self, censored_data):
        grid = HyperGrid(layers=(1,), nodes=(4,), learning_rate=(0.05,), dropout=(0.0,), epochs=(2,), batch=(16,))
        result = tune_on_uncensored(censored_data, grid, k=3)
        assert result.best.nodes == 4
        assert result.seconds >= 0
