"""
Tests for expectile loss metrics and hyperparameter search
"""
import math

import numpy as np
import pytest

from core.evaluation import (
    el_ratio,
    expectile_loss_metric,
    grid_search_cv,
    kfold_split,
    score_point,
)
from core.exceptions import DomainError, NumericalError, TrainingDivergenceError
from models.schemas import HyperGrid, HyperPoint

TINY_GRID = dict(nodes=(4,), learning_rate=(0.05,), dropout=(0.0,), epochs=(3,), batch=(16,))


class TestMetrics:
    """Test expectile loss and ratios"""

    def test_expectile_loss(self):
        assert expectile_loss_metric([1.0, 2.0], [0.0, 3.0], 0.3) == pytest.approx(0.25)
        assert expectile_loss_metric([1.0, 2.0], [1.0, 2.0], 0.9) == 0.0

    def test_half_level_is_quarter_mse(self, rng):
        y, yhat = rng.normal(size=50), rng.normal(size=50)
        assert expectile_loss_metric(y, yhat, 0.5) == pytest.approx(0.25 * np.mean((y - yhat) ** 2))

    def test_joint_permutation_invariance(self, rng):
        y, yhat = rng.normal(size=40), rng.normal(size=40)
        order = rng.permutation(40)
        permuted = expectile_loss_metric(y[order], yhat[order], 0.8)
        assert permuted == pytest.approx(expectile_loss_metric(y, yhat, 0.8), rel=1e-12)

    @pytest.mark.parametrize("c", [0.5, 3.0])
    def test_quadratic_scaling(self, rng, c):
        y, yhat = rng.normal(size=40), rng.normal(size=40)
        scaled = expectile_loss_metric(c * y, c * yhat, 0.2)
        assert scaled == pytest.approx(c ** 2 * expectile_loss_metric(y, yhat, 0.2), rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(DomainError):
            expectile_loss_metric([1.0], [1.0, 2.0], 0.5)
        with pytest.raises(DomainError):
            expectile_loss_metric([], [], 0.5)
        with pytest.raises(DomainError):
            expectile_loss_metric([1.0], [1.0], 0.0)

    def test_ratio(self):
        assert el_ratio(1.0, 4.0) == 0.25
        with pytest.raises(DomainError):
            el_ratio(1.0, 0.0)


class TestKFold:
    """Test fold construction"""

    @pytest.mark.parametrize("n, k", [(10, 2), (23, 5), (7, 7)])
    def test_partition(self, n, k):
        folds = kfold_split(n, k, seed=1)
        assert len(folds) == k
        np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(n))
        sizes = [fold.size for fold in folds]
        assert max(sizes) - min(sizes) <= 1

    def test_seeded(self):
        first = kfold_split(20, 4, seed=3)
        second = kfold_split(20, 4, seed=3)
        assert all(np.array_equal(a, b) for a, b in zip(first, second))
        other = kfold_split(20, 4, seed=4)
        assert not all(np.array_equal(a, b) for a, b in zip(first, other))

    def test_folds_are_sorted(self):
        assert all(np.all(np.diff(fold) > 0) for fold in kfold_split(30, 4, seed=2))

    @pytest.mark.parametrize("n, k", [(10, 1), (3, 4)])
    def test_invalid(self, n, k):
        with pytest.raises(DomainError):
            kfold_split(n, k, seed=0)


class TestGridSearch:
    """Test cross-validated hyperparameter search"""

    def test_singleton_grid(self, uncensored_data):
        grid = HyperGrid(layers=(1,), **TINY_GRID)
        result = grid_search_cv(uncensored_data.X, uncensored_data.t, grid, k=3, seed=0)
        assert result.best == grid.points()[0]
        assert len(result.table) == 1
        assert math.isfinite(result.table["cv_loss"].iloc[0])

    def test_fitting_point_wins_on_noise_free_linear_data(self):
        gen = np.random.default_rng(21)
        X = gen.uniform(-1.0, 1.0, size=(90, 2))
        y = 1.0 + 2.0 * X[:, 0] - X[:, 1]
        grid = HyperGrid(layers=(1,), nodes=(8,), learning_rate=(1e-4, 0.05), dropout=(0.0,), epochs=(300,),
                         batch=(16,))
        result = grid_search_cv(X, y, grid, k=3, tau=0.5, seed=1)
        assert result.best.learning_rate == 0.05
        losses = result.table.set_index("learning_rate")["cv_loss"]
        assert losses[0.05] < 0.05 < losses[1e-4]

    def test_ties_prefer_smaller_networks(self, mocker, uncensored_data):
        mocker.patch("core.evaluation.score_point", return_value=1.0)
        grid = HyperGrid(layers=(3, 1, 2), **TINY_GRID)
        result = grid_search_cv(uncensored_data.X, uncensored_data.t, grid, k=3)
        assert result.best.layers == 1

    def test_lowest_loss_wins(self, mocker, uncensored_data):
        mocker.patch("core.evaluation.score_point", side_effect=lambda point, *args: 1.0 / point.layers)
        grid = HyperGrid(layers=(1, 2, 4), **TINY_GRID)
        assert grid_search_cv(uncensored_data.X, uncensored_data.t, grid, k=3).best.layers == 4

    def test_divergent_point_scores_infinity(self, mocker, uncensored_data):
        mocker.patch("core.evaluation.train_mbgd", side_effect=TrainingDivergenceError(2))
        folds = kfold_split(uncensored_data.n, 3, seed=0)
        point = HyperPoint(layers=1, nodes=4, epochs=3, batch=16)
        assert score_point(point, uncensored_data.X, uncensored_data.t, folds, 0.5, 0) == math.inf

    def test_every_point_diverged(self, mocker, uncensored_data):
        mocker.patch("core.evaluation.score_point", return_value=math.inf)
        with pytest.raises(NumericalError):
            grid_search_cv(uncensored_data.X, uncensored_data.t, HyperGrid(layers=(1,), **TINY_GRID), k=3)

    def test_score_is_deterministic(self, uncensored_data):
        folds = kfold_split(uncensored_data.n, 3, seed=0)
        point = HyperPoint(layers=1, nodes=4, learning_rate=0.05, dropout=0.2, epochs=3, batch=16)
        first = score_point(point, uncensored_data.X, uncensored_data.t, folds, 0.7, 5)
        second = score_point(point, uncensored_data.X, uncensored_data.t, folds, 0.7, 5)
        assert first == second

    def test_needs_data(self):
        with pytest.raises(DomainError):
            grid_search_cv(np.zeros((0, 2)), [], HyperGrid(layers=(1,), **TINY_GRID))
