"""
Tests for data models and schemas
"""
import math

import pytest
from pydantic import ValidationError

from models.schemas import (
    Activation,
    BoundDistribution,
    BoundSampler,
    CensoredObservation,
    CensoringScheme,
    CensorType,
    ExpectileLevel,
    FeasibleKind,
    FeasibleSet,
    HyperGrid,
    HyperPoint,
    LevelGrid,
    MethodName,
    MlpSpec,
    ReplicationSummary,
    RunConfig,
    ScenarioSpec,
    SummaryRow,
)


class TestExpectileLevel:
    """Test ExpectileLevel model"""

    def test_valid_level(self):
        assert float(ExpectileLevel(tau=0.3)) == 0.3

    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.1, 1.5])
    def test_level_outside_open_unit_interval(self, tau):
        """Test levels on or outside the boundary are rejected"""
        with pytest.raises(ValidationError):
            ExpectileLevel(tau=tau)


class TestLevelGrid:

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            LevelGrid(m=3, levels=(0.25, 0.5))

    def test_not_increasing(self):
        with pytest.raises(ValidationError):
            LevelGrid(m=2, levels=(0.5, 0.25))


class TestMlpSpec:
    """Test MlpSpec model"""

    def test_layer_sizes(self):
        spec = MlpSpec(input_dim=3, hidden_widths=(16, 8))
        assert spec.layer_sizes == [3, 16, 8, 1]
        assert spec.activation == Activation.RELU
        assert spec.dropout_rate == 0.0

    def test_requires_hidden_layer(self):
        with pytest.raises(ValidationError):
            MlpSpec(input_dim=2, hidden_widths=())

    def test_dropout_must_be_below_one(self):
        with pytest.raises(ValidationError):
            MlpSpec(input_dim=2, hidden_widths=(4,), dropout_rate=1.0)


class TestHyperparameters:
    """Test HyperPoint and HyperGrid"""

    def test_point_to_spec_and_config(self):
        point = HyperPoint(layers=3, nodes=16, learning_rate=0.1, dropout=0.2, epochs=50, batch=128)
        spec = point.to_mlp_spec(2)
        config = point.to_train_config(seed=9)
        assert spec.hidden_widths == (16, 16, 16)
        assert spec.dropout_rate == 0.2
        assert config.batch_size == 128
        assert config.seed == 9

    def test_default_grid_is_benchmark_grid(self):
        points = HyperGrid().points()
        assert len(points) == 3 * 3 * 2 * 3 * 2 * 3
        assert points[0] == HyperPoint(layers=2, nodes=16, learning_rate=0.01, dropout=0.1, epochs=50, batch=64)
        assert points[-1].sort_key() == (4, 64, 0.1, 0.3, 100, 256)

    def test_points_follow_tie_break_order(self):
        keys = [p.sort_key() for p in HyperGrid(layers=(3, 2), nodes=(32, 16)).points()]
        assert keys == sorted(keys)

    def test_empty_axis_rejected(self):
        with pytest.raises(ValidationError):
            HyperGrid(nodes=())


class TestCensoredObservation:
    """Test bound requirements per censoring type"""

    def test_uncensored_forbids_bounds(self):
        with pytest.raises(ValidationError):
            CensoredObservation(x=(0.0,), t=1.0, delta=CensorType.UNCENSORED, upper=2.0)

    def test_right_requires_upper(self):
        with pytest.raises(ValidationError):
            CensoredObservation(x=(0.0,), t=1.0, delta=CensorType.RIGHT)
        obs = CensoredObservation(x=(0.0,), t=1.0, delta=CensorType.RIGHT, upper=1.0)
        assert obs.upper == 1.0

    def test_interval_requires_ordered_bounds(self):
        with pytest.raises(ValidationError):
            CensoredObservation(x=(0.0,), t=1.0, delta=CensorType.INTERVAL, lower=2.0, upper=1.0)

    def test_interval_midpoint_inside(self):
        obs = CensoredObservation(x=(0.0,), t=1.5, delta=3, lower=1.0, upper=2.0)
        assert obs.delta == CensorType.INTERVAL


class TestFeasibleSet:

    def test_open_bounds(self):
        s = FeasibleSet(kind=FeasibleKind.BETWEEN, lower=0.0, upper=1.0)
        assert s.contains(0.5)
        assert not s.contains(0.0)
        assert not s.contains(1.0)

    def test_point(self):
        s = FeasibleSet(kind=FeasibleKind.POINT, lower=2.0, upper=2.0)
        assert s.contains(2.0)
        assert not s.contains(2.0 + 1e-12)


class TestBoundSampler:
    """Test sampler parsing from command-line strings"""

    def test_parse_normal(self):
        sampler = BoundSampler.parse("normal:1.4,2")
        assert sampler.distribution == BoundDistribution.NORMAL
        assert (sampler.loc, sampler.scale) == (1.4, 2.0)
        assert sampler.describe() == "N(1.4,2^2)"

    def test_parse_exponential_and_constant(self):
        assert BoundSampler.parse("exponential:4").scale == 4.0
        assert BoundSampler.parse("constant:-3").loc == -3.0

    @pytest.mark.parametrize("text", ["normal:1", "gamma:1,2", "constant:a", "exponential:1,2"])
    def test_parse_invalid(self, text):
        with pytest.raises(ValueError):
            BoundSampler.parse(text)

    def test_scheme_needs_matching_sampler(self):
        with pytest.raises(ValidationError):
            CensoringScheme(kind=CensorType.RIGHT, lower=BoundSampler.parse("normal:0,1"))
        with pytest.raises(ValidationError):
            CensoringScheme(kind=CensorType.UNCENSORED)


class TestScenarioAndRunConfig:

    def test_scenario_id(self):
        spec = ScenarioSpec(censor_kind=CensorType.LEFT, target_rate=50)
        assert spec.scenario_id == "model1-normal-left-50"

    def test_run_config_parses_text_values(self):
        config = RunConfig(subcommand="benchmark", methods="daernn,oracle", levels="0.25,0.75",
                           target_rate="50%", censor_kind="interval", warm_start="true")
        assert config.methods == (MethodName.DAERNN, MethodName.ORACLE)
        assert config.levels == (0.25, 0.75)
        assert config.target_rate == 50
        assert config.censor_kind == CensorType.INTERVAL
        assert config.warm_start is True

    def test_run_config_rejects_unknown_keys(self):
        with pytest.raises(ValidationError):
            RunConfig(subcommand="fit", bogus=1)

    def test_run_config_grid_overrides(self):
        grid = RunConfig(subcommand="tune", grid_layers="2", grid_nodes="8,16").hyper_grid()
        assert grid.layers == (2,)
        assert grid.nodes == (8, 16)
        assert grid.batch == (64, 128, 256)

    def test_summary_row_lookup(self):
        row = SummaryRow(scenario="s", method=MethodName.FULL, tau=0.5, mean_el=0.1, completed=3, failures=0)
        summary = ReplicationSummary(scenario="s", replications=3, rows=[row])
        assert summary.row(MethodName.FULL, 0.5) is row
        with pytest.raises(KeyError):
            summary.row(MethodName.ORACLE, 0.5)
        assert math.isclose(summary.row("full", 0.5).mean_el, 0.1)
