"""
Data models and schemas for censored expectile regression
"""
import math
from enum import Enum, IntEnum
from itertools import product
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Annotated

PositiveInt = Annotated[int, Field(gt=0)]
PositiveFloat = Annotated[float, Field(gt=0)]
OpenUnit = Annotated[float, Field(gt=0.0, lt=1.0)]

REPORT_LEVELS: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


class ExpectileLevel(BaseModel):
    """Expectile level tau in the open unit interval"""
    model_config = ConfigDict(frozen=True)

    tau: OpenUnit

    def __float__(self) -> float:
        return self.tau


class LevelGrid(BaseModel):
    """Imputation grid tau_k = k/(m+1), k = 1..m"""
    model_config = ConfigDict(frozen=True)

    m: PositiveInt
    levels: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_levels(self) -> "LevelGrid":
        if len(self.levels) != self.m:
            raise ValueError(f"grid of size {self.m} has {len(self.levels)} levels")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("grid levels must be strictly increasing")
        return self


class Activation(str, Enum):
    """Hidden-layer activation functions"""
    RELU = "relu"
    SIGMOID = "sigmoid"


class ForwardMode(str, Enum):
    """Forward-pass mode; dropout is active only in TRAIN"""
    TRAIN = "train"
    EVAL = "eval"


class MlpSpec(BaseModel):
    """Multilayer perceptron architecture with a single linear output unit"""
    model_config = ConfigDict(frozen=True)

    input_dim: PositiveInt
    hidden_widths: Tuple[PositiveInt, ...]
    activation: Activation = Activation.RELU
    dropout_rate: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.0

    @field_validator("hidden_widths")
    @classmethod
    def _nonempty(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("at least one hidden layer is required")
        return value

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_dim, *self.hidden_widths, 1]


class TrainConfig(BaseModel):
    """Mini-batch gradient descent settings"""
    model_config = ConfigDict(frozen=True)

    learning_rate: PositiveFloat = 0.01
    epochs: PositiveInt = 100
    batch_size: PositiveInt = 64
    seed: Annotated[int, Field(ge=0)] = 0


class HyperPoint(BaseModel):
    """One point of the hyperparameter grid"""
    model_config = ConfigDict(frozen=True)

    layers: PositiveInt = 2
    nodes: PositiveInt = 32
    learning_rate: PositiveFloat = 0.01
    dropout: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.1
    epochs: PositiveInt = 100
    batch: PositiveInt = 64
    activation: Activation = Activation.RELU

    def to_mlp_spec(self, input_dim: int) -> MlpSpec:
        return MlpSpec(
            input_dim=input_dim,
            hidden_widths=(self.nodes,) * self.layers,
            activation=self.activation,
            dropout_rate=self.dropout,
        )

    def to_train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch,
            seed=seed,
        )

    def sort_key(self) -> Tuple[int, int, float, float, int, int]:
        """Tie-break order: fewer layers, nodes, lower rate, dropout, fewer epochs, smaller batch"""
        return (self.layers, self.nodes, self.learning_rate, self.dropout, self.epochs, self.batch)


class HyperGrid(BaseModel):
    """Hyperparameter search grid; defaults are the benchmark grid"""
    model_config = ConfigDict(frozen=True)

    layers: Tuple[PositiveInt, ...] = (2, 3, 4)
    nodes: Tuple[PositiveInt, ...] = (16, 32, 64)
    learning_rate: Tuple[PositiveFloat, ...] = (0.01, 0.1)
    dropout: Tuple[Annotated[float, Field(ge=0.0, lt=1.0)], ...] = (0.1, 0.2, 0.3)
    epochs: Tuple[PositiveInt, ...] = (50, 100)
    batch: Tuple[PositiveInt, ...] = (64, 128, 256)

    @model_validator(mode="after")
    def _nonempty(self) -> "HyperGrid":
        for name in ("layers", "nodes", "learning_rate", "dropout", "epochs", "batch"):
            if not getattr(self, name):
                raise ValueError(f"hyperparameter grid axis '{name}' is empty")
        return self

    def points(self) -> List[HyperPoint]:
        combos = product(self.layers, self.nodes, self.learning_rate, self.dropout, self.epochs, self.batch)
        return sorted(
            (
                HyperPoint(layers=depth, nodes=j, learning_rate=lr, dropout=d, epochs=e, batch=b)
                for depth, j, lr, d, e, b in combos
            ),
            key=HyperPoint.sort_key,
        )


class CensorType(IntEnum):
    """Censoring type code delta"""
    UNCENSORED = 0
    RIGHT = 1
    LEFT = 2
    INTERVAL = 3


class CensoredObservation(BaseModel):
    """Observation (t, x, delta) with censoring bounds; y_true is simulation-only"""
    model_config = ConfigDict(frozen=True)

    x: Tuple[float, ...]
    t: float
    delta: CensorType
    lower: Optional[float] = None
    upper: Optional[float] = None
    y_true: Optional[float] = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "CensoredObservation":
        needs_lower = self.delta in (CensorType.LEFT, CensorType.INTERVAL)
        needs_upper = self.delta in (CensorType.RIGHT, CensorType.INTERVAL)
        if needs_lower != (self.lower is not None):
            raise ValueError(f"delta={int(self.delta)} {'requires' if needs_lower else 'forbids'} L")
        if needs_upper != (self.upper is not None):
            raise ValueError(f"delta={int(self.delta)} {'requires' if needs_upper else 'forbids'} R")
        if self.delta == CensorType.INTERVAL:
            if not self.lower < self.upper:
                raise ValueError("interval censoring requires L < R")
            if not self.lower <= self.t <= self.upper:
                raise ValueError("interval-censored t must lie in [L, R]")
        return self


class FeasibleKind(str, Enum):
    POINT = "point"
    ABOVE = "above"
    BELOW = "below"
    BETWEEN = "between"


class FeasibleSet(BaseModel):
    """Set S(i) of values the latent response may take; open except for POINT"""
    model_config = ConfigDict(frozen=True)

    kind: FeasibleKind
    lower: float = -math.inf
    upper: float = math.inf

    def contains(self, value: float) -> bool:
        if self.kind == FeasibleKind.POINT:
            return value == self.lower
        return self.lower < value < self.upper


class BoundDistribution(str, Enum):
    NORMAL = "normal"
    EXPONENTIAL = "exponential"
    CONSTANT = "constant"


class BoundSampler(BaseModel):
    """Distribution of a censoring bound"""
    model_config = ConfigDict(frozen=True)

    distribution: BoundDistribution
    loc: float = 0.0
    scale: Annotated[float, Field(ge=0.0)] = 1.0
    parameterization: Literal["mean", "rate"] = "mean"

    @classmethod
    def parse(cls, text: str) -> "BoundSampler":
        """Parse 'normal:LOC,SCALE', 'exponential:MEAN' or 'constant:VALUE'"""
        name, _, args = text.partition(":")
        try:
            values = [float(v) for v in args.split(",")] if args else []
            distribution = BoundDistribution(name.strip().lower())
        except ValueError as exc:
            raise ValueError(f"Invalid bound sampler '{text}': {exc}") from exc
        if distribution == BoundDistribution.NORMAL and len(values) == 2:
            return cls(distribution=distribution, loc=values[0], scale=values[1])
        if distribution == BoundDistribution.EXPONENTIAL and len(values) == 1:
            return cls(distribution=distribution, scale=values[0])
        if distribution == BoundDistribution.CONSTANT and len(values) == 1:
            return cls(distribution=distribution, loc=values[0], scale=0.0)
        raise ValueError(f"Invalid bound sampler '{text}'")

    def describe(self) -> str:
        if self.distribution == BoundDistribution.NORMAL:
            return f"N({self.loc:g},{self.scale:g}^2)"
        if self.distribution == BoundDistribution.EXPONENTIAL:
            return f"exp({self.scale:g};{self.parameterization})"
        return f"const({self.loc:g})"


class CensoringScheme(BaseModel):
    """Censoring kind with the bound samplers it requires"""
    model_config = ConfigDict(frozen=True)

    kind: CensorType
    lower: Optional[BoundSampler] = None
    upper: Optional[BoundSampler] = None

    @model_validator(mode="after")
    def _check_samplers(self) -> "CensoringScheme":
        if self.kind == CensorType.UNCENSORED:
            raise ValueError("a censoring scheme needs a censored kind")
        if self.kind in (CensorType.LEFT, CensorType.INTERVAL) and self.lower is None:
            raise ValueError(f"{self.kind.name.lower()} censoring needs a lower-bound sampler")
        if self.kind in (CensorType.RIGHT, CensorType.INTERVAL) and self.upper is None:
            raise ValueError(f"{self.kind.name.lower()} censoring needs an upper-bound sampler")
        return self


class SimModel(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"


class ErrorLaw(str, Enum):
    STD_NORMAL = "normal"
    STUDENT_T3 = "t3"


class ScenarioSpec(BaseModel):
    """One cell of the simulation design"""
    model_config = ConfigDict(frozen=True)

    model: SimModel = SimModel.MODEL1
    error: ErrorLaw = ErrorLaw.STD_NORMAL
    censor_kind: CensorType = CensorType.RIGHT
    target_rate: Literal[25, 50] = 25
    n: PositiveInt = 1000
    seed: Annotated[int, Field(ge=0)] = 0
    exponential_parameterization: Literal["mean", "rate"] = "mean"

    @property
    def scenario_id(self) -> str:
        return f"{self.model.value}-{self.error.value}-{self.censor_kind.name.lower()}-{self.target_rate}"


class DaernnConfig(BaseModel):
    """Settings of the data-augmented iteration"""
    model_config = ConfigDict(frozen=True)

    grid_size: Optional[PositiveInt] = None
    iterations: PositiveInt = 5
    target_levels: Tuple[OpenUnit, ...] = REPORT_LEVELS
    spec: Optional[MlpSpec] = None
    train: TrainConfig = Field(default_factory=TrainConfig)
    warm_start: bool = False
    iteration_seeding: Literal["per_iteration", "shared"] = "per_iteration"
    n_jobs: PositiveInt = 1


class MethodName(str, Enum):
    DAERNN = "daernn"
    FULL = "full"
    ORACLE = "oracle"
    DALINEAR = "dalinear"


class MethodSettings(BaseModel):
    """Everything a method needs besides the data"""
    model_config = ConfigDict(frozen=True)

    hyper: HyperPoint = Field(default_factory=HyperPoint)
    grid_size: Optional[PositiveInt] = None
    iterations: PositiveInt = 5
    levels: Tuple[OpenUnit, ...] = REPORT_LEVELS
    seed: Annotated[int, Field(ge=0)] = 0
    warm_start: bool = False
    iteration_seeding: Literal["per_iteration", "shared"] = "per_iteration"
    standardize: bool = False
    n_jobs: PositiveInt = 1


class MethodResult(BaseModel):
    """Outcome of running one method; failures carry an error instead of raising"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    success: bool
    result: Any = None
    error: Optional[str] = None
    seconds: float = 0.0


class AugmentationStats(BaseModel):
    iteration: int
    observed: int
    imputed: int
    fallback: int


class PredictionMetadata(BaseModel):
    """Sidecar written next to every prediction file"""
    method: MethodName
    grid_size: Optional[int] = None
    iterations: int = 1
    hyper: Optional[HyperPoint] = None
    seed: int = 0
    level_mapping: Dict[str, float] = Field(default_factory=dict)
    covariates: List[str] = Field(default_factory=list)
    standardize: bool = False
    augmentation: List[AugmentationStats] = Field(default_factory=list)


class BundleManifest(BaseModel):
    """Layout of a saved model bundle"""
    learner: Literal["mlp", "linear"]
    levels: List[float]
    served: List[float]
    iterations: PositiveInt
    spec: Optional[MlpSpec] = None
    center: Optional[List[float]] = None
    scale: Optional[List[float]] = None
    metadata: PredictionMetadata


class ReplicationRecord(BaseModel):
    """EL of one method at one level in one replication"""
    scenario: str
    replication: int
    method: MethodName
    tau: float
    el: float
    ratio: Optional[float] = None


class SummaryRow(BaseModel):
    scenario: str
    method: MethodName
    tau: float
    mean_el: float
    mean_ratio: Optional[float] = None
    median_ratio: Optional[float] = None
    completed: int
    failures: int


class ReplicationSummary(BaseModel):
    """Aggregate of a replication study"""
    scenario: str
    replications: int
    rows: List[SummaryRow] = Field(default_factory=list)
    seconds: Dict[str, float] = Field(default_factory=dict)
    failures: Dict[str, int] = Field(default_factory=dict)
    tuning_seconds: float = 0.0
    records: List[ReplicationRecord] = Field(default_factory=list)

    def row(self, method: MethodName, tau: float) -> SummaryRow:
        for row in self.rows:
            if row.method == method and math.isclose(row.tau, tau):
                return row
        raise KeyError(f"no summary row for {method.value} at tau={tau}")


class DesignCellReport(BaseModel):
    model: SimModel
    error: ErrorLaw
    kind: CensorType
    nominal: float
    realized: float
    within_tolerance: bool
    bounds: str


class RunConfig(BaseModel):
    """Validated command-line / config-file settings"""
    model_config = ConfigDict(extra="forbid")

    subcommand: str
    input: Optional[str] = None
    train: Optional[str] = None
    test: Optional[str] = None
    output: Optional[str] = None
    output_dir: Optional[str] = None
    model_dir: Optional[str] = None
    detail: Optional[str] = None
    response: str = "y"
    method: MethodName = MethodName.DAERNN
    methods: Tuple[MethodName, ...] = (MethodName.DAERNN, MethodName.FULL)
    model: SimModel = SimModel.MODEL1
    error: ErrorLaw = ErrorLaw.STD_NORMAL
    censor_kind: CensorType = CensorType.RIGHT
    target_rate: Literal[25, 50] = 25
    n: PositiveInt = 1000
    kind: CensorType = CensorType.RIGHT
    lower_sampler: Optional[str] = None
    upper_sampler: Optional[str] = None
    grid_size: Optional[PositiveInt] = None
    iterations: PositiveInt = 5
    warm_start: bool = False
    iteration_seeding: Literal["per_iteration", "shared"] = "per_iteration"
    standardize: bool = False
    layers: PositiveInt = 2
    nodes: PositiveInt = 32
    learning_rate: PositiveFloat = 0.01
    dropout: Annotated[float, Field(ge=0.0, lt=1.0)] = 0.1
    epochs: PositiveInt = 100
    batch: PositiveInt = 64
    grid_layers: Optional[Tuple[PositiveInt, ...]] = None
    grid_nodes: Optional[Tuple[PositiveInt, ...]] = None
    grid_learning_rate: Optional[Tuple[PositiveFloat, ...]] = None
    grid_dropout: Optional[Tuple[float, ...]] = None
    grid_epochs: Optional[Tuple[PositiveInt, ...]] = None
    grid_batch: Optional[Tuple[PositiveInt, ...]] = None
    tune: bool = False
    tune_level: OpenUnit = 0.5
    folds: PositiveInt = 5
    levels: Tuple[OpenUnit, ...] = REPORT_LEVELS
    replications: PositiveInt = 20
    seed: Annotated[int, Field(ge=0)] = 0
    jobs: PositiveInt = 1
    log_level: str = "INFO"

    @field_validator("methods", "levels", "grid_layers", "grid_nodes", "grid_learning_rate",
                     "grid_dropout", "grid_epochs", "grid_batch", mode="before")
    @classmethod
    def _split_lists(cls, value):
        if isinstance(value, str):
            return tuple(part.strip() for part in value.split(",") if part.strip())
        return value

    @field_validator("target_rate", mode="before")
    @classmethod
    def _rate_from_text(cls, value):
        if isinstance(value, str):
            return int(value.strip().rstrip("%"))
        return value

    @field_validator("censor_kind", "kind", mode="before")
    @classmethod
    def _censor_by_name(cls, value):
        if isinstance(value, str) and not value.isdigit():
            return CensorType[value.strip().upper()]
        if isinstance(value, str):
            return int(value)
        return value

    def hyper_point(self) -> HyperPoint:
        return HyperPoint(
            layers=self.layers,
            nodes=self.nodes,
            learning_rate=self.learning_rate,
            dropout=self.dropout,
            epochs=self.epochs,
            batch=self.batch,
        )

    def hyper_grid(self) -> HyperGrid:
        overrides = {
            axis: getattr(self, f"grid_{axis}")
            for axis in ("layers", "nodes", "learning_rate", "dropout", "epochs", "batch")
            if getattr(self, f"grid_{axis}") is not None
        }
        return HyperGrid(**overrides)

    def method_settings(self, hyper: Optional[HyperPoint] = None) -> MethodSettings:
        return MethodSettings(
            hyper=hyper or self.hyper_point(),
            grid_size=self.grid_size,
            iterations=self.iterations,
            levels=self.levels,
            seed=self.seed,
            warm_start=self.warm_start,
            iteration_seeding=self.iteration_seeding,
            standardize=self.standardize,
        )

    def scenario(self) -> ScenarioSpec:
        return ScenarioSpec(
            model=self.model,
            error=self.error,
            censor_kind=self.censor_kind,
            target_rate=self.target_rate,
            n=self.n,
            seed=self.seed,
        )
