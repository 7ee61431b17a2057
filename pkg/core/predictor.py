"""
Fitted expectile predictors: per-iteration prediction sets, ensembles and saved bundles
"""
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from core.exceptions import DomainError, SchemaError
from core.linear import LinearExpectileModel
from core.network import MlpParams, load_params, save_params
from models.schemas import BundleManifest, PredictionMetadata

logger = logging.getLogger(__name__)

Member = Union[MlpParams, LinearExpectileModel]

MANIFEST_NAME = "bundle.json"


def level_label(tau: float) -> str:
    return f"tau_{tau:g}"


def average_iterations(stack: np.ndarray) -> np.ndarray:
    """Mean over axis 0, written as first + mean(stack - first) so agreeing iterations average exactly"""
    first = stack[0]
    return first + np.mean(stack - first, axis=0)


@dataclass(frozen=True, eq=False)
class ExpectilePredictionSet:
    """Predictions per iteration (H, n, L) and their average (n, L)"""
    levels: Tuple[float, ...]
    served: Tuple[float, ...]
    per_iteration: np.ndarray
    average: np.ndarray

    @classmethod
    def from_iterations(
        cls, levels: Sequence[float], served: Sequence[float], stack: np.ndarray
    ) -> "ExpectilePredictionSet":
        stack = np.asarray(stack, dtype=float)
        if stack.ndim != 3 or stack.shape[2] != len(levels):
            raise DomainError(f"Prediction stack of shape {stack.shape} does not match {len(levels)} levels")
        return cls(levels=tuple(levels), served=tuple(served), per_iteration=stack,
                   average=average_iterations(stack))

    @property
    def iterations(self) -> int:
        return int(self.per_iteration.shape[0])

    @property
    def n(self) -> int:
        return int(self.per_iteration.shape[1])

    def index(self, tau: float) -> int:
        for j, level in enumerate(self.levels):
            if math.isclose(level, tau, abs_tol=1e-12):
                return j
        raise KeyError(f"level {tau} was not predicted")

    def column(self, tau: float) -> np.ndarray:
        return self.average[:, self.index(tau)]

    def iteration(self, h: int) -> np.ndarray:
        """Predictions of iteration h (1-based)"""
        return self.per_iteration[h - 1]

    @property
    def mapping(self) -> Dict[str, float]:
        return {f"{level:g}": served for level, served in zip(self.levels, self.served)}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.average, columns=[level_label(tau) for tau in self.levels])

    def detail_frame(self) -> pd.DataFrame:
        """Long format: row, iteration, tau, prediction"""
        H, n, L = self.per_iteration.shape
        return pd.DataFrame({
            "row": np.tile(np.repeat(np.arange(n), L), H),
            "iteration": np.repeat(np.arange(1, H + 1), n * L),
            "tau": np.tile(np.asarray(self.levels), H * n),
            "prediction": self.per_iteration.ravel(),
        })


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Z-score transform fitted on training covariates; constant columns keep unit scale"""
    scaler: StandardScaler

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        return cls(scaler=StandardScaler().fit(np.atleast_2d(np.asarray(X, dtype=float))))

    @classmethod
    def from_moments(cls, center, scale) -> "Standardizer":
        """Rebuild a fitted scaler from saved means and scales"""
        scaler = StandardScaler()
        scaler.mean_ = np.asarray(center, dtype=float)
        scaler.scale_ = np.asarray(scale, dtype=float)
        scaler.var_ = scaler.scale_ ** 2
        scaler.n_features_in_ = scaler.mean_.size
        scaler.n_samples_seen_ = 0
        return cls(scaler=scaler)

    @property
    def center(self) -> np.ndarray:
        return self.scaler.mean_

    @property
    def scale(self) -> np.ndarray:
        return self.scaler.scale_

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] == 0:
            return X.copy()
        return self.scaler.transform(X)


@dataclass(frozen=True, eq=False)
class EnsemblePredictor:
    """members[h][j] predicts level levels[j] in iteration h"""
    levels: Tuple[float, ...]
    served: Tuple[float, ...]
    members: Tuple[Tuple[Member, ...], ...]
    standardizer: Optional[Standardizer] = None

    def __post_init__(self):
        if not self.members:
            raise DomainError("An ensemble needs at least one iteration")
        if any(len(row) != len(self.levels) for row in self.members):
            raise DomainError("Every iteration needs one member per level")

    @property
    def iterations(self) -> int:
        return len(self.members)

    @property
    def learner(self) -> str:
        return "linear" if isinstance(self.members[0][0], LinearExpectileModel) else "mlp"

    def predict(self, X) -> ExpectilePredictionSet:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        stack = np.empty((self.iterations, X.shape[0], len(self.levels)))
        for h, row in enumerate(self.members):
            for j, member in enumerate(row):
                stack[h, :, j] = member.predict(X)
        return ExpectilePredictionSet.from_iterations(self.levels, self.served, stack)


def save_predictor(
    predictor: EnsemblePredictor, directory: Union[str, Path], metadata: PredictionMetadata
) -> Path:
    """Write one parameter CSV per member plus a JSON manifest"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for h, row in enumerate(predictor.members, start=1):
        for j, member in enumerate(row, start=1):
            path = directory / f"member_h{h}_l{j}.csv"
            if isinstance(member, LinearExpectileModel):
                pd.DataFrame({"index": np.arange(member.coef.size), "value": member.coef}).to_csv(path, index=False)
            else:
                save_params(member, path)
    first = predictor.members[0][0]
    std = predictor.standardizer
    manifest = BundleManifest(
        learner=predictor.learner,
        levels=list(predictor.levels),
        served=list(predictor.served),
        iterations=predictor.iterations,
        spec=first.spec if isinstance(first, MlpParams) else None,
        center=None if std is None else std.center.tolist(),
        scale=None if std is None else std.scale.tolist(),
        metadata=metadata,
    )
    (directory / MANIFEST_NAME).write_text(manifest.model_dump_json(indent=2))
    logger.info("Saved %s bundle with %d members to %s",
                manifest.learner, predictor.iterations * len(predictor.levels), directory)
    return directory


def load_predictor(directory: Union[str, Path]) -> Tuple[EnsemblePredictor, PredictionMetadata]:
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise SchemaError(f"No {MANIFEST_NAME} in {directory}")
    manifest = BundleManifest.model_validate(json.loads(manifest_path.read_text()))

    members = []
    for h in range(1, manifest.iterations + 1):
        row = []
        for j, tau in enumerate(manifest.served, start=1):
            path = directory / f"member_h{h}_l{j}.csv"
            if manifest.learner == "linear":
                frame = pd.read_csv(path, float_precision="round_trip")
                if "value" not in frame.columns:
                    raise SchemaError(f"{path.name} is missing column 'value'", column="value")
                row.append(LinearExpectileModel(coef=frame["value"].to_numpy(float), tau=tau))
            else:
                row.append(load_params(path, manifest.spec))
        members.append(tuple(row))

    standardizer = None
    if manifest.center is not None:
        standardizer = Standardizer.from_moments(manifest.center, manifest.scale)
    predictor = EnsemblePredictor(
        levels=tuple(manifest.levels),
        served=tuple(manifest.served),
        members=tuple(members),
        standardizer=standardizer,
    )
    return predictor, manifest.metadata
