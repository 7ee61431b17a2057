"""
CSV readers and writers for observations, responses and predictions
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.censoring import CensoredDataset
from core.exceptions import SchemaError
from core.predictor import ExpectilePredictionSet
from models.schemas import CensorType, PredictionMetadata

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
RESERVED = ("t", "delta", "L", "R", "y_true")


def _read(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{path} is empty") from exc


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    if column not in frame.columns:
        raise SchemaError(f"Missing column '{column}'", column=column)
    try:
        return pd.to_numeric(frame[column]).to_numpy(dtype=float)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"Column '{column}' is not numeric", column=column) from exc


def covariate_columns(frame: pd.DataFrame, exclude: Sequence[str] = RESERVED) -> List[str]:
    return [col for col in frame.columns if col not in exclude]


def write_observations(data: CensoredDataset, path: PathLike) -> None:
    """x columns, t, delta, L, R and y_true when known; absent bounds are empty"""
    frame = pd.DataFrame(data.X, columns=list(data.covariates))
    frame["t"] = data.t
    frame["delta"] = data.delta
    frame["L"] = data.lower
    frame["R"] = data.upper
    if data.y_true is not None:
        frame["y_true"] = data.y_true
    frame.to_csv(path, index=False)


def read_observations(path: PathLike) -> CensoredDataset:
    frame = _read(path)
    covariates = covariate_columns(frame)
    if not covariates:
        raise SchemaError("No covariate columns")
    X = np.column_stack([_numeric(frame, col) for col in covariates])
    t = _numeric(frame, "t")
    delta_raw = _numeric(frame, "delta")
    if np.any(np.isnan(delta_raw)) or np.any(delta_raw != np.round(delta_raw)):
        raise SchemaError("Column 'delta' must hold integers 0-3", column="delta")
    nan = np.full(len(frame), np.nan)
    lower = _numeric(frame, "L") if "L" in frame.columns else nan
    upper = _numeric(frame, "R") if "R" in frame.columns else nan
    for column, bound, kinds in (("L", lower, (CensorType.LEFT, CensorType.INTERVAL)),
                                 ("R", upper, (CensorType.RIGHT, CensorType.INTERVAL))):
        missing = np.isin(delta_raw, [int(kind) for kind in kinds]) & np.isnan(bound)
        if missing.any():
            raise SchemaError(f"Column '{column}' is empty on {int(missing.sum())} row(s) that need it",
                              column=column)
    y_true = _numeric(frame, "y_true") if "y_true" in frame.columns else None
    return CensoredDataset(X=X, t=t, delta=delta_raw.astype(int), lower=lower, upper=upper,
                           y_true=y_true, covariates=tuple(covariates))


def read_responses(path: PathLike, response: str = "y") -> Tuple[np.ndarray, np.ndarray, Tuple[str, ...]]:
    """Fully observed data: covariates plus one response column"""
    frame = _read(path)
    y = _numeric(frame, response)
    covariates = covariate_columns(frame, exclude=(response, *RESERVED))
    if not covariates:
        raise SchemaError("No covariate columns")
    X = np.column_stack([_numeric(frame, col) for col in covariates])
    return X, y, tuple(covariates)


def read_covariates(path: PathLike, covariates: Sequence[str]) -> np.ndarray:
    frame = _read(path)
    return np.column_stack([_numeric(frame, col) for col in covariates])


def write_predictions(predictions: ExpectilePredictionSet, path: PathLike,
                      detail: Optional[PathLike] = None) -> None:
    predictions.to_frame().to_csv(path, index=False)
    if detail is not None:
        predictions.detail_frame().to_csv(detail, index=False)


def read_predictions(path: PathLike) -> pd.DataFrame:
    return _read(path)


def write_metadata(metadata: PredictionMetadata, path: PathLike) -> None:
    Path(path).write_text(metadata.model_dump_json(indent=2))


def metadata_path(predictions_path: PathLike) -> Path:
    path = Path(predictions_path)
    return path.with_name(path.stem + ".meta.json")
