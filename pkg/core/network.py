"""
Multilayer perceptron trained under the expectile check loss by mini-batch gradient descent
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import expit

from core.exceptions import DomainError, SchemaError, TrainingDivergenceError
from core.expectile import Level, as_tau, asymmetric_weight
from models.schemas import Activation, ForwardMode, MlpSpec, TrainConfig

logger = logging.getLogger(__name__)

PARAM_COLUMNS = ["layer", "kind", "row", "col", "value"]


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Weights and biases theta; the last entry of each tuple is the output layer"""
    spec: MlpSpec
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = self.spec.layer_sizes
        expected = [(a, b) for a, b in zip(sizes[:-1], sizes[1:])]
        if [w.shape for w in self.weights] != expected:
            raise DomainError(f"Weight shapes {[w.shape for w in self.weights]} do not match {expected}")
        if [b.shape for b in self.biases] != [(b,) for _, b in expected]:
            raise DomainError("Bias shapes do not match the architecture")

    def predict(self, xs) -> np.ndarray:
        return predict(self, xs)

    def flat(self) -> np.ndarray:
        """Layer-major, weights before bias, row-major"""
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.extend([w.ravel(), b.ravel()])
        return np.concatenate(parts)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.flat())))


@dataclass
class ForwardCache:
    """Layer inputs, pre-activations and dropout masks of one forward pass"""
    inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    masks: List[Optional[np.ndarray]]


def init_params(spec: MlpSpec, seed: int) -> MlpParams:
    """He (ReLU) or 1/fan_in (Sigmoid) normal initialization, zero biases"""
    rng = np.random.default_rng(seed)
    gain = 2.0 if spec.activation == Activation.RELU else 1.0
    sizes = spec.layer_sizes
    weights = tuple(
        rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_in, fan_out))
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:])
    )
    biases = tuple(np.zeros(fan_out) for fan_out in sizes[1:])
    return MlpParams(spec=spec, weights=weights, biases=biases)


def _activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == Activation.RELU:
        return np.maximum(z, 0.0)
    return expit(z)


def _activation_grad(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == Activation.RELU:
        # subgradient 0 at the kink
        return (z > 0).astype(float)
    s = expit(z)
    return s * (1.0 - s)


def _as_batch(params: MlpParams, x) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != params.spec.input_dim:
        raise DomainError(
            f"Covariate dimension mismatch: expected {params.spec.input_dim}, got shape {np.shape(x)}"
        )
    return arr, single


def forward(
    params: MlpParams,
    x,
    mode: ForwardMode = ForwardMode.EVAL,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Union[float, np.ndarray], ForwardCache]:
    """Forward pass for one covariate vector or a batch of rows.

    TRAIN mode applies inverted dropout to hidden activations; EVAL mode never
    touches the random stream.
    """
    batch, single = _as_batch(params, x)
    spec = params.spec
    use_dropout = mode == ForwardMode.TRAIN and spec.dropout_rate > 0.0
    if use_dropout and rng is None:
        raise DomainError("Dropout in TRAIN mode needs a random stream")

    cache = ForwardCache(inputs=[], pre_activations=[], masks=[])
    a = batch
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        cache.inputs.append(a)
        z = a @ w + b
        a = _activate(z, spec.activation)
        mask = None
        if use_dropout:
            keep = 1.0 - spec.dropout_rate
            mask = (rng.random(a.shape) < keep) / keep
            a = a * mask
        cache.pre_activations.append(z)
        cache.masks.append(mask)
    cache.inputs.append(a)
    out = (a @ params.weights[-1] + params.biases[-1]).ravel()
    return (float(out[0]) if single else out), cache


def _backward(params: MlpParams, cache: ForwardCache, dout: np.ndarray) -> MlpParams:
    n_layers = len(params.weights)
    grad_w: List[np.ndarray] = [None] * n_layers
    grad_b: List[np.ndarray] = [None] * n_layers

    delta = dout[:, None]
    grad_w[-1] = cache.inputs[-1].T @ delta
    grad_b[-1] = delta.sum(axis=0)
    upstream = delta @ params.weights[-1].T
    for layer in reversed(range(n_layers - 1)):
        if cache.masks[layer] is not None:
            upstream = upstream * cache.masks[layer]
        dz = upstream * _activation_grad(cache.pre_activations[layer], params.spec.activation)
        grad_w[layer] = cache.inputs[layer].T @ dz
        grad_b[layer] = dz.sum(axis=0)
        if layer > 0:
            upstream = dz @ params.weights[layer].T
    return MlpParams(spec=params.spec, weights=tuple(grad_w), biases=tuple(grad_b))


def loss_and_gradient(
    params: MlpParams,
    xs,
    targets,
    tau: Level,
    mode: ForwardMode = ForwardMode.TRAIN,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[float, MlpParams]:
    """Mean check loss over the batch and its gradient with respect to theta"""
    tau = as_tau(tau)
    y = np.asarray(targets, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("Empty batch")
    if not np.all(np.isfinite(y)):
        raise DomainError("Non-finite training targets")
    pred, cache = forward(params, np.asarray(xs, dtype=float).reshape(y.size, -1), mode, rng)
    resid = y - pred
    weight = asymmetric_weight(resid, tau)
    loss = float(np.mean(0.5 * weight * resid * resid))
    dout = -(weight * resid) / y.size
    return loss, _backward(params, cache, dout)


def _validate_training_data(xs, targets, spec: MlpSpec) -> Tuple[np.ndarray, np.ndarray]:
    y = np.asarray(targets, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("Training data is empty")
    X = np.asarray(xs, dtype=float).reshape(y.size, -1)
    if X.shape[1] != spec.input_dim:
        raise DomainError(f"Covariate dimension {X.shape[1]} does not match input_dim {spec.input_dim}")
    if not np.all(np.isfinite(y)):
        raise DomainError("Non-finite training targets")
    return X, y


def train_mbgd_with_history(
    xs,
    targets,
    spec: MlpSpec,
    config: TrainConfig,
    tau: Level,
    init: Optional[MlpParams] = None,
) -> Tuple[MlpParams, List[float]]:
    """Plain mini-batch gradient descent; returns parameters and per-epoch mean loss"""
    tau = as_tau(tau)
    X, y = _validate_training_data(xs, targets, spec)
    n = y.size
    batch_size = min(config.batch_size, n)
    params = init if init is not None else init_params(spec, config.seed)
    rng = np.random.default_rng([config.seed, 1])
    lr = config.learning_rate

    history: List[float] = []
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, batch_size):
                idx = order[start:start + batch_size]
                loss, grad = loss_and_gradient(params, X[idx], y[idx], tau, ForwardMode.TRAIN, rng)
                if not np.isfinite(loss):
                    raise TrainingDivergenceError(epoch)
                total += loss * idx.size
                params = MlpParams(
                    spec=spec,
                    weights=tuple(w - lr * g for w, g in zip(params.weights, grad.weights)),
                    biases=tuple(b - lr * g for b, g in zip(params.biases, grad.biases)),
                )
            if not params.is_finite():
                raise TrainingDivergenceError(epoch)
            history.append(total / n)
    logger.debug("tau=%.4f trained %d epochs, final loss %.6g", tau, config.epochs, history[-1])
    return params, history


def train_mbgd(
    xs,
    targets,
    spec: MlpSpec,
    config: TrainConfig,
    tau: Level,
    init: Optional[MlpParams] = None,
) -> MlpParams:
    params, _ = train_mbgd_with_history(xs, targets, spec, config, tau, init=init)
    return params


def predict(params: MlpParams, xs) -> np.ndarray:
    """EVAL-mode predictions for a sequence of covariate vectors, order preserved"""
    arr = np.asarray(xs, dtype=float)
    if arr.size == 0:
        return np.empty(0)
    if arr.ndim == 1:
        arr = arr[None, :]
    pred, _ = forward(params, arr, ForwardMode.EVAL)
    return pred


def params_to_frame(params: MlpParams) -> pd.DataFrame:
    rows = []
    for layer, (w, b) in enumerate(zip(params.weights, params.biases), start=1):
        for (r, c), value in np.ndenumerate(w):
            rows.append((layer, "weight", r, c, value))
        for c, value in enumerate(b):
            rows.append((layer, "bias", 0, c, value))
    return pd.DataFrame(rows, columns=PARAM_COLUMNS)


def params_from_frame(frame: pd.DataFrame, spec: MlpSpec) -> MlpParams:
    missing = [col for col in PARAM_COLUMNS if col not in frame.columns]
    if missing:
        raise SchemaError(f"Parameter file is missing column '{missing[0]}'", column=missing[0])
    sizes = spec.layer_sizes
    weights, biases = [], []
    for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
        part = frame[frame["layer"] == layer]
        w_rows = part[part["kind"] == "weight"]
        b_rows = part[part["kind"] == "bias"]
        w = np.zeros((fan_in, fan_out))
        b = np.zeros(fan_out)
        if len(w_rows) != w.size or len(b_rows) != b.size:
            raise SchemaError(f"Parameter file does not match the architecture at layer {layer}")
        w[w_rows["row"].to_numpy(int), w_rows["col"].to_numpy(int)] = w_rows["value"].to_numpy(float)
        b[b_rows["col"].to_numpy(int)] = b_rows["value"].to_numpy(float)
        weights.append(w)
        biases.append(b)
    return MlpParams(spec=spec, weights=tuple(weights), biases=tuple(biases))


def save_params(params: MlpParams, path: Union[str, Path]) -> None:
    params_to_frame(params).to_csv(path, index=False)


def load_params(path: Union[str, Path], spec: MlpSpec) -> MlpParams:
    return params_from_frame(pd.read_csv(path, float_precision="round_trip"), spec)

