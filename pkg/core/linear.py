"""
Linear expectile regression by iteratively reweighted least squares
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.exceptions import ConvergenceError, DomainError
from core.expectile import Level, as_tau, asymmetric_weight

logger = logging.getLogger(__name__)

IRLS_MAX_PASSES = 100
IRLS_TOL = 1e-8
MAX_HALVINGS = 50


@dataclass(frozen=True, eq=False)
class LinearExpectileModel:
    """beta[0] is the intercept"""
    coef: np.ndarray
    tau: float
    objective_path: Tuple[float, ...] = ()

    def __post_init__(self):
        if not np.all(np.isfinite(self.coef)):
            raise DomainError("Linear expectile coefficients must be finite")

    @property
    def input_dim(self) -> int:
        return int(self.coef.size - 1)

    def predict(self, xs) -> np.ndarray:
        arr = np.asarray(xs, dtype=float)
        if arr.size == 0:
            return np.empty(0)
        arr = np.atleast_2d(arr)
        if arr.shape[1] != self.input_dim:
            raise DomainError(f"Covariate dimension mismatch: expected {self.input_dim}, got {arr.shape[1]}")
        return self.coef[0] + arr @ self.coef[1:]


def _design(xs, n: int) -> np.ndarray:
    X = np.asarray(xs, dtype=float).reshape(n, -1)
    return np.column_stack([np.ones(n), X])


def _objective(Z: np.ndarray, y: np.ndarray, beta: np.ndarray, tau: float) -> float:
    r = y - Z @ beta
    return float(np.sum(0.5 * asymmetric_weight(r, tau) * r * r))


def weight_fit(Z: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted least squares through sqrt-weighted lstsq"""
    sw = np.sqrt(w)
    return np.linalg.lstsq(Z * sw[:, None], y * sw, rcond=None)[0]


def linear_expectile_fit(xs, targets, tau: Level) -> LinearExpectileModel:
    """Minimize sum check_loss(t - (1, x) beta, tau).

    Starts from ordinary least squares and reweights by |tau - 1(r < 0)| each
    pass; a pass that would raise the objective is halved toward the previous
    beta. Stops when max |delta beta| < 1e-8.
    """
    tau = as_tau(tau)
    y = np.asarray(targets, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("Linear expectile fit needs data")
    if not np.all(np.isfinite(y)):
        raise DomainError("Non-finite training targets")
    Z = _design(xs, y.size)
    if np.linalg.matrix_rank(Z) < Z.shape[1]:
        raise DomainError("Design matrix with intercept is rank deficient")

    beta = weight_fit(Z, y, np.ones(y.size))
    path = [_objective(Z, y, beta, tau)]
    delta = np.inf
    for _ in range(IRLS_MAX_PASSES):
        w = asymmetric_weight(y - Z @ beta, tau)
        proposal = weight_fit(Z, y, w)
        step = proposal - beta
        value = _objective(Z, y, proposal, tau)
        halvings = 0
        while value > path[-1] and halvings < MAX_HALVINGS:
            step = 0.5 * step
            proposal = beta + step
            value = _objective(Z, y, proposal, tau)
            halvings += 1
        if value > path[-1]:
            # no descent left along the step
            step = np.zeros_like(beta)
            proposal, value = beta, path[-1]
        delta = float(np.max(np.abs(step)))
        beta = proposal
        path.append(value)
        if delta < IRLS_TOL:
            logger.debug("IRLS tau=%.4f converged after %d passes", tau, len(path) - 1)
            return LinearExpectileModel(coef=beta, tau=tau, objective_path=tuple(path))
    raise ConvergenceError(f"IRLS did not converge in {IRLS_MAX_PASSES} passes at tau={tau}", delta)
