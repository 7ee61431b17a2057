"""
Expectile check loss, scalar expectiles and expectile level grids
"""
import math
from typing import Iterable, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy.optimize import bisect

from core.exceptions import DomainError
from models.schemas import ExpectileLevel, LevelGrid

Level = Union[float, ExpectileLevel]

NEWTON_MAX_ITER = 200
NEWTON_TOL = 1e-10


def as_tau(tau: Level) -> float:
    """Validate an expectile level and return it as a float"""
    if isinstance(tau, ExpectileLevel):
        return tau.tau
    try:
        return ExpectileLevel(tau=tau).tau
    except ValidationError as exc:
        raise DomainError(f"Expectile level must lie in (0, 1), got {tau!r}") from exc


def _finite(u, name: str = "residual") -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"Non-finite {name}")
    return arr


def asymmetric_weight(u, tau: float):
    """|tau - 1(u < 0)|, with weight tau at u = 0"""
    return np.where(np.asarray(u) < 0, 1.0 - tau, tau)


def check_loss(u, tau: Level):
    """Expectile check function 0.5 * |tau - 1(u<0)| * u^2, elementwise"""
    tau = as_tau(tau)
    arr = _finite(u)
    loss = 0.5 * asymmetric_weight(arr, tau) * arr * arr
    return float(loss) if loss.ndim == 0 else loss


def check_loss_grad(u, tau: Level):
    """Derivative of check_loss with respect to u"""
    tau = as_tau(tau)
    arr = _finite(u)
    grad = asymmetric_weight(arr, tau) * arr
    return float(grad) if grad.ndim == 0 else grad


def _first_order(values: np.ndarray, theta: float, tau: float) -> float:
    return float(np.sum(asymmetric_weight(values - theta, tau) * (values - theta)))


def sample_expectile(values: Iterable[float], tau: Level) -> float:
    """Unconditional tau-expectile of a sample.

    Newton iteration on the piecewise-linear first-order condition, started at
    the sample mean; falls back to bisection on [min, max] if an iterate leaves
    the bracket or the iteration cap is reached.
    """
    tau = as_tau(tau)
    arr = _finite(list(values), "sample value")
    if arr.size == 0:
        raise DomainError("Cannot compute the expectile of an empty sample")
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        return lo

    theta = float(arr.mean())
    for _ in range(NEWTON_MAX_ITER):
        weights = asymmetric_weight(arr - theta, tau)
        step = float(np.sum(weights * (arr - theta)) / np.sum(weights))
        theta += step
        if not lo <= theta <= hi:
            break
        if abs(step) < NEWTON_TOL:
            return theta

    return bisect(lambda th: _first_order(arr, th, tau), lo, hi, xtol=NEWTON_TOL, maxiter=500)


def expectile_grid(m: int) -> LevelGrid:
    """Levels k/(m+1) for k = 1..m"""
    if m < 1:
        raise DomainError(f"Grid size must be positive, got {m}")
    return LevelGrid(m=m, levels=tuple(k / (m + 1) for k in range(1, m + 1)))


def default_grid_size(n: int) -> int:
    """max(floor(sqrt(n)), 99)"""
    if n < 1:
        raise DomainError(f"Sample count must be positive, got {n}")
    return max(math.isqrt(n), 99)


def nearest_level_index(tau: Level, grid: LevelGrid) -> Tuple[int, float]:
    """1-based index and value of the grid level closest to tau (ties go to the lower level)"""
    tau = as_tau(tau)
    levels = np.asarray(grid.levels)
    idx = int(np.argmin(np.abs(levels - tau)))
    return idx + 1, float(levels[idx])


def derive_seed(base: int, iteration: int, level: int) -> int:
    """Deterministic 32-bit seed for (base seed, iteration h, level k); k = 0 is the augmentation stream"""
    return int(np.random.SeedSequence([base, iteration, level]).generate_state(1)[0])
