"""
Synthetic regression scenarios with censoring bounds drawn from the benchmark design table
"""
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from sklearn.model_selection import train_test_split as sklearn_split

from core.censoring import CensoredDataset, censor_dataset
from core.exceptions import DomainError
from models.schemas import (
    BoundDistribution,
    BoundSampler,
    CensoringScheme,
    CensorType,
    DesignCellReport,
    ErrorLaw,
    ScenarioSpec,
    SimModel,
)

logger = logging.getLogger(__name__)

RATE_TOLERANCE = 0.05

# (model, error, rate) -> {kind: (lower sampler, upper sampler)}; exponential entries hold the
# design number, read as a mean unless the scenario asks for the rate reading.
_N = BoundDistribution.NORMAL
_E = BoundDistribution.EXPONENTIAL
CENSORING_DESIGN: Dict[Tuple[SimModel, ErrorLaw, int], Dict[CensorType, Tuple[Optional[tuple], Optional[tuple]]]] = {
    (SimModel.MODEL1, ErrorLaw.STD_NORMAL, 25): {
        CensorType.RIGHT: (None, (_N, 1.4, 2.0)),
        CensorType.LEFT: ((_N, 0.0, 2.0), None),
        CensorType.INTERVAL: ((_N, -0.5, 2.0), (_N, 0.0, 2.0)),
    },
    (SimModel.MODEL1, ErrorLaw.STD_NORMAL, 50): {
        CensorType.RIGHT: (None, (_N, 0.6, 2.0)),
        CensorType.LEFT: ((_N, 0.6, 2.0), None),
        CensorType.INTERVAL: ((_N, 0.0, 2.0), (_N, 1.5, 2.0)),
    },
    (SimModel.MODEL1, ErrorLaw.STUDENT_T3, 25): {
        CensorType.RIGHT: (None, (_N, 1.5, 2.0)),
        CensorType.LEFT: ((_N, 0.0, 2.0), None),
        CensorType.INTERVAL: ((_N, -0.5, 2.0), (_N, 0.0, 2.0)),
    },
    (SimModel.MODEL1, ErrorLaw.STUDENT_T3, 50): {
        CensorType.RIGHT: (None, (_N, 0.65, 2.0)),
        CensorType.LEFT: ((_N, 0.6, 2.0), None),
        CensorType.INTERVAL: ((_N, 0.0, 2.0), (_N, 1.5, 2.0)),
    },
}
for _error in ErrorLaw:
    CENSORING_DESIGN[(SimModel.MODEL2, _error, 25)] = {
        CensorType.RIGHT: (None, (_E, 0.0, 4.0)),
        CensorType.LEFT: ((_E, 0.0, 2.0), None),
        CensorType.INTERVAL: ((_E, 0.0, 0.85), (_E, 0.0, 1.35)),
    }
    CENSORING_DESIGN[(SimModel.MODEL2, _error, 50)] = {
        CensorType.RIGHT: (None, (_E, 0.0, 3.0)),
        CensorType.LEFT: ((_E, 0.0, 3.0), None),
        CensorType.INTERVAL: ((_E, 0.0, 0.55), (_E, 0.0, 1.45)),
    }


def _sampler(entry: Optional[tuple], parameterization: str) -> Optional[BoundSampler]:
    if entry is None:
        return None
    distribution, loc, scale = entry
    return BoundSampler(distribution=distribution, loc=loc, scale=scale, parameterization=parameterization)


def design_scheme(
    model: SimModel,
    error: ErrorLaw,
    kind: CensorType,
    rate: int,
    parameterization: str = "mean",
) -> CensoringScheme:
    cell = CENSORING_DESIGN.get((SimModel(model), ErrorLaw(error), rate))
    if cell is None or kind not in cell:
        raise DomainError(f"No censoring design for {model}, {error}, {kind!r}, {rate}%")
    lower, upper = cell[kind]
    return CensoringScheme(
        kind=kind,
        lower=_sampler(lower, parameterization),
        upper=_sampler(upper, parameterization),
    )


def sample_error(law: ErrorLaw, size: int, rng: np.random.Generator) -> np.ndarray:
    """N(0,1) draws, or t(3) as z / sqrt(v/3) with v ~ chi-square(3)"""
    z = rng.standard_normal(size)
    if law == ErrorLaw.STD_NORMAL:
        return z
    v = rng.chisquare(3, size)
    return z / np.sqrt(v / 3.0)


def model1_response(X: np.ndarray, e) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.sin(2 * X[:, 0]) + 2 * np.exp(-16 * X[:, 1] ** 2) + 0.5 * np.asarray(e, dtype=float)


def model2_response(X: np.ndarray, e) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    x1, x2 = X[:, 0], X[:, 1]
    scale = np.abs((1 + 0.2 * (x1 + x2)) / 5)
    return 1 + np.sin(x1) + np.exp(0.5 * x1 ** 2 - x1 * x2 + 0.2 * x2 ** 2) + scale * np.asarray(e, dtype=float)


def _generate(model: SimModel, n: int, error: ErrorLaw, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    if n < 1:
        raise DomainError(f"Sample count must be positive, got {n}")
    if model == SimModel.MODEL1:
        X = rng.normal(0.0, 0.5, size=(n, 2))
        return X, model1_response(X, sample_error(error, n, rng))
    X = np.column_stack([rng.uniform(-1.0, 1.0, n), rng.standard_normal(n)])
    return X, model2_response(X, sample_error(error, n, rng))


def gen_model1(n: int, error: ErrorLaw, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """x1, x2 iid N(0, 0.5^2); y = sin(2 x1) + 2 exp(-16 x2^2) + 0.5 e"""
    return _generate(SimModel.MODEL1, n, error, np.random.default_rng(seed))


def gen_model2(n: int, error: ErrorLaw, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """x1 ~ U(-1, 1), x2 ~ N(0, 1); heteroscedastic nonlinear response"""
    return _generate(SimModel.MODEL2, n, error, np.random.default_rng(seed))


def gen_scenario(spec: ScenarioSpec) -> CensoredDataset:
    """Generate (x, y), censor with the matching design-table cell, keep y_true"""
    if spec.censor_kind == CensorType.UNCENSORED:
        raise DomainError("A scenario needs a censored kind")
    scheme = design_scheme(spec.model, spec.error, spec.censor_kind, spec.target_rate,
                           spec.exponential_parameterization)
    rng = np.random.default_rng(spec.seed)
    X, y = _generate(spec.model, spec.n, spec.error, rng)
    data = censor_dataset(X, y, scheme, rng)
    logger.debug("%s: n=%d, realized censoring rate %.3f", spec.scenario_id, data.n, data.censoring_rate)
    return data


def train_test_split(
    data: CensoredDataset, fraction: float = 0.8, seed: int = 0
) -> Tuple[CensoredDataset, CensoredDataset]:
    """Seeded shuffle split; ceil(fraction * n) rows train, the rest test"""
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"Split fraction must lie in (0, 1), got {fraction}")
    cut = math.ceil(fraction * data.n)
    if cut >= data.n:
        raise DomainError(f"Split of {data.n} rows at fraction {fraction} leaves no test rows")
    train_idx, test_idx = sklearn_split(np.arange(data.n), train_size=cut, random_state=seed)
    return data.subset(np.sort(train_idx)), data.subset(np.sort(test_idx))


def verify_design_rates(n: int = 5000, seed: int = 0, parameterization: str = "mean") -> List[DesignCellReport]:
    """Realized censoring rate of every design-table cell"""
    reports = []
    for (model, error, rate), cell in CENSORING_DESIGN.items():
        for kind in cell:
            spec = ScenarioSpec(model=model, error=error, censor_kind=kind, target_rate=rate,
                                n=n, seed=seed, exponential_parameterization=parameterization)
            scheme = design_scheme(model, error, kind, rate, parameterization)
            realized = gen_scenario(spec).censoring_rate
            nominal = rate / 100.0
            bounds = ", ".join(
                f"{side}~{sampler.describe()}"
                for side, sampler in (("L", scheme.lower), ("R", scheme.upper))
                if sampler is not None
            )
            reports.append(DesignCellReport(
                model=model,
                error=error,
                kind=kind,
                nominal=nominal,
                realized=realized,
                within_tolerance=abs(realized - nominal) <= RATE_TOLERANCE,
                bounds=bounds,
            ))
    off = sum(not r.within_tolerance for r in reports)
    if off:
        logger.warning("%d of %d design cells miss their nominal rate by more than %.2f",
                       off, len(reports), RATE_TOLERANCE)
    return reports
