"""
Censored observations: observed-response construction, feasible sets, boundary fallbacks
and artificial censoring injection
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DomainError
from models.schemas import (
    BoundDistribution,
    BoundSampler,
    CensoredObservation,
    CensoringScheme,
    CensorType,
    FeasibleKind,
    FeasibleSet,
)

logger = logging.getLogger(__name__)

MAX_INTERVAL_REDRAWS = 1000


@dataclass(frozen=True, eq=False)
class CensoredDataset:
    """Columnar set of censored observations; absent bounds are NaN"""
    X: np.ndarray
    t: np.ndarray
    delta: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    y_true: Optional[np.ndarray] = None
    covariates: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        n = X.shape[0]
        object.__setattr__(self, "X", X)
        for name in ("t", "lower", "upper"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(n))
        object.__setattr__(self, "delta", np.asarray(self.delta, dtype=int).reshape(n))
        if self.y_true is not None:
            object.__setattr__(self, "y_true", np.asarray(self.y_true, dtype=float).reshape(n))
        if not self.covariates:
            object.__setattr__(self, "covariates", tuple(f"x{j + 1}" for j in range(X.shape[1])))
        elif len(self.covariates) != X.shape[1]:
            raise DomainError(f"{len(self.covariates)} covariate names for {X.shape[1]} columns")
        self._validate()

    def _validate(self) -> None:
        d = self.delta
        if np.any((d < 0) | (d > 3)):
            raise DomainError("Censoring type must be one of 0, 1, 2, 3")
        if not np.all(np.isfinite(self.t)):
            raise DomainError("Observed responses must be finite")
        needs_lower = (d == CensorType.LEFT) | (d == CensorType.INTERVAL)
        needs_upper = (d == CensorType.RIGHT) | (d == CensorType.INTERVAL)
        if np.any(np.isfinite(self.lower) != needs_lower):
            raise DomainError("L must be present exactly for left- and interval-censored rows")
        if np.any(np.isfinite(self.upper) != needs_upper):
            raise DomainError("R must be present exactly for right- and interval-censored rows")
        interval = d == CensorType.INTERVAL
        if np.any(self.lower[interval] >= self.upper[interval]):
            raise DomainError("Interval censoring requires L < R")
        if np.any((self.t[interval] < self.lower[interval]) | (self.t[interval] > self.upper[interval])):
            raise DomainError("Interval-censored t must lie in [L, R]")

    @property
    def n(self) -> int:
        return int(self.t.size)

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    @property
    def censored(self) -> np.ndarray:
        return self.delta != CensorType.UNCENSORED

    @property
    def censoring_rate(self) -> float:
        return float(np.mean(self.censored)) if self.n else 0.0

    @property
    def has_y_true(self) -> bool:
        return self.y_true is not None and bool(np.all(np.isfinite(self.y_true)))

    def subset(self, index) -> "CensoredDataset":
        return replace(
            self,
            X=self.X[index],
            t=self.t[index],
            delta=self.delta[index],
            lower=self.lower[index],
            upper=self.upper[index],
            y_true=None if self.y_true is None else self.y_true[index],
        )

    def uncensored(self) -> "CensoredDataset":
        return self.subset(~self.censored)

    def with_responses(self, t: np.ndarray) -> "CensoredDataset":
        """Same covariates, every observation uncensored with response t"""
        nan = np.full(self.n, np.nan)
        return replace(self, t=t, delta=np.zeros(self.n, dtype=int), lower=nan, upper=nan)

    def observations(self) -> List[CensoredObservation]:
        out = []
        for i in range(self.n):
            out.append(CensoredObservation(
                x=tuple(self.X[i]),
                t=self.t[i],
                delta=CensorType(int(self.delta[i])),
                lower=None if math.isnan(self.lower[i]) else self.lower[i],
                upper=None if math.isnan(self.upper[i]) else self.upper[i],
                y_true=None if self.y_true is None or math.isnan(self.y_true[i]) else self.y_true[i],
            ))
        return out

    @classmethod
    def from_observations(
        cls, observations: Sequence[CensoredObservation], covariates: Tuple[str, ...] = ()
    ) -> "CensoredDataset":
        if not observations:
            raise DomainError("No observations")
        has_truth = all(obs.y_true is not None for obs in observations)

        def column(attr):
            return [np.nan if getattr(obs, attr) is None else getattr(obs, attr) for obs in observations]

        return cls(
            X=np.array([obs.x for obs in observations], dtype=float),
            t=np.array([obs.t for obs in observations]),
            delta=np.array([int(obs.delta) for obs in observations]),
            lower=np.array(column("lower"), dtype=float),
            upper=np.array(column("upper"), dtype=float),
            y_true=np.array(column("y_true"), dtype=float) if has_truth else None,
            covariates=covariates,
        )


def apply_censoring(
    y: float, kind: CensorType, lower: Optional[float] = None, upper: Optional[float] = None
) -> Tuple[float, CensorType]:
    """Observed response t and censoring type for one latent response"""
    t, delta = censor_responses(
        np.array([y], dtype=float),
        kind,
        None if lower is None else np.array([lower], dtype=float),
        None if upper is None else np.array([upper], dtype=float),
    )
    return float(t[0]), CensorType(int(delta[0]))


def censor_responses(
    y: np.ndarray,
    kind: CensorType,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized apply_censoring.

    Right: t = min(y, R), censored iff y > R. Left: t = max(y, L), censored iff
    y < L. Interval: censored iff L < y < R, in which case t is the midpoint.
    """
    y = np.asarray(y, dtype=float)
    t = y.copy()
    delta = np.zeros(y.shape, dtype=int)
    if kind == CensorType.UNCENSORED:
        return t, delta
    if kind in (CensorType.LEFT, CensorType.INTERVAL) and lower is None:
        raise DomainError(f"{kind.name.lower()} censoring needs L")
    if kind in (CensorType.RIGHT, CensorType.INTERVAL) and upper is None:
        raise DomainError(f"{kind.name.lower()} censoring needs R")

    if kind == CensorType.RIGHT:
        hit = y > upper
        t = np.minimum(y, upper)
    elif kind == CensorType.LEFT:
        hit = y < lower
        t = np.maximum(y, lower)
    else:
        if np.any(np.asarray(lower) >= np.asarray(upper)):
            raise DomainError("Interval censoring requires L < R")
        hit = (lower < y) & (y < upper)
        t = np.where(hit, 0.5 * (lower + upper), y)
    delta[hit] = int(kind)
    return t, delta


def feasible_set(obs: CensoredObservation) -> FeasibleSet:
    if obs.delta == CensorType.UNCENSORED:
        return FeasibleSet(kind=FeasibleKind.POINT, lower=obs.t, upper=obs.t)
    if obs.delta == CensorType.RIGHT:
        return FeasibleSet(kind=FeasibleKind.ABOVE, lower=obs.upper)
    if obs.delta == CensorType.LEFT:
        return FeasibleSet(kind=FeasibleKind.BELOW, upper=obs.lower)
    return FeasibleSet(kind=FeasibleKind.BETWEEN, lower=obs.lower, upper=obs.upper)


def contains(s: FeasibleSet, value: float) -> bool:
    if not math.isfinite(value):
        raise DomainError("Membership test needs a finite value")
    return s.contains(value)


def boundary_value(obs: CensoredObservation) -> float:
    """Fallback imputation: R, L or (L+R)/2"""
    if obs.delta == CensorType.UNCENSORED:
        raise DomainError("Uncensored observations have no boundary fallback")
    if obs.delta == CensorType.RIGHT:
        return obs.upper
    if obs.delta == CensorType.LEFT:
        return obs.lower
    return 0.5 * (obs.lower + obs.upper)


def boundary_values(data: CensoredDataset) -> np.ndarray:
    """Vectorized boundary_value; uncensored rows return t"""
    d = data.delta
    return np.select(
        [d == CensorType.RIGHT, d == CensorType.LEFT, d == CensorType.INTERVAL],
        [data.upper, data.lower, 0.5 * (data.lower + data.upper)],
        default=data.t,
    )


def feasible_mask(data: CensoredDataset, candidates: np.ndarray) -> np.ndarray:
    """contains(S(i), candidates[i, k]) for every observation i and candidate k"""
    cand = np.asarray(candidates, dtype=float)
    d = data.delta
    lo = np.select([d == CensorType.RIGHT, d == CensorType.INTERVAL], [data.upper, data.lower], -np.inf)
    hi = np.select([d == CensorType.LEFT, d == CensorType.INTERVAL], [data.lower, data.upper], np.inf)
    with np.errstate(invalid="ignore"):
        mask = (cand > lo[:, None]) & (cand < hi[:, None])
    point = d == CensorType.UNCENSORED
    mask[point] = cand[point] == data.t[point, None]
    return mask


def sample_bounds(sampler: BoundSampler, size: int, rng: np.random.Generator) -> np.ndarray:
    if sampler.distribution == BoundDistribution.NORMAL:
        draws = rng.normal(sampler.loc, sampler.scale, size=size)
    elif sampler.distribution == BoundDistribution.EXPONENTIAL:
        if sampler.scale <= 0:
            raise DomainError("Exponential bound needs a positive parameter")
        mean = sampler.scale if sampler.parameterization == "mean" else 1.0 / sampler.scale
        draws = rng.exponential(mean, size=size)
    else:
        draws = np.full(size, sampler.loc, dtype=float)
    if not np.all(np.isfinite(draws)):
        raise DomainError(f"Bound sampler {sampler.describe()} produced non-finite bounds")
    return draws


def draw_bounds(
    scheme: CensoringScheme, n: int, rng: np.random.Generator
) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """Per-observation (L, R); interval pairs are redrawn until L < R"""
    lower = sample_bounds(scheme.lower, n, rng) if scheme.lower is not None else None
    upper = sample_bounds(scheme.upper, n, rng) if scheme.upper is not None else None
    if scheme.kind != CensorType.INTERVAL:
        return (lower if scheme.kind == CensorType.LEFT else None,
                upper if scheme.kind == CensorType.RIGHT else None)

    bad = lower >= upper
    rounds = 0
    while np.any(bad):
        rounds += 1
        if rounds > MAX_INTERVAL_REDRAWS:
            raise DomainError("Interval bound samplers cannot produce L < R")
        k = int(bad.sum())
        lower[bad] = sample_bounds(scheme.lower, k, rng)
        upper[bad] = sample_bounds(scheme.upper, k, rng)
        bad = lower >= upper
    return lower, upper


def censor_dataset(
    X: np.ndarray,
    y: np.ndarray,
    scheme: CensoringScheme,
    rng: np.random.Generator,
    covariates: Tuple[str, ...] = (),
) -> CensoredDataset:
    y = np.asarray(y, dtype=float)
    lower, upper = draw_bounds(scheme, y.size, rng)
    t, delta = censor_responses(y, scheme.kind, lower, upper)
    nan = np.full(y.size, np.nan)
    needs_lower = (delta == CensorType.LEFT) | (delta == CensorType.INTERVAL)
    needs_upper = (delta == CensorType.RIGHT) | (delta == CensorType.INTERVAL)
    return CensoredDataset(
        X=X,
        t=t,
        delta=delta,
        lower=np.where(needs_lower, lower if lower is not None else nan, nan),
        upper=np.where(needs_upper, upper if upper is not None else nan, nan),
        y_true=y,
        covariates=covariates,
    )


def inject_censoring(
    X: np.ndarray,
    y: np.ndarray,
    scheme: CensoringScheme,
    seed: int,
    covariates: Tuple[str, ...] = (),
) -> Tuple[CensoredDataset, float]:
    """Artificially censor fully observed data; returns the dataset and realized rate"""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise DomainError("Cannot inject censoring into an empty dataset")
    data = censor_dataset(np.asarray(X, dtype=float).reshape(y.size, -1), y, scheme,
                          np.random.default_rng(seed), covariates)
    logger.info("Injected %s censoring: %.1f%% of %d rows censored",
                scheme.kind.name.lower(), 100 * data.censoring_rate, data.n)
    return data, data.censoring_rate
