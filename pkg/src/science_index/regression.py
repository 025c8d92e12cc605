"""Multi-linear regression over career statistics.

The model predicts a researcher's h-index from career length, paper
count, and citation count (optionally plus the squared data-share count).
It is maintained as exact sufficient statistics (X'X, X'y) accumulated
with compensated summation, so weights can be re-solved after every
online update and a streamed fit agrees with a batch fit to floating
point noise. Residual (delta) statistics are tracked with a Welford
accumulator.

States are immutable values: every update returns a fresh state with the
version bumped, which is what makes the ledger's replay exact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .bibliometrics import CareerStats
from .errors import (DimensionMismatch, InsufficientData, MalformedModel,
                     NoObservations, SingularSystem)
from .scaling import DEFAULT_SCALING, OutlierScaling, scale_beta

FEATURE_BASE = "base"
FEATURE_AUGMENTED = "augmented"

#: Coefficients of the shipped pre-trained base model
#: (intercept, career length, paper count, citation count).
REFERENCE_WEIGHTS = (1.71933, 0.06902, 0.10867, 0.00304)

DEFAULT_RIDGE = 1e-9


@dataclass(frozen=True)
class ModelConfig:
    feature_set: str = FEATURE_BASE
    ridge_lambda: float = DEFAULT_RIDGE

    def __post_init__(self):
        if self.feature_set not in (FEATURE_BASE, FEATURE_AUGMENTED):
            raise ValueError(f"unknown feature_set: {self.feature_set!r}")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")

    @property
    def dimension(self) -> int:
        """Number of weights, intercept included."""
        return 5 if self.feature_set == FEATURE_AUGMENTED else 4

    @property
    def augmented(self) -> bool:
        return self.feature_set == FEATURE_AUGMENTED


@dataclass(frozen=True)
class FeatureVector:
    """One observation: model inputs plus the observed h-index target."""

    alpha1: float  # career length, years
    alpha2: float  # paper count
    alpha3: float  # citation count
    actual_h: float
    share_sq: float | None = None  # (data share count)^2, augmented mode only

    def __post_init__(self):
        vals = [self.alpha1, self.alpha2, self.alpha3, self.actual_h]
        if self.share_sq is not None:
            vals.append(self.share_sq)
        for v in vals:
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"feature values must be finite and >= 0: {v}")

    @classmethod
    def from_career_stats(cls, stats: CareerStats, augmented: bool = False):
        share_sq = float(stats.data_share_count) ** 2 if augmented else None
        return cls(alpha1=float(stats.career_length),
                   alpha2=float(stats.publication_count),
                   alpha3=float(stats.citation_count),
                   actual_h=float(stats.h_index),
                   share_sq=share_sq)


def design_row(config: ModelConfig, point: FeatureVector) -> np.ndarray:
    """Design-matrix row for one observation, intercept column first."""
    if config.augmented:
        if point.share_sq is None:
            raise DimensionMismatch("augmented model needs share_sq")
        return np.array([1.0, point.alpha1, point.alpha2, point.alpha3,
                         point.share_sq])
    if point.share_sq is not None:
        raise DimensionMismatch("base model got an augmented feature vector")
    return np.array([1.0, point.alpha1, point.alpha2, point.alpha3])


def _neumaier_add(total, comp, inc):
    """One compensated-summation step, elementwise over arrays."""
    t = total + inc
    lost = np.where(np.abs(total) >= np.abs(inc),
                    (total - t) + inc,
                    (inc - t) + total)
    return t, comp + lost


@dataclass(frozen=True)
class SufficientStats:
    """Accumulated X'X and X'y with Neumaier compensation terms.

    xtx/xty hold the running sums; xtx_c/xty_c hold the low-order bits
    lost to rounding, added back when the weights are solved. The
    intercept column makes xtx[0, 0] == n.
    """

    dimension: int
    n: int
    xtx: np.ndarray
    xtx_c: np.ndarray
    xty: np.ndarray
    xty_c: np.ndarray

    @classmethod
    def empty(cls, dimension: int) -> "SufficientStats":
        return cls(dimension=dimension, n=0,
                   xtx=np.zeros((dimension, dimension)),
                   xtx_c=np.zeros((dimension, dimension)),
                   xty=np.zeros(dimension),
                   xty_c=np.zeros(dimension))

    def add(self, row: np.ndarray, y: float) -> "SufficientStats":
        xtx, xtx_c = _neumaier_add(self.xtx, self.xtx_c, np.outer(row, row))
        xty, xty_c = _neumaier_add(self.xty, self.xty_c, row * y)
        return SufficientStats(self.dimension, self.n + 1, xtx, xtx_c,
                               xty, xty_c)

    def effective(self):
        """(X'X, X'y) with compensation folded back in."""
        return self.xtx + self.xtx_c, self.xty + self.xty_c

    def to_payload(self) -> dict:
        return {
            "dimension": self.dimension,
            "n": self.n,
            "xtx": [[float(v) for v in r] for r in self.xtx],
            "xtx_c": [[float(v) for v in r] for r in self.xtx_c],
            "xty": [float(v) for v in self.xty],
            "xty_c": [float(v) for v in self.xty_c],
        }

    @classmethod
    def from_payload(cls, p: dict) -> "SufficientStats":
        return cls(dimension=int(p["dimension"]), n=int(p["n"]),
                   xtx=np.array(p["xtx"], dtype=float),
                   xtx_c=np.array(p["xtx_c"], dtype=float),
                   xty=np.array(p["xty"], dtype=float),
                   xty_c=np.array(p["xty_c"], dtype=float))


@dataclass(frozen=True)
class RunningDeltaStats:
    """Welford accumulator over the residual (delta) stream."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def pushed(self, x: float) -> "RunningDeltaStats":
        count = self.count + 1
        d = x - self.mean
        mean = self.mean + d / count
        m2 = self.m2 + d * (x - mean)
        return RunningDeltaStats(count=count, mean=mean, m2=m2)

    @classmethod
    def frozen_preset(cls, mean: float, std: float) -> "RunningDeltaStats":
        # count=2 encodes a population std exactly: sqrt(m2/count) == std
        return cls(count=2, mean=mean, m2=2.0 * std * std)

    def to_payload(self) -> dict:
        return {"count": self.count, "mean": float(self.mean),
                "m2": float(self.m2)}

    @classmethod
    def from_payload(cls, p: dict) -> "RunningDeltaStats":
        return cls(count=int(p["count"]), mean=float(p["mean"]),
                   m2=float(p["m2"]))


@dataclass(frozen=True)
class ModelState:
    """Immutable model snapshot: config, weights, accumulators, version."""

    config: ModelConfig
    weights: tuple
    stats: SufficientStats
    delta_stats: RunningDeltaStats
    version: int = 0
    weights_frozen: bool = False
    delta_frozen: bool = False
    scaling: OutlierScaling = DEFAULT_SCALING

    def to_payload(self) -> dict:
        return {
            "config": {"feature_set": self.config.feature_set,
                       "ridge_lambda": float(self.config.ridge_lambda)},
            "weights": [float(w) for w in self.weights],
            "stats": self.stats.to_payload(),
            "delta_stats": self.delta_stats.to_payload(),
            "version": self.version,
            "weights_frozen": self.weights_frozen,
            "delta_frozen": self.delta_frozen,
            "scaling": {"threshold": float(self.scaling.threshold),
                        "c0": float(self.scaling.c0),
                        "c1": float(self.scaling.c1)},
        }

    @classmethod
    def from_payload(cls, p: dict) -> "ModelState":
        cfg = ModelConfig(feature_set=p["config"]["feature_set"],
                          ridge_lambda=float(p["config"]["ridge_lambda"]))
        sc = p.get("scaling", {})
        return cls(config=cfg,
                   weights=tuple(float(w) for w in p["weights"]),
                   stats=SufficientStats.from_payload(p["stats"]),
                   delta_stats=RunningDeltaStats.from_payload(p["delta_stats"]),
                   version=int(p["version"]),
                   weights_frozen=bool(p["weights_frozen"]),
                   delta_frozen=bool(p["delta_frozen"]),
                   scaling=OutlierScaling(threshold=float(sc.get("threshold", 60.0)),
                                          c0=float(sc.get("c0", 0.571)),
                                          c1=float(sc.get("c1", 0.007))))


def _solve_weights(config: ModelConfig, stats: SufficientStats) -> tuple:
    xtx, xty = stats.effective()
    a = xtx.copy()
    # ridge on every coefficient except the intercept
    for i in range(1, config.dimension):
        a[i, i] += config.ridge_lambda
    try:
        factor = scipy.linalg.cho_factor(a)
        w = scipy.linalg.cho_solve(factor, xty)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise SingularSystem("non-finite weights")
    return tuple(float(v) for v in w)


def reference_preset(delta_mean: float = 0.0, delta_std: float = 1.0,
                 delta_frozen: bool = True) -> ModelState:
    """The shipped pre-trained base model.

    The original training set's sufficient statistics are not available,
    so the weights are frozen: online updates still accumulate
    statistics and bump the version, but never move the coefficients.
    Residual normalization defaults to mean 0, std 1 and is frozen too
    unless the caller opts in to streaming updates.
    """
    if delta_std < 0:
        raise ValueError("delta_std must be >= 0")
    config = ModelConfig(feature_set=FEATURE_BASE)
    return ModelState(
        config=config,
        weights=REFERENCE_WEIGHTS,
        stats=SufficientStats.empty(config.dimension),
        delta_stats=RunningDeltaStats.frozen_preset(delta_mean, delta_std),
        version=0,
        weights_frozen=True,
        delta_frozen=delta_frozen,
    )


def predict(state: ModelState, features: FeatureVector) -> float:
    """Predicted h-index (raw, before outlier scaling)."""
    row = design_row(state.config, features)
    return float(np.dot(row, np.asarray(state.weights)))


def _residual(state: ModelState, point: FeatureVector) -> float:
    return point.actual_h - scale_beta(predict(state, point), state.scaling)


def fit_batch(config: ModelConfig, data) -> ModelState:
    """Fit from scratch on a full dataset.

    First pass accumulates sufficient statistics and solves the ridge
    normal equations; second pass records every point's residual under
    the final weights.
    """
    data = list(data)
    if len(data) < config.dimension:
        raise InsufficientData(
            f"need at least {config.dimension} rows, got {len(data)}")
    stats = SufficientStats.empty(config.dimension)
    for point in data:
        stats = stats.add(design_row(config, point), point.actual_h)
    weights = _solve_weights(config, stats)
    state = ModelState(config=config, weights=weights, stats=stats,
                       delta_stats=RunningDeltaStats(), version=0)
    delta_stats = RunningDeltaStats()
    for point in data:
        delta_stats = delta_stats.pushed(_residual(state, point))
    return replace(state, delta_stats=delta_stats)


def update_online(state: ModelState, point: FeatureVector) -> ModelState:
    """Fold one observation into the model and return the new state.

    Cross-products accumulate, weights are re-solved (unless frozen),
    and the point's residual under the *new* weights feeds the delta
    accumulator (unless frozen). Version always increments by one.
    """
    row = design_row(state.config, point)
    stats = state.stats.add(row, point.actual_h)
    if state.weights_frozen:
        weights = state.weights
    else:
        weights = _solve_weights(state.config, stats)
    new = replace(state, stats=stats, weights=weights,
                  version=state.version + 1)
    if not state.delta_frozen:
        new = replace(new, delta_stats=state.delta_stats.pushed(_residual(new, point)))
    return new


def delta_statistics(state: ModelState):
    """(mean, population std) of the recorded residual stream."""
    ds = state.delta_stats
    if ds.count < 1:
        raise NoObservations("no residuals recorded")
    return ds.mean, float(np.sqrt(ds.m2 / ds.count))


def validate_model(state: ModelState, tol: float = 1e-6) -> None:
    """Raise MalformedModel when a state is internally inconsistent.

    Used by the ledger at genesis: a frozen-weight preset is exempt from
    the normal-equation check (its training statistics are not carried),
    everything else must have weights that actually solve its own
    sufficient statistics.
    """
    if len(state.weights) != state.config.dimension:
        raise MalformedModel("weight vector has wrong dimension")
    if not all(np.isfinite(state.weights)):
        raise MalformedModel("non-finite weights")
    ds = state.delta_stats
    if ds.m2 < 0 or ds.count < 0:
        raise MalformedModel("invalid delta statistics")
    if state.weights_frozen:
        return
    if state.stats.n < state.config.dimension:
        raise MalformedModel("unfrozen model with too few observations")
    xtx, xty = state.stats.effective()
    a = xtx.copy()
    for i in range(1, state.config.dimension):
        a[i, i] += state.config.ridge_lambda
    residual = a @ np.asarray(state.weights) - xty
    scale = 1.0 + float(np.linalg.norm(xty))
    if float(np.linalg.norm(residual)) > tol * scale:
        raise MalformedModel("weights do not solve the normal equations")
