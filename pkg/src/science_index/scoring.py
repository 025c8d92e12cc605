"""Score pipeline: predicted h-index -> outlier scaling -> residual ->
population z-score -> logistic map onto (0, 10).

Two augmentation modes are provided. "literal" treats the squared
data-share count as a regression covariate when the model was trained
that way. "share_bonus" (the default) keeps the base prediction and adds
share_weight * share_count^2 directly to the residual, which is the
variant that actually rewards sharing: a positive covariate coefficient
raises the *predicted* h-index and would push the final score down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .bibliometrics import CareerStats
from .errors import DimensionMismatch, NoSharers, Unreachable
from .regression import FeatureVector, ModelState, delta_statistics, predict
from .scaling import OutlierScaling, scale_beta

__all__ = [
    "MODE_LITERAL", "MODE_SHARE_BONUS", "OutlierScaling", "ScoreBreakdown",
    "scale_beta", "compute_epsilon", "compute_phi", "score",
    "calibrate_share_weight",
]

MODE_LITERAL = "literal"
MODE_SHARE_BONUS = "share_bonus"


@dataclass(frozen=True)
class ScoreBreakdown:
    """Every intermediate of one scoring event, for interpretability."""

    beta_raw: float
    beta_scaled: float
    delta: float
    epsilon: float
    phi: float
    model_version: int

    def to_payload(self) -> dict:
        return {
            "beta_raw": float(self.beta_raw),
            "beta_scaled": float(self.beta_scaled),
            "delta": float(self.delta),
            "epsilon": float(self.epsilon),
            "phi": float(self.phi),
            "model_version": self.model_version,
        }

    @classmethod
    def from_payload(cls, p: dict) -> "ScoreBreakdown":
        return cls(beta_raw=float(p["beta_raw"]),
                   beta_scaled=float(p["beta_scaled"]),
                   delta=float(p["delta"]),
                   epsilon=float(p["epsilon"]),
                   phi=float(p["phi"]),
                   model_version=int(p["model_version"]))


def compute_epsilon(delta: float, mean: float, std: float) -> float:
    """Population z-score of a residual; 0 when the population has no spread."""
    if std < 0:
        raise ValueError("std must be >= 0")
    if std == 0:
        return 0.0
    return (delta - mean) / std


def compute_phi(epsilon: float) -> float:
    """Logistic map of the z-score onto the open interval (0, 10).

    Evaluated branch-wise so neither tail overflows. Once the true value
    is closer to an endpoint than one ulp the result is clamped to the
    nearest double strictly inside the interval, keeping the range open
    for any finite input.
    """
    if epsilon >= 0:
        phi = 10.0 / (1.0 + math.exp(-epsilon))
        return min(phi, math.nextafter(10.0, 0.0))
    e = math.exp(epsilon)
    phi = 10.0 * e / (1.0 + e)
    return max(phi, math.nextafter(0.0, 1.0))


def score(stats: CareerStats, model: ModelState,
          mode: str = MODE_SHARE_BONUS, share_weight: float = 0.0) -> ScoreBreakdown:
    """Run the full pipeline for one researcher under a given model."""
    if mode not in (MODE_LITERAL, MODE_SHARE_BONUS):
        raise ValueError(f"unknown mode: {mode!r}")
    if share_weight < 0:
        raise ValueError("share_weight must be >= 0")
    if mode == MODE_SHARE_BONUS and model.config.augmented:
        raise DimensionMismatch(
            "share_bonus mode requires a base-feature model")
    features = FeatureVector.from_career_stats(
        stats, augmented=model.config.augmented)
    beta_raw = predict(model, features)
    beta_scaled = scale_beta(beta_raw, model.scaling)
    delta = stats.h_index - beta_scaled
    if mode == MODE_SHARE_BONUS:
        delta += share_weight * float(stats.data_share_count) ** 2
    mean, std = delta_statistics(model)
    epsilon = compute_epsilon(delta, mean, std)
    return ScoreBreakdown(beta_raw=beta_raw, beta_scaled=beta_scaled,
                          delta=delta, epsilon=epsilon,
                          phi=compute_phi(epsilon),
                          model_version=model.version)


def calibrate_share_weight(model: ModelState, population,
                           target_shift: float, tolerance: float = 1e-3,
                           max_doublings: int = 80) -> float:
    """Find the share-bonus weight producing a given mean score shift.

    The mean shift is monotone increasing in the weight and bounded
    above (the logistic saturates at 10), so bracket by doubling and
    finish with bisection on the shift value itself. The inner loop is
    vectorized over the population: the bonus moves each member's
    z-score by weight * share_count^2 / std, everything else is fixed.
    """
    population = list(population)
    if not population:
        raise ValueError("population must be non-empty")
    if target_shift <= 0:
        raise ValueError("target_shift must be > 0")
    if all(s.data_share_count == 0 for s in population):
        raise NoSharers("no member of the population has shared data")

    baseline = [score(s, model, MODE_SHARE_BONUS, 0.0) for s in population]
    eps0 = np.array([b.epsilon for b in baseline])
    phi0 = np.array([b.phi for b in baseline])
    share_sq = np.array([float(s.data_share_count) ** 2 for s in population])
    _, std = delta_statistics(model)
    if std == 0:
        raise Unreachable("zero residual spread: the bonus cannot move phi")

    # hard ceiling: sharers can at most saturate at 10, others never move
    ceiling = float(np.mean(np.where(share_sq > 0, 10.0 - phi0, 0.0)))
    if target_shift >= ceiling:
        raise Unreachable(
            f"target {target_shift} exceeds the saturation ceiling {ceiling:.6f}")

    def mean_shift(weight):
        return float(np.mean(10.0 * expit(eps0 + weight * share_sq / std) - phi0))

    hi = 1e-6
    for _ in range(max_doublings):
        if mean_shift(hi) >= target_shift:
            break
        hi *= 2.0
    else:
        raise Unreachable("mean shift never reached the target")

    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        shift = mean_shift(mid)
        if abs(shift - target_shift) <= tolerance:
            return mid
        if shift < target_shift:
            lo = mid
        else:
            hi = mid
    raise Unreachable("bisection failed to converge")
