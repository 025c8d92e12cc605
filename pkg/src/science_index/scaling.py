"""Outlier compression applied to predicted h-index values above 60.

Kept in its own module because both the regression core (residual
tracking) and the scoring pipeline need it.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class OutlierScaling:
    """Piecewise policy: identity up to `threshold`, rational map above.

    The map beta / (c0 + c1*beta) has a fixed point at (1 - c0) / c1
    (61.2857... for the defaults) and a deliberate jump discontinuity at
    the threshold itself.
    """

    threshold: float = 60.0
    c0: float = 0.571
    c1: float = 0.007


DEFAULT_SCALING = OutlierScaling()


def scale_beta(beta: float, policy: OutlierScaling = DEFAULT_SCALING) -> float:
    """Compress a predicted h-index when it exceeds the outlier threshold."""
    if beta <= policy.threshold:
        return beta
    return beta / (policy.c0 + policy.c1 * beta)
