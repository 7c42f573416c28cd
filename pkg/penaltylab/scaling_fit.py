"""
Scaling fits for penaltylab
Exponential fits of convergence probability (or time) against spin count
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.stats import linregress

from penaltylab.errors import ArgumentError, FitError

KINDS = ("probability", "time")


@dataclass(frozen=True)
class ScalingFit:
    """log y = intercept -/+ alpha N^beta; dropped counts the zero points left out"""

    points: Tuple[Tuple[float, float], ...]
    beta: float
    alpha: float
    intercept: float
    residual: float
    kind: str = "probability"
    dropped: int = 0


def fit_scaling(points: Sequence[Tuple[float, float]], beta: float = 1.0, kind: str = "probability") -> ScalingFit:
    """Least squares of log y against N^beta.

    probability: y = C exp(-alpha N^beta), so alpha is the negated slope.
    time:        y = C exp(+alpha N^beta), so alpha is the slope.
    Points with y <= 0 have no logarithm and are dropped, not clamped.
    """
    if kind not in KINDS:
        raise ArgumentError(f"unknown fit kind {kind!r}; use one of {KINDS}")
    usable = [(float(n), float(y)) for n, y in points if y > 0]
    dropped = len(points) - len(usable)
    if len({n for n, _ in usable}) < 2:
        raise FitError(f"need at least 2 points with positive {kind} at distinct sizes, got {len(usable)}")
    if dropped:
        logger.warning("⚠️ Dropped {} zero-{} point(s) from the fit", dropped, kind)

    x = np.array([n for n, _ in usable]) ** beta
    y = np.log([v for _, v in usable])
    fit = linregress(x, y)
    residual = float(np.sqrt(np.mean((y - (fit.intercept + fit.slope * x)) ** 2)))
    alpha = -fit.slope if kind == "probability" else fit.slope
    return ScalingFit(tuple(usable), beta, float(alpha), float(fit.intercept), residual, kind, dropped)
