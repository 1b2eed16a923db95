"""Correlation of metric outputs with human judgments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import kendalltau as _scipy_kendalltau

from .errors import NonFiniteValueError, ZeroVarianceError


@dataclass(frozen=True)
class PairedSample:
    """Metric values paired with human scores for the same segments."""

    metric_values: np.ndarray
    human_scores: np.ndarray

    def __post_init__(self):
        mv = np.asarray(self.metric_values, dtype=np.float64).reshape(-1)
        hs = np.asarray(self.human_scores, dtype=np.float64).reshape(-1)
        if mv.size != hs.size:
            raise ValueError(f"paired sample lengths differ: {mv.size} vs {hs.size}")
        if mv.size < 2:
            raise ValueError("paired sample needs n >= 2")
        if not (np.isfinite(mv).all() and np.isfinite(hs).all()):
            raise NonFiniteValueError("paired sample contains NaN or Inf")
        object.__setattr__(self, "metric_values", mv)
        object.__setattr__(self, "human_scores", hs)

    @property
    def n(self) -> int:
        return self.metric_values.size


def pearson_r(sample: PairedSample) -> float:
    """Product-moment correlation, two-pass mean-centered form.

    The one-pass sum-of-squares formula cancels catastrophically for
    near-constant inputs, so sums are taken over centered values.
    """
    x = sample.metric_values
    y = sample.human_scores
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError("pearson_r undefined: a side has zero variance")
    r = float(xc @ yc) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def kendall_tau(sample: PairedSample) -> float:
    """Kendall's tau-b, tie-corrected.

    Human DA/MQM scores contain ties, so the tie-corrected variant is used
    throughout. Undefined when either side is constant.
    """
    x = sample.metric_values
    y = sample.human_scores
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ZeroVarianceError("kendall_tau undefined: a side is all ties")
    tau = _scipy_kendalltau(x, y, variant="b").statistic
    if not np.isfinite(tau):
        raise ZeroVarianceError("kendall_tau undefined for this sample")
    return float(tau)
