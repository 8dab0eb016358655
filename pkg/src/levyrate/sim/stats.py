"""Batch-means confidence intervals for ratio estimators over i.i.d. cycles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    half_width: float
    jackknife: float = float("nan")

    def z(self, target: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.value == target else float("inf")
        return (self.value - target) / self.std_error

    def covers(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.value - target) <= n_se * self.std_error


def batch_ratio(num: np.ndarray, den: np.ndarray, batches: int, level: float = 0.95) -> Estimate:
    """sum(num)/sum(den) with a CI from ``batches`` contiguous batch ratios.

    The jackknife field is the leave-one-batch-out bias-corrected ratio.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = num.size
    edges = np.linspace(0, n, batches + 1).astype(int)
    bn = np.add.reduceat(num, edges[:-1])
    bd = np.add.reduceat(den, edges[:-1])
    tn, td = bn.sum(), bd.sum()
    est = tn / td
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = bn / bd
        loo = (tn - bn) / (td - bd)
    ratios = ratios[np.isfinite(ratios)]
    se = float(np.std(ratios, ddof=1) / np.sqrt(ratios.size)) if ratios.size > 1 else float("nan")
    hw = float(stats.t.ppf(0.5 + level / 2, max(ratios.size - 1, 1)) * se)
    jack = float(batches * est - (batches - 1) * np.mean(loo)) if np.all(np.isfinite(loo)) else float("nan")
    return Estimate(float(est), se, hw, jack)


def batch_mean(x: np.ndarray, batches: int, level: float = 0.95) -> Estimate:
    return batch_ratio(x, np.ones_like(np.asarray(x, dtype=float)), batches, level)
