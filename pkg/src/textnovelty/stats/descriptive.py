"""Descriptive statistics, variance decomposition, and transforms."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ..errors import DataError

PERCENTILES = (25, 50, 75, 95, 99)


def describe(values: Sequence[float]) -> dict[str, Optional[float]]:
    """Mean, spread, order statistics, and adjusted Fisher-Pearson skew.

    Percentiles use linear interpolation between order statistics. Skew is
    the G1 estimator and is absent for n < 3 or a constant vector.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size < 1:
        raise ValueError("describe needs at least one value")
    out: dict[str, Optional[float]] = {
        "mean": float(np.mean(x)),
        "std": float(np.std(x, ddof=1)) if x.size > 1 else 0.0,
        "min": float(np.min(x)),
        "max": float(np.max(x)),
    }
    for p in PERCENTILES:
        out[f"p{p}"] = float(np.percentile(x, p))
    n = x.size
    std_pop = float(np.std(x))
    if n < 3 or std_pop == 0.0:
        out["skew"] = None
    else:
        g1 = float(np.mean((x - x.mean()) ** 3)) / std_pop ** 3
        out["skew"] = float(g1 * math.sqrt(n * (n - 1)) / (n - 2))
    return out


def variance_decomposition(values: Sequence[float], group1: Sequence,
                           group2: Sequence) -> dict[str, Optional[float]]:
    """Share of variance between group1, within group1 over group2, and residual.

    Sums-of-squares decomposition: SS_between(g1)/SS_total,
    [SS_between(g1 x g2) - SS_between(g1)]/SS_total, and the remainder.
    The three shares sum to 1; all are absent when SS_total is 0.
    """
    x = np.asarray(values, dtype=np.float64)
    if len(group1) != x.size or len(group2) != x.size:
        raise ValueError("grouping labels must match values in length")
    grand = x.mean()
    ss_total = float(((x - grand) ** 2).sum())
    if ss_total == 0.0:
        return {"share_between_g1": None, "share_g1_by_g2": None,
                "share_residual": None}

    def ss_between(labels) -> float:
        total = 0.0
        sums: dict = {}
        counts: dict = {}
        for label, value in zip(labels, x):
            sums[label] = sums.get(label, 0.0) + value
            counts[label] = counts.get(label, 0) + 1
        for label, s in sums.items():
            n = counts[label]
            total += n * (s / n - grand) ** 2
        return total

    between_g1 = ss_between(tuple(group1))
    between_cross = ss_between(list(zip(group1, group2)))
    share_g1 = between_g1 / ss_total
    share_cross = (between_cross - between_g1) / ss_total
    return {
        "share_between_g1": share_g1,
        "share_g1_by_g2": share_cross,
        "share_residual": 1.0 - share_g1 - share_cross,
    }


def transform_log1p(column: Sequence[float]) -> np.ndarray:
    """log(1 + x) for count metrics; negative input is a contract violation."""
    x = np.asarray(column, dtype=np.float64)
    if np.any(x < 0):
        raise DataError("log1p transform applies to non-negative counts only")
    return np.log1p(x)
