"""Mann-Whitney U test with midranks, tie-corrected variance, and a
continuity-corrected normal approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import groupby
from typing import Optional, Sequence


@dataclass
class MannWhitneyResult:
    U: float           # U statistic of the first sample
    z: Optional[float]
    p_two_sided: Optional[float]


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    for _, group in groupby(order, key=values.__getitem__):
        tied = list(group)
        mid = i + (len(tied) + 1) / 2.0
        for j in tied:
            ranks[j] = mid
        i += len(tied)
    return ranks


def mann_whitney(x: Sequence[float], y: Sequence[float]) -> MannWhitneyResult:
    """Two-sided Mann-Whitney test of samples x and y.

    U is computed for x via midrank assignment, so U_x + U_y = nm holds
    identically. The normal approximation uses the tie-corrected standard
    deviation and a 0.5 continuity correction; with every value identical
    the deviation is 0 and z and p are absent.
    """
    n, m = len(x), len(y)
    if n < 1 or m < 1:
        raise ValueError("both samples must be non-empty")
    combined = list(x) + list(y)
    ranks = _midranks(combined)
    rank_sum_x = sum(ranks[:n])
    u_x = rank_sum_x - n * (n + 1) / 2.0

    total = n + m
    tie_term = 0.0
    for _, group in groupby(sorted(combined)):
        t = len(list(group))
        tie_term += t ** 3 - t
    var = (n * m / 12.0) * ((total + 1) - tie_term / (total * (total - 1))) \
        if total > 1 else 0.0
    if var <= 0.0:
        return MannWhitneyResult(U=u_x, z=None, p_two_sided=None)

    d = u_x - n * m / 2.0
    if d > 0.5:
        d -= 0.5
    elif d < -0.5:
        d += 0.5
    else:
        d = 0.0
    z = d / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return MannWhitneyResult(U=u_x, z=z, p_two_sided=p)
