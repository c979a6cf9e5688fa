"""Within-group percentile buckets and top-cited indicators.

Buckets cover the top decile in five 2-percentile ranges (p90-92 ...
p98-100) with p0-90 as the reference category, computed within each
(subfield, year) group. When mass points make several bucket edges
coincide, observations at the shared value go to the middle bucket of
the overlapping range. Metrics where lower means more novel can be
inverted before bucketing.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

BUCKET_EDGES = (90, 92, 94, 96, 98, 100)
N_BUCKETS = len(BUCKET_EDGES) - 1
REFERENCE = -1


def _assign(value: float, edges: np.ndarray) -> int:
    if value <= edges[0]:
        return REFERENCE
    hits = [k for k in range(N_BUCKETS)
            if edges[k] <= value <= edges[k + 1]]
    if not hits:  # numerically above the top edge
        return N_BUCKETS - 1
    return hits[(len(hits) - 1) // 2]


def percentile_buckets(values: Sequence[float], groups: Sequence,
                       invert: bool = False) -> np.ndarray:
    """Bucket index per observation: -1 reference, 0..4 top buckets."""
    x = np.asarray(values, dtype=np.float64)
    if invert:
        x = -x
    out = np.empty(x.size, dtype=np.int64)
    index: dict = {}
    for i, g in enumerate(groups):
        index.setdefault(g, []).append(i)
    for members in index.values():
        idx = np.array(members)
        edges = np.percentile(x[idx], BUCKET_EDGES)
        for i in idx:
            out[i] = _assign(x[i], edges)
    return out


def bucket_indicators(values: Sequence[float], groups: Sequence,
                      prefix: str, invert: bool = False) -> dict[str, np.ndarray]:
    """Five indicator columns named `prefix_p90_92` ... `prefix_p98_100`."""
    assignment = percentile_buckets(values, groups, invert=invert)
    columns = {}
    for k in range(N_BUCKETS):
        name = f"{prefix}_p{BUCKET_EDGES[k]}_{BUCKET_EDGES[k + 1]}"
        columns[name] = (assignment == k).astype(np.float64)
    return columns


def top_cited_indicator(citations: Sequence[float], groups: Sequence,
                        pct: float = 95) -> np.ndarray:
    """1 where citations strictly exceed the within-group percentile."""
    x = np.asarray(citations, dtype=np.float64)
    out = np.zeros(x.size, dtype=np.int64)
    index: dict = {}
    for i, g in enumerate(groups):
        index.setdefault(g, []).append(i)
    for members in index.values():
        idx = np.array(members)
        cut = np.percentile(x[idx], pct)
        out[idx] = (x[idx] > cut).astype(np.int64)
    return out
