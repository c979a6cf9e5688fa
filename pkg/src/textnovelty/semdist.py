"""Semantic distance: one minus the maximum cosine similarity between a
paper's embedding and all prior papers from the past five years.

"Prior" is strict order_key precedence (same-day papers with a smaller id
count); "past five years" is a day window: candidates dated up to 1826
days before the focal date are in, 1827 days are out. A calendar-year
window (years y-5..y-1 plus earlier same-year papers) is available behind
a flag.

The search is exact: the per-candidate arithmetic is a single dot product
over the raw vectors divided by their norms, so an independent brute-force
scan reproduces the result bit for bit. Distances are in [0, 2]; papers
without an embedding, or with an empty candidate set, get None rather
than a fabricated zero.
"""

from __future__ import annotations

import struct
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .corpus import PaperRecord, order_key
from .errors import DataError

WINDOW_DAYS = 1826


@dataclass
class EmbeddingStore:
    """Immutable id -> vector map with a fixed dimension."""

    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    norms: dict[str, float] = field(default_factory=dict)
    skipped: int = 0

    @property
    def coverage(self) -> set[str]:
        return set(self.vectors)

    def add(self, paper_id: str, vector: np.ndarray) -> bool:
        if vector.shape != (self.dimension,):
            raise DataError(
                f"vector for {paper_id} has dimension {vector.shape[0]}, "
                f"store declares {self.dimension}")
        norm = float(np.linalg.norm(vector))
        if not np.all(np.isfinite(vector)) or norm == 0.0:
            self.skipped += 1
            return False
        self.vectors[paper_id] = vector
        self.norms[paper_id] = norm
        return True


def load_embeddings(path, corpus_ids: Optional[set[str]] = None) -> EmbeddingStore:
    """Load a vector file; format is selected by extension.

    .tsv      header line "#dim<TAB>D", then "id<TAB>v1,...,vD" per line
    .f32      raw little-endian float32 records; the sidecar "<path>.idx"
              holds "#dim<TAB>D" then one id per line, in record order

    Ids absent from `corpus_ids` (when given) are ignored with a tally;
    zero or non-finite vectors are skipped with a tally.
    """
    path = Path(path)
    if path.suffix == ".tsv":
        return _load_tsv(path, corpus_ids)
    if path.suffix in (".f32", ".bin"):
        return _load_raw(path, corpus_ids)
    raise DataError(f"unknown embedding file extension: {path.suffix}")


def _read_dim_header(line: str, where) -> int:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 2 or parts[0] != "#dim":
        raise DataError(f"{where}: missing '#dim<TAB>D' header")
    return int(parts[1])


def _load_tsv(path: Path, corpus_ids) -> EmbeddingStore:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise DataError(f"{path}: empty embedding file (no header)")
        store = EmbeddingStore(dimension=_read_dim_header(header, path))
        for line in fh:
            if not line.strip():
                continue
            paper_id, values = line.rstrip("\n").split("\t", 1)
            if corpus_ids is not None and paper_id not in corpus_ids:
                store.skipped += 1
                continue
            vector = np.array([float(v) for v in values.split(",")],
                              dtype=np.float64)
            store.add(paper_id, vector)
    return store


def _load_raw(path: Path, corpus_ids) -> EmbeddingStore:
    sidecar = Path(str(path) + ".idx")
    if not sidecar.exists():
        raise DataError(f"missing index sidecar {sidecar}")
    with open(sidecar, "r", encoding="utf-8") as fh:
        dim = _read_dim_header(fh.readline(), sidecar)
        ids = [line.strip() for line in fh if line.strip()]
    store = EmbeddingStore(dimension=dim)
    record_size = 4 * dim
    with open(path, "rb") as fh:
        for paper_id in ids:
            blob = fh.read(record_size)
            if len(blob) != record_size:
                raise DataError(f"{path}: truncated at record for {paper_id}")
            if corpus_ids is not None and paper_id not in corpus_ids:
                store.skipped += 1
                continue
            vector = np.array(struct.unpack(f"<{dim}f", blob), dtype=np.float64)
            store.add(paper_id, vector)
    return store


def cosine(store: EmbeddingStore, a: str, b: str) -> float:
    return float(np.dot(store.vectors[a], store.vectors[b])
                 / (store.norms[a] * store.norms[b]))


@dataclass
class CorpusIndex:
    """Date-sorted paper ids supporting window slicing."""

    keys: list  # sorted (pub_date, paper_id)

    @staticmethod
    def build(records: Iterable[PaperRecord]) -> "CorpusIndex":
        return CorpusIndex(keys=sorted(order_key(r) for r in records))

    def window(self, start_date, end_date) -> Iterable[tuple]:
        lo = bisect_left(self.keys, (start_date, ""))
        hi = bisect_right(self.keys, (end_date, "\U0010ffff"))
        return self.keys[lo:hi]


def semantic_distance(record: PaperRecord, store: EmbeddingStore,
                      index: CorpusIndex, window_days: int = WINDOW_DAYS,
                      calendar_years: bool = False) -> Optional[float]:
    """Distance of one paper to its nearest prior neighbor, or None."""
    focal_id = record.paper_id
    if focal_id not in store.vectors:
        return None
    focal_key = order_key(record)
    if calendar_years:
        start = record.pub_date.replace(month=1, day=1, year=record.pub_date.year - 5)
    else:
        start = record.pub_date - timedelta(days=window_days)
    best = None
    for key in index.window(start, record.pub_date):
        if key >= focal_key:
            break
        candidate = key[1]
        if candidate not in store.vectors:
            continue
        sim = cosine(store, focal_id, candidate)
        if best is None or sim > best:
            best = sim
    if best is None:
        return None
    return 1.0 - best


class SemanticDistance(BaseEstimator):
    """Transformer computing the distance column for a corpus.

    fit() indexes the corpus and keeps the store; transform() maps records
    to distances. Queries are pure and parallel-safe.
    """

    def __init__(self, window_days: int = WINDOW_DAYS, calendar_years: bool = False):
        self.window_days = window_days
        self.calendar_years = calendar_years

    def fit(self, records: Iterable[PaperRecord], store: EmbeddingStore = None,
            y=None) -> "SemanticDistance":
        if store is None:
            raise ValueError("SemanticDistance.fit needs an EmbeddingStore")
        self.store_ = store
        self.index_ = CorpusIndex.build(records)
        return self

    def transform(self, records: Iterable[PaperRecord]) -> list[Optional[float]]:
        if not hasattr(self, "store_"):
            raise NotFittedError("SemanticDistance.fit must run before transform")
        return [
            semantic_distance(r, self.store_, self.index_,
                              self.window_days, self.calendar_years)
            for r in records
        ]
