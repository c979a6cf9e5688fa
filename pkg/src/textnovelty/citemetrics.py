"""Citation-based novelty baselines: Uzzi atypicality, Wang first-pair
novelty, and the CD disruption index.

All three operate on the citation graph resolved within the corpus.
Journal identity is venue_id string equality. References to papers
outside the corpus are tallied, dropped from graph edges, and still
counted in the n_refs control.

Uzzi: for each publication year, the observed count of every co-cited
journal pair is compared against a Monte Carlo null built by degree-
preserving rewiring of the paper->journal citation multigraph within the
year (a rewiring permutes the journal endpoints, preserving every paper's
reference count and every journal's citation count). A paper's score is
the 10th percentile (lower interpolation) of its pairs' z-scores; lower
means more atypical. The rewiring stream is seeded per (seed, year), so
scores are bitwise reproducible.

Wang: journal pairs in the focal paper's references that no earlier paper
(by order_key) ever co-cited contribute 1 - cosine of the two journals'
co-citation profiles accumulated over years strictly before the focal
year; a pair of journals with empty profiles contributes the maximal
distance 1.

CD: papers citing the focal work and/or its references, published after
it, are classified into (n_f, n_b, n_r) and combined as
(n_f - n_b) / (n_f + n_b + n_r) in [-1, 1].

Undefined scores are returned as None; the stats layer zero-fills them
with a companion missing indicator.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .corpus import PaperRecord, order_key
from .errors import DataError


@dataclass
class CitationGraph:
    """Within-corpus citation adjacency plus per-paper journal lists."""

    cites: dict[str, list[str]] = field(default_factory=dict)
    cited_by: dict[str, list[str]] = field(default_factory=dict)
    ref_journal: dict[str, list[str]] = field(default_factory=dict)
    n_refs: dict[str, int] = field(default_factory=dict)
    date_of: dict[str, date] = field(default_factory=dict)
    venue_of: dict[str, str] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)  # ids sorted by order_key
    unresolved: int = 0
    self_cites: int = 0

    def key_of(self, paper_id: str):
        return (self.date_of[paper_id], paper_id)


def build_graph(records: Iterable[PaperRecord]) -> CitationGraph:
    """Resolve references within the corpus and build both adjacencies."""
    graph = CitationGraph()
    recs = sorted(records, key=order_key)
    for r in recs:
        graph.date_of[r.paper_id] = r.pub_date
        graph.venue_of[r.paper_id] = r.venue_id
        graph.order.append(r.paper_id)
        graph.cited_by.setdefault(r.paper_id, [])
    for r in recs:
        resolved = []
        for ref in r.references:
            if ref == r.paper_id:
                graph.self_cites += 1
                continue
            if ref in graph.date_of:
                resolved.append(ref)
            else:
                graph.unresolved += 1
        graph.cites[r.paper_id] = resolved
        graph.n_refs[r.paper_id] = len(r.references)
        graph.ref_journal[r.paper_id] = [graph.venue_of[ref] for ref in resolved]
        for ref in resolved:
            graph.cited_by[ref].append(r.paper_id)
    return graph


def journal_pairs(journals: Iterable[str]) -> set[tuple[str, str]]:
    """Distinct unordered pairs of distinct journals, order-normalized."""
    distinct = sorted(set(journals))
    return {(a, b) for i, a in enumerate(distinct) for b in distinct[i + 1:]}


@dataclass
class JournalPairStats:
    pair: tuple[str, str]
    observed: int
    null_mean: float
    null_std: float

    @property
    def z(self) -> Optional[float]:
        if self.null_std == 0.0:
            return None
        return (self.observed - self.null_mean) / self.null_std


@dataclass
class YearNull:
    """Observed and rewired pair statistics for one publication year."""

    year: int
    stats: dict[tuple[str, str], JournalPairStats]


def _year_reference_lists(graph: CitationGraph, year: int) -> list[list[str]]:
    """Journal multisets of the year's papers, in order_key order."""
    return [
        graph.ref_journal[pid]
        for pid in graph.order
        if graph.date_of[pid].year == year and graph.ref_journal[pid]
    ]


def _pair_counts(reference_lists: Iterable[list[str]]) -> Counter:
    counts: Counter = Counter()
    for journals in reference_lists:
        counts.update(journal_pairs(journals))
    return counts


def rewired_year_null(graph: CitationGraph, year: int,
                      n_rewirings: int, seed: int) -> YearNull:
    """Monte Carlo null for one year's journal-pair counts.

    Each rewiring permutes the flattened journal endpoints of the year's
    (paper, journal) citation edges with a generator seeded by
    (seed, year), then recounts pairs. Degrees are preserved by
    construction: reference-list lengths and the endpoint multiset never
    change.
    """
    if n_rewirings < 2:
        raise DataError("n_rewirings must be >= 2 (null std undefined)")
    ref_lists = _year_reference_lists(graph, year)
    observed = _pair_counts(ref_lists)
    flat = [j for journals in ref_lists for j in journals]
    sizes = [len(journals) for journals in ref_lists]
    rng = np.random.default_rng((seed, year))
    sums: Counter = Counter()
    sumsq: Counter = Counter()
    for _ in range(n_rewirings):
        perm = rng.permutation(len(flat))
        shuffled = [flat[i] for i in perm]
        rewired = []
        pos = 0
        for size in sizes:
            rewired.append(shuffled[pos:pos + size])
            pos += size
        for pair, count in _pair_counts(rewired).items():
            sums[pair] += count
            sumsq[pair] += count * count
    stats = {}
    for pair, obs in observed.items():
        total = sums.get(pair, 0)
        total_sq = sumsq.get(pair, 0)
        mean = total / n_rewirings
        # sample variance over the n_rewirings null draws (absent draws are 0)
        var = (total_sq - n_rewirings * mean * mean) / (n_rewirings - 1)
        std = math.sqrt(max(var, 0.0))
        stats[pair] = JournalPairStats(pair=pair, observed=obs,
                                       null_mean=mean, null_std=std)
    return YearNull(year=year, stats=stats)


def uzzi_score(paper_id: str, graph: CitationGraph,
               year_null: YearNull) -> Optional[float]:
    """10th percentile (lower interpolation) of the paper's pair z-scores."""
    pairs = journal_pairs(graph.ref_journal.get(paper_id, ()))
    if not pairs:
        return None
    zs = []
    for pair in sorted(pairs):
        stat = year_null.stats.get(pair)
        z = stat.z if stat is not None else None
        if z is not None:
            zs.append(z)
    if not zs:
        return None
    return float(np.percentile(zs, 10, method="lower"))


def _profile_cosine(profiles: dict[str, Counter], a: str, b: str) -> Optional[float]:
    ca = profiles.get(a)
    cb = profiles.get(b)
    if not ca or not cb:
        return None
    if len(cb) < len(ca):
        ca, cb = cb, ca
    dot = sum(count * cb.get(j, 0) for j, count in ca.items())
    norm_a = math.sqrt(sum(c * c for c in ca.values()))
    norm_b = math.sqrt(sum(c * c for c in cb.values()))
    return dot / (norm_a * norm_b)


def wang_scores(graph: CitationGraph) -> dict[str, float]:
    """Wang novelty for every paper via one chronological sweep.

    A pair is new iff no paper earlier in order_key co-cited it; profile
    vectors accumulate co-citation counts from years strictly before the
    focal year. The score of a paper with no new pairs is 0.
    """
    seen_pairs: set[tuple[str, str]] = set()
    profiles: dict[str, Counter] = {}
    pending_year: Optional[int] = None
    pending: list[set[tuple[str, str]]] = []
    scores: dict[str, float] = {}

    def flush_pending():
        for pairs in pending:
            for a, b in pairs:
                profiles.setdefault(a, Counter())[b] += 1
                profiles.setdefault(b, Counter())[a] += 1
        pending.clear()

    for pid in graph.order:
        year = graph.date_of[pid].year
        if pending_year is not None and year != pending_year:
            flush_pending()
        pending_year = year
        pairs = journal_pairs(graph.ref_journal.get(pid, ()))
        score = 0.0
        for pair in sorted(pairs - seen_pairs):
            sim = _profile_cosine(profiles, *pair)
            score += 1.0 if sim is None else 1.0 - sim
        scores[pid] = score
        seen_pairs |= pairs
        pending.append(pairs)
    return scores


def _add_years(day: date, years: int) -> date:
    try:
        return day.replace(year=day.year + years)
    except ValueError:  # Feb 29
        return day.replace(year=day.year + years, day=28)


@dataclass
class DisruptionCounts:
    n_f: int = 0  # cite focal, none of its references
    n_b: int = 0  # cite focal and at least one reference
    n_r: int = 0  # cite a reference but not focal

    @property
    def cd(self) -> Optional[float]:
        denom = self.n_f + self.n_b + self.n_r
        if denom == 0:
            return None
        return (self.n_f - self.n_b) / denom


def disruption_counts(paper_id: str, graph: CitationGraph,
                      window_years: Optional[int] = None) -> DisruptionCounts:
    refs = set(graph.cites.get(paper_id, ()))
    citers = set(graph.cited_by.get(paper_id, ()))
    for ref in refs:
        citers.update(graph.cited_by.get(ref, ()))
    citers.discard(paper_id)
    focal_key = graph.key_of(paper_id)
    horizon = (_add_years(graph.date_of[paper_id], window_years)
               if window_years is not None else None)
    counts = DisruptionCounts()
    for citer in citers:
        if graph.key_of(citer) <= focal_key:
            continue
        if horizon is not None and graph.date_of[citer] > horizon:
            continue
        cited = set(graph.cites.get(citer, ()))
        hits_focal = paper_id in cited
        hits_ref = bool(refs & cited)
        if hits_focal and hits_ref:
            counts.n_b += 1
        elif hits_focal:
            counts.n_f += 1
        elif hits_ref:
            counts.n_r += 1
    return counts


def cd_index(paper_id: str, graph: CitationGraph,
             window_years: Optional[int] = None) -> Optional[float]:
    """Disruption index in [-1, 1], or None when no relevant citers exist."""
    return disruption_counts(paper_id, graph, window_years).cd


class CitationMetrics(BaseEstimator):
    """Per-paper uzzi/wang/cd columns behind a fit/transform surface.

    The graph and the Wang sweep are built in fit; Uzzi year nulls are
    computed once per (year, seed) on demand under a lock and cached.
    """

    def __init__(self, n_rewirings: int = 10, seed: int = 0,
                 cd_window_years: Optional[int] = None):
        self.n_rewirings = n_rewirings
        self.seed = seed
        self.cd_window_years = cd_window_years

    def fit(self, records: Iterable[PaperRecord], y=None) -> "CitationMetrics":
        self.graph_ = build_graph(records)
        self.wang_ = wang_scores(self.graph_)
        self._year_nulls: dict[int, YearNull] = {}
        self._null_lock = threading.Lock()
        return self

    def _check_fitted(self):
        if not hasattr(self, "graph_"):
            raise NotFittedError("CitationMetrics.fit must run before scoring")

    def year_null(self, year: int) -> YearNull:
        self._check_fitted()
        with self._null_lock:
            if year not in self._year_nulls:
                self._year_nulls[year] = rewired_year_null(
                    self.graph_, year, self.n_rewirings, self.seed)
            return self._year_nulls[year]

    def uzzi(self, paper_id: str) -> Optional[float]:
        self._check_fitted()
        null = self.year_null(self.graph_.date_of[paper_id].year)
        return uzzi_score(paper_id, self.graph_, null)

    def wang(self, paper_id: str) -> float:
        self._check_fitted()
        return self.wang_[paper_id]

    def cd(self, paper_id: str) -> Optional[float]:
        self._check_fitted()
        return cd_index(paper_id, self.graph_, self.cd_window_years)

    def transform(self, records: Iterable[PaperRecord]) -> list[dict]:
        self._check_fitted()
        return [
            {"paper_id": r.paper_id, "uzzi": self.uzzi(r.paper_id),
             "wang": self.wang(r.paper_id), "cd": self.cd(r.paper_id)}
            for r in records
        ]
