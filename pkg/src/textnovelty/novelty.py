"""Two-pass, order-deterministic first-occurrence and reuse engine.

Pass 1 counts, for every term of every requested kind, the number of
distinct papers containing it. Counting is sharded by a stable term hash;
each shard spills sorted runs to disk when the configured memory budget is
exceeded and the runs are k-way merged afterwards, so memory stays bounded
regardless of vocabulary size.

Pass 2 scans the same stream in the same chronological order and credits
each eligible term (corpus occurrence >= 2, not blocked by the baseline
dictionary) to the first paper containing it. Because the order is total,
every credited term has exactly one pioneer and its reuse count is simply
occ - 1, which makes the ex-post formula sum(1 + u_i) equal to the sum of
occ over the paper's new terms.

Both passes detect out-of-order input and fail rather than silently
producing order-dependent results. The external contract for any
parallelism is byte-identical output to a single-threaded chronological
scan.
"""

from __future__ import annotations

import heapq
import os
import tempfile
import zlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .corpus import BaselineDictionary, PaperRecord, order_key
from .errors import DataError
from .textproc import TermSets

KINDS = ("word", "phrase", "word_pair", "phrase_pair")

# metric column stem for each term kind
METRIC_OF_KIND = {
    "word": "new_word",
    "phrase": "new_phrase",
    "word_pair": "new_word_comb",
    "phrase_pair": "new_phrase_comb",
}

_APPROX_BYTES_PER_ENTRY = 160
DEFAULT_SHARD_BUDGET = 4 * 1024 ** 3


def term_key(kind: str, term) -> str:
    """Serialize a term for storage; pairs become 'a|b' with a < b."""
    if kind.endswith("_pair"):
        return f"{term[0]}|{term[1]}"
    return term


def parse_term_key(kind: str, key: str):
    if kind.endswith("_pair"):
        first, second = key.split("|", 1)
        return (first, second)
    return key


def terms_of(terms: TermSets, kind: str) -> Iterable:
    if kind == "word":
        return terms.words
    if kind == "phrase":
        return terms.phrases
    if kind == "word_pair":
        return terms.word_pairs
    if kind == "phrase_pair":
        return terms.phrase_pairs
    raise ValueError(f"unknown term kind {kind!r}")


@dataclass
class TermStats:
    """Global statistics of one credited term."""

    kind: str
    term: object
    occ: int
    pioneer_id: str
    first_date: object
    date_ties: int = 0

    @property
    def reuse(self) -> int:
        return self.occ - 1


@dataclass
class MetricsRow:
    """Per-paper metrics: ex-ante counts, ex-post reuse, and controls.

    Citation and semantic fields stay None until their stages fill them;
    they serialize as empty TSV fields.
    """

    paper_id: str
    new_word: int = 0
    new_phrase: int = 0
    new_word_comb: int = 0
    new_phrase_comb: int = 0
    new_word_bin: int = 0
    new_phrase_bin: int = 0
    new_word_comb_bin: int = 0
    new_phrase_comb_bin: int = 0
    new_word_reuse: int = 0
    new_phrase_reuse: int = 0
    new_word_comb_reuse: int = 0
    new_phrase_comb_reuse: int = 0
    word_count: int = 0
    phrase_count: int = 0
    has_abstract: int = 0
    n_refs: int = 0
    n_ref_journals: int = 0
    semantic_distance: Optional[float] = None
    uzzi: Optional[float] = None
    wang: Optional[float] = None
    cd: Optional[float] = None


METRICS_COLUMNS = [
    "paper_id",
    "new_word", "new_phrase", "new_word_comb", "new_phrase_comb",
    "new_word_bin", "new_phrase_bin", "new_word_comb_bin", "new_phrase_comb_bin",
    "new_word_reuse", "new_phrase_reuse", "new_word_comb_reuse",
    "new_phrase_comb_reuse",
    "word_count", "phrase_count", "has_abstract", "n_refs", "n_ref_journals",
    "semantic_distance", "uzzi", "wang", "cd",
]


class CountShard:
    """One hash shard of the term counter, spillable to disk."""

    def __init__(self, shard_id: int, spill_dir: Optional[str]):
        self.shard_id = shard_id
        self.spill_dir = spill_dir
        self.counts: Counter[str] = Counter()
        self.run_paths: list[str] = []

    def spill(self) -> None:
        if not self.counts:
            return
        fd, path = tempfile.mkstemp(
            prefix=f"shard{self.shard_id}-", suffix=".run", dir=self.spill_dir)
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for key in sorted(self.counts):
                fh.write(f"{key}\t{self.counts[key]}\n")
        self.run_paths.append(path)
        self.counts.clear()

    def _iter_run(self, path: str) -> Iterator[tuple[str, int]]:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                key, count = line.rstrip("\n").rsplit("\t", 1)
                yield key, int(count)

    def merged(self) -> Iterator[tuple[str, int]]:
        """Aggregated (key, count) pairs in key order; consumes the runs."""
        streams = [self._iter_run(p) for p in self.run_paths]
        streams.append(iter(sorted(self.counts.items())))
        pending_key = None
        pending_count = 0
        for key, count in heapq.merge(*streams, key=lambda kv: kv[0]):
            if key == pending_key:
                pending_count += count
            else:
                if pending_key is not None:
                    yield pending_key, pending_count
                pending_key, pending_count = key, count
        if pending_key is not None:
            yield pending_key, pending_count
        for path in self.run_paths:
            os.unlink(path)
        self.run_paths.clear()
        self.counts.clear()


def shard_of(key: str, n_shards: int) -> int:
    """Stable shard assignment (crc32, not the randomized builtin hash)."""
    return zlib.crc32(key.encode("utf-8")) % n_shards


@dataclass
class OccStore:
    """Distinct-paper occurrence counts per kind, after merge."""

    counts: dict[str, dict[str, int]]
    min_occ: int = 1
    spill_events: int = 0
    peak_entries: int = 0  # high-water mark of in-memory counter entries

    def get(self, kind: str, key: str) -> int:
        return self.counts[kind].get(key, 0)


def _sorted_check(prev_key, record: PaperRecord):
    key = order_key(record)
    if prev_key is not None and key < prev_key:
        raise DataError(
            f"stream not sorted by order_key: {key} after {prev_key}")
    return key


def _count_batch(batch: list[tuple[str, frozenset]], kinds: tuple,
                 n_shards: int) -> dict[str, list[Counter]]:
    partial = {kind: [Counter() for _ in range(n_shards)] for kind in kinds}
    for kind, keys in batch:
        shards = partial[kind]
        if n_shards == 1:
            shards[0].update(keys)
        else:
            for key in keys:
                shards[zlib.crc32(key.encode("utf-8")) % n_shards][key] += 1
    return partial


def pass1_count(stream: Iterable[tuple[PaperRecord, TermSets]],
                kinds: Iterable[str] = KINDS,
                shard_budget_bytes: int = DEFAULT_SHARD_BUDGET,
                n_shards: int = 16,
                spill_dir: Optional[str] = None,
                n_workers: int = 1,
                batch_size: int = 2000,
                min_occ: int = 1) -> OccStore:
    """Count distinct papers per term over an order_key-sorted stream.

    Memory is bounded by `shard_budget_bytes`: when the in-memory entry
    estimate exceeds it, every shard spills a sorted run. The final store
    keeps only terms with occ >= `min_occ` (set 2 to drop hapax terms that
    can never be credited, which bounds downstream state too).
    """
    kinds = tuple(kinds)
    unknown = set(kinds) - set(KINDS)
    if unknown:
        raise ValueError(f"unknown kinds {sorted(unknown)}")
    max_entries = max(1, shard_budget_bytes // _APPROX_BYTES_PER_ENTRY)

    shards = {kind: [CountShard(i, spill_dir) for i in range(n_shards)]
              for kind in kinds}
    entries = 0
    peak_entries = 0
    spill_events = 0

    # the budget is enforced at batch granularity: a batch may carry the
    # table at most one batch of new terms past the threshold before the
    # shards spill
    def maybe_spill():
        nonlocal entries, peak_entries, spill_events
        peak_entries = max(peak_entries, entries)
        if entries > max_entries:
            for kind in kinds:
                for shard in shards[kind]:
                    shard.spill()
            entries = 0
            spill_events += 1

    pair_kinds = {k for k in kinds if k.endswith("_pair")}

    def batches() -> Iterator[list[tuple[str, frozenset]]]:
        prev = None
        batch: list[tuple[str, frozenset]] = []
        for record, terms in stream:
            prev = _sorted_check(prev, record)
            for kind in kinds:
                if kind in pair_kinds:
                    keys = frozenset(f"{a}|{b}" for a, b in terms_of(terms, kind))
                else:  # word/phrase term sets are their own keys
                    keys = terms_of(terms, kind)
                if keys:
                    batch.append((kind, keys))
            if len(batch) >= batch_size:
                yield batch
                batch = []
        if batch:
            yield batch

    def absorb(partial: dict[str, list[Counter]]):
        nonlocal entries
        for kind in kinds:
            for i, counter in enumerate(partial[kind]):
                if not counter:
                    continue
                target = shards[kind][i].counts
                before = len(target)
                target.update(counter)
                entries += len(target) - before
        maybe_spill()

    if n_workers <= 1:
        for batch in batches():
            absorb(_count_batch(batch, kinds, n_shards))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            # map() preserves submission order, keeping the merge deterministic
            for partial in pool.map(
                    lambda b: _count_batch(b, kinds, n_shards), batches()):
                absorb(partial)

    counts: dict[str, dict[str, int]] = {}
    for kind in kinds:
        merged: dict[str, int] = {}
        for kind_shard in shards[kind]:
            for key, count in kind_shard.merged():
                if count >= min_occ:
                    merged[key] = count
        counts[kind] = merged
    return OccStore(counts=counts, min_occ=min_occ,
                    spill_events=spill_events, peak_entries=peak_entries)


@dataclass
class NoveltyResult:
    """Everything pass 2 learns about the corpus."""

    kinds: tuple
    occ: OccStore
    pioneers: dict[str, dict[str, tuple[str, object]]]  # kind -> key -> (pid, date)
    new_terms: dict[str, dict[str, list[str]]]          # pid -> kind -> keys
    date_ties: dict[str, Counter] = field(default_factory=dict)

    def term_stats(self) -> list[TermStats]:
        rows = []
        for kind in self.kinds:
            for key, (pid, first_date) in self.pioneers[kind].items():
                rows.append(TermStats(
                    kind=kind, term=parse_term_key(kind, key),
                    occ=self.occ.get(kind, key), pioneer_id=pid,
                    first_date=first_date,
                    date_ties=self.date_ties.get(kind, Counter()).get(key, 0)))
        rows.sort(key=lambda r: (r.kind, term_key(r.kind, r.term)))
        return rows


def pass2_first_occurrence(stream: Iterable[tuple[PaperRecord, TermSets]],
                           occ: OccStore,
                           baseline: Optional[BaselineDictionary] = None,
                           kinds: Iterable[str] = KINDS) -> NoveltyResult:
    """Credit each eligible term to the first paper containing it.

    Eligible means occ >= 2 and not blocked by the baseline dictionary.
    Same-day first uses are resolved by paper id (the order_key tiebreak);
    a date tie is logged per term so co-pioneer analyses stay possible.
    """
    kinds = tuple(kinds)
    baseline = baseline or BaselineDictionary.empty()
    pioneers: dict[str, dict[str, tuple[str, object]]] = {k: {} for k in kinds}
    new_terms: dict[str, dict[str, list[str]]] = {}
    date_ties: dict[str, Counter] = {k: Counter() for k in kinds}

    prev = None
    for record, terms in stream:
        prev = _sorted_check(prev, record)
        pid = record.paper_id
        for kind in kinds:
            claimed = pioneers[kind]
            for term in terms_of(terms, kind):
                key = term_key(kind, term)
                n = occ.get(kind, key)
                if n == 0:
                    if occ.min_occ <= 1:
                        raise DataError(
                            f"pass2 saw {kind} term {key!r} unknown to pass1")
                    continue
                if n < 2 or baseline.blocks(kind, term):
                    continue
                existing = claimed.get(key)
                if existing is None:
                    claimed[key] = (pid, record.pub_date)
                    new_terms.setdefault(pid, {}).setdefault(kind, []).append(key)
                elif existing[1] == record.pub_date:
                    date_ties[kind][key] += 1
    return NoveltyResult(kinds=kinds, occ=occ, pioneers=pioneers,
                         new_terms=new_terms, date_ties=date_ties)


def compute_ex_ante(row: MetricsRow, paper_new: dict[str, list[str]],
                    terms: TermSets) -> MetricsRow:
    """Fill the ex-ante counts, binaries, and text-length controls."""
    for kind, stem in METRIC_OF_KIND.items():
        count = len(paper_new.get(kind, ()))
        setattr(row, stem, count)
        setattr(row, stem + "_bin", int(count > 0))
    row.word_count = terms.word_count
    row.phrase_count = terms.phrase_count
    return row


def compute_ex_post(row: MetricsRow, paper_new: dict[str, list[str]],
                    occ: OccStore) -> MetricsRow:
    """Fill reuse metrics: sum of (1 + u_i) = sum of occ over new terms."""
    for kind, stem in METRIC_OF_KIND.items():
        total = sum(occ.get(kind, key) for key in paper_new.get(kind, ()))
        setattr(row, stem + "_reuse", total)
    return row


class NoveltyEncoder(BaseEstimator):
    """Corpus-level first-occurrence encoder with a fit/transform surface.

    `fit` runs both passes over the corpus; `transform` emits one
    MetricsRow per paper of the fitted corpus. The corpus argument must be
    re-iterable: a sequence of (PaperRecord, TermSets) pairs, or a
    zero-argument callable returning a fresh iterator per pass (use this
    for corpora streamed from disk).
    """

    def __init__(self, kinds: tuple = KINDS,
                 baseline: Optional[BaselineDictionary] = None,
                 shard_budget_bytes: int = DEFAULT_SHARD_BUDGET,
                 n_shards: int = 16,
                 spill_dir: Optional[str] = None,
                 n_workers: int = 1,
                 min_occ_kept: int = 1,
                 venue_of: Optional[dict] = None):
        self.kinds = kinds
        self.baseline = baseline
        self.shard_budget_bytes = shard_budget_bytes
        self.n_shards = n_shards
        self.spill_dir = spill_dir
        self.n_workers = n_workers
        self.min_occ_kept = min_occ_kept
        self.venue_of = venue_of

    def _stream(self, corpus) -> Iterable:
        return corpus() if callable(corpus) else iter(corpus)

    def fit(self, corpus, y=None) -> "NoveltyEncoder":
        self.occ_ = pass1_count(
            self._stream(corpus), kinds=self.kinds,
            shard_budget_bytes=self.shard_budget_bytes,
            n_shards=self.n_shards, spill_dir=self.spill_dir,
            n_workers=self.n_workers, min_occ=self.min_occ_kept)
        self.result_ = pass2_first_occurrence(
            self._stream(corpus), self.occ_, baseline=self.baseline,
            kinds=self.kinds)
        return self

    def transform(self, corpus) -> list[MetricsRow]:
        if not hasattr(self, "result_"):
            raise NotFittedError("NoveltyEncoder.fit must run before transform")
        venue_of = self.venue_of or {}
        rows = []
        for record, terms in self._stream(corpus):
            row = MetricsRow(paper_id=record.paper_id)
            paper_new = self.result_.new_terms.get(record.paper_id, {})
            compute_ex_ante(row, paper_new, terms)
            compute_ex_post(row, paper_new, self.occ_)
            row.has_abstract = int(record.has_abstract)
            row.n_refs = len(record.references)
            row.n_ref_journals = len({
                venue_of[r] for r in record.references if r in venue_of})
            rows.append(row)
        return rows

    def fit_transform(self, corpus, y=None) -> list[MetricsRow]:
        return self.fit(corpus).transform(corpus)

    def term_stats(self) -> list[TermStats]:
        if not hasattr(self, "result_"):
            raise NotFittedError("NoveltyEncoder.fit must run first")
        return self.result_.term_stats()
