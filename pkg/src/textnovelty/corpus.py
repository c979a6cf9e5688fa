"""Corpus ingestion, reconstruction, cleaning, and chronological ordering.

Input corpora are JSONL files, one publication per line:

    id          string, unique
    date        ISO-8601 "YYYY-MM-DD"
    title       string
    abstract    plain string (optional; wins over the inverted index)
    abstract_inverted_index   object word -> [positions] (optional)
    venue       string
    subfield    int (fine classification)
    field       int (coarse classification)
    references  array of id strings
    no_authors / venue_no_publisher   optional booleans set upstream

All corpus passes iterate records in non-decreasing ``order_key`` order:
(publication date, paper id). The id tiebreak makes every pass
deterministic for same-day papers.
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional

from .errors import CorruptIndexError, DataError

BASELINE_CUTOFF_YEAR = 1900


@dataclass
class PaperRecord:
    """One publication."""

    paper_id: str
    pub_date: datetime.date
    title: str
    abstract: Optional[str] = None
    venue_id: str = ""
    subfield_id: Optional[int] = None
    field_id: Optional[int] = None
    references: list[str] = field(default_factory=list)
    # optional upstream flags carried through cleaning
    no_authors: bool = False
    venue_no_publisher: bool = False

    @property
    def has_abstract(self) -> bool:
        return bool(self.abstract)


def order_key(record: PaperRecord) -> tuple[datetime.date, str]:
    """Total-order key for corpus passes: (pub_date, paper_id)."""
    return (record.pub_date, record.paper_id)


@dataclass
class CorpusManifest:
    """Tallies of every ingestion/cleaning rule that fired."""

    record_count: int = 0
    date_min: Optional[datetime.date] = None
    date_max: Optional[datetime.date] = None
    exclusion_tallies: dict[str, int] = field(default_factory=dict)

    def tally(self, rule: str, n: int = 1) -> None:
        self.exclusion_tallies[rule] = self.exclusion_tallies.get(rule, 0) + n

    def saw(self, record: PaperRecord) -> None:
        self.record_count += 1
        if self.date_min is None or record.pub_date < self.date_min:
            self.date_min = record.pub_date
        if self.date_max is None or record.pub_date > self.date_max:
            self.date_max = record.pub_date

    def to_dict(self) -> dict:
        return {
            "record_count": self.record_count,
            "date_range": [
                self.date_min.isoformat() if self.date_min else None,
                self.date_max.isoformat() if self.date_max else None,
            ],
            "exclusion_tallies": dict(sorted(self.exclusion_tallies.items())),
        }


def reconstruct_abstract(inverted_index: dict[str, list[int]],
                         manifest: Optional[CorpusManifest] = None) -> str:
    """Rebuild plain text from a word -> positions inverted index.

    Each position must belong to exactly one word; a duplicate position
    means the index is corrupt and raises. Gaps in the position range are
    skipped and tallied as a warning when a manifest is supplied.
    """
    if not inverted_index:
        return ""
    by_pos: dict[int, str] = {}
    for word, positions in inverted_index.items():
        for pos in positions:
            if not isinstance(pos, int) or pos < 0:
                raise CorruptIndexError(f"invalid position {pos!r} for word {word!r}")
            if pos in by_pos:
                raise CorruptIndexError(
                    f"position {pos} claimed by both {by_pos[pos]!r} and {word!r}")
            by_pos[pos] = word
    top = max(by_pos)
    if len(by_pos) != top + 1 and manifest is not None:
        manifest.tally("abstract_position_gap")
    return " ".join(by_pos[p] for p in sorted(by_pos))


def _parse_record(obj: dict) -> PaperRecord:
    try:
        pub_date = datetime.date.fromisoformat(obj["date"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad or missing date: {exc}") from None
    paper_id = obj.get("id")
    if not paper_id or not isinstance(paper_id, str):
        raise DataError("missing id")
    title = obj.get("title")
    if not isinstance(title, str):
        raise DataError("missing title")
    abstract = obj.get("abstract")
    if not abstract and obj.get("abstract_inverted_index"):
        abstract = reconstruct_abstract(obj["abstract_inverted_index"])
    return PaperRecord(
        paper_id=paper_id,
        pub_date=pub_date,
        title=title,
        abstract=abstract or None,
        venue_id=str(obj.get("venue", "")),
        subfield_id=obj.get("subfield"),
        field_id=obj.get("field"),
        references=[str(r) for r in obj.get("references", [])],
        no_authors=bool(obj.get("no_authors", False)),
        venue_no_publisher=bool(obj.get("venue_no_publisher", False)),
    )


def load_stream(path, strict: bool = False,
                manifest: Optional[CorpusManifest] = None) -> Iterator[PaperRecord]:
    """Yield records from a JSONL corpus file without materializing it.

    Malformed lines are fatal in strict mode (with the line number);
    otherwise they are tallied on the manifest and skipped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = _parse_record(json.loads(line))
            except (json.JSONDecodeError, DataError) as exc:
                if strict:
                    raise DataError(f"{path}:{lineno}: malformed record: {exc}") from None
                if manifest is not None:
                    manifest.tally("malformed_line")
                continue
            if manifest is not None:
                manifest.saw(record)
            yield record


@dataclass
class CleaningRules:
    """Which cleaning rules run, and their knobs."""

    drop_duplicate_titles: bool = True
    drop_empty_titles: bool = True
    drop_no_authors: bool = False
    drop_venue_no_publisher: bool = False
    demote_duplicate_abstracts: bool = True
    demote_bibliographic_abstracts: bool = True
    bibliographic_token_share: float = 0.5

    def names(self) -> list[str]:
        return [
            "duplicate_title", "empty_title", "no_authors",
            "venue_no_publisher", "duplicate_abstract", "bibliographic_abstract",
        ]


# Tokens typical of a reference line: a year in parentheses, a page range,
# a volume(issue) group, or front-matter abbreviations.
_BIBLIO_TOKEN = re.compile(
    r"^(?:\(?(?:1[6-9]|20)\d{2}[a-z]?\)?[.,;:]?"
    r"|\d+[-–]\d+[.,;:]?"
    r"|\d+\(\d+\)[.,;:]?"
    r"|(?:pp?|vol|no|eds?|doi)\.?)$",
    re.IGNORECASE,
)


def looks_bibliographic(abstract: str, token_share: float) -> bool:
    """True when more than `token_share` of tokens match citation-line patterns."""
    tokens = abstract.split()
    if not tokens:
        return False
    hits = sum(1 for t in tokens if _BIBLIO_TOKEN.match(t))
    return hits / len(tokens) > token_share


def clean_corpus(records: Iterable[PaperRecord],
                 rules: Optional[CleaningRules] = None,
                 ) -> tuple[list[PaperRecord], CorpusManifest]:
    """Apply the cleaning rules to an order_key-sorted stream.

    Duplicate titles keep the earliest copy (first in the sorted stream);
    demotions keep the title and clear the abstract. Every rule hit is a
    tally, never a failure, so cleaning is idempotent: a second pass over
    its own output tallies nothing.
    """
    rules = rules or CleaningRules()
    manifest = CorpusManifest()
    for name in rules.names():
        manifest.exclusion_tallies.setdefault(name, 0)

    seen_titles: set[str] = set()
    seen_abstracts: set[str] = set()
    kept: list[PaperRecord] = []
    for record in records:
        title_norm = " ".join(record.title.lower().split())
        if rules.drop_empty_titles and not title_norm:
            manifest.tally("empty_title")
            continue
        if rules.drop_duplicate_titles:
            if title_norm in seen_titles:
                manifest.tally("duplicate_title")
                continue
            seen_titles.add(title_norm)
        if rules.drop_no_authors and record.no_authors:
            manifest.tally("no_authors")
            continue
        if rules.drop_venue_no_publisher and record.venue_no_publisher:
            manifest.tally("venue_no_publisher")
            continue
        if record.abstract:
            abstract_norm = " ".join(record.abstract.lower().split())
            if rules.demote_duplicate_abstracts and abstract_norm in seen_abstracts:
                record = replace(record, abstract=None)
                manifest.tally("duplicate_abstract")
            elif rules.demote_bibliographic_abstracts and looks_bibliographic(
                    record.abstract, rules.bibliographic_token_share):
                record = replace(record, abstract=None)
                manifest.tally("bibliographic_abstract")
            else:
                seen_abstracts.add(abstract_norm)
        manifest.saw(record)
        kept.append(record)
    return kept, manifest


@dataclass
class BaselineDictionary:
    """Terms from pre-1901 documents that can never be credited as new.

    Word and phrase membership are independent: a baseline phrase blocks
    phrase novelty without blocking its constituent words. Pair sets are
    optional; when present they block pair novelty the same way.
    """

    words: set[str] = field(default_factory=set)
    phrases: set[str] = field(default_factory=set)
    word_pairs: set[tuple[str, str]] = field(default_factory=set)
    phrase_pairs: set[tuple[str, str]] = field(default_factory=set)

    def blocks(self, kind: str, term) -> bool:
        if kind == "word":
            return term in self.words
        if kind == "phrase":
            return term in self.phrases
        if kind == "word_pair":
            return term in self.word_pairs
        if kind == "phrase_pair":
            return term in self.phrase_pairs
        raise ValueError(f"unknown term kind {kind!r}")

    @staticmethod
    def empty() -> "BaselineDictionary":
        return BaselineDictionary()


def build_baseline(records: Iterable[PaperRecord], textproc,
                   include_pairs: bool = False) -> BaselineDictionary:
    """Build the baseline dictionary from records dated up to 1900.

    `textproc` is any object with a ``process_record(record)`` method
    returning term sets (the text pipeline qualifies). A record dated
    after the cutoff is fatal: it would leak analysis-period vocabulary
    into the baseline.
    """
    baseline = BaselineDictionary()
    for record in records:
        if record.pub_date.year > BASELINE_CUTOFF_YEAR:
            raise DataError(
                f"baseline record {record.paper_id} dated {record.pub_date} "
                f"is after {BASELINE_CUTOFF_YEAR}")
        terms = textproc.process_record(record)
        baseline.words.update(terms.words)
        baseline.words.update(terms.removal_kept)
        baseline.phrases.update(terms.phrases)
        if include_pairs:
            baseline.word_pairs.update(terms.word_pairs)
            baseline.phrase_pairs.update(terms.phrase_pairs)
    return baseline
