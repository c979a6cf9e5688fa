"""The full text pipeline: records in, per-paper term sets out.

``TextPipeline`` follows the scikit-learn estimator protocol. ``fit``
scans the corpus once to count, for every lemma, the number of papers it
appears in, and expands the seed stop/removal lists over the common
vocabulary. ``transform`` runs tokenize -> tag -> chunk -> lemmatize ->
filter for each record. All fitted state is immutable, so transform is
pure and safe to call from many threads.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Optional

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..corpus import PaperRecord
from .chunking import extract_noun_phrases
from .filters import (FilterLists, TermSets, default_natural_stop_words,
                      default_removal_seed, default_stop_seed,
                      expand_filter_lists, filter_terms, load_term_file)
from .tagging import (RuleTagger, lemmatize, load_lemma_lexicon,
                      load_tag_lexicon, pos_tag)
from .tokens import Token, tokenize

MODES = ("full", "title_only")


def record_text(record: PaperRecord, mode: str) -> str:
    """Concatenated title and abstract, or just the title in title_only mode."""
    if mode == "title_only" or not record.abstract:
        return record.title
    return f"{record.title}. {record.abstract}"


def process_tokens(text: str, tagger, lemma_lexicon) -> list[Token]:
    return lemmatize(pos_tag(tokenize(text), tagger), lemma_lexicon)


def process_paper(record: PaperRecord, lists: FilterLists, mode: str = "full",
                  tagger=None, lemma_lexicon=None) -> TermSets:
    """Convert one cleaned record into its deduplicated TermSets."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    tagger = tagger or RuleTagger()
    if lemma_lexicon is None:
        lemma_lexicon = load_lemma_lexicon()
    tokens = process_tokens(record_text(record, mode), tagger, lemma_lexicon)
    words = {t.lemma for t in tokens}
    phrases = [
        tuple(t.lemma for t in tokens[start:end])
        for start, end in extract_noun_phrases(tokens)
    ]
    return filter_terms(words, phrases, lists)


class TextPipeline(BaseEstimator):
    """Record-to-TermSets transformer with corpus-fitted filter lists.

    Parameters mirror the bundled data files: pass paths (or sets) to
    override the seed stop/removal lists and lexicons. With
    ``expand_lists=False`` the fitted lists are just the seeds plus the
    natural stop words, which keeps small fixtures predictable.
    """

    def __init__(self, mode: str = "full", stop_words=None, removal_words=None,
                 natural_stop_words=None, tag_lexicon=None, lemma_lexicon=None,
                 expand_lists: bool = True, min_papers: int = 1000,
                 min_papers_per_million: Optional[float] = None,
                 ascii_only: bool = True, tagger=None):
        self.mode = mode
        self.stop_words = stop_words
        self.removal_words = removal_words
        self.natural_stop_words = natural_stop_words
        self.tag_lexicon = tag_lexicon
        self.lemma_lexicon = lemma_lexicon
        self.expand_lists = expand_lists
        self.min_papers = min_papers
        self.min_papers_per_million = min_papers_per_million
        self.ascii_only = ascii_only
        self.tagger = tagger

    def _load_terms(self, value, default) -> set[str]:
        if value is None:
            return default()
        if isinstance(value, (set, frozenset, list, tuple)):
            return {str(t).lower() for t in value}
        return load_term_file(value)

    def _resolve(self):
        if self.tagger is not None:
            tagger = self.tagger
        elif isinstance(self.tag_lexicon, dict):
            tagger = RuleTagger(self.tag_lexicon)
        else:
            tagger = RuleTagger(load_tag_lexicon(self.tag_lexicon))
        if isinstance(self.lemma_lexicon, dict):
            lemma_lexicon = self.lemma_lexicon
        else:
            lemma_lexicon = load_lemma_lexicon(self.lemma_lexicon)
        return tagger, lemma_lexicon

    def fit(self, records: Iterable[PaperRecord], y=None) -> "TextPipeline":
        seed = FilterLists(
            stop_words=self._load_terms(self.stop_words, default_stop_seed),
            removal_words=self._load_terms(self.removal_words, default_removal_seed),
            ascii_only=self.ascii_only,
        )
        natural = self._load_terms(self.natural_stop_words, default_natural_stop_words)
        self.tagger_, self.lemma_lexicon_ = self._resolve()

        if not self.expand_lists:
            stop = seed.stop_words | natural
            self.filter_lists_ = FilterLists(
                stop_words=stop,
                removal_words=seed.removal_words - stop,
                ascii_only=self.ascii_only,
            )
            self.n_papers_ = 0
            return self

        vocab: Counter[str] = Counter()
        n_papers = 0
        for record in records:
            n_papers += 1
            tokens = process_tokens(record_text(record, self.mode),
                                    self.tagger_, self.lemma_lexicon_)
            vocab.update({t.lemma for t in tokens})
        threshold = self.min_papers
        if self.min_papers_per_million is not None:
            threshold = max(1, round(self.min_papers_per_million * n_papers / 1e6))
        self.filter_lists_ = expand_filter_lists(
            seed, vocab, aux_stop_words=natural,
            min_papers=threshold, ascii_only=self.ascii_only)
        self.n_papers_ = n_papers
        return self

    def load_fitted(self, lists: FilterLists) -> "TextPipeline":
        """Adopt externally fitted filter lists (e.g. read from an artifact)."""
        self.tagger_, self.lemma_lexicon_ = self._resolve()
        self.filter_lists_ = lists
        self.n_papers_ = 0
        return self

    def _check_fitted(self):
        if not hasattr(self, "filter_lists_"):
            raise NotFittedError("TextPipeline.fit must run before transform")

    def process_record(self, record: PaperRecord) -> TermSets:
        self._check_fitted()
        return process_paper(record, self.filter_lists_, self.mode,
                             self.tagger_, self.lemma_lexicon_)

    def transform(self, records: Iterable[PaperRecord]) -> list[TermSets]:
        self._check_fitted()
        return [self.process_record(record) for record in records]

    def fit_transform(self, records, y=None) -> list[TermSets]:
        records = list(records)
        return self.fit(records).transform(records)
