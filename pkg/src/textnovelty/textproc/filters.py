"""Stop/removal-word lists, their corpus-driven expansion, and term filtering.

Stop words carry no scientific meaning alone or in combination and are
removed everywhere. Removal words carry no meaning alone or with each
other, but do in combination with other words: they are kept as pair
partners and inside phrases, yet never count as standalone new-word
candidates.

List files are plain UTF-8, one term per line, ``#`` comments allowed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ..errors import DataError

_DATA_DIR = Path(__file__).parent / "data"

_NUMBER_ONLY = re.compile(r"^\d+$")
_MALFORMED = re.compile(r"^-|-$|--")


def load_term_file(path) -> set[str]:
    terms: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip().lower()
            if line:
                terms.add(line)
    return terms


def default_stop_seed() -> set[str]:
    return load_term_file(_DATA_DIR / "stop_words.txt")


def default_removal_seed() -> set[str]:
    return load_term_file(_DATA_DIR / "removal_words.txt")


def default_natural_stop_words() -> set[str]:
    return load_term_file(_DATA_DIR / "natural_stop_words.txt")


def _is_malformed(term: str, ascii_only: bool) -> bool:
    if _MALFORMED.search(term):
        return True
    return ascii_only and not term.isascii()


@dataclass
class FilterLists:
    """Disjoint stop and removal word sets plus structural stop rules.

    Structural rules (number-only and malformed tokens are stop words)
    apply to membership queries as well, so rare junk tokens that never
    made it into the materialized sets are still filtered.
    """

    stop_words: set[str] = field(default_factory=set)
    removal_words: set[str] = field(default_factory=set)
    ascii_only: bool = True

    def __post_init__(self):
        overlap = self.stop_words & self.removal_words
        if overlap:
            raise DataError(
                f"stop and removal lists overlap on {sorted(overlap)[:5]}...")

    def is_stop(self, term: str) -> bool:
        return (term in self.stop_words
                or _NUMBER_ONLY.match(term) is not None
                or _is_malformed(term, self.ascii_only))

    def is_removal(self, term: str) -> bool:
        return term in self.removal_words and not self.is_stop(term)


def expand_filter_lists(seed: FilterLists,
                        corpus_vocab: Mapping[str, int],
                        aux_stop_words: Iterable[str] = (),
                        min_papers: int = 1000,
                        ascii_only: bool = True) -> FilterLists:
    """Expand seed lists over the common corpus vocabulary.

    Vocabulary words appearing in at least `min_papers` papers are
    considered. Hyphenated words with at least one stop constituent become
    stop words; hyphenated words made entirely of removal constituents
    become removal words. Number-only, malformed, and auxiliary natural
    stop words join the stop set. Stop wins on any conflict.
    """
    stop = set(seed.stop_words) | {w.lower() for w in aux_stop_words}
    removal = set(seed.removal_words)
    stop_base = set(stop)

    def constituent_is_stop(part: str) -> bool:
        return part in stop_base or _NUMBER_ONLY.match(part) is not None

    for term, n_papers in corpus_vocab.items():
        if n_papers < min_papers:
            continue
        if _NUMBER_ONLY.match(term) or _is_malformed(term, ascii_only):
            stop.add(term)
            continue
        if "-" in term:
            parts = term.split("-")
            if any(constituent_is_stop(p) for p in parts):
                stop.add(term)
            elif all(p in removal for p in parts):
                removal.add(term)
    removal -= stop
    return FilterLists(stop_words=stop, removal_words=removal, ascii_only=ascii_only)


@dataclass
class TermSets:
    """Deduplicated processed terms of one paper.

    `words` holds standalone new-word candidates; `removal_kept` holds
    removal words that survive only as combination partners. Pairs are
    order-normalized (lexicographically smaller element first). Word pairs
    range over `words | removal_kept` minus pairs of two removal words;
    phrase pairs range over `phrases` minus acronym pairs.
    """

    words: set[str] = field(default_factory=set)
    removal_kept: set[str] = field(default_factory=set)
    phrases: set[str] = field(default_factory=set)
    word_pairs: set[tuple[str, str]] = field(default_factory=set)
    phrase_pairs: set[tuple[str, str]] = field(default_factory=set)

    @property
    def word_count(self) -> int:
        return len(self.words) + len(self.removal_kept)

    @property
    def phrase_count(self) -> int:
        return len(self.phrases)


def _phrase_tokens(phrase: str) -> list[str]:
    """Tokens of a serialized phrase; hyphen constituents count as tokens."""
    tokens: list[str] = []
    for word in phrase.split("_"):
        tokens.extend(word.split("-"))
    return tokens


def acronym_of(a: str, b: str) -> bool:
    """True iff one phrase is a single token spelling the first letters
    of the other phrase's tokens in order (case-insensitive)."""

    def check(acro: str, full: str) -> bool:
        if "_" in acro:
            return False
        tokens = _phrase_tokens(full)
        letters = acro.replace("-", "")
        return (len(tokens) > 1 and len(letters) == len(tokens)
                and all(t and t[0] == letters[i] for i, t in enumerate(tokens)))

    a, b = a.lower(), b.lower()
    return check(a, b) or check(b, a)


def _sorted_pairs(items: Iterable[str]) -> Iterable[tuple[str, str]]:
    ordered = sorted(items)
    for i, first in enumerate(ordered):
        for second in ordered[i + 1:]:
            yield (first, second)


def build_term_sets(words: Iterable[str], removal_kept: Iterable[str],
                    phrases: Iterable[str]) -> TermSets:
    """Assemble TermSets from already-filtered members, rebuilding pairs.

    Used both by filter_terms and when deserializing per-paper term sets:
    pairs are always derived, never stored.
    """
    words = set(words)
    removal_kept = set(removal_kept)
    phrases = set(phrases)
    word_pairs = {
        pair for pair in _sorted_pairs(words | removal_kept)
        if not (pair[0] in removal_kept and pair[1] in removal_kept)
    }
    phrase_pairs = {
        pair for pair in _sorted_pairs(phrases)
        if not acronym_of(pair[0], pair[1])
    }
    return TermSets(words=words, removal_kept=removal_kept, phrases=phrases,
                    word_pairs=word_pairs, phrase_pairs=phrase_pairs)


def filter_terms(words: Iterable[str], phrases: Iterable[Iterable[str]],
                 lists: FilterLists) -> TermSets:
    """Apply the stop/removal rules and build the per-paper term sets.

    `phrases` are sequences of lemmas. Leading stop words are stripped
    iteratively; a phrase is then dropped if it still contains a stop word
    or consists entirely of removal words. A word pair is dropped iff both
    members are removal words; a phrase pair is dropped iff one phrase is
    an acronym of the other.
    """
    kept_words: set[str] = set()
    removal_kept: set[str] = set()
    for word in words:
        if lists.is_stop(word):
            continue
        if lists.is_removal(word):
            removal_kept.add(word)
        else:
            kept_words.add(word)

    kept_phrases: set[str] = set()
    for phrase in phrases:
        lemmas = list(phrase)
        while lemmas and lists.is_stop(lemmas[0]):
            lemmas = lemmas[1:]
        if not lemmas:
            continue
        if any(lists.is_stop(lemma) for lemma in lemmas):
            continue
        if all(lists.is_removal(lemma) for lemma in lemmas):
            continue
        kept_phrases.add("_".join(lemmas))

    return build_term_sets(kept_words, removal_kept, kept_phrases)
