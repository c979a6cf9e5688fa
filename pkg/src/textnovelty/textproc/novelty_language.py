"""Detection of language that signals novelty ("discover", "novel", ...).

Runs on the raw, unprocessed title and abstract. Each term entry is a
stem with a match mode and guard rules, loaded from a JSON file:

    {"entries": [{"stem": "new", "match": "word",
                  "guards": [{"type": "capitalized_bigram"},
                             {"type": "next_word", "words": ["journal"]},
                             {"type": "prev_word", "words": ["not"]}]}, ...]}

Guard types:
  capitalized_bigram  suppress a capitalized match followed by another
                      capitalized token (proper nouns like "New York")
  next_word           suppress when the following token is listed
  prev_word           suppress when the preceding token is listed
  require_next        match only when the following token is listed

Guards keep false positives down; a paper counts as using novelty
language iff at least one stem occurrence survives all its guards.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

_DATA_DIR = Path(__file__).parent / "data"
_RAW_TOKEN = re.compile(r"[A-Za-z][A-Za-z\-']*")


@dataclass
class NoveltyTerm:
    stem: str
    match: str = "prefix"  # "prefix" or "word"
    guards: list[dict] = field(default_factory=list)

    def matches(self, token_lower: str) -> bool:
        if self.match == "word":
            return token_lower == self.stem
        return token_lower.startswith(self.stem)


def load_novelty_terms(path=None) -> list[NoveltyTerm]:
    path = path or _DATA_DIR / "novelty_terms.json"
    with open(path, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    return [NoveltyTerm(**entry) for entry in spec["entries"]]


def _passes_guards(term: NoveltyTerm, tokens: list[str], i: int) -> bool:
    token = tokens[i]
    prev_token = tokens[i - 1].lower() if i > 0 else ""
    next_token = tokens[i + 1] if i + 1 < len(tokens) else ""
    for guard in term.guards:
        kind = guard["type"]
        if kind == "capitalized_bigram":
            if token[:1].isupper() and next_token[:1].isupper():
                return False
        elif kind == "next_word":
            if next_token.lower() in guard["words"]:
                return False
        elif kind == "prev_word":
            if prev_token in guard["words"]:
                return False
        elif kind == "require_next":
            if next_token.lower() not in guard["words"]:
                return False
        else:
            raise ValueError(f"unknown guard type {kind!r}")
    return True


class NoveltyLanguageDetector:
    def __init__(self, terms: Optional[list[NoveltyTerm]] = None):
        self.terms = terms if terms is not None else load_novelty_terms()

    def __call__(self, raw_title: str, raw_abstract: Optional[str] = None) -> bool:
        for text in (raw_title, raw_abstract or ""):
            tokens = _RAW_TOKEN.findall(text)
            lowered = [t.lower() for t in tokens]
            for i, low in enumerate(lowered):
                for term in self.terms:
                    if term.matches(low) and _passes_guards(term, tokens, i):
                        return True
        return False


def detect_novelty_language(raw_title: str, raw_abstract: Optional[str] = None,
                            detector: Optional[NoveltyLanguageDetector] = None) -> bool:
    """True iff the unprocessed title or abstract uses novelty language."""
    detector = detector or NoveltyLanguageDetector()
    return detector(raw_title, raw_abstract)
