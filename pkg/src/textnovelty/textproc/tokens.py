"""Tokenization.

Text is lowercased and split on whitespace and punctuation, except that
internal hyphens are kept, so "x-ray" is one token. Leading/trailing
hyphens never survive (the token pattern only allows hyphens between word
characters) and punctuation-only tokens are dropped.

Each token records whether punctuation separated it from the previous
token (`punct_before`) and a running sentence index; the chunker uses
both so noun-phrase spans never cross punctuation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

# word characters minus underscore, optionally chained with single hyphens
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*", re.UNICODE)
_SENTENCE_PUNCT = set(".;:?!")


@dataclass(slots=True)
class Token:
    surface: str
    index: int
    lemma: str = ""
    pos: str = ""
    sentence: int = 0
    punct_before: bool = False

    def with_pos(self, pos: str) -> "Token":
        return replace(self, pos=pos)

    def with_lemma(self, lemma: str) -> "Token":
        return replace(self, lemma=lemma)


def tokenize(text: str) -> list[Token]:
    """Lowercase and split `text` into tokens; empty text gives []."""
    text = text.lower()
    tokens: list[Token] = []
    sentence = 0
    prev_end = 0
    for match in _TOKEN_RE.finditer(text):
        gap = text[prev_end:match.start()]
        punct_in_gap = any(not (c.isspace() or c == "-") for c in gap)
        if tokens and any(c in _SENTENCE_PUNCT for c in gap):
            sentence += 1
        tokens.append(Token(
            surface=match.group(),
            index=len(tokens),
            sentence=sentence,
            punct_before=punct_in_gap and bool(tokens),
        ))
        prev_end = match.end()
    return tokens
