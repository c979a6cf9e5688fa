"""Noun-phrase chunking.

A phrase is a maximal span matching (ADJ|NOUN|PROPN)* (NOUN|PROPN):
optional adjectival or nominal modifiers ending in a noun head. Single
unmodified nouns are phrases of length one. Spans never cross
punctuation, so sentence boundaries are respected and comma-separated
coordinated nouns (which a dependency parser would split) stay apart.
"""

from __future__ import annotations

from .tokens import Token

_MODIFIER_TAGS = {"ADJ", "NOUN", "PROPN"}
_HEAD_TAGS = {"NOUN", "PROPN"}


def extract_noun_phrases(tokens: list[Token]) -> list[tuple[int, int]]:
    """Return phrase spans as half-open (start, end) token-index pairs."""
    spans: list[tuple[int, int]] = []
    run_start = None
    prev_index = None

    def close(run_start: int | None, end: int) -> None:
        if run_start is None:
            return
        # trim trailing non-head tokens so the span ends at a noun
        while end > run_start and tokens[end - 1].pos not in _HEAD_TAGS:
            end -= 1
        if end > run_start:
            spans.append((run_start, end))

    for i, token in enumerate(tokens):
        breaks = (
            token.pos not in _MODIFIER_TAGS
            or token.punct_before
            or (prev_index is not None and tokens[prev_index].sentence != token.sentence)
        )
        if breaks:
            close(run_start, i)
            run_start = i if token.pos in _MODIFIER_TAGS else None
        elif run_start is None:
            run_start = i
        prev_index = i
    close(run_start, len(tokens))
    return spans
