"""Part-of-speech tagging and lemmatization.

The default tagger looks each surface up in a bundled lexicon and falls
back to suffix rules; anything it cannot classify is a noun, which is the
right default for scholarly titles. Both the tagger and the lemma lexicon
are plain data files so externally tagged or lemmatized corpora can be
dropped in without code changes.

Tag lexicon:   TSV  surface <TAB> POS
Lemma lexicon: TSV  surface <TAB> POS <TAB> lemma
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Mapping

from .tokens import Token

TAGSET = {"NOUN", "PROPN", "ADJ", "VERB", "ADV", "DET", "ADP", "NUM", "PUNCT", "OTHER"}

_SUFFIX_RULES = (
    (("tion", "ment", "ity", "ness"), "NOUN"),
    (("ize", "ify"), "VERB"),
    (("ous", "ive", "al", "ic"), "ADJ"),
    (("ly",), "ADV"),
)

_DATA_DIR = Path(__file__).parent / "data"


def load_tag_lexicon(path=None) -> dict[str, str]:
    path = path or _DATA_DIR / "tag_lexicon.tsv"
    lexicon: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            surface, pos = line.split("\t")
            if pos not in TAGSET:
                raise ValueError(f"unknown tag {pos!r} for {surface!r} in {path}")
            lexicon[surface] = pos
    return lexicon


def load_lemma_lexicon(path=None) -> dict[tuple[str, str], str]:
    path = path or _DATA_DIR / "lemma_lexicon.tsv"
    lexicon: dict[tuple[str, str], str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            surface, pos, lemma = line.split("\t")
            lexicon[(surface, pos)] = lemma
    return lexicon


class RuleTagger:
    """Lexicon lookup with suffix-rule fallback; total over any string."""

    def __init__(self, lexicon: Mapping[str, str] | None = None):
        self.lexicon = dict(lexicon) if lexicon is not None else load_tag_lexicon()

    def __call__(self, surface: str) -> str:
        tag = self.lexicon.get(surface)
        if tag is not None:
            return tag
        if surface.isdigit():
            return "NUM"
        # hyphenated tokens are classified by their final constituent
        head = surface.rsplit("-", 1)[-1]
        tag = self.lexicon.get(head)
        if tag is not None:
            return tag
        if head.isdigit():
            return "NUM"
        for suffixes, pos in _SUFFIX_RULES:
            for suffix in suffixes:
                if head.endswith(suffix) and len(head) > len(suffix):
                    return pos
        return "NOUN"


def pos_tag(tokens: list[Token], tagger: Callable[[str], str] | None = None) -> list[Token]:
    """Assign exactly one tag per token. `tagger` is pluggable."""
    tagger = tagger or RuleTagger()
    return [t.with_pos(tagger(t.surface)) for t in tokens]


def _strip_plural(word: str) -> str:
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(("sses", "ches", "shes", "xes", "zes", "oes")):
        return word[:-2]
    if word.endswith("es") and len(word) > 3:
        return word[:-1]
    if word.endswith("s") and len(word) > 3 and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    return word


def _strip_verb_inflection(word: str) -> str:
    for suffix in ("ing", "ed"):
        if word.endswith(suffix) and len(word) > len(suffix) + 2:
            stem = word[: -len(suffix)]
            if len(stem) > 2 and stem[-1] == stem[-2] and stem[-1] not in "sl":
                stem = stem[:-1]
            return stem
    return _strip_plural(word)


def _lemma_of(surface: str, pos: str, lexicon: Mapping[tuple[str, str], str]) -> str:
    lemma = lexicon.get((surface, pos))
    if lemma is not None:
        return lemma
    if "-" in surface:
        return "-".join(_lemma_of(part, pos, lexicon) for part in surface.split("-"))
    if pos == "VERB":
        return _strip_verb_inflection(surface)
    if pos in ("NOUN", "PROPN"):
        return _strip_plural(surface)
    return surface


def lemmatize(tokens: list[Token],
              lexicon: Mapping[tuple[str, str], str] | None = None) -> list[Token]:
    """Fill each token's lemma from the lexicon, falling back to rules.

    Hyphenated tokens lemmatize each constituent and re-join with a hyphen.
    """
    if lexicon is None:
        lexicon = load_lemma_lexicon()
    return [t.with_lemma(_lemma_of(t.surface, t.pos, lexicon)) for t in tokens]
