"""Text processing: tokenization, tagging, chunking, lemmatization,
filter lists, per-paper term sets, and the novelty-language detector."""

from .chunking import extract_noun_phrases
from .filters import (FilterLists, TermSets, acronym_of, build_term_sets,
                      expand_filter_lists, filter_terms, load_term_file)
from .novelty_language import (NoveltyLanguageDetector, detect_novelty_language,
                               load_novelty_terms)
from .pipeline import TextPipeline, process_paper, record_text
from .tagging import (RuleTagger, lemmatize, load_lemma_lexicon,
                      load_tag_lexicon, pos_tag)
from .tokens import Token, tokenize

__all__ = [
    "Token", "tokenize", "pos_tag", "lemmatize", "RuleTagger",
    "load_tag_lexicon", "load_lemma_lexicon", "extract_noun_phrases",
    "FilterLists", "TermSets", "acronym_of", "build_term_sets",
    "expand_filter_lists", "filter_terms", "load_term_file",
    "TextPipeline", "process_paper",
    "record_text", "NoveltyLanguageDetector", "detect_novelty_language",
    "load_novelty_terms",
]
