"""textnovelty: first-occurrence text novelty metrics for scholarly
corpora, citation-based baselines, and a statistical validation harness.

The core algorithms carry scikit-learn style estimator surfaces
(fit/transform, get_params) so they compose with the wider ecosystem:

    TextPipeline      records -> per-paper term sets
    NoveltyEncoder    (record, terms) corpus -> per-paper metrics rows
    SemanticDistance  records + embeddings -> nearest-prior distances
    CitationMetrics   records -> uzzi / wang / cd columns
    GlmModel          design matrix -> coefficients and predictions

The command line (`textnovelty <stage>`) wires the same pieces into a
reproducible artifact pipeline.
"""

__version__ = "0.1.0"

from .corpus import (BaselineDictionary, CleaningRules, CorpusManifest,
                     PaperRecord, build_baseline, clean_corpus, load_stream,
                     order_key, reconstruct_abstract)
from .errors import CorruptIndexError, DataError, StageError
from .novelty import (KINDS, MetricsRow, NoveltyEncoder, TermStats,
                      compute_ex_ante, compute_ex_post, pass1_count,
                      pass2_first_occurrence)
from .semdist import (CorpusIndex, EmbeddingStore, SemanticDistance,
                      load_embeddings, semantic_distance)
from .citemetrics import (CitationGraph, CitationMetrics, DisruptionCounts,
                          JournalPairStats, build_graph, cd_index,
                          uzzi_score, wang_scores)
from .textproc import (FilterLists, TermSets, TextPipeline,
                       detect_novelty_language, process_paper)

__all__ = [
    "__version__",
    "PaperRecord", "CorpusManifest", "CleaningRules", "BaselineDictionary",
    "load_stream", "clean_corpus", "build_baseline", "order_key",
    "reconstruct_abstract",
    "DataError", "CorruptIndexError", "StageError",
    "KINDS", "MetricsRow", "TermStats", "NoveltyEncoder",
    "pass1_count", "pass2_first_occurrence", "compute_ex_ante",
    "compute_ex_post",
    "EmbeddingStore", "CorpusIndex", "SemanticDistance", "load_embeddings",
    "semantic_distance",
    "CitationGraph", "CitationMetrics", "DisruptionCounts",
    "JournalPairStats", "build_graph", "cd_index", "uzzi_score",
    "wang_scores",
    "FilterLists", "TermSets", "TextPipeline", "process_paper",
    "detect_novelty_language",
]
