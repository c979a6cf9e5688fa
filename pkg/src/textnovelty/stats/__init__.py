"""Statistical validation harness: descriptives, variance decomposition,
matching, rank tests, GLMs, classification metrics, marginal effects,
percentile buckets, and the declarative analysis runner."""

from .analysis import (ReuseCitationResult, reuse_citation_analysis,
                       run_analysis, run_model)
from .buckets import (bucket_indicators, percentile_buckets,
                      top_cited_indicator)
from .descriptive import describe, transform_log1p, variance_decomposition
from .glm import (DesignMatrix, GlmFit, GlmModel, average_marginal_effects,
                  classification_metrics, family_loglik, family_score,
                  fit_glm)
from .matching import MatchResult, match_case_control
from .ranktests import MannWhitneyResult, mann_whitney

__all__ = [
    "describe", "variance_decomposition", "transform_log1p",
    "mann_whitney", "MannWhitneyResult",
    "match_case_control", "MatchResult",
    "DesignMatrix", "GlmFit", "GlmModel", "fit_glm", "family_loglik",
    "family_score", "average_marginal_effects", "classification_metrics",
    "percentile_buckets", "bucket_indicators", "top_cited_indicator",
    "run_model", "run_analysis", "reuse_citation_analysis",
    "ReuseCitationResult",
]
