"""Declarative regression harness and the reuse-to-citation linkage study.

`run_model` drives one GLM from a JSON-friendly spec over a merged
analysis table (a list of per-paper dicts). Count metrics are
log(1+x)-transformed on request; missing metric values are zero-filled
with a companion missing-indicator column by default, or dropped listwise
with `"missing": "drop"`. Fixed effects are named label columns.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..citemetrics import CitationGraph
from ..errors import DataError
from .descriptive import transform_log1p
from .glm import (DesignMatrix, GlmFit, average_marginal_effects,
                  classification_metrics, fit_glm)
from .matching import match_case_control


def run_model(table: list[dict], spec: dict) -> dict:
    """Fit one model from a declarative spec and summarize it as JSON.

    Spec keys: name, family, outcome, covariates, log1p (subset of
    covariates), fixed_effects (column names holding labels), missing
    ("zero_fill" or "drop"), zero_fill (columns eligible for fill,
    default: all covariates), ame_for (columns for marginal effects),
    threshold (classification cut, default 0.5).
    """
    family = spec.get("family", "logit")
    outcome_name = spec["outcome"]
    covariates = list(spec.get("covariates", ()))
    log_cols = set(spec.get("log1p", ()))
    fe_names = list(spec.get("fixed_effects", ()))
    missing_mode = spec.get("missing", "zero_fill")
    fillable = set(spec.get("zero_fill", covariates))
    unknown = (log_cols | fillable) - set(covariates)
    if unknown:
        raise DataError(f"spec names unknown covariates: {sorted(unknown)}")

    rows = []
    n_dropped = 0
    for row in table:
        if row.get(outcome_name) is None:
            n_dropped += 1
            continue
        if missing_mode == "drop" and any(row.get(c) is None for c in covariates):
            n_dropped += 1
            continue
        rows.append(row)
    if not rows:
        raise DataError("no usable rows after missing-data handling")

    columns: dict[str, np.ndarray] = {}
    for cov in covariates:
        raw = [row.get(cov) for row in rows]
        if missing_mode == "zero_fill" and cov in fillable and any(
                v is None for v in raw):
            columns[cov + "_missing"] = np.array(
                [1.0 if v is None else 0.0 for v in raw])
        values = np.array([0.0 if v is None else float(v) for v in raw])
        if cov in log_cols:
            values = transform_log1p(values)
        columns[cov] = values
    # keep declared covariate order first, indicators after
    ordered = {c: columns[c] for c in covariates}
    ordered.update({name: col for name, col in columns.items()
                    if name not in ordered})

    design = DesignMatrix(
        columns=ordered,
        outcome=np.array([float(row[outcome_name]) for row in rows]),
        fixed_effects={name: [row[name] for row in rows] for name in fe_names},
    )
    fit = fit_glm(design, family, tol=spec.get("tol", 1e-8),
                  max_iter=spec.get("max_iter", 100),
                  fe_mode=spec.get("fe_mode", "dummies"))

    result = {
        "name": spec.get("name", outcome_name),
        "family": family,
        "n": fit.n_obs,
        "n_dropped": n_dropped,
        "coefficients": fit.coefficients,
        "se_classical": fit.se_classical,
        "se_robust": fit.se_robust,
        "loglik": fit.loglik,
        "pseudo_r2": fit.pseudo_r2,
        "converged": fit.converged,
        "dropped_columns": fit.dropped,
        "precision": None,
        "recall": None,
        "auc": None,
        "ame": {},
    }
    if family in ("logit", "fractional_logit", "identity"):
        scores = fit.predict()
        labels = design.outcome
        if set(np.unique(labels)) <= {0.0, 1.0}:
            metrics = classification_metrics(
                scores, labels.astype(int), spec.get("threshold", 0.5))
            result.update(metrics)
    ame_for = spec.get("ame_for", ())
    if isinstance(ame_for, str):
        ame_for = [ame_for]
    for var in ame_for:
        if var in fit.coefficients:
            result["ame"][var] = average_marginal_effects(fit, var)
    return result


def run_analysis(table: list[dict], spec: dict) -> dict:
    """Run every model in the spec; returns {model name: result}."""
    results = {}
    for model_spec in spec["models"]:
        result = run_model(table, model_spec)
        results[result["name"]] = result
    return results


@dataclass
class ReuseCitationResult:
    kind: str
    n_terms_sampled: int
    n_terms_excluded: int
    n_pairs: int
    rate_reusing: float
    rate_control: float
    ratio: Optional[float]
    gap_coefficients: dict[int, float] = field(default_factory=dict)
    gap_fit: Optional[GlmFit] = None


def reuse_citation_analysis(corpus, novelty_result, graph: CitationGraph,
                            kind: str = "word", n_terms: int = 100,
                            min_reuse: int = 10, seed: int = 0,
                            ) -> ReuseCitationResult:
    """How often do papers reusing a new term cite its pioneer?

    Samples up to `n_terms` credited terms with reuse >= `min_reuse`,
    matches every reusing paper to a control from the same venue, year,
    and subfield (field fallback) that does not contain the term, and
    compares citation-to-pioneer rates. A linear probability model on the
    reusing papers with year-gap indicator columns (gap 0 is the
    reference) gives the citation-decay profile.

    `corpus` is a re-iterable of (record, TermSets) pairs; terms with no
    matchable controls are excluded and tallied.
    """
    occ = novelty_result.occ
    pioneers = novelty_result.pioneers[kind]
    eligible = sorted(key for key in pioneers
                      if occ.get(kind, key) - 1 >= min_reuse)
    rng = random.Random(seed)
    sampled = sorted(rng.sample(eligible, min(n_terms, len(eligible))))
    sampled_set = set(sampled)

    from ..novelty import term_key, terms_of
    containing: dict[str, list] = {key: [] for key in sampled}
    records = {}
    stream = corpus() if callable(corpus) else iter(corpus)
    for record, terms in stream:
        records[record.paper_id] = record
        for term in terms_of(terms, kind):
            key = term_key(kind, term)
            if key in sampled_set:
                containing[key].append(record)

    cites_of = {pid: set(refs) for pid, refs in graph.cites.items()}
    n_excluded = 0
    case_hits = control_hits = n_pairs = 0
    gap_rows: list[tuple[int, int]] = []  # (year gap, cites pioneer)

    for key in sampled:
        pioneer_id, _ = pioneers[key]
        members = containing[key]
        reusers = [r for r in members if r.paper_id != pioneer_id]
        reuser_ids = {r.paper_id for r in members}
        pool = [r for r in records.values() if r.paper_id not in reuser_ids]
        match = match_case_control(reusers, pool, seed=seed)
        if not match.pairs:
            n_excluded += 1
            continue
        pioneer_year = records[pioneer_id].pub_date.year
        for case_id, control_id, _ in match.pairs:
            case_cites = pioneer_id in cites_of.get(case_id, ())
            control_cites = pioneer_id in cites_of.get(control_id, ())
            case_hits += int(case_cites)
            control_hits += int(control_cites)
            n_pairs += 1
            gap_rows.append(
                (records[case_id].pub_date.year - pioneer_year, int(case_cites)))

    rate_reusing = case_hits / n_pairs if n_pairs else 0.0
    rate_control = control_hits / n_pairs if n_pairs else 0.0
    ratio = rate_reusing / rate_control if rate_control > 0 else None

    gap_fit = None
    gap_coefficients: dict[int, float] = {}
    gaps = sorted({g for g, _ in gap_rows} - {0})
    if gap_rows and gaps:
        design = DesignMatrix(
            columns={f"gap_{g}": np.array(
                [1.0 if row_gap == g else 0.0 for row_gap, _ in gap_rows])
                for g in gaps},
            outcome=np.array([float(hit) for _, hit in gap_rows]),
        )
        gap_fit = fit_glm(design, "identity")
        gap_coefficients = {
            g: gap_fit.coefficients[f"gap_{g}"]
            for g in gaps if f"gap_{g}" in gap_fit.coefficients
        }
    return ReuseCitationResult(
        kind=kind, n_terms_sampled=len(sampled), n_terms_excluded=n_excluded,
        n_pairs=n_pairs, rate_reusing=rate_reusing, rate_control=rate_control,
        ratio=ratio, gap_coefficients=gap_coefficients, gap_fit=gap_fit)
