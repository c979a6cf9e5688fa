"""End-to-end pipeline: stages, artifacts, config, and the run manifest.

Stages run in dependency order; each writes plain TSV/JSON artifacts plus
a manifest entry recording the config hash and input/output digests.
Reruns with identical config and inputs are skipped (the cache key is
exactly those digests); ``--force`` reruns and overwrites. Artifacts
contain no timestamps, so a rerun is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.stats import norm as _norm

from . import __version__
from . import artifacts as art
from .citemetrics import CitationMetrics, build_graph
from .corpus import (BaselineDictionary, CleaningRules, CorpusManifest,
                     PaperRecord, build_baseline, clean_corpus, load_stream,
                     order_key)
from .errors import DataError, StageError
from .novelty import NoveltyEncoder, DEFAULT_SHARD_BUDGET
from .semdist import SemanticDistance, load_embeddings
from .stats import (bucket_indicators, fit_glm, match_case_control,
                    run_analysis, top_cited_indicator)
from .stats.glm import DesignMatrix
from .textproc import (FilterLists, NoveltyLanguageDetector, TextPipeline,
                       load_novelty_terms)

STAGES = ("ingest", "baseline", "preprocess", "novelty", "semdist",
          "cite", "stats", "plotdata")

_CONTROL_COLUMNS = ("has_abstract", "word_count", "phrase_count",
                    "n_refs", "n_ref_journals")


@dataclass
class PipelineConfig:
    """Paths, thresholds, seeds, and toggles for one reproducible run."""

    corpus: Optional[str | list[str]] = None  # one JSONL file or shards
    baseline_corpus: Optional[str] = None
    embeddings: Optional[str] = None
    labels: Optional[str] = None
    analysis_spec: Optional[str] = None
    plot_spec: Optional[str] = None
    output_dir: str = "out"

    mode: str = "full"                  # or "title_only"
    strict_ingest: bool = False
    expand_lists: bool = True
    min_papers: int = 1000
    min_papers_per_million: Optional[float] = None
    pair_baseline: bool = False

    shard_budget_bytes: int = DEFAULT_SHARD_BUDGET
    threads: int = 1

    window_days: int = 1826
    calendar_window: bool = False

    uzzi_rewirings: int = 10
    uzzi_seed: int = 42
    cd_window_years: Optional[int] = None
    match_seed: int = 42

    stop_words: Optional[str] = None
    removal_words: Optional[str] = None
    natural_stop_words: Optional[str] = None
    tag_lexicon: Optional[str] = None
    lemma_lexicon: Optional[str] = None
    novelty_terms: Optional[str] = None

    def hash(self) -> str:
        canonical = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_config(path=None, **overrides) -> PipelineConfig:
    payload = {}
    if path is not None:
        payload.update(art.read_json(path))
    payload.update({k: v for k, v in overrides.items() if v is not None})
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(payload) - known
    if unknown:
        raise DataError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**payload)


_PATH_KEYS = ("baseline_corpus", "embeddings", "labels", "analysis_spec",
              "plot_spec", "stop_words", "removal_words",
              "natural_stop_words", "tag_lexicon", "lemma_lexicon",
              "novelty_terms")


class Pipeline:
    def __init__(self, config: PipelineConfig, force: bool = False):
        self.config = config
        self.force = force
        self._validate_paths()
        self.out = Path(config.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / "manifest").mkdir(exist_ok=True)

    def _validate_paths(self) -> None:
        missing = []
        corpus = self.config.corpus
        shards = (list(corpus) if isinstance(corpus, (list, tuple))
                  else [corpus] if corpus else [])
        for p in shards + [getattr(self.config, key) for key in _PATH_KEYS]:
            if p is not None and not Path(p).exists():
                missing.append(str(p))
        if missing:
            raise StageError(f"configured paths do not exist: {missing}")

    # ---------------- artifact bookkeeping ----------------

    def path(self, name: str) -> Path:
        return self.out / name

    def _require(self, stage: str, *names: str) -> None:
        for name in names:
            if not self.path(name).exists():
                raise StageError(
                    f"stage {stage!r} is missing upstream artifact {name!r}; "
                    f"run its producing stage first")

    def _manifest_path(self, stage: str) -> Path:
        return self.out / "manifest" / f"{stage}.json"

    def _digests(self, paths: Iterable) -> dict[str, str]:
        return {str(p): art.sha256_of(p) for p in paths}

    def _check_config_hash(self, stage: str) -> None:
        mpath = self._manifest_path(stage)
        if mpath.exists() and not self.force:
            previous = art.read_json(mpath)
            if previous.get("config_hash") != self.config.hash():
                raise StageError(
                    f"stage {stage!r} artifacts exist from a different config "
                    f"(hash mismatch); rerun with --force to overwrite")

    def _finish(self, stage: str, inputs: list, outputs: list) -> None:
        art.write_json(self._manifest_path(stage), {
            "stage": stage,
            "config_hash": self.config.hash(),
            "version": __version__,
            "inputs": self._digests(inputs),
            "outputs": self._digests(outputs),
        })

    def _fresh(self, stage: str) -> bool:
        """Cached iff the recorded config hash and every recorded input and
        output digest still match; no implicit invalidation beyond that."""
        mpath = self._manifest_path(stage)
        if self.force or not mpath.exists():
            return False
        previous = art.read_json(mpath)
        if previous.get("config_hash") != self.config.hash():
            return False
        for section in ("inputs", "outputs"):
            for path, digest in previous.get(section, {}).items():
                if not Path(path).exists() or art.sha256_of(path) != digest:
                    return False
        return True

    # ---------------- shared loaders ----------------

    def _read_clean_corpus(self) -> list[PaperRecord]:
        return sorted(load_stream(self.path("corpus_clean.jsonl"), strict=True),
                      key=order_key)

    def _text_pipeline(self) -> TextPipeline:
        cfg = self.config
        return TextPipeline(
            mode=cfg.mode, stop_words=cfg.stop_words,
            removal_words=cfg.removal_words,
            natural_stop_words=cfg.natural_stop_words,
            tag_lexicon=cfg.tag_lexicon, lemma_lexicon=cfg.lemma_lexicon,
            expand_lists=cfg.expand_lists, min_papers=cfg.min_papers,
            min_papers_per_million=cfg.min_papers_per_million)

    def _fitted_pipeline(self) -> TextPipeline:
        payload = art.read_json(self.path("filter_lists.json"))
        lists = FilterLists(stop_words=set(payload["stop_words"]),
                            removal_words=set(payload["removal_words"]))
        return self._text_pipeline().load_fitted(lists)

    def _termsets_stream(self, records_by_id) -> Callable:
        path = self.path("termsets.jsonl")

        def stream():
            for paper_id, _, terms, _ in art.read_termsets_jsonl(path):
                yield records_by_id[paper_id], terms
        return stream

    # ---------------- stages ----------------

    def _corpus_shards(self) -> list[str]:
        corpus = self.config.corpus
        if not corpus:
            raise StageError("stage 'ingest' needs config key 'corpus'")
        return list(corpus) if isinstance(corpus, (list, tuple)) else [corpus]

    def stage_ingest(self) -> None:
        cfg = self.config
        shards = self._corpus_shards()
        manifest = CorpusManifest()
        # parallel-reader-friendly: shards merge and re-sort before anything
        # downstream sees the stream
        records = []
        for shard in shards:
            records.extend(load_stream(shard, strict=cfg.strict_ingest,
                                       manifest=manifest))
        records.sort(key=order_key)
        cleaned, clean_manifest = clean_corpus(records, CleaningRules())
        clean_manifest.exclusion_tallies.update(
            {f"ingest_{k}": v for k, v in manifest.exclusion_tallies.items()})
        art.write_corpus_jsonl(self.path("corpus_clean.jsonl"), cleaned)
        art.write_manifest_json(self.path("ingest_manifest.json"), clean_manifest)
        self._finish("ingest", shards,
                     [self.path("corpus_clean.jsonl"),
                      self.path("ingest_manifest.json")])

    def stage_baseline(self) -> None:
        cfg = self.config
        self._require("baseline", "corpus_clean.jsonl")
        corpus = self._read_clean_corpus()
        pipe = self._text_pipeline().fit(corpus)
        art.write_json(self.path("filter_lists.json"), {
            "stop_words": sorted(pipe.filter_lists_.stop_words),
            "removal_words": sorted(pipe.filter_lists_.removal_words),
        })
        if cfg.baseline_corpus:
            baseline_records = sorted(
                load_stream(cfg.baseline_corpus, strict=cfg.strict_ingest),
                key=order_key)
            baseline = build_baseline(baseline_records, pipe,
                                      include_pairs=cfg.pair_baseline)
        else:
            baseline = BaselineDictionary.empty()
        art.write_baseline(self.path("baseline.json"), baseline)
        inputs = [self.path("corpus_clean.jsonl")]
        if cfg.baseline_corpus:
            inputs.append(cfg.baseline_corpus)
        self._finish("baseline", inputs,
                     [self.path("filter_lists.json"), self.path("baseline.json")])

    def stage_preprocess(self) -> None:
        self._require("preprocess", "corpus_clean.jsonl", "filter_lists.json")
        pipe = self._fitted_pipeline()
        detector = NoveltyLanguageDetector(
            load_novelty_terms(self.config.novelty_terms)
            if self.config.novelty_terms else None)
        corpus = self._read_clean_corpus()
        rows = ((r, pipe.process_record(r), detector(r.title, r.abstract))
                for r in corpus)
        art.write_termsets_jsonl(self.path("termsets.jsonl"), rows)
        self._finish("preprocess",
                     [self.path("corpus_clean.jsonl"),
                      self.path("filter_lists.json")],
                     [self.path("termsets.jsonl")])

    def stage_novelty(self) -> None:
        self._require("novelty", "corpus_clean.jsonl", "termsets.jsonl",
                      "baseline.json")
        corpus = self._read_clean_corpus()
        records_by_id = {r.paper_id: r for r in corpus}
        venue_of = {r.paper_id: r.venue_id for r in corpus}
        baseline = art.read_baseline(self.path("baseline.json"))
        spill = self.out / "spill"
        spill.mkdir(exist_ok=True)
        encoder = NoveltyEncoder(
            baseline=baseline,
            shard_budget_bytes=self.config.shard_budget_bytes,
            spill_dir=str(spill),
            n_workers=self.config.threads,
            venue_of=venue_of)
        stream = self._termsets_stream(records_by_id)
        rows = encoder.fit_transform(stream)
        art.write_termstats_tsv(self.path("termstats.tsv"), encoder.term_stats())
        art.write_metrics_tsv(self.path("metrics.tsv"), rows)
        shutil.rmtree(spill, ignore_errors=True)
        self._finish("novelty",
                     [self.path("corpus_clean.jsonl"), self.path("termsets.jsonl"),
                      self.path("baseline.json")],
                     [self.path("termstats.tsv"), self.path("metrics.tsv")])

    def stage_semdist(self) -> None:
        cfg = self.config
        self._require("semdist", "corpus_clean.jsonl", "metrics.tsv")
        corpus = self._read_clean_corpus()
        rows = art.read_metrics_tsv(self.path("metrics.tsv"))
        inputs = [self.path("corpus_clean.jsonl"), self.path("metrics.tsv")]
        if cfg.embeddings:
            store = load_embeddings(cfg.embeddings,
                                    corpus_ids={r.paper_id for r in corpus})
            model = SemanticDistance(window_days=cfg.window_days,
                                     calendar_years=cfg.calendar_window)
            model.fit(corpus, store)
            by_id = {r.paper_id: r for r in corpus}
            for row in rows:
                row.semantic_distance = model.transform([by_id[row.paper_id]])[0]
            inputs.append(cfg.embeddings)
        art.write_metrics_tsv(self.path("metrics_semdist.tsv"), rows)
        self._finish("semdist", inputs, [self.path("metrics_semdist.tsv")])

    def stage_cite(self) -> None:
        cfg = self.config
        self._require("cite", "corpus_clean.jsonl", "metrics_semdist.tsv")
        corpus = self._read_clean_corpus()
        rows = art.read_metrics_tsv(self.path("metrics_semdist.tsv"))
        model = CitationMetrics(n_rewirings=cfg.uzzi_rewirings,
                                seed=cfg.uzzi_seed,
                                cd_window_years=cfg.cd_window_years)
        model.fit(corpus)
        for row in rows:
            row.uzzi = model.uzzi(row.paper_id)
            row.wang = model.wang(row.paper_id)
            row.cd = model.cd(row.paper_id)
        art.write_metrics_tsv(self.path("metrics_full.tsv"), rows,
                              missing_indicators=True)
        self._finish("cite",
                     [self.path("corpus_clean.jsonl"),
                      self.path("metrics_semdist.tsv")],
                     [self.path("metrics_full.tsv")])

    def _analysis_table(self, rows, corpus) -> list[dict]:
        by_id = {r.paper_id: r for r in corpus}
        novelty_language = {
            pid: flag for pid, _, _, flag in
            art.read_termsets_jsonl(self.path("termsets.jsonl"))
        } if self.path("termsets.jsonl").exists() else {}
        graph = build_graph(corpus)
        table = []
        for row in rows:
            record = by_id[row.paper_id]
            entry = {c: getattr(row, c) for c in art.METRICS_COLUMNS}
            entry["uzzi_missing"] = int(row.uzzi is None)
            entry["wang_missing"] = int(row.wang is None)
            entry["cd_missing"] = int(row.cd is None)
            entry["year"] = record.pub_date.year
            entry["subfield"] = record.subfield_id
            entry["field"] = record.field_id
            entry["venue"] = record.venue_id
            entry["citations"] = len(graph.cited_by.get(row.paper_id, ()))
            entry["novelty_language"] = novelty_language.get(row.paper_id, 0)
            table.append(entry)
        return table

    def _read_labels(self) -> dict[str, int]:
        labels = {}
        with open(self.config.labels, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                paper_id, value = line.split("\t")
                labels[paper_id] = int(value)
        return labels

    def stage_stats(self) -> None:
        cfg = self.config
        self._require("stats", "corpus_clean.jsonl", "metrics_full.tsv")
        if not cfg.analysis_spec:
            raise StageError("stage 'stats' needs config key 'analysis_spec'")
        spec = art.read_json(cfg.analysis_spec)
        corpus = self._read_clean_corpus()
        rows = art.read_metrics_tsv(self.path("metrics_full.tsv"))
        table = self._analysis_table(rows, corpus)

        inputs = [self.path("corpus_clean.jsonl"), self.path("metrics_full.tsv"),
                  cfg.analysis_spec]
        if cfg.labels:
            labels = self._read_labels()
            by_id = {r.paper_id: r for r in corpus}
            # labels may reference papers the cleaning rules removed
            labels = {pid: v for pid, v in labels.items() if pid in by_id}
            match_cfg = spec.get("match")
            if match_cfg:
                cases = [by_id[pid] for pid, v in sorted(labels.items()) if v == 1]
                pool = [r for r in corpus if labels.get(r.paper_id) != 1]
                result = match_case_control(
                    cases, pool, seed=match_cfg.get("seed", cfg.match_seed))
                labeled = {r.paper_id: 1 for r in cases}
                labeled.update({control: 0 for _, control, _ in result.pairs})
                labels = labeled
            # unlabeled rows keep label=None; models with a label outcome
            # drop them listwise, full-corpus models still see every row
            for entry in table:
                entry["label"] = labels.get(entry["paper_id"])
            inputs.append(cfg.labels)

        results = run_analysis(table, spec)
        art.write_json(self.path("regressions.json"), results)
        outputs = [self.path("regressions.json")]
        outputs += self._write_exports(table, spec.get("exports", ()))
        self._finish("stats", inputs, outputs)

    def _write_exports(self, table: list[dict], exports) -> list[Path]:
        """Tabular TSV exports of bucket / top-cited indicator columns."""
        written = []
        for export in exports:
            usable = [e for e in table if e.get("subfield") is not None
                      and e.get(export["metric"]) is not None]
            groups = [(e["subfield"], e["year"]) for e in usable]
            values = [float(e[export["metric"]]) for e in usable]
            if export["type"] == "buckets":
                columns = bucket_indicators(
                    values, groups, prefix=export["metric"],
                    invert=export.get("invert", False))
            elif export["type"] == "top_cited":
                flag = top_cited_indicator(values, groups,
                                           pct=export.get("pct", 95))
                columns = {f"{export['metric']}_top{export.get('pct', 95)}": flag}
            else:
                raise StageError(f"unknown export type {export['type']!r}")
            out = self.path(f"exports/{export['name']}.tsv")
            art.write_table_tsv(
                out, ["paper_id"] + list(columns),
                ([e["paper_id"]] + [int(col[i]) for col in columns.values()]
                 for i, e in enumerate(usable)))
            written.append(out)
        return written

    def _bucket_plot(self, name: str, table: list[dict], figure: dict) -> Path:
        metric = figure["metric"]
        pct = figure.get("outcome_pct", 99)
        invert = figure.get("invert", False)
        ci = figure.get("ci", 0.99999)
        usable = [e for e in table if e.get(metric) is not None
                  and e.get("subfield") is not None]
        groups = [(e["subfield"], e["year"]) for e in usable]
        values = [float(e[metric]) for e in usable]
        citations = [e["citations"] for e in usable]
        outcome = top_cited_indicator(citations, groups, pct)
        indicators = bucket_indicators(values, groups, prefix="bucket",
                                       invert=invert)
        columns = dict(indicators)
        for control in _CONTROL_COLUMNS:
            columns[control] = np.array([float(e[control]) for e in usable])
        design = DesignMatrix(columns=columns,
                              outcome=outcome.astype(np.float64))
        fit = fit_glm(design, "identity")
        z = float(_norm.ppf(0.5 + ci / 2.0))
        base = fit.predict()
        bucket_names = list(indicators)
        rows = []
        counts = {bn: int(indicators[bn].sum()) for bn in bucket_names}
        ref_n = len(usable) - sum(counts.values())
        # average adjusted prediction per bucket: shift every observation
        # into the bucket, keep its controls
        matrix = fit._X
        name_index = {n: i for i, n in enumerate(fit._names)}
        bucket_cols = [name_index[bn] for bn in bucket_names if bn in name_index]
        zeroed = matrix.copy()
        for col in bucket_cols:
            zeroed[:, col] = 0.0
        pred_ref = float(np.mean(fit.predict(zeroed)))
        rows.append((metric, "p0_90", ref_n, pred_ref, pred_ref, pred_ref))
        for bn in bucket_names:
            shifted = zeroed.copy()
            if bn in name_index:
                shifted[:, name_index[bn]] = 1.0
                se = fit.se_robust[bn]
            else:  # dropped as collinear
                se = 0.0
            pred = float(np.mean(fit.predict(shifted)))
            rows.append((metric, bn.replace("bucket_", ""), counts[bn],
                         pred, pred - z * se, pred + z * se))
        out = self.path(f"plotdata/{name}.tsv")
        art.write_table_tsv(out, ["metric", "bucket", "n", "predicted",
                                  "ci_low", "ci_high"], rows)
        return out

    def _field_year_plot(self, name: str, table: list[dict],
                         figure: dict) -> Path:
        metric = figure["metric"]
        sums: dict[tuple, list[float]] = {}
        for entry in table:
            if entry.get("field") is None or entry.get(metric) is None:
                continue
            sums.setdefault((entry["field"], entry["year"]), []).append(
                float(entry[metric]))
        rows = [
            (fieldid, year, len(vals), float(np.mean(vals)))
            for (fieldid, year), vals in sorted(sums.items())
        ]
        out = self.path(f"plotdata/{name}.tsv")
        art.write_table_tsv(out, ["field", "year", "n", f"mean_{metric}"], rows)
        return out

    def stage_plotdata(self) -> None:
        cfg = self.config
        self._require("plotdata", "corpus_clean.jsonl", "metrics_full.tsv")
        if not cfg.plot_spec:
            raise StageError("stage 'plotdata' needs config key 'plot_spec'")
        spec = art.read_json(cfg.plot_spec)
        corpus = self._read_clean_corpus()
        rows = art.read_metrics_tsv(self.path("metrics_full.tsv"))
        table = self._analysis_table(rows, corpus)
        known = set(art.METRICS_COLUMNS) | {"citations", "novelty_language"}
        outputs = []
        for figure in spec["figures"]:
            if figure["metric"] not in known:
                raise StageError(
                    f"plot spec names unknown column {figure['metric']!r}")
            if figure["type"] == "field_year_mean":
                outputs.append(self._field_year_plot(
                    figure["name"], table, figure))
            elif figure["type"] == "bucket_lpm":
                outputs.append(self._bucket_plot(figure["name"], table, figure))
            else:
                raise StageError(f"unknown figure type {figure['type']!r}")
        self._finish("plotdata",
                     [self.path("corpus_clean.jsonl"),
                      self.path("metrics_full.tsv"), cfg.plot_spec],
                     outputs)

    # ---------------- driver ----------------

    def run(self, stages: Iterable[str]) -> list[str]:
        """Run the requested stages in dependency order; returns the names
        of stages that actually executed (fresh ones are skipped)."""
        requested = list(stages)
        unknown = set(requested) - set(STAGES)
        if unknown:
            raise DataError(f"unknown stages: {sorted(unknown)}")
        ordered = [s for s in STAGES if s in requested]
        executed = []
        for stage in ordered:
            if self._fresh(stage):
                continue
            self._check_config_hash(stage)
            getattr(self, f"stage_{stage}")()
            executed.append(stage)
        return executed
