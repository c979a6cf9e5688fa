"""Artifact serialization: plain TSV/JSON with deterministic bytes.

Every writer sorts keys, uses repr() for floats (shortest round-trip),
and emits no timestamps, so identical inputs and config reproduce
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable

from .corpus import BaselineDictionary, CorpusManifest, PaperRecord
from .novelty import METRICS_COLUMNS, MetricsRow, TermStats, term_key
from .textproc import TermSets, build_term_sets

MISSING_COLUMNS = ["uzzi_missing", "wang_missing", "cd_missing"]


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- corpus ---------------------------------------------------------------

def write_corpus_jsonl(path, records: Iterable[PaperRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj = {
                "id": r.paper_id,
                "date": r.pub_date.isoformat(),
                "title": r.title,
                "venue": r.venue_id,
                "references": r.references,
            }
            if r.abstract:
                obj["abstract"] = r.abstract
            if r.subfield_id is not None:
                obj["subfield"] = r.subfield_id
            if r.field_id is not None:
                obj["field"] = r.field_id
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def write_manifest_json(path, manifest: CorpusManifest) -> None:
    write_json(path, manifest.to_dict())


# -- baseline -------------------------------------------------------------

def write_baseline(path, baseline: BaselineDictionary) -> None:
    write_json(path, {
        "words": sorted(baseline.words),
        "phrases": sorted(baseline.phrases),
        "word_pairs": sorted(f"{a}|{b}" for a, b in baseline.word_pairs),
        "phrase_pairs": sorted(f"{a}|{b}" for a, b in baseline.phrase_pairs),
    })


def read_baseline(path) -> BaselineDictionary:
    payload = read_json(path)

    def pairs(values):
        return {tuple(v.split("|", 1)) for v in values}

    return BaselineDictionary(
        words=set(payload["words"]),
        phrases=set(payload["phrases"]),
        word_pairs=pairs(payload.get("word_pairs", ())),
        phrase_pairs=pairs(payload.get("phrase_pairs", ())),
    )


# -- per-paper term sets --------------------------------------------------

def write_termsets_jsonl(path, rows: Iterable[tuple[PaperRecord, TermSets, bool]]
                         ) -> None:
    """Rows are (record, term sets, novelty-language flag); pairs are not
    stored, they are rebuilt on read."""
    with open(path, "w", encoding="utf-8") as fh:
        for record, terms, novelty_language in rows:
            fh.write(json.dumps({
                "id": record.paper_id,
                "date": record.pub_date.isoformat(),
                "words": sorted(terms.words),
                "removal": sorted(terms.removal_kept),
                "phrases": sorted(terms.phrases),
                "novelty_language": int(novelty_language),
            }, sort_keys=True) + "\n")


def read_termsets_jsonl(path) -> Iterable[tuple[str, str, TermSets, int]]:
    """Yields (paper_id, iso date, TermSets, novelty_language)."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            obj = json.loads(line)
            yield (obj["id"], obj["date"],
                   build_term_sets(obj["words"], obj["removal"], obj["phrases"]),
                   obj.get("novelty_language", 0))


# -- term stats and metrics tables ----------------------------------------

def write_termstats_tsv(path, rows: Iterable[TermStats]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["kind", "term", "occ", "pioneer_id", "first_date", "reuse"])
        for row in rows:
            writer.writerow([
                row.kind, term_key(row.kind, row.term), row.occ,
                row.pioneer_id, row.first_date.isoformat(), row.reuse,
            ])


def write_metrics_tsv(path, rows: Iterable[MetricsRow],
                      missing_indicators: bool = False) -> None:
    columns = METRICS_COLUMNS + (MISSING_COLUMNS if missing_indicators else [])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            cells = [_cell(getattr(row, c)) for c in METRICS_COLUMNS]
            if missing_indicators:
                cells += [
                    _cell(int(row.uzzi is None)),
                    _cell(int(row.wang is None)),
                    _cell(int(row.cd is None)),
                ]
            writer.writerow(cells)


_INT_COLUMNS = {
    "new_word", "new_phrase", "new_word_comb", "new_phrase_comb",
    "new_word_bin", "new_phrase_bin", "new_word_comb_bin",
    "new_phrase_comb_bin",
    "new_word_reuse", "new_phrase_reuse", "new_word_comb_reuse",
    "new_phrase_comb_reuse",
    "word_count", "phrase_count", "has_abstract", "n_refs", "n_ref_journals",
}


def read_metrics_tsv(path) -> list[MetricsRow]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader)
        for cells in reader:
            values = dict(zip(header, cells))
            kwargs = {"paper_id": values["paper_id"]}
            for column in METRICS_COLUMNS[1:]:
                raw = values.get(column, "")
                if raw == "":
                    kwargs[column] = 0 if column in _INT_COLUMNS else None
                elif column in _INT_COLUMNS:
                    kwargs[column] = int(raw)
                else:
                    kwargs[column] = float(raw)
            rows.append(MetricsRow(**kwargs))
    return rows


def write_table_tsv(path, columns: list[str], rows: Iterable[Iterable]) -> None:
    """Generic tidy TSV writer for plot data and exports."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
