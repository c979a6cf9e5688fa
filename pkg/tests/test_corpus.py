import datetime
import json

import pytest
from hypothesis import given, strategies as st

from textnovelty import (CleaningRules, CorpusManifest, CorruptIndexError,
                         DataError, build_baseline, clean_corpus, load_stream,
                         order_key, reconstruct_abstract)
from textnovelty.corpus import looks_bibliographic

from conftest import make_record


def write_jsonl(path, objs):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write((obj if isinstance(obj, str) else json.dumps(obj)) + "\n")


GOOD = [
    {"id": "p1", "date": "1950-01-01", "title": "Alpha beta", "venue": "V",
     "subfield": 3, "field": 1, "references": []},
    {"id": "p2", "date": "1950-02-01", "title": "Gamma delta", "venue": "V",
     "subfield": 3, "field": 1, "references": ["p1"]},
    {"id": "p3", "date": "1951-01-01", "title": "Epsilon", "venue": "W",
     "subfield": 4, "field": 1, "references": ["p1", "p2"]},
]


class TestLoadStream:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        manifest = CorpusManifest()
        assert list(load_stream(path, manifest=manifest)) == []
        assert manifest.record_count == 0

    def test_well_formed_in_order(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, GOOD)
        records = list(load_stream(path))
        assert [r.paper_id for r in records] == ["p1", "p2", "p3"]
        assert records[0].pub_date == datetime.date(1950, 1, 1)
        assert records[1].references == ["p1"]
        assert records[2].subfield_id == 4 and records[2].field_id == 1
        assert not records[0].has_abstract

    def test_truncated_line_lenient_vs_strict(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [GOOD[0], '{"id": "broken", "date":', GOOD[1]])
        manifest = CorpusManifest()
        records = list(load_stream(path, manifest=manifest))
        assert [r.paper_id for r in records] == ["p1", "p2"]
        assert manifest.exclusion_tallies["malformed_line"] == 1
        with pytest.raises(DataError, match="line|:2"):
            list(load_stream(path, strict=True))

    def test_abstract_beats_inverted_index(self, tmp_path):
        path = tmp_path / "c.jsonl"
        obj = dict(GOOD[0])
        obj["abstract"] = "plain text wins"
        obj["abstract_inverted_index"] = {"loser": [0]}
        write_jsonl(path, [obj])
        (record,) = load_stream(path)
        assert record.abstract == "plain text wins"

    def test_inverted_index_used_when_no_abstract(self, tmp_path):
        path = tmp_path / "c.jsonl"
        obj = dict(GOOD[0])
        obj["abstract_inverted_index"] = {"deep": [0], "learning": [1, 3], "for": [2]}
        write_jsonl(path, [obj])
        (record,) = load_stream(path)
        assert record.abstract == "deep learning for learning"


class TestReconstructAbstract:
    def test_repeated_word(self):
        idx = {"deep": [0], "learning": [1, 3], "for": [2]}
        assert reconstruct_abstract(idx) == "deep learning for learning"

    def test_empty(self):
        assert reconstruct_abstract({}) == ""

    def test_duplicate_position_fatal(self):
        with pytest.raises(CorruptIndexError):
            reconstruct_abstract({"a": [0], "b": [0]})

    def test_gap_tallied(self):
        manifest = CorpusManifest()
        text = reconstruct_abstract({"a": [0], "b": [2]}, manifest=manifest)
        assert text == "a b"
        assert manifest.exclusion_tallies["abstract_position_gap"] == 1

    @given(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=30))
    def test_roundtrip(self, words):
        inverted = {}
        for pos, word in enumerate(words):
            inverted.setdefault(word, []).append(pos)
        assert reconstruct_abstract(inverted) == " ".join(words)


class TestCleanCorpus:
    def test_duplicate_title_keeps_earliest(self):
        records = [
            make_record("a", 1950, "Same Title"),
            make_record("b", 1951, "same title"),
        ]
        kept, manifest = clean_corpus(records)
        assert [r.paper_id for r in kept] == ["a"]
        assert manifest.exclusion_tallies["duplicate_title"] == 1

    def test_empty_title_removed(self):
        kept, manifest = clean_corpus([make_record("a", 1950, "  ")])
        assert kept == []
        assert manifest.exclusion_tallies["empty_title"] == 1

    def test_duplicate_abstract_demoted(self):
        records = [
            make_record("a", 1950, "First", abstract="shared words here"),
            make_record("b", 1951, "Second", abstract="shared words here"),
        ]
        kept, manifest = clean_corpus(records)
        assert kept[0].abstract == "shared words here"
        assert kept[1].abstract is None and not kept[1].has_abstract
        assert kept[1].title == "Second"
        assert manifest.exclusion_tallies["duplicate_abstract"] == 1

    def test_bibliographic_abstract_demoted(self):
        biblio = "(1955) 12-34 (1956) 56-78 vol. 9(2) 101-120"
        records = [make_record("a", 1960, "Real title", abstract=biblio)]
        kept, manifest = clean_corpus(records)
        assert kept[0].abstract is None
        assert manifest.exclusion_tallies["bibliographic_abstract"] == 1

    def test_idempotent(self):
        records = [
            make_record("a", 1950, "One", abstract="alpha beta gamma"),
            make_record("b", 1950, "One"),
            make_record("c", 1951, "Two", abstract="alpha beta gamma"),
        ]
        first, manifest1 = clean_corpus(records)
        second, manifest2 = clean_corpus(first)
        assert [r.paper_id for r in second] == [r.paper_id for r in first]
        assert all(x.abstract == y.abstract for x, y in zip(first, second))
        assert sum(manifest2.exclusion_tallies.values()) == 0

    def test_passthrough_flags(self):
        records = [make_record("a", 1950, "Ok"), make_record("b", 1950, "Flagged")]
        records[1].no_authors = True
        kept, manifest = clean_corpus(
            records, CleaningRules(drop_no_authors=True))
        assert [r.paper_id for r in kept] == ["a"]
        assert manifest.exclusion_tallies["no_authors"] == 1

    def test_biblio_heuristic_spares_prose(self):
        prose = ("We study the effect of heat on enzyme activity and report "
                 "results from 1955 onward in several species.")
        assert not looks_bibliographic(prose, 0.5)


class TestOrderKey:
    def test_lexicographic_tiebreak(self):
        a = make_record("A", 1950, "x")
        b = make_record("B", 1950, "x")
        assert order_key(a) < order_key(b)

    def test_later_date_sorts_after(self):
        early = make_record("Z", 1950, "x", month=1, day=1)
        late = make_record("A", 1950, "x", month=1, day=2)
        assert order_key(early) < order_key(late)

    @given(st.permutations(list(range(8))))
    def test_deterministic_under_shuffle(self, perm):
        records = [make_record(f"p{i}", 1950 + i % 3, "x") for i in range(8)]
        shuffled = [records[i] for i in perm]
        once = sorted(shuffled, key=order_key)
        twice = sorted(sorted(shuffled, key=order_key), key=order_key)
        assert [r.paper_id for r in once] == [r.paper_id for r in twice]


class TestBaseline:
    def test_post_cutoff_record_fatal(self, seed_pipeline):
        with pytest.raises(DataError, match="1900"):
            build_baseline([make_record("a", 1950, "Too new")], seed_pipeline)

    def test_empty_baseline(self, seed_pipeline):
        baseline = build_baseline([], seed_pipeline)
        assert not baseline.words and not baseline.phrases

    def test_word_and_phrase_membership_independent(self, seed_pipeline):
        baseline = build_baseline(
            [make_record("old", 1890, "Natural philosophy essays")],
            seed_pipeline)
        assert "natural_philosophy" in baseline.phrases or \
            "philosophy" in baseline.words
        # the phrase set never leaks into word blocking
        assert "natural_philosophy" not in baseline.words
