import json
import shutil
from pathlib import Path

import pytest

from textnovelty.cli import main

from conftest import FIXTURE_DIR, GOLDEN_DIR

GOLDEN_FILES = [
    "corpus_clean.jsonl", "ingest_manifest.json", "filter_lists.json",
    "baseline.json", "termsets.jsonl", "termstats.tsv", "metrics.tsv",
    "metrics_semdist.tsv", "metrics_full.tsv", "regressions.json",
    "plotdata/field_year_new_phrase.tsv", "plotdata/topcited_new_phrase.tsv",
    "plotdata/topcited_uzzi_inverted.tsv", "exports/buckets_new_phrase.tsv",
    "exports/top10pct_citations.tsv",
]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    for item in FIXTURE_DIR.iterdir():
        shutil.copy(item, tmp_path / item.name)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return main(list(argv))


class TestEndToEnd:
    def test_full_run_matches_golden(self, workdir):
        assert run("all", "--config", "config.json") == 0
        for name in GOLDEN_FILES:
            got = (workdir / "out" / name).read_bytes()
            want = (GOLDEN_DIR / name).read_bytes()
            assert got == want, f"{name} differs from golden"

    def test_rerun_is_cached_and_byte_identical(self, workdir):
        assert run("all", "--config", "config.json") == 0
        before = {name: (workdir / "out" / name).read_bytes()
                  for name in GOLDEN_FILES}
        manifest_before = {
            p.name: p.read_bytes() for p in (workdir / "out" / "manifest").iterdir()}
        assert run("all", "--config", "config.json") == 0
        for name, blob in before.items():
            assert (workdir / "out" / name).read_bytes() == blob
        for name, blob in manifest_before.items():
            assert (workdir / "out" / "manifest" / name).read_bytes() == blob

    def test_stage_isolation(self, workdir):
        assert run("all", "--config", "config.json") == 0
        target = workdir / "out" / "metrics_full.tsv"
        golden = target.read_bytes()
        target.unlink()
        assert run("cite", "--config", "config.json") == 0
        assert target.read_bytes() == golden

    def test_threads_do_not_change_bytes(self, workdir):
        assert run("all", "--config", "config.json") == 0
        base = (workdir / "out" / "metrics_full.tsv").read_bytes()
        shutil.rmtree(workdir / "out")
        assert run("all", "--config", "config.json", "--threads", "8") == 0
        assert (workdir / "out" / "metrics_full.tsv").read_bytes() == base


class TestStageRules:
    def test_missing_upstream_is_data_error_naming_stage(self, workdir, capsys):
        assert run("stats", "--config", "config.json") == 2
        err = capsys.readouterr().err
        assert "stats" in err and "artifact" in err

    def test_config_hash_mismatch_refused_without_force(self, workdir):
        assert run("ingest", "--config", "config.json") == 0
        cfg = json.loads(Path("config.json").read_text())
        cfg["min_papers"] = 99
        Path("config.json").write_text(json.dumps(cfg))
        assert run("ingest", "--config", "config.json") == 2
        assert run("ingest", "--config", "config.json", "--force") == 0

    def test_empty_corpus_ingests_cleanly(self, workdir):
        Path("empty.jsonl").write_text("")
        cfg = json.loads(Path("config.json").read_text())
        cfg["corpus"] = "empty.jsonl"
        Path("config.json").write_text(json.dumps(cfg))
        assert run("ingest", "--config", "config.json") == 0
        manifest = json.loads((workdir / "out" / "ingest_manifest.json").read_text())
        assert manifest["record_count"] == 0

    def test_unknown_config_key_is_data_error(self, workdir):
        Path("bad.json").write_text('{"corpsu": "x"}')
        assert run("ingest", "--config", "bad.json") == 2

    def test_missing_config_file_is_data_error(self, workdir):
        assert run("ingest", "--config", "nope.json") == 2

    def test_usage_error_exit_code(self):
        assert run("frobnicate") == 1
        assert run() == 1

    def test_strict_flag_rejects_malformed(self, workdir):
        with open("corpus.jsonl", "a", encoding="utf-8") as fh:
            fh.write("{not json\n")
        assert run("ingest", "--config", "config.json", "--strict") == 2

    def test_nonexistent_configured_path_is_data_error(self, workdir):
        cfg = json.loads(Path("config.json").read_text())
        cfg["embeddings"] = "missing.tsv"
        Path("config.json").write_text(json.dumps(cfg))
        assert run("all", "--config", "config.json") == 2


class TestPlotData:
    def test_bucket_figure_has_reference_plus_five_rows(self, workdir):
        assert run("all", "--config", "config.json") == 0
        lines = (workdir / "out" / "plotdata" /
                 "topcited_new_phrase.tsv").read_text().splitlines()
        assert len(lines) == 1 + 6  # header, reference, five buckets
        assert lines[1].split("\t")[1] == "p0_90"

    def test_unknown_column_in_plot_spec_fatal(self, workdir, capsys):
        spec = json.loads(Path("plot_spec.json").read_text())
        spec["figures"][0]["metric"] = "not_a_column"
        Path("plot_spec.json").write_text(json.dumps(spec))
        assert run("all", "--config", "config.json") == 2
        assert "not_a_column" in capsys.readouterr().err

    def test_empty_corpus_gives_header_only_plot(self, workdir):
        Path("empty.jsonl").write_text("")
        cfg = json.loads(Path("config.json").read_text())
        cfg["corpus"] = "empty.jsonl"
        cfg["expand_lists"] = False
        Path("config.json").write_text(json.dumps(cfg))
        Path("plot_spec.json").write_text(json.dumps({"figures": [
            {"name": "fy", "type": "field_year_mean", "metric": "new_phrase"},
        ]}))
        for command in ("ingest", "baseline", "preprocess", "novelty",
                        "semdist", "cite", "plotdata"):
            assert run(command, "--config", "config.json") == 0
        lines = (workdir / "out" / "plotdata" / "fy.tsv").read_text().splitlines()
        assert lines == ["field\tyear\tn\tmean_new_phrase"]

    def test_title_only_mode_changes_termsets(self, workdir):
        for command in ("ingest", "baseline", "preprocess"):
            assert run(command, "--config", "config.json") == 0
        full = (workdir / "out" / "termsets.jsonl").read_bytes()
        cfg = json.loads(Path("config.json").read_text())
        cfg["mode"] = "title_only"
        Path("config.json").write_text(json.dumps(cfg))
        for command in ("baseline", "preprocess"):
            assert run(command, "--config", "config.json", "--force") == 0
        title_only = (workdir / "out" / "termsets.jsonl").read_bytes()
        assert title_only != full  # abstracts contributed terms

    def test_export_indicators_partition(self, workdir):
        assert run("all", "--config", "config.json") == 0
        lines = (workdir / "out" / "exports" /
                 "buckets_new_phrase.tsv").read_text().splitlines()
        header = lines[0].split("\t")
        assert header[1:] == [f"new_phrase_p{a}_{b}" for a, b in
                              [(90, 92), (92, 94), (94, 96), (96, 98),
                               (98, 100)]]
        for line in lines[1:]:
            cells = line.split("\t")
            assert sum(int(c) for c in cells[1:]) in (0, 1)
