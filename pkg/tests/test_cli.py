import json

import pytest

from eventir.cli import EXIT_DATA, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(scope="module")
def syn(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "syn"
    assert main(["gen-synthetic", "--out", str(out), "--seed", "3", "--articles", "60", "--queries", "12"]) == EXIT_OK
    return out


def test_index_then_retrieve_and_evaluate(syn, tmp_path, capsys):
    cfg = str(syn / "config.yaml")
    assert main(["index", "--config", cfg, "--out", str(tmp_path / "idx")]) == EXIT_OK
    assert (tmp_path / "idx" / "lexical.eidx").exists()
    run = tmp_path / "run.jsonl"
    assert main(["retrieve", "--config", cfg, "--output", str(run), "--trace"]) == EXIT_OK
    traces = (tmp_path / "run.jsonl.trace.jsonl").read_text().splitlines()
    assert len(traces) == 12 and "timings_ms" in json.loads(traces[0])
    capsys.readouterr()
    report = tmp_path / "report.json"
    assert main(["evaluate", "--config", cfg, "--run", str(run), "--report", str(report)]) == EXIT_OK
    assert "mAP      1.0000" in capsys.readouterr().out
    assert json.loads(report.read_text())["mAP"] == 1.0


def test_search_prints_article_ranking(syn, capsys):
    assert main(["search", "--config", str(syn / "config.yaml"), "--query-id", "Q0000"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    planted = json.loads((syn / "planted.jsonl").read_text().splitlines()[0])
    assert lines[0].split("\t")[1] == planted["article_id"]
    assert main(["search", "--config", str(syn / "config.yaml"), "--text", "anything", "--json"]) == EXIT_OK
    assert set(json.loads(capsys.readouterr().out)) == {"entity_branch", "bm25_branch", "fused_articles"}


def test_inspect(syn, capsys):
    assert main(["inspect", "--config", str(syn / "config.yaml"), "--query-id", "Q0001", "--trace"]) == EXIT_OK
    d = json.loads(capsys.readouterr().out)
    assert d["query_id"] == "Q0001"
    assert set(d["timings_ms"]) == {"entity_branch", "bm25_branch", "article_fusion", "candidates",
                                    "similarity", "rerank"}


def test_retrieve_is_byte_deterministic(syn, tmp_path):
    cfg = str(syn / "config.yaml")
    a, b, c = tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"
    assert main(["retrieve", "--config", cfg, "-o", str(a)]) == EXIT_OK
    assert main(["retrieve", "--config", cfg, "-o", str(b)]) == EXIT_OK
    assert main(["retrieve", "--config", cfg, "-o", str(c), "--workers", "4"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_gen_synthetic_extra_config_location(tmp_path):
    out = tmp_path / "data"
    cfg = tmp_path / "elsewhere" / "cfg.yaml"
    cfg.parent.mkdir()
    assert main(["gen-synthetic", "--config", str(cfg), "--out", str(out), "--articles", "20", "--queries", "4"]) == EXIT_OK
    run = tmp_path / "run.jsonl"
    assert main(["retrieve", "--config", str(cfg), "-o", str(run)]) == EXIT_OK


def test_usage_errors_exit_1(syn, capsys):
    assert main(["no-such-command"]) == EXIT_USAGE
    assert main(["search", "--query-id", "Q0000"]) == EXIT_USAGE
    assert main(["search", "--config", str(syn / "config.yaml")]) == EXIT_USAGE
    assert main(["evaluate", "--run", str(syn / "queries.jsonl"), "--truth", str(syn / "ground_truth.jsonl"),
                 "--ks", "a,b"]) == EXIT_USAGE
    assert main(["gen-synthetic", "--out", "x", "--articles", "5", "--queries", "9"]) == EXIT_USAGE


def test_data_errors_exit_2(syn, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{oops\n")
    assert main(["evaluate", "--run", str(bad), "--truth", str(syn / "ground_truth.jsonl")]) == EXIT_DATA
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("articles: missing.jsonl\nimages: missing.jsonl\n")
    assert main(["search", "--config", str(cfg), "--text", "x"]) == EXIT_DATA
    cfg.write_text("not: [valid")
    assert main(["search", "--config", str(cfg), "--text", "x"]) == EXIT_DATA
    assert main(["search", "--config", str(syn / "config.yaml"), "--query-id", "nope"]) == EXIT_DATA


def test_invariant_violation_exit_3(monkeypatch, syn):
    from eventir import cli
    from eventir.errors import InvariantViolation

    def broken(*a, **k):
        raise InvariantViolation("boom")

    monkeypatch.setattr(cli.RetrievalSystem, "from_config", broken)
    assert main(["search", "--config", str(syn / "config.yaml"), "--text", "x"]) == EXIT_INVARIANT


def test_help_exits_0(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "gen-synthetic" in capsys.readouterr().out
