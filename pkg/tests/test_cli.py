import json

import pytest

from kgqa_rerank.cli import main
from kgqa_rerank.fixtures import (
    TOY_CANDIDATES,
    TOY_G0_TRIPLES,
    TOY_KG_TRIPLES,
    TOY_KG_LABELS,
    TOY_QUESTIONS,
    data_path,
)

G0 = str(data_path(TOY_G0_TRIPLES))
KG = str(data_path(TOY_KG_TRIPLES))
KG_LABELS = str(data_path(TOY_KG_LABELS))
QUESTIONS = str(data_path(TOY_QUESTIONS))
CANDIDATES = str(data_path(TOY_CANDIDATES))

EXPECTED_G0_TEXT = (
    "Alpha, related to, Beta; Alpha, member of, Delta; "
    "Beta, part of, [SEP] Gamma [SEP]; Delta, part of, [SEP] Gamma [SEP]"
)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_help_exits_zero(capsys):
    for argv in (["--help"], ["extract", "--help"], ["eval", "--help"]):
        with pytest.raises(SystemExit) as excinfo:
            main(argv)
        assert excinfo.value.code == 0
        capsys.readouterr()


def test_every_subcommand_has_help(capsys):
    for name in ("extract", "linearize", "metrics", "export-dataset",
                 "train-ranker", "rank", "eval", "answer"):
        with pytest.raises(SystemExit) as excinfo:
            main([name, "--help"])
        assert excinfo.value.code == 0
        out = capsys.readouterr().out
        assert name in out or "usage" in out


def test_unknown_subcommand_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 1


def test_unknown_flag_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["extract", "--graph", G0, "--entities", "Q1", "--candidate", "Q3", "--bogus"])
    assert excinfo.value.code == 1


def test_missing_required_flag_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["extract", "--graph", G0])
    assert excinfo.value.code == 1


def test_missing_file_data_error(capsys):
    code, _, err = run(capsys, "extract", "--graph", "/nope/missing.tsv",
                       "--entities", "Q1", "--candidate", "Q3")
    assert code == 2
    assert "error" in err


def test_linearize_example(capsys):
    code, out, _ = run(
        capsys, "linearize", "--graph", G0, "--entities", "Q1",
        "--candidate", "Q3", "--highlight",
    )
    assert code == 0
    assert out.strip() == EXPECTED_G0_TEXT


def test_extract_json(capsys):
    code, out, _ = run(
        capsys, "extract", "--graph", G0, "--entities", "Q1", "--candidate", "Q3"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["nodes"] == ["Q1", "Q2", "Q3", "Q4"]
    assert len(payload["edges"]) == 4


def test_eval_oracle_upper_bound(capsys, tmp_path):
    report_path = tmp_path / "report.json"
    code, out, _ = run(
        capsys, "eval", "--graph", KG, "--labels", KG_LABELS,
        "--questions", QUESTIONS, "--candidates", CANDIDATES,
        "--scorer", "oracle", "--out", str(report_path),
    )
    assert code == 0
    assert "ComplexityType" in out
    payload = json.loads(report_path.read_text())
    assert payload["overall"]["hits_at_1"] == payload["overall"]["hits_at_all"]


def test_eval_generation_bounded(capsys):
    code, out, _ = run(
        capsys, "eval", "--graph", KG, "--questions", QUESTIONS,
        "--candidates", CANDIDATES, "--scorer", "generation",
    )
    assert code == 0
    assert "All" in out


def test_full_cli_workflow_deterministic(capsys, tmp_path):
    subgraphs = tmp_path / "subgraphs.jsonl"
    model = tmp_path / "model.json"
    answers_a = tmp_path / "a.jsonl"
    answers_b = tmp_path / "b.jsonl"

    code, _, _ = run(
        capsys, "export-dataset", "--graph", KG, "--questions", QUESTIONS,
        "--candidates", CANDIDATES, "--out", str(subgraphs), "--jobs", "2",
    )
    assert code == 0
    assert subgraphs.exists()

    code, out, _ = run(
        capsys, "metrics", "--subgraphs", str(subgraphs)
    )
    assert code == 0
    assert out.startswith("Complexity Metrics")

    code, _, _ = run(
        capsys, "train-ranker", "--graph", KG, "--dataset", str(subgraphs),
        "--questions", QUESTIONS, "--model-out", str(model),
    )
    assert code == 0

    for out_path in (answers_a, answers_b):
        code, _, _ = run(
            capsys, "answer", "--graph", KG, "--questions", QUESTIONS,
            "--candidates", CANDIDATES, "--scorer", f"feature:{model}",
            "--seed", "3", "--out", str(out_path),
        )
        assert code == 0
    assert answers_a.read_bytes() == answers_b.read_bytes()

    first = json.loads(answers_a.read_text().splitlines()[0])
    assert set(first) == {"question_id", "question_type", "answer", "final_score"}


def test_rank_output_shape(capsys, tmp_path):
    out_path = tmp_path / "ranked.jsonl"
    code, _, _ = run(
        capsys, "rank", "--graph", KG, "--questions", QUESTIONS,
        "--candidates", CANDIDATES, "--scorer", "oracle", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    record = json.loads(lines[0])
    assert set(record) == {"question_id", "question_type", "answers"}
    answer = record["answers"][0]
    assert set(answer) == {"candidate", "final_score", "generation_rank", "rank_after"}


def test_remote_scorer_env_override(capsys, mock_scorer_url, monkeypatch):
    monkeypatch.setenv("KGQA_SCORER_URL", mock_scorer_url)
    code, out, _ = run(
        capsys, "eval", "--graph", KG, "--questions", QUESTIONS,
        "--candidates", CANDIDATES, "--scorer", "remote",
    )
    assert code == 0
    assert "All" in out


def test_config_file_supplies_flags(capsys, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(
        f"graph={KG}\nquestions={QUESTIONS}\ncandidates={CANDIDATES}\nscorer=oracle\n",
        encoding="utf-8",
    )
    code, out, _ = run(capsys, "eval", "--config", str(config))
    assert code == 0
    assert "ComplexityType" in out


def test_cli_flag_overrides_config(capsys, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(
        f"graph={KG}\nquestions={QUESTIONS}\ncandidates={CANDIDATES}\nscorer=oracle\nmax_hops=1\n",
        encoding="utf-8",
    )
    code, out, _ = run(capsys, "eval", "--config", str(config), "--max-hops", "4")
    assert code == 0


def test_neighbor_candidates_export(capsys, tmp_path):
    out_path = tmp_path / "neighbors.jsonl"
    code, _, _ = run(
        capsys, "export-dataset", "--graph", KG, "--questions", QUESTIONS,
        "--neighbor-candidates", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines
    assert any(json.loads(line)["is_correct"] for line in lines)
