import json

import pytest
from click.testing import CliRunner
from pydantic import BaseModel, ValidationError

from src.cli import cli
from src.cli.runner import pairs_within
from src.config import ConfigurationError
from src.database import ContainerFormatError, load_graph_records, load_submaps, save_graph_records, save_index
from src.errors import CommandUsageError, InvalidInputError
from src.middleware import CommandErrorHandler
from src.utils import read_jsonl


pytestmark = pytest.mark.integration

SMALL = ["-o", "egnn_hidden=16", "-o", "egnn_layers=2", "-o", "enriched_dim=32", "-o", "embedding_dim=16",
         "-o", "tnn_slices=4"]


def _invoke(out, *args):
    return CliRunner().invoke(cli, ["--out", str(out), *SMALL, *args], catch_exceptions=False)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A synthetic world taken through synth, build and extract"""
    out = tmp_path_factory.mktemp("run")
    for command in (["--seed", "3", "synth", "--submaps", "20", "--revisit-fraction", "0.2"], ["build"], ["extract"]):
        result = _invoke(out, *command)
        assert result.exit_code == 0, result.output
    return out


def test_pipeline_files(workspace):
    assert (workspace / "sequence" / "poses.txt").is_file()
    assert len(load_submaps(workspace / "submaps.rgrc")) == 20
    records = load_graph_records(workspace / "graphs.rgrc")
    assert len(records) == 20
    assert all(r.embedding.shape == (16,) for r in records)


def test_index_and_query(workspace):
    assert _invoke(workspace, "index").exit_code == 0
    assert _invoke(workspace, "query").exit_code == 0
    decisions = read_jsonl(workspace / "decisions.jsonl")
    assert len(decisions) == 20
    assert {d["mode"] for d in decisions} == {"consistency"}


def test_eval_pr_reports_every_mode(workspace):
    result = _invoke(workspace, "eval-pr")
    assert result.exit_code == 0, result.output
    metrics = read_jsonl(workspace / "metrics.jsonl")
    assert {m["mode"] for m in metrics} == {"embedding", "rerank", "consistency"}
    assert all(0.0 <= m["f1_max"] <= 1.0 for m in metrics)
    assert (workspace / "pr_curve.jsonl").is_file()


def test_eval_pr_from_stored_decisions(workspace):
    result = _invoke(workspace, "eval-pr", "--decisions", str(workspace / "decisions.jsonl"))
    assert result.exit_code == 0, result.output
    assert [m["mode"] for m in read_jsonl(workspace / "metrics.jsonl")] == ["consistency"]


def test_register_listed_pairs(workspace):
    revisits = read_jsonl(workspace / "sequence" / "revisits.jsonl")
    with open(workspace / "pairs.jsonl", "w") as f:
        for r in revisits:
            f.write(json.dumps({"query": r["query"], "candidate": r["match"]}) + "\n")

    assert _invoke(workspace, "register").exit_code == 0
    rows = read_jsonl(workspace / "registrations.jsonl")
    assert [(r["query"], r["candidate"]) for r in rows] == [(r["query"], r["match"]) for r in revisits]


def test_eval_reg(workspace):
    assert _invoke(workspace, "eval-reg").exit_code == 0
    report = read_jsonl(workspace / "metrics.jsonl")[0]
    assert 0.0 <= report["accuracy"] <= 1.0


def test_init_weights_feed_extract(tmp_path, workspace):
    assert _invoke(tmp_path, "init-weights").exit_code == 0
    weights = tmp_path / "weights.rgrc"
    assert weights.is_file()
    result = _invoke(
        tmp_path, "-o", f"weights_path={weights}", "extract", "--submaps", str(workspace / "submaps.rgrc")
    )
    assert result.exit_code == 0, result.output
    assert len(load_graph_records(tmp_path / "graphs.rgrc")) == 20


def test_query_against_empty_index(tmp_path):
    save_index(tmp_path / "index.rgrc", [])
    save_graph_records(tmp_path / "graphs.rgrc", [])
    assert _invoke(tmp_path, "query").exit_code == 0
    assert read_jsonl(tmp_path / "decisions.jsonl") == []


def test_missing_input_is_a_usage_error(tmp_path):
    assert _invoke(tmp_path, "extract").exit_code == 2


def test_unknown_config_key(tmp_path):
    assert _invoke(tmp_path, "-o", "voxel_sise=0.2", "index").exit_code == 3


def test_missing_config_file(tmp_path):
    result = CliRunner().invoke(cli, ["--config", str(tmp_path / "absent.yml"), "--out", str(tmp_path), "index"])
    assert result.exit_code == 6


def test_corrupt_container_is_a_format_error(tmp_path):
    (tmp_path / "submaps.rgrc").write_bytes(b"garbage")
    assert _invoke(tmp_path, "extract").exit_code == 4


class _Strict(BaseModel):
    value: int


def _validation_error():
    try:
        _Strict(value="x")
    except ValidationError as e:
        return e


@pytest.mark.parametrize(
    "error, expected",
    [
        (CommandUsageError("x"), ("USAGE_ERROR", 2)),
        (ConfigurationError("x"), ("CONFIG_ERROR", 3)),
        (_validation_error(), ("CONFIG_ERROR", 3)),
        (ContainerFormatError("x"), ("FORMAT_ERROR", 4)),
        (InvalidInputError("x"), ("INVALID_INPUT", 5)),
        (FileNotFoundError("x"), ("FILE_NOT_FOUND", 6)),
        (RuntimeError("x"), ("INTERNAL_ERROR", 1)),
    ],
)
def test_error_classification(error, expected):
    assert CommandErrorHandler("test").classify(error) == expected


def test_unexpected_errors_keep_the_traceback():
    def boom():
        raise RuntimeError("boom")

    handler = CommandErrorHandler("test")
    assert handler.run(boom) == 1
    assert handler.describe(RuntimeError("boom")).error_message.startswith("An unexpected error occurred")


def test_pairs_within(workspace):
    records = load_graph_records(workspace / "graphs.rgrc")
    pairs = pairs_within(records, 20.0)
    by_id = {r.id: r for r in records}
    revisits = {(r["query"], r["match"]) for r in read_jsonl(workspace / "sequence" / "revisits.jsonl")}
    assert revisits <= set(pairs)
    for later, earlier in pairs:
        assert by_id[later].timestamp >= by_id[earlier].timestamp
