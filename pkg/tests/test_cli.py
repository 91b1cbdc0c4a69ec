"""Command-line interface contracts."""

import json

import numpy as np
import pytest

from signet.cli import main
from signet.data_io import load_corpus, save_corpus
from signet.model import SignedAttentionModel
from synthetic import separable_corpus


@pytest.fixture()
def corpus_path(tmp_path):
    path = tmp_path / "corpus.jsonl"
    save_corpus(str(path), separable_corpus(0, 8))
    return str(path)


@pytest.fixture()
def config_path(tmp_path):
    cfg = {
        "state_dim": 4,
        "attention_dim": 3,
        "num_projectors": 4,
        "max_tokens": 6,
        "max_sentences": 2,
        "max_comments": 3,
        "epochs": 2,
        "seed": 7,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_help_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "train" in capsys.readouterr().out


def test_missing_subcommand_is_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code != 0


def test_eval_with_missing_model_names_path(tmp_path, corpus_path, capsys):
    missing = str(tmp_path / "nope.ckpt")
    code = main(["eval", "--model", missing, "--data", corpus_path])
    assert code != 0
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "nope.ckpt" in err
    assert len(err.strip().splitlines()) == 1


def test_train_rejects_bad_config_key(tmp_path, corpus_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"not_a_key": 1}))
    code = main(
        ["train", "--data", corpus_path, "--model", str(tmp_path / "m.ckpt"), "--config", str(bad)]
    )
    assert code != 0
    assert "not_a_key" in capsys.readouterr().err


def test_train_does_not_write_on_bad_data(tmp_path, capsys):
    model_path = tmp_path / "m.ckpt"
    code = main(["train", "--data", str(tmp_path / "absent.jsonl"), "--model", str(model_path)])
    assert code != 0
    assert not model_path.exists()


def test_full_pipeline(tmp_path, corpus_path, config_path, capsys):
    model_path = str(tmp_path / "model.ckpt")
    history_path = str(tmp_path / "loss.txt")
    metrics_path = str(tmp_path / "metrics.json")
    expl_path = str(tmp_path / "explanations.jsonl")

    assert main(
        [
            "train",
            "--data",
            corpus_path,
            "--model",
            model_path,
            "--config",
            config_path,
            "--history",
            history_path,
        ]
    ) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["epochs"] == 2

    assert main(["eval", "--model", model_path, "--data", corpus_path, "--out", metrics_path]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert set(metrics) >= {"accuracy", "precision", "recall", "f1"}
    assert json.loads(open(metrics_path).read()) == metrics

    assert main(
        ["explain", "--model", model_path, "--data", corpus_path, "--out", expl_path, "--k", "2"]
    ) == 0
    lines = open(expl_path).read().splitlines()
    assert len(lines) == 8
    record = json.loads(lines[0])
    assert set(record) >= {"id", "prediction", "p_false", "important", "supporting", "opposing"}
    assert len(open(history_path).read().splitlines()) == 2


def test_train_deterministic_checkpoints(tmp_path, corpus_path, config_path):
    m1 = str(tmp_path / "m1.ckpt")
    m2 = str(tmp_path / "m2.ckpt")
    assert main(["train", "--data", corpus_path, "--model", m1, "--config", config_path]) == 0
    assert main(["train", "--data", corpus_path, "--model", m2, "--config", config_path]) == 0
    assert open(m1, "rb").read() == open(m2, "rb").read()


def test_override_flags_win(tmp_path, corpus_path, config_path, capsys):
    model_path = str(tmp_path / "model.ckpt")
    assert main(
        [
            "train",
            "--data",
            corpus_path,
            "--model",
            model_path,
            "--config",
            config_path,
            "--epochs",
            "1",
            "--attention",
            "co",
            "--embedding",
            "real",
            "--seed",
            "9",
        ]
    ) == 0
    model = SignedAttentionModel.from_checkpoint(model_path)
    assert model.config.epochs == 1
    assert model.config.attention_mode == "co"
    assert model.config.embedding_mode == "real"
    assert model.config.seed == 9


def test_explain_rejects_co_attention_model(tmp_path, corpus_path, config_path, capsys):
    model_path = str(tmp_path / "co.ckpt")
    assert main(
        [
            "train", "--data", corpus_path, "--model", model_path,
            "--config", config_path, "--attention", "co", "--epochs", "0",
        ]
    ) == 0
    capsys.readouterr()
    code = main(
        ["explain", "--model", model_path, "--data", corpus_path, "--out", str(tmp_path / "e.jsonl")]
    )
    assert code != 0
    assert "co-attention" in capsys.readouterr().err


def test_gradcheck_command(capsys):
    assert main(["gradcheck", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "worst" in out


def test_preprocess_command(tmp_path, capsys):
    raw = tmp_path / "raw.jsonl"
    records = [
        {"id": "a", "label": 0, "post": ["s"], "comments": ["dup dup dup dup", "dup dup dup dup", "keep me please", "no", "also kept here"]},
        {"id": "b", "label": 1, "post": ["s"], "comments": ["xxxxxxxxxxxx", "yyyyyyyyyyyy"]},
    ]
    raw.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    out_path = str(tmp_path / "filtered.jsonl")
    report_path = str(tmp_path / "report.json")
    assert main(["preprocess", "--data", str(raw), "--out", out_path, "--report", report_path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["duplicate_comments_removed"] == 1
    assert report["short_comments_removed"] == 1
    assert report["posts_dropped_few_comments"] == 1
    assert report["posts_kept"] == 1
    kept, errors = load_corpus(out_path)
    assert errors == []
    assert [e.id for e in kept] == ["a"]
    assert json.loads(open(report_path).read()) == report
