"""Command-line entry point: train / eval / explain / gradcheck / preprocess."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import data_io, explainer, gradcheck, trainer
from .measurement import DegenerateProjectorError
from .model import SignedAttentionModel, TrainConfig


class CliError(Exception):
    pass


def _load_config(path: str | None, overrides: dict) -> TrainConfig:
    values: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                values = json.load(fh)
        except FileNotFoundError:
            raise CliError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise CliError(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(values, dict):
            raise CliError(f"config file {path} must hold a JSON object")
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return TrainConfig.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad configuration: {exc}")


def _load_corpus_or_fail(path: str) -> list[data_io.CorpusExample]:
    try:
        examples, errors = data_io.load_corpus(path)
    except OSError as exc:
        raise CliError(f"cannot read corpus {path}: {exc.strerror or exc}")
    for err in errors:
        print(f"warning: {path}: {err.message}", file=sys.stderr)
    if not examples:
        raise CliError(f"corpus {path} contains no usable examples")
    return examples


def _load_model_or_fail(path: str) -> SignedAttentionModel:
    try:
        return SignedAttentionModel.from_checkpoint(path)
    except FileNotFoundError:
        raise CliError(f"model checkpoint not found: {path}")
    except data_io.CheckpointError as exc:
        raise CliError(str(exc))


def _cmd_train(args) -> int:
    cfg = _load_config(
        args.config,
        {
            "seed": args.seed,
            "epochs": args.epochs,
            "attention_mode": args.attention,
            "embedding_mode": args.embedding,
            "embedding_path": args.embeddings,
        },
    )
    corpus = _load_corpus_or_fail(args.data)
    table = None
    if cfg.embedding_path:
        try:
            table = data_io.load_embedding_table(cfg.embedding_path, cfg.state_dim)
        except FileNotFoundError:
            raise CliError(f"embedding file not found: {cfg.embedding_path}")
        except data_io.CorpusFormatError as exc:
            raise CliError(str(exc))
    try:
        result = trainer.fit(corpus, cfg, embedding_table=table)
    except (ValueError, trainer.TrainingDivergedError) as exc:
        raise CliError(str(exc))
    result.model.save(args.model)
    if args.history:
        trainer.write_loss_history(args.history, result.loss_history)
    final = result.loss_history[-1] if result.loss_history else float("nan")
    print(
        json.dumps(
            {"epochs": cfg.epochs, "final_mean_loss": final, "model": args.model},
            sort_keys=True,
        )
    )
    return 0


def _cmd_eval(args) -> int:
    model = _load_model_or_fail(args.model)
    corpus = _load_corpus_or_fail(args.data)
    try:
        metrics = trainer.evaluate(model, corpus)
    except (ValueError, DegenerateProjectorError) as exc:
        raise CliError(str(exc))
    record = json.dumps(metrics.as_dict(), sort_keys=True)
    print(record)
    if args.out:
        data_io.atomic_write_text(args.out, record + "\n")
    return 0


def _cmd_explain(args) -> int:
    model = _load_model_or_fail(args.model)
    if model.config.attention_mode != "signed":
        raise CliError(
            "explanations need a signed-attention model; this checkpoint was "
            "trained in co-attention mode"
        )
    corpus = _load_corpus_or_fail(args.data)
    if args.k < 1:
        raise CliError(f"--k must be >= 1, got {args.k}")
    records = [explainer.report(ex, model, args.k) for ex in corpus]
    explainer.write_explanations(args.out, records)
    print(json.dumps({"posts": len(records), "out": args.out}, sort_keys=True))
    return 0


def _cmd_gradcheck(args) -> int:
    report = gradcheck.run_full_gradient_check(seed=args.seed)
    for line in report.lines():
        print(line)
    if report.passed():
        print(f"PASS: worst relative error {report.worst:.3e} < {gradcheck.REL_ERROR_LIMIT:g}")
        return 0
    print(f"FAIL: worst relative error {report.worst:.3e} >= {gradcheck.REL_ERROR_LIMIT:g}")
    return 1


def _cmd_preprocess(args) -> int:
    examples = _load_corpus_or_fail(args.data)
    kept, drop_report = data_io.preprocess(examples)
    data_io.save_corpus(args.out, kept)
    record = json.dumps(drop_report.as_dict(), sort_keys=True)
    print(record)
    if args.report:
        data_io.atomic_write_text(args.report, record + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signet",
        description=(
            "Complex-valued signed-attention classifier for post/comment "
            "misinformation detection. Config files are JSON objects with "
            "TrainConfig keys (state_dim, attention_dim, num_projectors, "
            "max_tokens, max_sentences, max_comments, learning_rate, epochs, "
            "seed, attention_mode, embedding_mode, optimizer, embedding_path); "
            "command-line flags override file values."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model and write a checkpoint")
    p.add_argument("--data", required=True, help="training corpus (JSON lines)")
    p.add_argument("--model", required=True, help="output checkpoint path")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--history", help="output path for the epoch/loss table")
    p.add_argument("--embeddings", help="pretrained amplitude embedding file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--epochs", type=int, help="override the config epoch count")
    p.add_argument("--attention", choices=["signed", "co"], help="attention mode")
    p.add_argument("--embedding", choices=["complex", "real"], help="embedding mode")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="also write the metrics record here")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("explain", help="write ranked comment explanations")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output JSON-lines path")
    p.add_argument("--k", type=int, default=5, help="list length (default 5)")
    p.set_defaults(fn=_cmd_explain)

    p = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_gradcheck)

    p = sub.add_parser("preprocess", help="apply the corpus filtering rules")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="filtered corpus path")
    p.add_argument("--report", help="also write the drop report here")
    p.set_defaults(fn=_cmd_preprocess)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
