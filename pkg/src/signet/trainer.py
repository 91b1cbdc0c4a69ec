"""Training loop, optimizers, and evaluation metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .data_io import CorpusExample, atomic_write_text
from .model import SignedAttentionModel, TrainConfig, build_model

log = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class Metrics:
    """Binary classification metrics with the false class (label 1) as positive."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TrainResult:
    model: SignedAttentionModel
    loss_history: list[float]


class SgdOptimizer:
    def __init__(self, params: dict[str, ad.Tensor], lr: float):
        self.params = params
        self.lr = lr

    def step(self) -> None:
        for t in self.params.values():
            if t.grad is not None:
                t.value -= self.lr * t.grad


class AdamOptimizer:
    """Adaptive moment optimizer (decays 0.9 / 0.999, epsilon 1e-8)."""

    def __init__(self, params: dict[str, ad.Tensor], lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(t.value) for k, t in params.items()}
        self.v = {k: np.zeros_like(t.value) for k, t in params.items()}

    def step(self) -> None:
        self.step_count += 1
        correction1 = 1.0 - self.beta1**self.step_count
        correction2 = 1.0 - self.beta2**self.step_count
        for name, t in self.params.items():
            if t.grad is None:
                continue
            g = t.grad
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[name] / correction1
            v_hat = self.v[name] / correction2
            t.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(model: SignedAttentionModel, cfg: TrainConfig):
    params = model.graph.trainable()
    if cfg.optimizer == "sgd":
        return SgdOptimizer(params, cfg.learning_rate)
    return AdamOptimizer(params, cfg.learning_rate)


def _validate_corpus(corpus: list[CorpusExample]) -> None:
    if not corpus:
        raise ValueError("corpus is empty")
    for ex in corpus:
        if not ex.post or not ex.comments:
            raise ValueError(
                f"example {ex.id!r} needs at least one sentence and one comment"
            )


def _check_finite(loss_value: float, model: SignedAttentionModel, example_id: str) -> None:
    if np.isfinite(loss_value):
        return
    offenders = [
        name
        for name, t in model.graph.parameters.items()
        if not np.all(np.isfinite(t.value))
        or (t.grad is not None and not np.all(np.isfinite(t.grad)))
    ]
    detail = f"parameter groups {offenders}" if offenders else "no parameter is non-finite"
    raise TrainingDivergedError(
        f"non-finite loss {loss_value!r} on example {example_id!r}; {detail}"
    )


def fit(
    corpus: list[CorpusExample],
    cfg: TrainConfig,
    *,
    model: SignedAttentionModel | None = None,
    embedding_table: dict[str, np.ndarray] | None = None,
) -> TrainResult:
    """Train on the corpus with one gradient step per example.

    Examples are reshuffled every epoch with a generator seeded from the
    config, so identical (seed, config, corpus) runs are bitwise identical.
    A pre-built ``model`` may be passed to continue training or to inspect
    the initialization; otherwise one is constructed from the corpus.
    """
    _validate_corpus(corpus)
    if model is None:
        model = build_model(cfg, corpus, embedding_table)
    optimizer = make_optimizer(model, cfg)
    shuffle_rng = np.random.default_rng(cfg.seed)
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(len(corpus))
        total = 0.0
        for idx in order:
            example = corpus[int(idx)]
            model.graph.zero_grad()
            result = model.forward(example)
            loss_value = float(result.loss.value[0, 0])
            ad.backward(result.loss)
            _check_finite(loss_value, model, example.id)
            optimizer.step()
            total += loss_value
        mean_loss = total / len(corpus)
        for name, t in model.graph.parameters.items():
            if not np.all(np.isfinite(t.value)):
                raise TrainingDivergedError(
                    f"parameter group {name!r} became non-finite after epoch {epoch + 1}"
                )
        history.append(mean_loss)
        log.debug("epoch %d mean loss %.6f", epoch + 1, mean_loss)
    return TrainResult(model=model, loss_history=history)


def evaluate(model: SignedAttentionModel, corpus: list[CorpusExample]) -> Metrics:
    """Confusion counts and derived metrics; prediction is the argmax class."""
    _validate_corpus(corpus)
    tp = fp = fn = tn = 0
    for ex in corpus:
        pred = model.predict(ex)
        if ex.label == 1 and pred == 1:
            tp += 1
        elif ex.label == 0 and pred == 1:
            fp += 1
        elif ex.label == 1 and pred == 0:
            fn += 1
        else:
            tn += 1
    return metrics_from_counts(tp, fp, fn, tn)


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return Metrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )


def split_corpus(
    corpus: list[CorpusExample], seed: int, train_fraction: float = 0.75
) -> tuple[list[CorpusExample], list[CorpusExample]]:
    """Seeded random train/test split (default 75/25)."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    n_train = int(len(corpus) * train_fraction)
    train = [corpus[int(i)] for i in order[:n_train]]
    test = [corpus[int(i)] for i in order[n_train:]]
    return train, test


def write_loss_history(path: str, history: list[float]) -> None:
    """Two-column plain text: epoch index and mean loss."""
    lines = [f"{epoch}\t{loss:.17g}" for epoch, loss in enumerate(history, start=1)]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
