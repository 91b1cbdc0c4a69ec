"""Finite-difference verification of the full network's gradients.

Builds a small fixed fixture (2 sentences, 3 comments, state_dim 4,
attention_dim 3, 4 projectors), differentiates the per-example loss with
the engine, and compares every parameter entry against central
differences. Grouped reporting makes it obvious which part of the model a
bad adjoint lives in.
"""

from __future__ import annotations

from dataclasses import dataclass

from .autodiff import GradCheckReport, grad_check
from .data_io import CorpusExample
from .model import SignedAttentionModel, TrainConfig, build_model

REL_ERROR_LIMIT = 1e-4

GROUP_PREFIXES = (
    ("amplitude embedding", "embedding.amplitude"),
    ("phase embedding", "embedding.phase"),
    ("amplitude GRU", "gru_amplitude."),
    ("phase GRU", "gru_phase."),
    ("mixture logits", "mixture.logits"),
    ("attention projections", ("attention.sentence_proj", "attention.comment_proj")),
    ("positive sentence head", "attention.sent_pos_head"),
    ("negative sentence head", "attention.sent_neg_head"),
    ("positive comment head", "attention.com_pos_head"),
    ("negative comment head", "attention.com_neg_head"),
    ("measurement states", "measurement.states"),
    ("classifier", "classifier."),
)


def fixture_corpus() -> list[CorpusExample]:
    return [
        CorpusExample(
            id="fixture-0",
            label=1,
            post=("rain floods the valley", "rivers rise fast"),
            comments=(
                "the valley is dry today",
                "rivers rise fast indeed",
                "nothing happened at all",
            ),
        )
    ]


def fixture_config(seed: int = 0, attention_mode: str = "signed") -> TrainConfig:
    return TrainConfig(
        state_dim=4,
        attention_dim=3,
        num_projectors=4,
        max_tokens=6,
        max_sentences=4,
        max_comments=4,
        seed=seed,
        attention_mode=attention_mode,
    )


def fixture_model(seed: int = 0, attention_mode: str = "signed") -> SignedAttentionModel:
    return build_model(fixture_config(seed, attention_mode), fixture_corpus())


@dataclass
class GroupedReport:
    worst: float
    groups: dict[str, float]
    raw: GradCheckReport

    def passed(self, limit: float = REL_ERROR_LIMIT) -> bool:
        return self.worst < limit

    def lines(self) -> list[str]:
        out = [f"{name}: max relative error {err:.3e}" for name, err in self.groups.items()]
        out.append(f"worst overall: {self.worst:.3e}")
        return out


def group_report(report: GradCheckReport) -> GroupedReport:
    groups: dict[str, float] = {}
    for label, prefixes in GROUP_PREFIXES:
        if isinstance(prefixes, str):
            prefixes = (prefixes,)
        errs = [
            err
            for name, err in report.per_parameter.items()
            if any(name.startswith(p) for p in prefixes)
        ]
        if errs:
            groups[label] = max(errs)
    return GroupedReport(worst=report.worst, groups=groups, raw=report)


def run_full_gradient_check(
    seed: int = 0, *, attention_mode: str = "signed", step: float = 1e-5
) -> GroupedReport:
    """Grad-check every trainable parameter of the fixture model."""
    model = fixture_model(seed, attention_mode)
    example = fixture_corpus()[0]

    def loss_fn():
        return model.forward(example).loss

    report = grad_check(loss_fn, model.graph.trainable(), step=step)
    return group_report(report)
