"""The end-to-end network: encoder -> signed attention -> measurement.

Parameters live in a single Graph; the computation DAG is rebuilt per
example (posts are ragged, so there is no padded batching). Feature
matrices are measured in the fixed channel order
[sent_pos, sent_neg, com_pos, com_neg] (positive channels only in
co-attention mode) before classification.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import data_io
from . import measurement as ms
from .attention import AttentionBundle, AttentionParams, run_attention_nodes
from .autodiff import Graph, Tensor
from .cmatrix import CMat
from .data_io import CorpusExample, TensorRecord
from .encoder import (
    GruCellParams,
    GruParams,
    gru_sequence,
    init_token_embedding,
    mixture_nodes,
    normalized_state_nodes,
)
from .measurement import MeasurementBank

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Architecture and optimization hyperparameters for one run."""

    state_dim: int = 8  # dimension of the word state space
    attention_dim: int = 4  # width of the attention maps
    num_projectors: int = 16  # measurement states per feature matrix
    max_tokens: int = 32
    max_sentences: int = 8
    max_comments: int = 32
    learning_rate: float = 1e-3
    epochs: int = 50
    seed: int = 0
    attention_mode: str = "signed"  # "signed" | "co"
    embedding_mode: str = "complex"  # "complex" | "real"
    optimizer: str = "adam"  # "adam" | "sgd"
    embedding_path: str | None = None

    def __post_init__(self):
        for name in (
            "state_dim",
            "attention_dim",
            "num_projectors",
            "max_tokens",
            "max_sentences",
            "max_comments",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be nonnegative, got {self.epochs}")
        if self.attention_mode not in ("signed", "co"):
            raise ValueError(f"attention_mode must be 'signed' or 'co', got {self.attention_mode!r}")
        if self.embedding_mode not in ("complex", "real"):
            raise ValueError(
                f"embedding_mode must be 'complex' or 'real', got {self.embedding_mode!r}"
            )
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")

    @property
    def num_channels(self) -> int:
        return 4 if self.attention_mode == "signed" else 2

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ForwardResult:
    loss: Tensor
    logits: np.ndarray  # (2,)
    probabilities: np.ndarray  # (2,): [p_false, p_true]
    prediction: int  # predicted corpus label (1 = false)
    measurements: np.ndarray  # concatenated q row
    bundle: AttentionBundle

    @property
    def p_false(self) -> float:
        return float(self.probabilities[ms.FALSE_INDEX])


class SignedAttentionModel:
    """All trainable state plus the per-example forward pass."""

    def __init__(
        self,
        config: TrainConfig,
        vocab: list[str],
        embedding_table: dict[str, np.ndarray] | None = None,
    ):
        if not vocab:
            raise ValueError("vocabulary is empty")
        self.config = config
        self.vocab = list(vocab)
        self.token_index = {tok: i for i, tok in enumerate(self.vocab)}
        if len(self.token_index) != len(self.vocab):
            raise ValueError("vocabulary contains duplicate tokens")
        self.graph = Graph()
        self._truncation_logged = False
        self._init_parameters(embedding_table)

    def _init_parameters(self, table: dict[str, np.ndarray] | None) -> None:
        cfg = self.config
        d = cfg.state_dim
        amp_rows = np.empty((len(self.vocab), d))
        phase_rows = np.empty((len(self.vocab), d))
        for i, tok in enumerate(self.vocab):
            amp_rows[i], phase_rows[i] = init_token_embedding(tok, d, cfg.seed, table)
        complex_mode = cfg.embedding_mode == "complex"
        if not complex_mode:
            phase_rows[:] = 0.0
        self.amplitude_embedding = self.graph.parameter("embedding.amplitude", amp_rows)
        self.phase_embedding = self.graph.parameter(
            "embedding.phase", phase_rows, trainable=complex_mode
        )

        rng = np.random.default_rng(cfg.seed)
        amp_gru = GruCellParams.init(self.graph, "gru_amplitude", d, rng)
        phase_gru = GruCellParams.init(self.graph, "gru_phase", d, rng) if complex_mode else None
        self.gru = GruParams(amplitude=amp_gru, phase=phase_gru)
        self.mixture_logits = self.graph.parameter(
            "mixture.logits", rng.uniform(-0.1, 0.1, (1, cfg.max_tokens))
        )
        self.attention = AttentionParams.init(self.graph, d, cfg.attention_dim, rng)
        self.bank = MeasurementBank.init(
            self.graph, d, cfg.num_projectors, cfg.num_channels, rng
        )

    # ------------------------------------------------------------------
    # encoding

    def _token_ids(self, text: str) -> list[int]:
        tokens = data_io.tokenize(text)
        if len(tokens) > self.config.max_tokens:
            if not self._truncation_logged:
                log.warning(
                    "text of %d tokens truncated to %d", len(tokens), self.config.max_tokens
                )
                self._truncation_logged = True
            tokens = tokens[: self.config.max_tokens]
        ids = [self.token_index.get(t, 0) for t in tokens]
        return ids if ids else [0]

    def encode_text_nodes(self, text: str) -> CMat:
        """Density matrix of one sentence or comment, as graph nodes."""
        ids = self._token_ids(text)
        amp_seq = [ad.take_row(self.amplitude_embedding, i) for i in ids]
        amp_hidden = gru_sequence(amp_seq, self.gru.amplitude)
        if self.gru.phase is not None:
            phase_seq = [ad.take_row(self.phase_embedding, i) for i in ids]
            phase_hidden = gru_sequence(phase_seq, self.gru.phase)
        else:
            phase_hidden = [None] * len(ids)
        states = [normalized_state_nodes(a, p) for a, p in zip(amp_hidden, phase_hidden)]
        logits = ad.slice_cols(self.mixture_logits, 0, len(ids))
        return mixture_nodes(states, logits)

    def encode_example_nodes(self, example: CorpusExample) -> tuple[list[CMat], list[CMat]]:
        sentences = list(example.post)[: self.config.max_sentences]
        comments = list(example.comments)[: self.config.max_comments]
        if not sentences or not comments:
            raise ValueError(f"example {example.id!r} needs at least one sentence and one comment")
        return (
            [self.encode_text_nodes(s) for s in sentences],
            [self.encode_text_nodes(c) for c in comments],
        )

    # ------------------------------------------------------------------
    # forward

    def forward(self, example: CorpusExample) -> ForwardResult:
        sent_nodes, com_nodes = self.encode_example_nodes(example)
        attn = run_attention_nodes(sent_nodes, com_nodes, self.attention, self.config.attention_mode)
        if self.config.attention_mode == "signed":
            features = [
                attn.sent_pos_feature,
                attn.sent_neg_feature,
                attn.com_pos_feature,
                attn.com_neg_feature,
            ]
        else:
            features = [attn.sent_pos_feature, attn.com_pos_feature]
        q_cols = [ms.measure_nodes(f, self.bank) for f in features]
        q_row = ad.transpose(ad.concat_rows(q_cols))
        logits, probs, loss = ms.classify_loss_nodes(q_row, example.label, self.bank)
        predicted_index = int(np.argmax(probs))
        return ForwardResult(
            loss=loss,
            logits=logits.value.reshape(-1).copy(),
            probabilities=probs,
            prediction=ms.label_for_class_index(predicted_index),
            measurements=q_row.value.reshape(-1).copy(),
            bundle=attn.bundle,
        )

    def predict(self, example: CorpusExample) -> int:
        return self.forward(example).prediction

    # ------------------------------------------------------------------
    # persistence

    def _complex_pairs(self) -> dict[str, tuple[str, str]]:
        """name -> (re key, im key) for parameters stored as complex planes."""
        pairs = {}
        for key in self.graph.parameters:
            if key.endswith(".re"):
                base = key[: -len(".re")]
                if f"{base}.im" in self.graph.parameters:
                    pairs[base] = (key, f"{base}.im")
        return pairs

    def tensor_records(self) -> list[TensorRecord]:
        pairs = self._complex_pairs()
        plane_keys = {k for pair in pairs.values() for k in pair}
        records = []
        for key in sorted(self.graph.parameters):
            if key in plane_keys:
                continue
            records.append(TensorRecord(name=key, complex=False, re=self.graph.parameters[key].value.copy()))
        for base in sorted(pairs):
            re_key, im_key = pairs[base]
            records.append(
                TensorRecord(
                    name=base,
                    complex=True,
                    re=self.graph.parameters[re_key].value.copy(),
                    im=self.graph.parameters[im_key].value.copy(),
                )
            )
        return records

    def save(self, path: str) -> None:
        data_io.save_checkpoint(path, self.config.to_dict(), self.vocab, self.tensor_records())

    @classmethod
    def from_checkpoint(cls, path: str) -> "SignedAttentionModel":
        data = data_io.load_checkpoint(path)
        config = TrainConfig.from_dict(data.config)
        model = cls(config, data.vocab)
        loaded: set[str] = set()
        for rec in data.tensors.values():
            if rec.complex:
                targets = {f"{rec.name}.re": rec.re, f"{rec.name}.im": rec.im}
            else:
                targets = {rec.name: rec.re}
            for key, value in targets.items():
                if key not in model.graph.parameters:
                    raise data_io.CheckpointError(f"{path}: unexpected tensor {key!r}")
                param = model.graph.parameters[key]
                if param.value.shape != value.shape:
                    raise data_io.CheckpointError(
                        f"{path}: tensor {key!r} has shape {value.shape}, expected {param.value.shape}"
                    )
                param.value[...] = value
                loaded.add(key)
        missing = set(model.graph.parameters) - loaded
        if missing:
            raise data_io.CheckpointError(f"{path}: checkpoint lacks tensors {sorted(missing)}")
        return model


def build_model(
    config: TrainConfig,
    corpus: list[CorpusExample],
    embedding_table: dict[str, np.ndarray] | None = None,
) -> SignedAttentionModel:
    """Construct a model with a vocabulary drawn from the corpus."""
    return SignedAttentionModel(config, data_io.build_vocab(corpus), embedding_table)
