"""Complex-valued signed-attention misinformation detector.

Posts and comments are encoded as mixtures of complex word states
(density matrices), related through a two-channel signed attention
mechanism, collapsed to real vectors by trainable rank-one measurements,
and classified by an affine head. Attention weights double as
explanations: each comment gets a stance and an importance score.
"""

from .attention import (
    AttentionBundle,
    AttentionParams,
    affinity,
    attention_maps,
    feature_matrices,
    run_attention,
    signed_weights,
)
from .autodiff import Graph, GradCheckReport, Tensor, backward, grad_check
from .cmatrix import CMat, cmul, csoftmax, ctanh
from .data_io import (
    CorpusExample,
    DropReport,
    build_vocab,
    load_corpus,
    load_embedding_table,
    preprocess,
    save_corpus,
    tokenize,
)
from .encoder import (
    DensityMatrix,
    GruCellParams,
    GruParams,
    WordState,
    contextualize,
    mixture,
    superpose,
    word_to_state,
)
from .explainer import (
    CommentSignature,
    comment_signature,
    comment_signatures,
    importance_rank,
    report,
    stance_label,
)
from .functional import softmax_signed
from .gradcheck import run_full_gradient_check
from .measurement import MeasurementBank, classify_loss, measure
from .model import ForwardResult, SignedAttentionModel, TrainConfig, build_model
from .trainer import Metrics, TrainResult, evaluate, fit, split_corpus

__all__ = [
    "AttentionBundle",
    "AttentionParams",
    "CMat",
    "CommentSignature",
    "CorpusExample",
    "DensityMatrix",
    "DropReport",
    "ForwardResult",
    "GradCheckReport",
    "Graph",
    "GruCellParams",
    "GruParams",
    "MeasurementBank",
    "Metrics",
    "SignedAttentionModel",
    "Tensor",
    "TrainConfig",
    "TrainResult",
    "WordState",
    "affinity",
    "attention_maps",
    "backward",
    "build_model",
    "build_vocab",
    "classify_loss",
    "cmul",
    "comment_signature",
    "comment_signatures",
    "contextualize",
    "csoftmax",
    "ctanh",
    "evaluate",
    "feature_matrices",
    "fit",
    "grad_check",
    "importance_rank",
    "load_corpus",
    "load_embedding_table",
    "measure",
    "mixture",
    "preprocess",
    "report",
    "run_attention",
    "run_full_gradient_check",
    "save_corpus",
    "signed_weights",
    "softmax_signed",
    "split_corpus",
    "stance_label",
    "superpose",
    "tokenize",
    "word_to_state",
]
