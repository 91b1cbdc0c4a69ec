"""Two-channel signed attention between post sentences and comments.

The affinity between a sentence and a comment is the trace overlap of
their density matrices, squashed by tanh. Attention maps mix each side's
projected features with the affinity-weighted features of the other side.
Each map is scored by a positive head and a negative head; the positive
channel softmax-normalizes the scores while the negative channel applies
-softmax(-x), so strongly negative scores dominate it. Each channel then
produces a complex feature matrix as the weighted sum of the side's
density matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import cmatrix as cm
from .autodiff import Graph, ShapeMismatchError, Tensor
from .cmatrix import CMat
from .encoder import DensityMatrix

MODES = ("signed", "co")

# |imaginary residue| allowed when taking the real part of a trace overlap
AFFINITY_IMAG_TOL = 1e-8


@dataclass
class AttentionParams:
    """Trainable attention weights.

    ``sentence_proj`` and ``comment_proj`` are the d*d x k map projections
    (the two density-matrix indices are contracted jointly, so the logical
    d x d x k weight is stored with its first two axes flattened).
    """

    sentence_proj: CMat
    comment_proj: CMat
    sent_pos_head: CMat
    sent_neg_head: CMat
    com_pos_head: CMat
    com_neg_head: CMat

    @classmethod
    def init(cls, graph: Graph, dim: int, k: int, rng: np.random.Generator) -> "AttentionParams":
        def cparam(name: str, rows: int, cols: int) -> CMat:
            re = graph.parameter(f"{name}.re", rng.uniform(-0.1, 0.1, size=(rows, cols)))
            im = graph.parameter(f"{name}.im", rng.uniform(-0.1, 0.1, size=(rows, cols)))
            return CMat(re, im)

        return cls(
            sentence_proj=cparam("attention.sentence_proj", dim * dim, k),
            comment_proj=cparam("attention.comment_proj", dim * dim, k),
            sent_pos_head=cparam("attention.sent_pos_head", 1, k),
            sent_neg_head=cparam("attention.sent_neg_head", 1, k),
            com_pos_head=cparam("attention.com_pos_head", 1, k),
            com_neg_head=cparam("attention.com_neg_head", 1, k),
        )

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray]) -> "AttentionParams":
        def cconst(name: str) -> CMat:
            return CMat(ad.constant(arrays[f"{name}.re"]), ad.constant(arrays[f"{name}.im"]))

        return cls(
            sentence_proj=cconst("attention.sentence_proj"),
            comment_proj=cconst("attention.comment_proj"),
            sent_pos_head=cconst("attention.sent_pos_head"),
            sent_neg_head=cconst("attention.sent_neg_head"),
            com_pos_head=cconst("attention.com_pos_head"),
            com_neg_head=cconst("attention.com_neg_head"),
        )


@dataclass
class AttentionBundle:
    """Everything the forward pass computed for one post, as plain arrays.

    The raw (pre-softmax) channel scores are retained so explanations can be
    produced without re-running the network.
    """

    overlap: np.ndarray  # real (N, T), trace overlaps in [0, 1]
    affinity: np.ndarray  # tanh(overlap)
    sentence_map: np.ndarray  # complex (N, k)
    comment_map: np.ndarray  # complex (T, k)
    sent_pos: np.ndarray  # complex (1, N), each part sums to 1
    com_pos: np.ndarray  # complex (1, T)
    raw_sent_pos: np.ndarray  # complex (1, N), pre-softmax
    raw_com_pos: np.ndarray
    sent_neg: np.ndarray | None = None  # complex (1, N), each part sums to -1
    com_neg: np.ndarray | None = None
    raw_sent_neg: np.ndarray | None = None
    raw_com_neg: np.ndarray | None = None

    @property
    def num_comments(self) -> int:
        return self.com_pos.shape[1]

    @property
    def signed(self) -> bool:
        return self.com_neg is not None


@dataclass
class AttentionNodes:
    """Graph-side results of one attention pass."""

    sent_pos_feature: CMat
    com_pos_feature: CMat
    sent_neg_feature: CMat | None
    com_neg_feature: CMat | None
    bundle: AttentionBundle


def _flatten_stack(mats: list[CMat], transpose_each: bool = False) -> CMat:
    rows = []
    for m in mats:
        if m.shape[0] != m.shape[1]:
            raise ShapeMismatchError(f"density matrix is not square: {m.shape}")
        src = cm.transpose(m) if transpose_each else m
        rows.append(cm.reshape(src, 1, m.shape[0] * m.shape[1]))
    return cm.concat_rows(rows)


def affinity_nodes(sent: list[CMat], com: list[CMat]) -> tuple[Tensor, Tensor]:
    """Trace-overlap matrix and its tanh, as graph nodes.

    overlap[i, j] = tr(rho_sent_i @ rho_com_j), taken as its real part. For
    Hermitian inputs the imaginary part vanishes identically; a residue
    above tolerance means a non-Hermitian matrix slipped in.
    """
    if not sent or not com:
        raise ValueError("affinity requires at least one sentence and one comment")
    d = sent[0].shape[0]
    for m in sent + com:
        if m.shape != (d, d):
            raise ShapeMismatchError(f"density matrix shape {m.shape} != ({d}, {d})")
    left = _flatten_stack(sent)
    right = _flatten_stack(com, transpose_each=True)
    product = cm.cmul(left, cm.transpose(right))
    residue = float(np.max(np.abs(product.im.value)))
    if residue >= AFFINITY_IMAG_TOL:
        raise ValueError(
            f"trace overlaps have imaginary residue {residue:.3e}; inputs are not Hermitian"
        )
    overlap = product.re
    return overlap, ad.tanh(overlap)


def attention_map_nodes(
    sent: list[CMat],
    com: list[CMat],
    affinity: Tensor,
    params: AttentionParams,
) -> tuple[CMat, CMat]:
    """Sentence and comment attention maps.

    Each density matrix is double-contracted with the (flattened) d x d x k
    projection, then the affinity matrix injects the other side's projected
    features before the complex tanh.
    """
    n, t = affinity.shape
    if len(sent) != n or len(com) != t:
        raise ShapeMismatchError(
            f"affinity shape {affinity.shape} does not match {len(sent)} sentences / "
            f"{len(com)} comments"
        )
    sent_flat = _flatten_stack(sent)
    com_flat = _flatten_stack(com)
    sent_proj = cm.cmul(sent_flat, params.sentence_proj)  # (N, k)
    com_proj = cm.cmul(com_flat, params.comment_proj)  # (T, k)
    sent_map = cm.ctanh(sent_proj + cm.real_matmul(affinity, com_proj))
    com_map = cm.ctanh(com_proj + cm.real_matmul(ad.transpose(affinity), sent_proj))
    return sent_map, com_map


def signed_weight_nodes(
    attn_map: CMat, pos_head: CMat, neg_head: CMat | None
) -> tuple[CMat, CMat | None, CMat, CMat | None]:
    """Channel weights for one side: (pos, neg, raw_pos, raw_neg).

    raw = head @ map^T is a complex row of unnormalized scores; the pos
    channel softmaxes each part and the neg channel applies -softmax(-x)
    per part. With ``neg_head`` None only the positive channel is computed.
    """
    raw_pos = cm.cmul(pos_head, cm.transpose(attn_map))
    a_pos = cm.csoftmax(raw_pos, "pos")
    if neg_head is None:
        return a_pos, None, raw_pos, None
    raw_neg = cm.cmul(neg_head, cm.transpose(attn_map))
    a_neg = cm.csoftmax(raw_neg, "neg")
    return a_pos, a_neg, raw_pos, raw_neg


def feature_matrix_nodes(weights: CMat, mats: list[CMat]) -> CMat:
    """Complex-weighted sum of density matrices: sum_i a_i rho_i."""
    if weights.shape != (1, len(mats)):
        raise ShapeMismatchError(
            f"weights shape {weights.shape} does not match {len(mats)} matrices"
        )
    d = mats[0].shape[0]
    flat = _flatten_stack(mats)
    return cm.reshape(cm.cmul(weights, flat), d, d)


def run_attention_nodes(
    sent: list[CMat], com: list[CMat], params: AttentionParams, mode: str = "signed"
) -> AttentionNodes:
    """Full attention pass over graph nodes; mode "co" computes only the
    positive channels."""
    if mode not in MODES:
        raise ValueError(f"unknown attention mode {mode!r}, expected one of {MODES}")
    overlap, affinity = affinity_nodes(sent, com)
    sent_map, com_map = attention_map_nodes(sent, com, affinity, params)
    signed = mode == "signed"
    s_pos, s_neg, s_raw_pos, s_raw_neg = signed_weight_nodes(
        sent_map, params.sent_pos_head, params.sent_neg_head if signed else None
    )
    c_pos, c_neg, c_raw_pos, c_raw_neg = signed_weight_nodes(
        com_map, params.com_pos_head, params.com_neg_head if signed else None
    )
    bundle = AttentionBundle(
        overlap=overlap.value.copy(),
        affinity=affinity.value.copy(),
        sentence_map=sent_map.to_complex(),
        comment_map=com_map.to_complex(),
        sent_pos=s_pos.to_complex(),
        com_pos=c_pos.to_complex(),
        raw_sent_pos=s_raw_pos.to_complex(),
        raw_com_pos=c_raw_pos.to_complex(),
        sent_neg=s_neg.to_complex() if signed else None,
        com_neg=c_neg.to_complex() if signed else None,
        raw_sent_neg=s_raw_neg.to_complex() if signed else None,
        raw_com_neg=c_raw_neg.to_complex() if signed else None,
    )
    return AttentionNodes(
        sent_pos_feature=feature_matrix_nodes(s_pos, sent),
        com_pos_feature=feature_matrix_nodes(c_pos, com),
        sent_neg_feature=feature_matrix_nodes(s_neg, sent) if signed else None,
        com_neg_feature=feature_matrix_nodes(c_neg, com) if signed else None,
        bundle=bundle,
    )


# ---------------------------------------------------------------------------
# array-level API


def _to_nodes(mats: list[DensityMatrix]) -> list[CMat]:
    return [CMat.from_complex(m.mat) for m in mats]


def affinity(sent: list[DensityMatrix], com: list[DensityMatrix]) -> tuple[np.ndarray, np.ndarray]:
    """(overlap, affinity) matrices for density-matrix lists."""
    overlap, aff = affinity_nodes(_to_nodes(sent), _to_nodes(com))
    return overlap.value.copy(), aff.value.copy()


def attention_maps(
    sent: list[DensityMatrix],
    com: list[DensityMatrix],
    affinity_matrix: np.ndarray,
    params: AttentionParams,
) -> tuple[np.ndarray, np.ndarray]:
    sent_map, com_map = attention_map_nodes(
        _to_nodes(sent), _to_nodes(com), ad.constant(affinity_matrix), params
    )
    return sent_map.to_complex(), com_map.to_complex()


def signed_weights(
    attn_map: np.ndarray, pos_head: np.ndarray, neg_head: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    a_pos, a_neg, raw_pos, raw_neg = signed_weight_nodes(
        CMat.from_complex(attn_map),
        CMat.from_complex(pos_head),
        CMat.from_complex(neg_head),
    )
    return a_pos.to_complex(), a_neg.to_complex(), raw_pos.to_complex(), raw_neg.to_complex()


def feature_matrices(weights: np.ndarray, mats: list[DensityMatrix]) -> DensityMatrix:
    out = feature_matrix_nodes(CMat.from_complex(weights), _to_nodes(mats))
    return DensityMatrix(mat=out.to_complex(), kind="feature")


def run_attention(
    sent: list[DensityMatrix],
    com: list[DensityMatrix],
    params: AttentionParams,
    mode: str = "signed",
) -> tuple[dict[str, DensityMatrix], AttentionBundle]:
    """Array-level attention pass; returns the per-channel feature matrices
    keyed as sent_pos / com_pos (and sent_neg / com_neg in signed mode)."""
    nodes = run_attention_nodes(_to_nodes(sent), _to_nodes(com), params, mode)
    features = {
        "sent_pos": DensityMatrix(nodes.sent_pos_feature.to_complex(), kind="feature"),
        "com_pos": DensityMatrix(nodes.com_pos_feature.to_complex(), kind="feature"),
    }
    if nodes.sent_neg_feature is not None:
        features["sent_neg"] = DensityMatrix(nodes.sent_neg_feature.to_complex(), kind="feature")
        features["com_neg"] = DensityMatrix(nodes.com_neg_feature.to_complex(), kind="feature")
    return features, nodes.bundle
