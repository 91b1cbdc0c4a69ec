"""Stance and importance of comments, read off the attention weights.

Each comment carries a raw score quadruple (re+, im+ | re-, im-): the real
and imaginary parts of its unnormalized positive- and negative-channel
scores. Their moduli s+ / s- measure per-view importance; the moduli of the
normalized channel weights, sn+ / sn-, are comparable across comments and
their gap imp = |sn+ - sn-| measures overall importance. Stance follows
sign rules: both positive-channel parts positive marks support, both
negative-channel parts negative marks opposition, a conflict is resolved by
ranking s- against s+ across all comments, and everything else is neutral.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .attention import AttentionBundle
from .data_io import CorpusExample, atomic_write_text
from .model import SignedAttentionModel

SUPPORTING = "supporting"
OPPOSING = "opposing"
NEUTRAL = "neutral"


@dataclass(frozen=True)
class CommentSignature:
    comment_index: int
    re_pos: float
    im_pos: float
    re_neg: float
    im_neg: float
    s_plus: float  # modulus of the raw positive score
    s_minus: float  # modulus of the raw negative score
    sn_plus: float  # modulus of the normalized positive weight
    sn_minus: float  # modulus of the normalized negative weight
    imp: float  # |sn_plus - sn_minus|
    stance: str


def _require_signed(bundle: AttentionBundle) -> None:
    if not bundle.signed:
        raise ValueError(
            "explanations need both attention channels; this bundle was produced "
            "in co-attention mode, which has no negative channel"
        )


def _dense_ranks_desc(values: list[float]) -> list[int]:
    """Dense rank per value, 1 = largest; equal values share a rank."""
    distinct = sorted(set(values), reverse=True)
    position = {v: i + 1 for i, v in enumerate(distinct)}
    return [position[v] for v in values]


def _stance_conditions(re_pos: float, im_pos: float, re_neg: float, im_neg: float) -> tuple[bool, bool]:
    return (re_pos > 0.0 and im_pos > 0.0, re_neg < 0.0 and im_neg < 0.0)


def comment_signatures(bundle: AttentionBundle) -> list[CommentSignature]:
    """Signatures for every comment, with stances resolved jointly."""
    _require_signed(bundle)
    t = bundle.num_comments
    raw_pos = bundle.raw_com_pos[0]
    raw_neg = bundle.raw_com_neg[0]
    norm_pos = bundle.com_pos[0]
    norm_neg = bundle.com_neg[0]

    s_plus = [abs(raw_pos[j]) for j in range(t)]
    s_minus = [abs(raw_neg[j]) for j in range(t)]
    rank_plus = _dense_ranks_desc(s_plus)
    rank_minus = _dense_ranks_desc(s_minus)

    sigs = []
    for j in range(t):
        pos_cond, neg_cond = _stance_conditions(
            raw_pos[j].real, raw_pos[j].imag, raw_neg[j].real, raw_neg[j].imag
        )
        if pos_cond and not neg_cond:
            stance = SUPPORTING
        elif neg_cond and not pos_cond:
            stance = OPPOSING
        elif pos_cond and neg_cond:
            if rank_minus[j] < rank_plus[j]:
                stance = OPPOSING
            elif rank_plus[j] < rank_minus[j]:
                stance = SUPPORTING
            else:
                stance = NEUTRAL
        else:
            stance = NEUTRAL
        sn_p = abs(norm_pos[j])
        sn_m = abs(norm_neg[j])
        sigs.append(
            CommentSignature(
                comment_index=j,
                re_pos=float(raw_pos[j].real),
                im_pos=float(raw_pos[j].imag),
                re_neg=float(raw_neg[j].real),
                im_neg=float(raw_neg[j].imag),
                s_plus=float(s_plus[j]),
                s_minus=float(s_minus[j]),
                sn_plus=float(sn_p),
                sn_minus=float(sn_m),
                imp=float(abs(sn_p - sn_m)),
                stance=stance,
            )
        )
    return sigs


def comment_signature(bundle: AttentionBundle, index: int) -> CommentSignature:
    _require_signed(bundle)
    if not (0 <= index < bundle.num_comments):
        raise ValueError(f"comment index {index} out of range for {bundle.num_comments} comments")
    return comment_signatures(bundle)[index]


def stance_label(sig: CommentSignature, all_sigs: list[CommentSignature]) -> str:
    """Stance of one signature in the context of its post's other comments."""
    if not any(s is sig or s == sig for s in all_sigs):
        raise ValueError("signature is not part of the given group")
    pos_cond, neg_cond = _stance_conditions(sig.re_pos, sig.im_pos, sig.re_neg, sig.im_neg)
    if pos_cond and not neg_cond:
        return SUPPORTING
    if neg_cond and not pos_cond:
        return OPPOSING
    if pos_cond and neg_cond:
        rank_plus = _dense_ranks_desc([s.s_plus for s in all_sigs])
        rank_minus = _dense_ranks_desc([s.s_minus for s in all_sigs])
        i = next(i for i, s in enumerate(all_sigs) if s is sig or s == sig)
        if rank_minus[i] < rank_plus[i]:
            return OPPOSING
        if rank_plus[i] < rank_minus[i]:
            return SUPPORTING
        return NEUTRAL
    return NEUTRAL


@dataclass
class RankedLists:
    important: list[CommentSignature]
    unimportant: list[CommentSignature]
    supporting: list[CommentSignature]  # top by sn_plus
    opposing: list[CommentSignature]  # top by sn_minus


def importance_rank(sigs: list[CommentSignature], k: int) -> RankedLists:
    """Deterministic top/bottom lists; ties break toward the lower comment index."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = min(k, len(sigs))
    by_imp_desc = sorted(sigs, key=lambda s: (-s.imp, s.comment_index))
    by_imp_asc = sorted(sigs, key=lambda s: (s.imp, s.comment_index))
    by_sn_plus = sorted(sigs, key=lambda s: (-s.sn_plus, s.comment_index))
    by_sn_minus = sorted(sigs, key=lambda s: (-s.sn_minus, s.comment_index))
    return RankedLists(
        important=by_imp_desc[:k],
        unimportant=by_imp_asc[:k],
        supporting=by_sn_plus[:k],
        opposing=by_sn_minus[:k],
    )


def _list_items(sigs: list[CommentSignature], comments: tuple[str, ...]) -> list[dict]:
    return [
        {
            "comment_index": s.comment_index,
            "text": comments[s.comment_index],
            "s_plus": s.s_plus,
            "s_minus": s.s_minus,
            "sn_plus": s.sn_plus,
            "sn_minus": s.sn_minus,
            "imp": s.imp,
            "stance": s.stance,
        }
        for s in sigs
    ]


def report(example: CorpusExample, model: SignedAttentionModel, k: int) -> dict:
    """One explanation record: prediction plus the four ranked comment lists."""
    result = model.forward(example)
    sigs = comment_signatures(result.bundle)
    ranked = importance_rank(sigs, k)
    comments = example.comments[: model.config.max_comments]
    return {
        "id": example.id,
        "prediction": result.prediction,
        "p_false": result.p_false,
        "important": _list_items(ranked.important, comments),
        "unimportant": _list_items(ranked.unimportant, comments),
        "supporting": _list_items(ranked.supporting, comments),
        "opposing": _list_items(ranked.opposing, comments),
    }


def write_explanations(path: str, records: list[dict]) -> None:
    lines = [json.dumps(r, ensure_ascii=True, sort_keys=True) for r in records]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
