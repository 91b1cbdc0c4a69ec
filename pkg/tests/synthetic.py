"""Seeded synthetic corpora used by the trainer and acceptance tests."""

import numpy as np

from signet.data_io import CorpusExample
from signet.model import TrainConfig

POOL_A = ["river", "stone", "forest", "cloud", "meadow", "valley", "breeze", "willow"]
POOL_B = ["engine", "circuit", "voltage", "signal", "piston", "gearbox", "diode", "cable"]
# antonym pool shared by both classes: comments drawn from it carry no class
# signal, so only alignment-weighted aggregation of the token-reuse comments
# is informative and the positive channel orients consistently
POOL_ANTONYM = ["never", "wrong", "false", "doubt", "deny", "hoax", "fake", "nonsense"]


def _text(rng, pool, lo=3, hi=6) -> str:
    k = int(rng.integers(lo, hi))
    return " ".join(rng.choice(pool, size=k))


def separable_corpus(seed: int = 0, n: int = 32) -> list[CorpusExample]:
    """Class-0 posts/comments from pool A, class-1 from pool B."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        label = i % 2
        pool = POOL_B if label else POOL_A
        out.append(
            CorpusExample(
                id=f"sep-{i}",
                label=label,
                post=tuple(_text(rng, pool) for _ in range(2)),
                comments=tuple(_text(rng, pool) for _ in range(3)),
            )
        )
    return out


def overfit_config(seed: int = 1, epochs: int = 200) -> TrainConfig:
    return TrainConfig(
        state_dim=8,
        attention_dim=4,
        num_projectors=8,
        max_tokens=8,
        max_sentences=4,
        max_comments=4,
        epochs=epochs,
        seed=seed,
    )


def planted_stance_corpus(
    seed: int = 0, n_posts: int = 16, comments_per_side: int = 3
) -> tuple[list[CorpusExample], dict[str, list[int]]]:
    """Posts from pool A (label 0) or pool B (label 1); half of each post's
    comments shuffle the post's own tokens (planted supporting) and half draw
    from the shared antonym pool (planted opposing).

    Returns the corpus and, per post id, the indices of the supporting
    comments within the (shuffled) comment list.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    supporting_indices: dict[str, list[int]] = {}
    for i in range(n_posts):
        label = i % 2
        pool = POOL_B if label else POOL_A
        post = tuple(_text(rng, pool, 3, 5) for _ in range(2))
        post_tokens = " ".join(post).split()
        comments = []
        flags = []  # True marks a planted supporting comment
        for _ in range(comments_per_side):
            reuse = list(rng.choice(post_tokens, size=min(4, len(post_tokens)), replace=False))
            comments.append(" ".join(reuse))
            flags.append(True)
        for _ in range(comments_per_side):
            comments.append(_text(rng, POOL_ANTONYM, 3, 5))
            flags.append(False)
        order = rng.permutation(len(comments))
        comments = [comments[int(j)] for j in order]
        flags = [flags[int(j)] for j in order]
        ident = f"stance-{i}"
        corpus.append(
            CorpusExample(id=ident, label=label, post=post, comments=tuple(comments))
        )
        supporting_indices[ident] = [j for j, f in enumerate(flags) if f]
    return corpus, supporting_indices


def stance_config(seed: int, epochs: int = 60) -> TrainConfig:
    return TrainConfig(
        state_dim=8,
        attention_dim=4,
        num_projectors=8,
        max_tokens=10,
        max_sentences=2,
        max_comments=6,
        epochs=epochs,
        seed=seed,
    )
