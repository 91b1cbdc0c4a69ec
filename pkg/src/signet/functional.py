"""Pure numpy numerics shared by the autodiff engine and the public API."""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def stable_softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    """Softmax with max-subtraction for numerical stability."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_signed(v: np.ndarray, channel: str) -> np.ndarray:
    """Two-channel softmax over the last axis.

    The "pos" channel is the ordinary softmax; the "neg" channel is
    -softmax(-v), which reverses the importance ordering so the most
    negative entry receives the weight of largest magnitude. Positive
    channel entries sum to 1, negative channel entries to -1.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("softmax_signed requires a nonempty vector")
    if channel == "pos":
        return stable_softmax(v)
    if channel == "neg":
        return -stable_softmax(-v)
    raise ValueError(f"unknown channel {channel!r}, expected 'pos' or 'neg'")


def wrap_angle(phi: np.ndarray) -> np.ndarray:
    """Wrap angles into [-pi, pi]."""
    phi = np.asarray(phi, dtype=np.float64)
    return phi - TWO_PI * np.round(phi / TWO_PI)


def polar_to_complex(amplitude: np.ndarray, phase: np.ndarray) -> np.ndarray:
    return np.asarray(amplitude, dtype=np.float64) * np.exp(
        1j * np.asarray(phase, dtype=np.float64)
    )


def add_polar(
    r1: np.ndarray, phi1: np.ndarray, r2: np.ndarray, phi2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Add two polar-form vectors dimension by dimension, in polar form.

    The resulting amplitude follows the law of cosines and the phase a
    full-quadrant arctangent; a dimension where both summands vanish maps
    to (0, 0).
    """
    r1 = np.asarray(r1, dtype=np.float64)
    r2 = np.asarray(r2, dtype=np.float64)
    phi1 = np.asarray(phi1, dtype=np.float64)
    phi2 = np.asarray(phi2, dtype=np.float64)
    mag_sq = r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * np.cos(phi1 - phi2)
    r = np.sqrt(np.maximum(mag_sq, 0.0))
    phi = np.arctan2(
        r1 * np.sin(phi1) + r2 * np.sin(phi2),
        r1 * np.cos(phi1) + r2 * np.cos(phi2),
    )
    return r, phi


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Area under the ROC curve via the rank statistic, ties averaged."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc_score needs at least one positive and one negative")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    ranks[order] = np.arange(1, scores.size + 1, dtype=np.float64)
    # average ranks over tied score groups
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        if j > i:
            ranks[order[i : j + 1]] = 0.5 * (i + 1 + j + 1)
        i = j + 1
    rank_sum = float(ranks[labels].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
