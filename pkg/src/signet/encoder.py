"""Polar word states and density-matrix text encoding.

A word is a unit-norm complex vector over d abstract basis coordinates,
written in polar form as a nonnegative amplitude vector and a phase vector.
A sentence (or comment) is a classical mixture of its word states: a
complex d x d density matrix that is Hermitian, positive semidefinite, and
has unit trace. Two real GRUs (one over amplitudes, one over phases)
contextualize the raw embeddings before mixing.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import cmatrix as cm
from . import functional
from .autodiff import Graph, Tensor
from .cmatrix import CMat

log = logging.getLogger(__name__)

# squared-norm threshold below which an amplitude vector counts as zero
DEGENERATE_NORM_SQ = 1e-24


@dataclass(frozen=True)
class WordState:
    """A word in polar form: nonnegative amplitudes with unit sum of squares,
    phases in [-pi, pi]."""

    amplitude: np.ndarray
    phase: np.ndarray

    def to_complex(self) -> np.ndarray:
        return functional.polar_to_complex(self.amplitude, self.phase)

    @property
    def dim(self) -> int:
        return self.amplitude.size


@dataclass(frozen=True)
class DensityMatrix:
    """Complex d x d representation of a text.

    ``kind`` is "proper" for mixtures of word states (Hermitian, PSD, unit
    trace) and "feature" for attention-weighted sums, which carry complex
    weights and satisfy none of those constraints.
    """

    mat: np.ndarray
    kind: str = "proper"

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def word_to_state(r: np.ndarray, phi: np.ndarray) -> WordState:
    """Canonicalize a polar pair into a valid word state.

    Amplitudes are rescaled to unit sum of squares; a (near-)zero amplitude
    vector becomes the uniform state. Negative amplitude entries are folded
    into the phase (r e^{i phi} = |r| e^{i(phi+pi)}), and phases are wrapped
    into [-pi, pi]. The underlying complex vector is unchanged up to
    normalization.
    """
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    phi = np.asarray(phi, dtype=np.float64).reshape(-1)
    if r.shape != phi.shape:
        raise ad.ShapeMismatchError(f"amplitude/phase shapes differ: {r.shape} vs {phi.shape}")
    d = r.size
    norm_sq = float(np.sum(r * r))
    if norm_sq < DEGENERATE_NORM_SQ:
        amp = np.full(d, 1.0 / np.sqrt(d))
        return WordState(amplitude=amp, phase=functional.wrap_angle(phi))
    amp = r / np.sqrt(norm_sq)
    phase = phi.copy()
    negative = amp < 0.0
    amp = np.abs(amp)
    phase[negative] += np.pi
    return WordState(amplitude=amp, phase=functional.wrap_angle(phase))


def superpose(w1: WordState, w2: WordState) -> tuple[np.ndarray, np.ndarray]:
    """Compose two word states per dimension in polar form.

    Returns the raw (amplitude, phase) pair of the sum; the amplitude is not
    renormalized, so constructive interference can exceed 1 and destructive
    interference can reach 0.
    """
    if w1.dim != w2.dim:
        raise ad.ShapeMismatchError(f"dimensions differ: {w1.dim} vs {w2.dim}")
    return functional.add_polar(w1.amplitude, w1.phase, w2.amplitude, w2.phase)


# ---------------------------------------------------------------------------
# GRU


@dataclass
class GruCellParams:
    """One real GRU's weights: per-gate input/hidden matrices and biases."""

    update_x: Tensor
    update_h: Tensor
    update_b: Tensor
    reset_x: Tensor
    reset_h: Tensor
    reset_b: Tensor
    cand_x: Tensor
    cand_h: Tensor
    cand_b: Tensor

    FIELDS = (
        "update_x",
        "update_h",
        "update_b",
        "reset_x",
        "reset_h",
        "reset_b",
        "cand_x",
        "cand_h",
        "cand_b",
    )

    @classmethod
    def init(cls, graph: Graph, prefix: str, dim: int, rng: np.random.Generator) -> "GruCellParams":
        kwargs = {}
        for name in cls.FIELDS:
            if name.endswith("_b"):
                value = np.zeros((1, dim))
            else:
                value = rng.uniform(-0.1, 0.1, size=(dim, dim))
            kwargs[name] = graph.parameter(f"{prefix}.{name}", value)
        return cls(**kwargs)

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray]) -> "GruCellParams":
        return cls(**{name: ad.constant(arrays[name]) for name in cls.FIELDS})

    @classmethod
    def zeros(cls, dim: int) -> "GruCellParams":
        return cls.from_arrays(
            {
                name: np.zeros((1, dim)) if name.endswith("_b") else np.zeros((dim, dim))
                for name in cls.FIELDS
            }
        )


@dataclass
class GruParams:
    """The encoder's recurrent parameters: one GRU for the amplitude stream
    and one for the phase stream (absent in real-embedding mode)."""

    amplitude: GruCellParams
    phase: GruCellParams | None


def gru_step(x: Tensor, h: Tensor, p: GruCellParams) -> Tensor:
    z = ad.sigmoid(x @ p.update_x + h @ p.update_h + p.update_b)
    r = ad.sigmoid(x @ p.reset_x + h @ p.reset_h + p.reset_b)
    cand = ad.tanh(x @ p.cand_x + (r * h) @ p.cand_h + p.cand_b)
    return (1.0 - z) * h + z * cand


def gru_sequence(xs: list[Tensor], p: GruCellParams) -> list[Tensor]:
    if not xs:
        raise ValueError("gru_sequence requires a nonempty sequence")
    dim = xs[0].shape[1]
    h = ad.constant(np.zeros((1, dim)))
    out = []
    for x in xs:
        h = gru_step(x, h, p)
        out.append(h)
    return out


def normalized_state_nodes(amp: Tensor, phase: Tensor | None) -> CMat:
    """Differentiable polar-to-complex conversion with unit normalization.

    A degenerate (zero) amplitude vector falls back to the uniform constant
    state, which carries no gradient by construction. When ``phase`` is None
    the state is real (phase identically zero).
    """
    d = amp.shape[1]
    norm_sq = ad.sum_all(ad.mul(amp, amp))
    if norm_sq.value[0, 0] < DEGENERATE_NORM_SQ:
        unit = ad.constant(np.full((1, d), 1.0 / np.sqrt(d)))
        if phase is None:
            return CMat(unit, ad.constant(np.zeros((1, d))))
        return CMat(unit * ad.cos(phase), unit * ad.sin(phase))
    inv_norm = ad.pow_const(norm_sq, -0.5)
    unit_amp = ad.smul(inv_norm, amp)
    if phase is None:
        return CMat(unit_amp, ad.constant(np.zeros((1, d))))
    return CMat(unit_amp * ad.cos(phase), unit_amp * ad.sin(phase))


def contextualize(
    states: list[WordState],
    params: GruParams,
    *,
    max_tokens: int | None = None,
) -> list[WordState]:
    """Run the amplitude and phase GRUs over a word sequence and return the
    renormalized word states."""
    if not states:
        raise ValueError("contextualize requires a nonempty sequence")
    if max_tokens is not None and len(states) > max_tokens:
        log.warning("sequence of %d tokens truncated to %d", len(states), max_tokens)
        states = states[:max_tokens]
    amp_in = [ad.constant(s.amplitude.reshape(1, -1)) for s in states]
    phase_in = [ad.constant(s.phase.reshape(1, -1)) for s in states]
    amp_out = gru_sequence(amp_in, params.amplitude)
    if params.phase is not None:
        phase_out = gru_sequence(phase_in, params.phase)
    else:
        phase_out = [ad.constant(np.zeros_like(p.value)) for p in phase_in]
    return [
        word_to_state(a.value.reshape(-1), p.value.reshape(-1))
        for a, p in zip(amp_out, phase_out)
    ]


# ---------------------------------------------------------------------------
# mixture


def mixture_nodes(word_states: list[CMat], logits: Tensor) -> CMat:
    """Density matrix of a word sequence: softmax(logits)-weighted sum of the
    rank-one outer products of the states."""
    m = len(word_states)
    if m == 0:
        raise ValueError("mixture requires at least one word state")
    if logits.shape != (1, m):
        raise ad.ShapeMismatchError(
            f"mixture: logits shape {logits.shape} does not match {m} states"
        )
    d = word_states[0].shape[1]
    probs = ad.softmax_rows(logits)
    flat_outers = cm.concat_rows([cm.reshape(cm.outer(w), 1, d * d) for w in word_states])
    mixed = cm.real_matmul(probs, flat_outers)
    return cm.reshape(mixed, d, d)


def mixture(states: list[WordState], logits: np.ndarray) -> DensityMatrix:
    """Mix word states into a proper density matrix with softmax weights."""
    logits = np.asarray(logits, dtype=np.float64).reshape(1, -1)
    nodes = [CMat.from_complex(s.to_complex().reshape(1, -1)) for s in states]
    rho = mixture_nodes(nodes, ad.constant(logits))
    return DensityMatrix(mat=rho.to_complex(), kind="proper")


# ---------------------------------------------------------------------------
# embedding initialization


def token_rng(seed: int, token: str) -> np.random.Generator:
    """Deterministic per-token generator, stable across runs and processes."""
    digest = hashlib.sha256(f"{seed}\x1f{token}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def init_token_embedding(
    token: str,
    dim: int,
    seed: int,
    table: dict[str, np.ndarray] | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Initial (amplitude, phase) rows for one token.

    Amplitudes come from the pretrained table when available, otherwise from
    a seeded normal (sigma=0.1) hashed from the token string, then
    normalized. Phases are uniform in [-pi, pi].
    """
    rng = token_rng(seed, token)
    if table is not None and token in table:
        amp = np.asarray(table[token], dtype=np.float64).copy()
        if amp.size != dim:
            raise ad.ShapeMismatchError(
                f"embedding for {token!r} has {amp.size} values, expected {dim}"
            )
    else:
        amp = rng.normal(0.0, 0.1, size=dim)
    norm = np.linalg.norm(amp)
    if norm < 1e-12:
        amp = np.full(dim, 1.0 / np.sqrt(dim))
    else:
        amp = amp / norm
    phase = rng.uniform(-np.pi, np.pi, size=dim)
    return amp, phase
