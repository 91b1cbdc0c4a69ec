"""Rank-one semantic measurements and the linear classifier head.

Measuring a density matrix rho with a state v yields
Re(<v|rho|v>) / <v|v>: the projector |v><v| is renormalized at use time so
the optimizer can move v freely. For a proper density matrix every
measurement lies in [0, 1] and a complete orthonormal basis of states sums
to the trace. The measurement vectors of the attention feature matrices are
concatenated and classified by a single affine layer under cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import cmatrix as cm
from . import functional
from .autodiff import Graph, ShapeMismatchError, Tensor
from .cmatrix import CMat
from .encoder import DensityMatrix

# classifier output order: index 0 is the false class, index 1 the true class
FALSE_INDEX = 0
TRUE_INDEX = 1

DEGENERATE_STATE_NORM = 1e-12


class DegenerateProjectorError(ValueError):
    """A measurement state has (numerically) zero norm."""


def class_index_for_label(label: int) -> int:
    """Map a corpus label (1 = false) onto the classifier's output index."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    return FALSE_INDEX if label == 1 else TRUE_INDEX


def label_for_class_index(index: int) -> int:
    return 1 if index == FALSE_INDEX else 0


@dataclass
class MeasurementBank:
    """Z trainable measurement states plus the classifier head."""

    states: CMat  # (Z, d), one state per row
    weight: Tensor  # (2, width) with width = 4Z signed / 2Z co
    bias: Tensor  # (1, 2)

    @property
    def num_states(self) -> int:
        return self.states.shape[0]

    @property
    def input_width(self) -> int:
        return self.weight.shape[1]

    @classmethod
    def init(
        cls,
        graph: Graph,
        dim: int,
        num_states: int,
        num_channels: int,
        rng: np.random.Generator,
    ) -> "MeasurementBank":
        if num_states < 1:
            raise ValueError("need at least one measurement state")
        states = CMat(
            graph.parameter("measurement.states.re", rng.uniform(-0.1, 0.1, (num_states, dim))),
            graph.parameter("measurement.states.im", rng.uniform(-0.1, 0.1, (num_states, dim))),
        )
        width = num_channels * num_states
        weight = graph.parameter("classifier.weight", rng.uniform(-0.1, 0.1, (2, width)))
        bias = graph.parameter("classifier.bias", np.zeros((1, 2)))
        return cls(states=states, weight=weight, bias=bias)

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray]) -> "MeasurementBank":
        return cls(
            states=CMat(
                ad.constant(arrays["measurement.states.re"]),
                ad.constant(arrays["measurement.states.im"]),
            ),
            weight=ad.constant(arrays["classifier.weight"]),
            bias=ad.constant(arrays["classifier.bias"]),
        )


def measure_nodes(rho: CMat, bank: MeasurementBank) -> Tensor:
    """Measurement vector q (Z, 1) of a density matrix against every state."""
    states = bank.states
    if rho.shape[0] != rho.shape[1] or rho.shape[0] != states.shape[1]:
        raise ShapeMismatchError(
            f"measure: density matrix {rho.shape} vs states {states.shape}"
        )
    norms_sq = np.sum(states.re.value**2 + states.im.value**2, axis=1)
    worst = float(np.min(norms_sq))
    if worst < DEGENERATE_STATE_NORM**2:
        raise DegenerateProjectorError(
            f"measurement state has norm {np.sqrt(worst):.3e} < {DEGENERATE_STATE_NORM}"
        )
    # numerator_i = <v_i| rho |v_i> = sum_b (conj(V) rho)_ib * V_ib
    sandwich = cm.cmul_elementwise(cm.cmul(cm.conj(states), rho), states)
    numerator = ad.row_sums(sandwich.re)  # imaginary part is discarded: only
    # the real part feeds the classifier, so its gradient path is complete
    denominator = ad.row_sums(cm.abs2(states))
    return ad.div(numerator, denominator)


def measure(rho: DensityMatrix, bank: MeasurementBank) -> np.ndarray:
    """Measurement vector of a density matrix, as a flat array of length Z."""
    q = measure_nodes(CMat.from_complex(rho.mat), bank)
    return q.value.reshape(-1).copy()


def classify_loss_nodes(
    q_concat: Tensor, label: int, bank: MeasurementBank
) -> tuple[Tensor, np.ndarray, Tensor]:
    """(logits node, probabilities, loss node) for one concatenated
    measurement row."""
    if q_concat.shape != (1, bank.input_width):
        raise ShapeMismatchError(
            f"classifier expects a (1, {bank.input_width}) row, got {q_concat.shape}"
        )
    logits = q_concat @ ad.transpose(bank.weight) + bank.bias
    probs = functional.stable_softmax(logits.value, axis=1).reshape(-1)
    loss = ad.cross_entropy_with_logits(logits, class_index_for_label(label))
    return logits, probs, loss


def classify_loss(
    q_concat: np.ndarray, label: int, bank: MeasurementBank
) -> tuple[np.ndarray, np.ndarray, float]:
    """Array-level classification: (logits, probabilities, loss)."""
    q = ad.constant(np.asarray(q_concat, dtype=np.float64).reshape(1, -1))
    logits, probs, loss = classify_loss_nodes(q, label, bank)
    return logits.value.reshape(-1).copy(), probs, float(loss.value[0, 0])
