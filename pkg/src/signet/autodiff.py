"""Minimal reverse-mode autodiff over 2-D float64 arrays.

Every value in the computation graph is a real matrix; complex quantities
are represented elsewhere as (re, im) pairs of these nodes, so a real
scalar loss differentiates each complex parameter as two independent real
parameters. Nodes hold backpointers to their operands and a VJP closure;
``backward`` walks the graph once in reverse topological order and
accumulates gradients additively over fan-out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import functional


class ShapeMismatchError(ValueError):
    """Raised when operand shapes are incompatible for an operation."""


class ContractViolationError(ValueError):
    """Raised when an operation's calling contract is broken."""


def _as_matrix(value) -> np.ndarray:
    v = np.asarray(value, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1, 1)
    elif v.ndim == 1:
        v = v.reshape(1, -1)
    elif v.ndim != 2:
        raise ShapeMismatchError(f"expected at most 2 dimensions, got shape {v.shape}")
    return v


_creation_counter = 0


class Tensor:
    """A node in the graph: a float64 matrix plus reverse-mode bookkeeping."""

    __slots__ = ("value", "grad", "requires_grad", "_parents", "_vjp", "_order", "name")

    def __init__(
        self,
        value,
        *,
        requires_grad: bool = False,
        parents: tuple["Tensor", ...] = (),
        vjp: Callable[[np.ndarray], None] | None = None,
        name: str = "",
    ):
        global _creation_counter
        self.value = _as_matrix(value)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._vjp = vjp
        _creation_counter += 1
        self._order = _creation_counter
        self.name = name

    @property
    def shape(self) -> tuple[int, int]:
        return self.value.shape

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    def __repr__(self) -> str:
        label = self.name or "tensor"
        return f"Tensor({label}, shape={self.shape}, requires_grad={self.requires_grad})"

    # arithmetic sugar; scalars are applied entrywise
    def __add__(self, other):
        if isinstance(other, Tensor):
            return add(self, other)
        return shift(self, float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return sub(self, other)
        return shift(self, -float(other))

    def __rsub__(self, other):
        return shift(neg(self), float(other))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return div(self, other)
        return scale(self, 1.0 / float(other))

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return neg(self)


def constant(value, name: str = "") -> Tensor:
    return Tensor(value, requires_grad=False, name=name)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else constant(x)


def _node(value, parents: Sequence[Tensor], vjp: Callable[[np.ndarray], None]) -> Tensor:
    requires = any(p.requires_grad for p in parents)
    return Tensor(
        value,
        requires_grad=requires,
        parents=tuple(parents),
        vjp=vjp if requires else None,
    )


def _check_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{op}: shapes {a.shape} and {b.shape} differ")


# ---------------------------------------------------------------------------
# primitives


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _check_same_shape(a, b, "add")

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g)
        if b.requires_grad:
            b.accumulate(g)

    return _node(a.value + b.value, (a, b), vjp)


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _check_same_shape(a, b, "sub")

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g)
        if b.requires_grad:
            b.accumulate(-g)

    return _node(a.value - b.value, (a, b), vjp)


def neg(a: Tensor) -> Tensor:
    a = _wrap(a)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(-g)

    return _node(-a.value, (a,), vjp)


def shift(a: Tensor, c: float) -> Tensor:
    a = _wrap(a)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g)

    return _node(a.value + c, (a,), vjp)


def scale(a: Tensor, c: float) -> Tensor:
    a = _wrap(a)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(c * g)

    return _node(c * a.value, (a,), vjp)


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _check_same_shape(a, b, "mul")

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g * b.value)
        if b.requires_grad:
            b.accumulate(g * a.value)

    return _node(a.value * b.value, (a, b), vjp)


def div(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    _check_same_shape(a, b, "div")

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g / b.value)
        if b.requires_grad:
            b.accumulate(-g * a.value / (b.value * b.value))

    return _node(a.value / b.value, (a, b), vjp)


def smul(s: Tensor, m: Tensor) -> Tensor:
    """Multiply every entry of ``m`` by the 1x1 tensor ``s``."""
    s, m = _wrap(s), _wrap(m)
    if s.shape != (1, 1):
        raise ShapeMismatchError(f"smul: scalar operand has shape {s.shape}, expected (1, 1)")

    def vjp(g):
        if s.requires_grad:
            s.accumulate(np.sum(g * m.value).reshape(1, 1))
        if m.requires_grad:
            m.accumulate(g * s.value[0, 0])

    return _node(s.value[0, 0] * m.value, (s, m), vjp)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"matmul: shapes {a.shape} and {b.shape} do not chain")

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g @ b.value.T)
        if b.requires_grad:
            b.accumulate(a.value.T @ g)

    return _node(a.value @ b.value, (a, b), vjp)


def transpose(a: Tensor) -> Tensor:
    a = _wrap(a)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g.T)

    return _node(a.value.T, (a,), vjp)


def reshape(a: Tensor, rows: int, cols: int) -> Tensor:
    a = _wrap(a)
    if rows * cols != a.value.size:
        raise ShapeMismatchError(f"reshape: cannot view {a.shape} as ({rows}, {cols})")

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g.reshape(a.shape))

    return _node(a.value.reshape(rows, cols), (a,), vjp)


def concat_rows(parts: Iterable[Tensor]) -> Tensor:
    parts = [_wrap(p) for p in parts]
    if not parts:
        raise ValueError("concat_rows: empty sequence")
    cols = parts[0].shape[1]
    for p in parts:
        if p.shape[1] != cols:
            raise ShapeMismatchError(
                f"concat_rows: column counts differ ({p.shape} vs (*, {cols}))"
            )
    offsets = np.cumsum([0] + [p.shape[0] for p in parts])

    def vjp(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                p.accumulate(g[lo:hi])

    return _node(np.concatenate([p.value for p in parts], axis=0), tuple(parts), vjp)


def slice_cols(a: Tensor, lo: int, hi: int) -> Tensor:
    a = _wrap(a)
    if not (0 <= lo <= hi <= a.shape[1]):
        raise ShapeMismatchError(f"slice_cols: [{lo}:{hi}] out of range for shape {a.shape}")

    def vjp(g):
        if a.requires_grad:
            full = np.zeros_like(a.value)
            full[:, lo:hi] = g
            a.accumulate(full)

    return _node(a.value[:, lo:hi].copy(), (a,), vjp)


def take_row(a: Tensor, i: int) -> Tensor:
    a = _wrap(a)
    if not (0 <= i < a.shape[0]):
        raise ShapeMismatchError(f"take_row: row {i} out of range for shape {a.shape}")

    def vjp(g):
        if a.requires_grad:
            full = np.zeros_like(a.value)
            full[i, :] = g[0, :]
            a.accumulate(full)

    return _node(a.value[i : i + 1].copy(), (a,), vjp)


def sum_all(a: Tensor) -> Tensor:
    a = _wrap(a)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(np.full_like(a.value, g[0, 0]))

    return _node(np.sum(a.value).reshape(1, 1), (a,), vjp)


def row_sums(a: Tensor) -> Tensor:
    """Sum each row: (m, n) -> (m, 1)."""
    a = _wrap(a)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(np.tile(g, (1, a.shape[1])))

    return _node(np.sum(a.value, axis=1, keepdims=True), (a,), vjp)


def _elementwise(a: Tensor, fn, dfn_from_out) -> Tensor:
    a = _wrap(a)
    out_value = fn(a.value)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g * dfn_from_out(a.value, out_value))

    return _node(out_value, (a,), vjp)


def tanh(a: Tensor) -> Tensor:
    return _elementwise(a, np.tanh, lambda x, y: 1.0 - y * y)


def sigmoid(a: Tensor) -> Tensor:
    return _elementwise(a, lambda x: 1.0 / (1.0 + np.exp(-x)), lambda x, y: y * (1.0 - y))


def cos(a: Tensor) -> Tensor:
    return _elementwise(a, np.cos, lambda x, y: -np.sin(x))


def sin(a: Tensor) -> Tensor:
    return _elementwise(a, np.sin, lambda x, y: np.cos(x))


def pow_const(a: Tensor, p: float) -> Tensor:
    return _elementwise(a, lambda x: np.power(x, p), lambda x, y: p * np.power(x, p - 1.0))


def wrap_phase(a: Tensor) -> Tensor:
    """Wrap angles into [-pi, pi]; the shift is locally constant so the
    gradient passes through unchanged."""
    a = _wrap(a)

    def vjp(g):
        if a.requires_grad:
            a.accumulate(g)

    return _node(functional.wrap_angle(a.value), (a,), vjp)


def softmax_rows(a: Tensor) -> Tensor:
    """Row-wise stable softmax."""
    a = _wrap(a)
    y = functional.stable_softmax(a.value, axis=1)

    def vjp(g):
        if a.requires_grad:
            dot = np.sum(g * y, axis=1, keepdims=True)
            a.accumulate(y * (g - dot))

    return _node(y, (a,), vjp)


def softmax_signed(a: Tensor, channel: str) -> Tensor:
    """Row-wise two-channel softmax on tensors (see functional.softmax_signed)."""
    a = _wrap(a)
    if a.value.size == 0:
        raise ValueError("softmax_signed requires a nonempty vector")
    if channel == "pos":
        return softmax_rows(a)
    if channel == "neg":
        return neg(softmax_rows(neg(a)))
    raise ValueError(f"unknown channel {channel!r}, expected 'pos' or 'neg'")


def cross_entropy_with_logits(logits: Tensor, class_index: int) -> Tensor:
    """Cross-entropy of a (1, C) logit row against a one-hot class."""
    logits = _wrap(logits)
    if logits.shape[0] != 1:
        raise ShapeMismatchError(f"cross_entropy: expected a logit row, got {logits.shape}")
    if not (0 <= class_index < logits.shape[1]):
        raise ValueError(f"class index {class_index} out of range for {logits.shape[1]} classes")
    x = logits.value
    m = np.max(x)
    lse = m + np.log(np.sum(np.exp(x - m)))
    loss = lse - x[0, class_index]

    def vjp(g):
        if logits.requires_grad:
            p = functional.stable_softmax(x, axis=1)
            p[0, class_index] -= 1.0
            logits.accumulate(g[0, 0] * p)

    return _node(np.array([[loss]]), (logits,), vjp)


# ---------------------------------------------------------------------------
# reverse pass


def topo_order(root: Tensor) -> list[Tensor]:
    """Ancestors of ``root`` ordered so every node's operands precede it.

    Nodes are created operands-first, so sorting the reachable set by
    creation order is a valid topological order.
    """
    seen: set[int] = {id(root)}
    reached: list[Tensor] = [root]
    stack: list[Tensor] = [root]
    while stack:
        node = stack.pop()
        for p in node._parents:
            if id(p) not in seen:
                seen.add(id(p))
                reached.append(p)
                stack.append(p)
    reached.sort(key=lambda t: t._order)
    return reached


def backward(loss: Tensor) -> None:
    """Propagate d(loss)/d(node) to every ancestor of a scalar real loss."""
    if loss.shape != (1, 1):
        raise ContractViolationError(f"loss must be a real scalar, got shape {loss.shape}")
    order = topo_order(loss)
    loss.accumulate(np.ones((1, 1)))
    for node in reversed(order):
        if node._vjp is not None and node.grad is not None:
            node._vjp(node.grad)


class Graph:
    """Registry of named trainable leaves for a model."""

    def __init__(self):
        self.parameters: dict[str, Tensor] = {}

    def parameter(self, name: str, value, *, trainable: bool = True) -> Tensor:
        if name in self.parameters:
            raise ValueError(f"parameter {name!r} already registered")
        t = Tensor(value, requires_grad=trainable, name=name)
        self.parameters[name] = t
        return t

    def trainable(self) -> dict[str, Tensor]:
        return {k: t for k, t in self.parameters.items() if t.requires_grad}

    def zero_grad(self) -> None:
        for t in self.parameters.values():
            t.grad = None

    def backward(self, loss: Tensor) -> dict[str, np.ndarray]:
        """Run the reverse pass and return gradients for every trainable leaf.

        Leaves that do not participate in the loss get a zero gradient.
        """
        backward(loss)
        out: dict[str, np.ndarray] = {}
        for name, t in self.parameters.items():
            if not t.requires_grad:
                continue
            out[name] = np.zeros_like(t.value) if t.grad is None else t.grad.copy()
        return out


# ---------------------------------------------------------------------------
# finite-difference verification


@dataclass
class GradCheckReport:
    worst: float
    per_parameter: dict[str, float]
    worst_parameter: str

    def __str__(self) -> str:
        lines = [f"{name}: max relative error {err:.3e}" for name, err in self.per_parameter.items()]
        lines.append(f"worst: {self.worst_parameter} at {self.worst:.3e}")
        return "\n".join(lines)


def grad_check(
    fn: Callable[[], Tensor],
    params: dict[str, Tensor],
    *,
    step: float = 1e-5,
    floor: float = 1e-6,
) -> GradCheckReport:
    """Compare reverse-mode gradients of ``fn`` against central differences.

    ``fn`` must rebuild its graph from the current parameter values on every
    call and return a real scalar. The relative error of each entry is
    |analytic - numeric| / max(|analytic|, |numeric|, floor).
    """
    for t in params.values():
        t.grad = None
    loss = fn()
    backward(loss)
    analytic = {
        name: (np.zeros_like(t.value) if t.grad is None else t.grad.copy())
        for name, t in params.items()
    }

    per_parameter: dict[str, float] = {}
    for name, t in params.items():
        worst = 0.0
        flat = t.value.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            f_plus = fn().value[0, 0]
            flat[i] = orig - step
            f_minus = fn().value[0, 0]
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            a = analytic[name].reshape(-1)[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            worst = max(worst, err)
        per_parameter[name] = worst

    worst_name = max(per_parameter, key=per_parameter.get) if per_parameter else ""
    worst = per_parameter.get(worst_name, 0.0)
    return GradCheckReport(worst=worst, per_parameter=per_parameter, worst_parameter=worst_name)
