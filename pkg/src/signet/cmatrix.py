"""Complex matrices as (re, im) pairs of autodiff tensors.

The Cartesian product rule gives the complex matrix product directly:
for C = A @ B, C.re = A.re B.re - A.im B.im and C.im = A.re B.im + A.im B.re.
Nonlinearities (ctanh, csoftmax) act on each part independently.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import ShapeMismatchError, Tensor


class CMat:
    """A complex matrix held as two real tensors of identical shape."""

    __slots__ = ("re", "im")

    def __init__(self, re: Tensor, im: Tensor):
        if re.shape != im.shape:
            raise ShapeMismatchError(f"re/im shapes differ: {re.shape} vs {im.shape}")
        self.re = re
        self.im = im

    @classmethod
    def from_arrays(cls, re, im=None) -> "CMat":
        re_t = ad.constant(re)
        im_t = ad.constant(np.zeros_like(re_t.value) if im is None else im)
        return cls(re_t, im_t)

    @classmethod
    def from_complex(cls, z) -> "CMat":
        z = np.asarray(z, dtype=np.complex128)
        return cls.from_arrays(z.real.copy(), z.imag.copy())

    def to_complex(self) -> np.ndarray:
        return self.re.value + 1j * self.im.value

    @property
    def shape(self) -> tuple[int, int]:
        return self.re.shape

    def __add__(self, other: "CMat") -> "CMat":
        return CMat(ad.add(self.re, other.re), ad.add(self.im, other.im))

    def __sub__(self, other: "CMat") -> "CMat":
        return CMat(ad.sub(self.re, other.re), ad.sub(self.im, other.im))

    def __neg__(self) -> "CMat":
        return CMat(ad.neg(self.re), ad.neg(self.im))

    def __matmul__(self, other: "CMat") -> "CMat":
        return cmul(self, other)

    def __repr__(self) -> str:
        return f"CMat(shape={self.shape})"


def cmul(a: CMat, b: CMat) -> CMat:
    """Complex matrix product."""
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"cmul: shapes {a.shape} and {b.shape} do not chain")
    re = ad.sub(ad.matmul(a.re, b.re), ad.matmul(a.im, b.im))
    im = ad.add(ad.matmul(a.re, b.im), ad.matmul(a.im, b.re))
    return CMat(re, im)


def cmul_elementwise(a: CMat, b: CMat) -> CMat:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"cmul_elementwise: shapes {a.shape} and {b.shape} differ")
    re = ad.sub(ad.mul(a.re, b.re), ad.mul(a.im, b.im))
    im = ad.add(ad.mul(a.re, b.im), ad.mul(a.im, b.re))
    return CMat(re, im)


def ctanh(a: CMat) -> CMat:
    """tanh applied independently to the real and imaginary parts."""
    return CMat(ad.tanh(a.re), ad.tanh(a.im))


def csoftmax(v: CMat, channel: str) -> CMat:
    """Two-channel softmax applied per part to each row of ``v``."""
    return CMat(ad.softmax_signed(v.re, channel), ad.softmax_signed(v.im, channel))


def conj(a: CMat) -> CMat:
    return CMat(a.re, ad.neg(a.im))


def transpose(a: CMat) -> CMat:
    """Plain transpose, no conjugation."""
    return CMat(ad.transpose(a.re), ad.transpose(a.im))


def conj_transpose(a: CMat) -> CMat:
    return CMat(ad.transpose(a.re), ad.neg(ad.transpose(a.im)))


def reshape(a: CMat, rows: int, cols: int) -> CMat:
    return CMat(ad.reshape(a.re, rows, cols), ad.reshape(a.im, rows, cols))


def concat_rows(parts: Sequence[CMat]) -> CMat:
    return CMat(
        ad.concat_rows([p.re for p in parts]),
        ad.concat_rows([p.im for p in parts]),
    )


def real_matmul(left: Tensor, m: CMat) -> CMat:
    """Product of a real matrix with a complex one."""
    return CMat(ad.matmul(left, m.re), ad.matmul(left, m.im))


def real_smul(s: Tensor, m: CMat) -> CMat:
    """Scale a complex matrix by a real 1x1 tensor."""
    return CMat(ad.smul(s, m.re), ad.smul(s, m.im))


def outer(w: CMat) -> CMat:
    """Rank-one outer product |w><w| of a 1xd row state."""
    if w.shape[0] != 1:
        raise ShapeMismatchError(f"outer expects a row vector, got {w.shape}")
    return cmul(transpose(w), conj(w))


def abs2(a: CMat) -> Tensor:
    """Entrywise squared modulus as a real tensor."""
    return ad.add(ad.mul(a.re, a.re), ad.mul(a.im, a.im))
