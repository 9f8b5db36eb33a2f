"""Precision-parameterized scalar and vector kernels.

Every run is carried out in a single floating-point kind.  The reductions
below accumulate strictly left to right so that repeated runs produce
bit-identical iteration counts and failure classifications.
"""

from __future__ import annotations

import enum

import numba
import numpy as np


class Precision(enum.Enum):
    FP32 = "fp32"
    FP64 = "fp64"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32 if self is Precision.FP32 else np.float64)

    @property
    def eps_mach(self) -> float:
        return 2.0**-23 if self is Precision.FP32 else 2.0**-52

    @classmethod
    def parse(cls, value: "str | Precision") -> "Precision":
        if isinstance(value, Precision):
            return value
        return cls(value.lower())

    @classmethod
    def of(cls, array: np.ndarray) -> "Precision":
        if array.dtype == np.float32:
            return cls.FP32
        if array.dtype == np.float64:
            return cls.FP64
        raise TypeError(f"unsupported dtype {array.dtype}")


@numba.njit(cache=True)
def _dot_ltr(a, b):
    acc = a[0] * b[0]
    for i in range(1, a.shape[0]):
        acc += a[i] * b[i]
    return acc


def dot(a: np.ndarray, b: np.ndarray):
    """Inner product accumulated left to right in the dtype of ``a``.

    Returns a NumPy scalar of that dtype.
    """
    a = np.ascontiguousarray(a).reshape(-1)
    b = np.ascontiguousarray(b).reshape(-1)
    if a.dtype.kind != "f":
        a = a.astype(np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} != {b.size}")
    if a.dtype != b.dtype:
        b = b.astype(a.dtype)
    if a.size == 0:
        return a.dtype.type(0)
    return a.dtype.type(_dot_ltr(a, b))


def norm2(a: np.ndarray):
    a = np.ascontiguousarray(a).reshape(-1)
    if a.dtype.kind != "f":
        a = a.astype(np.float64)
    if a.size == 0:
        raise ValueError("norm2 of an empty vector")
    # the square root is taken in the working precision as well
    return np.sqrt(dot(a, a))


@numba.njit(cache=True)
def _mgs_ltr(V, j, w, hcol):
    for i in range(j + 1):
        vi = V[i]
        h = w[0] * vi[0]
        for k in range(1, w.shape[0]):
            h += w[k] * vi[k]
        hcol[i] = h
        for k in range(w.shape[0]):
            w[k] -= h * vi[k]


def mgs_orthogonalize(V: np.ndarray, j: int, w: np.ndarray, hcol: np.ndarray) -> None:
    """Modified Gram-Schmidt of ``w`` against rows ``V[0..j]``, in place.

    The projection coefficients land in ``hcol[0..j]``; each one is the
    left-to-right :func:`dot` of the partially orthogonalized ``w``.
    """
    _mgs_ltr(V, j, w, hcol)


def all_finite(a) -> bool:
    return bool(np.isfinite(a).all())
