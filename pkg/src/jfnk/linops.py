"""Matrix-free Jacobian operators built from a residual function.

The finite-difference and automatic-differentiation strategies share every
piece of plumbing except the routine that evaluates ``J(x) v``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .autodiff import jvp
from .numerics import Precision, norm2


class JvpStrategy(enum.Enum):
    FD = "fd"
    AD = "ad"

    @classmethod
    def parse(cls, value: "str | JvpStrategy") -> "JvpStrategy":
        if isinstance(value, JvpStrategy):
            return value
        return cls(value.lower())


def eps_clamp(precision: Precision) -> tuple[float, float]:
    """Bounds applied to the finite-difference step."""
    return precision.eps_mach**0.75, 1.0


def fd_epsilon(x: np.ndarray, precision: Precision, xnorm: Optional[float] = None) -> float:
    """Perturbation size ``sqrt(eps_mach) * max(1, ||x||)``, clamped.

    ``xnorm`` may carry a precomputed ``||x||``.
    """
    lo, hi = eps_clamp(precision)
    if xnorm is None:
        xnorm = float(norm2(x))
    eps = np.sqrt(precision.eps_mach) * max(1.0, xnorm)
    return float(min(max(eps, lo), hi))


def fd_jvp(
    F: Callable,
    x: np.ndarray,
    Fx: np.ndarray,
    v: np.ndarray,
    precision: Precision,
    xnorm: Optional[float] = None,
) -> np.ndarray:
    """One-sided difference ``(F(x + eps v) - F(x)) / eps``.

    ``Fx`` must already hold ``F(x)``; it is reused rather than re-evaluated.
    A zero direction short-circuits to the zero vector without calling F.
    """
    if not np.any(v):
        return np.zeros_like(Fx)
    eps = fd_epsilon(x, precision, xnorm)
    dtype = precision.dtype
    eps_w = dtype.type(eps)
    return (F(x + eps_w * v) - Fx) / eps_w


@dataclass
class LinearOperator:
    """``v -> A v`` with an application counter.

    ``apply`` never mutates its argument.
    """

    dim: int
    matvec: Callable[[np.ndarray], np.ndarray]
    dtype: np.dtype = np.dtype(np.float64)
    call_count: int = field(default=0)

    def apply(self, v: np.ndarray) -> np.ndarray:
        self.call_count += 1
        return self.matvec(v)

    __call__ = apply

    @classmethod
    def from_matrix(cls, A) -> "LinearOperator":
        A = np.asarray(A)
        return cls(dim=A.shape[0], matvec=lambda v: A @ v, dtype=A.dtype)

    @classmethod
    def identity(cls, dim: int, dtype=np.float64) -> "LinearOperator":
        return cls(dim=dim, matvec=lambda v: np.array(v, copy=True), dtype=np.dtype(dtype))


def make_operator(
    F: Callable,
    x: np.ndarray,
    Fx: np.ndarray,
    strategy: JvpStrategy,
    precision: Precision,
) -> LinearOperator:
    """Freeze ``x`` and ``F(x)`` and expose ``J(x) v`` as a linear operator."""
    strategy = JvpStrategy.parse(strategy)
    x = np.array(x, copy=True)
    Fx = np.array(Fx, copy=True)
    if strategy is JvpStrategy.FD:
        # x is frozen for the life of the operator, so is its norm
        xnorm = float(norm2(x))

        def matvec(v):
            return fd_jvp(F, x, Fx, v, precision, xnorm)
    else:
        def matvec(v):
            return jvp(F, x, v)[1]
    return LinearOperator(dim=x.size, matvec=matvec, dtype=precision.dtype)
