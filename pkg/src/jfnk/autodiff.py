"""Forward-mode automatic differentiation with array-valued dual numbers.

A :class:`Dual` carries a primal array and a tangent array of the same shape.
It participates in NumPy ufuncs and a handful of array functions (``roll``,
``concatenate``, ``where``...) so residuals written against plain NumPy
evaluate unchanged over either representation.  Evaluating a residual at
``Dual(x, v)`` yields ``F(x)`` and the directional derivative ``J(x) v`` in
one pass.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


class DerivativeSingularityError(ArithmeticError):
    """An elementary rule has no finite derivative at the given primal value."""

    def __init__(self, op: str, index: int):
        super().__init__(f"{op}: derivative singular at flat index {index}")
        self.op = op
        self.index = index


def _split(value):
    if isinstance(value, Dual):
        return value.primal, value.tangent
    return value, None


def _add_t(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _scale_t(t, factor):
    return None if t is None else t * factor


def _rule_add(a, ta, b, tb):
    return a + b, _add_t(ta, tb)


def _rule_sub(a, ta, b, tb):
    if tb is None:
        return a - b, ta
    return a - b, -tb if ta is None else ta - tb


def _rule_mul(a, ta, b, tb):
    return a * b, _add_t(_scale_t(ta, b), _scale_t(tb, a))


def _rule_div(a, ta, b, tb):
    p = a / b
    if tb is None:
        return p, None if ta is None else ta / b
    num = -p * tb if ta is None else ta - p * tb
    return p, num / b


def _rule_neg(a, ta):
    return -a, None if ta is None else -ta


def _rule_pos(a, ta):
    return a, ta


def _rule_square(a, ta):
    return a * a, None if ta is None else 2 * a * ta


def _rule_power(a, ta, b, tb):
    if tb is not None:
        raise NotImplementedError("power with a differentiated exponent")
    p = a**b
    if ta is None:
        return p, None
    return p, b * a ** (b - 1) * ta


def _rule_sqrt(a, ta):
    p = np.sqrt(a)
    if ta is None:
        return p, None
    bad = (p == 0) & (ta != 0)
    if np.any(bad):
        raise DerivativeSingularityError("sqrt", int(np.flatnonzero(bad)[0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p == 0, 0, ta / (2 * p))
    return p, t


def _rule_sin(a, ta):
    return np.sin(a), None if ta is None else np.cos(a) * ta


def _rule_cos(a, ta):
    return np.cos(a), None if ta is None else -np.sin(a) * ta


def _rule_exp(a, ta):
    p = np.exp(a)
    return p, None if ta is None else p * ta


def _rule_tanh(a, ta):
    p = np.tanh(a)
    return p, None if ta is None else (1 - p * p) * ta


def _rule_abs(a, ta):
    return np.abs(a), None if ta is None else np.sign(a) * ta


def _select(mask, ta, tb, like):
    if ta is None and tb is None:
        return None
    za = np.zeros_like(like) if ta is None else ta
    zb = np.zeros_like(like) if tb is None else tb
    return np.where(mask, za, zb)


def _rule_maximum(a, ta, b, tb):
    p = np.maximum(a, b)
    return p, _select(np.greater_equal(a, b), ta, tb, p)


def _rule_minimum(a, ta, b, tb):
    p = np.minimum(a, b)
    return p, _select(np.less_equal(a, b), ta, tb, p)


def _rule_matmul(a, ta, b, tb):
    left = None if ta is None else np.matmul(ta, b)
    right = None if tb is None else np.matmul(a, tb)
    return np.matmul(a, b), _add_t(left, right)


_UFUNC_RULES = {
    np.add: _rule_add,
    np.subtract: _rule_sub,
    np.multiply: _rule_mul,
    np.true_divide: _rule_div,
    np.negative: _rule_neg,
    np.positive: _rule_pos,
    np.square: _rule_square,
    np.power: _rule_power,
    np.sqrt: _rule_sqrt,
    np.sin: _rule_sin,
    np.cos: _rule_cos,
    np.exp: _rule_exp,
    np.tanh: _rule_tanh,
    np.absolute: _rule_abs,
    np.maximum: _rule_maximum,
    np.minimum: _rule_minimum,
    np.matmul: _rule_matmul,
}

_HANDLED_FUNCTIONS: dict = {}


def _implements(func):
    def register(impl):
        _HANDLED_FUNCTIONS[func] = impl
        return impl

    return register


class Dual:
    """Pair of arrays ``(primal, tangent)`` propagating a directional derivative.

    A ``None`` tangent is never stored: constants are promoted to an explicit
    zero tangent on construction so ``.tangent`` is always an array.
    """

    __slots__ = ("primal", "tangent")
    __array_priority__ = 1000

    def __init__(self, primal, tangent=None):
        primal = np.asarray(primal)
        if tangent is None:
            tangent = np.zeros_like(primal)
        else:
            tangent = np.asarray(tangent)
            if tangent.shape != primal.shape:
                tangent = np.broadcast_to(tangent, primal.shape).copy()
        self.primal = primal
        self.tangent = tangent

    @classmethod
    def _wrap(cls, primal, tangent):
        out = cls.__new__(cls)
        out.primal = np.asarray(primal)
        out.tangent = (
            np.zeros_like(out.primal) if tangent is None else np.asarray(tangent)
        )
        if out.tangent.shape != out.primal.shape:
            out.tangent = np.broadcast_to(out.tangent, out.primal.shape).copy()
        return out

    # array protocol -----------------------------------------------------

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs.get("out") is not None:
            return NotImplemented
        rule = _UFUNC_RULES.get(ufunc)
        if rule is None:
            return NotImplemented
        args = []
        for value in inputs:
            args.extend(_split(value))
        p, t = rule(*args)
        return Dual._wrap(p, t)

    def __array_function__(self, func, types, args, kwargs):
        impl = _HANDLED_FUNCTIONS.get(func)
        if impl is None:
            return NotImplemented
        return impl(*args, **kwargs)

    # container behaviour ------------------------------------------------

    @property
    def shape(self):
        return self.primal.shape

    @property
    def dtype(self):
        return self.primal.dtype

    @property
    def ndim(self):
        return self.primal.ndim

    @property
    def size(self):
        return self.primal.size

    def __len__(self):
        return len(self.primal)

    def __getitem__(self, index):
        return Dual._wrap(self.primal[index], self.tangent[index])

    def __setitem__(self, index, value):
        p, t = _split(value)
        self.primal[index] = p
        self.tangent[index] = 0 if t is None else t

    def reshape(self, *shape):
        return Dual._wrap(self.primal.reshape(*shape), self.tangent.reshape(*shape))

    def ravel(self):
        return self.reshape(-1)

    def copy(self):
        return Dual._wrap(self.primal.copy(), self.tangent.copy())

    def sum(self, axis=None):
        return Dual._wrap(self.primal.sum(axis=axis), self.tangent.sum(axis=axis))

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return np.add(self, other)

    def __radd__(self, other):
        return np.add(other, self)

    def __sub__(self, other):
        return np.subtract(self, other)

    def __rsub__(self, other):
        return np.subtract(other, self)

    def __mul__(self, other):
        return np.multiply(self, other)

    def __rmul__(self, other):
        return np.multiply(other, self)

    def __truediv__(self, other):
        return np.true_divide(self, other)

    def __matmul__(self, other):
        return np.matmul(self, other)

    def __rmatmul__(self, other):
        return np.matmul(other, self)

    def __rtruediv__(self, other):
        return np.true_divide(other, self)

    def __pow__(self, exponent):
        return np.power(self, exponent)

    def __neg__(self):
        return np.negative(self)

    def __pos__(self):
        return self

    def __abs__(self):
        return np.absolute(self)

    def __repr__(self):
        return f"Dual(primal={self.primal!r}, tangent={self.tangent!r})"


def _roll_axis(f, shift: int, axis: int):
    # slice-copy form of np.roll for one integer shift along one axis
    n = f.shape[axis]
    k = shift % n
    out = np.empty_like(f)
    dst = [slice(None)] * f.ndim
    src = [slice(None)] * f.ndim
    dst[axis], src[axis] = slice(k, n), slice(0, n - k)
    out[tuple(dst)] = f[tuple(src)]
    dst[axis], src[axis] = slice(0, k), slice(n - k, n)
    out[tuple(dst)] = f[tuple(src)]
    return out


@_implements(np.roll)
def _roll(a, shift, axis=None):
    p, t = _split(a)
    if isinstance(shift, (int, np.integer)) and isinstance(axis, (int, np.integer)) and p.ndim:
        return Dual._wrap(_roll_axis(p, shift, axis), _roll_axis(t, shift, axis))
    return Dual._wrap(np.roll(p, shift, axis=axis), np.roll(t, shift, axis=axis))


def _join(func, arrays, **kwargs):
    arrays = list(arrays)
    primals = [_split(a)[0] for a in arrays]
    tangents = []
    for a, p in zip(arrays, primals):
        t = _split(a)[1]
        tangents.append(np.zeros_like(np.asarray(p)) if t is None else t)
    return Dual._wrap(func(primals, **kwargs), func(tangents, **kwargs))


@_implements(np.concatenate)
def _concatenate(arrays, axis=0):
    return _join(np.concatenate, arrays, axis=axis)


@_implements(np.stack)
def _stack(arrays, axis=0):
    return _join(np.stack, arrays, axis=axis)


@_implements(np.where)
def _where(condition, x, y):
    xp, xt = _split(x)
    yp, yt = _split(y)
    p = np.where(condition, xp, yp)
    return Dual._wrap(p, _select(condition, xt, yt, p))


@_implements(np.sum)
def _sum(a, axis=None):
    return a.sum(axis=axis)


@_implements(np.reshape)
def _reshape(a, shape):
    return a.reshape(shape)


@_implements(np.ravel)
def _ravel(a):
    return a.ravel()


@_implements(np.copy)
def _copy(a):
    return a.copy()


@_implements(np.zeros_like)
def _zeros_like(a, dtype=None):
    return np.zeros_like(a.primal, dtype=dtype)


def abs_smoothed(x, delta):
    """``sqrt(x**2 + delta**2) - delta``: a smooth |x| that vanishes at 0."""
    return np.sqrt(x * x + delta * delta) - delta


def primal_of(x):
    return x.primal if isinstance(x, Dual) else x


_ELEMENTARY = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.true_divide,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "tanh": np.tanh,
}


def dual_elementary(op: str, *args, delta: float = 1e-8) -> Dual:
    """Apply one named elementary operation to dual arguments."""
    if op == "abs_smoothed":
        (x,) = args
        return abs_smoothed(x, delta)
    try:
        func = _ELEMENTARY[op]
    except KeyError:
        raise ValueError(f"unknown elementary operation {op!r}") from None
    out = func(*args)
    if not isinstance(out, Dual):
        out = Dual(out)
    return out


def jvp(
    F: Callable, x: np.ndarray, v: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(F(x), J(x) v)`` from a single dual-number evaluation of F.

    The tangent input is seeded coordinate-wise with ``v``.  If a rule has no
    finite derivative (``sqrt`` at zero with a nonzero tangent) a
    :class:`DerivativeSingularityError` carrying the flat index is raised.
    """
    x = np.asarray(x)
    v = np.asarray(v, dtype=x.dtype)
    if x.shape != v.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {v.shape}")
    out = F(Dual._wrap(x, v))
    if isinstance(out, Dual):
        return out.primal, out.tangent
    out = np.asarray(out)
    return out, np.zeros_like(out)
