import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jfnk.autodiff import DerivativeSingularityError, Dual, abs_smoothed, dual_elementary, jvp


def d(p, t):
    return Dual(np.array(p, float), np.array(t, float))


def test_mul_rule():
    out = dual_elementary("mul", d(3, 1), d(3, 1))
    assert (float(out.primal), float(out.tangent)) == (9.0, 6.0)


def test_sqrt_rule():
    out = dual_elementary("sqrt", d(4, 1))
    assert (float(out.primal), float(out.tangent)) == (2.0, 0.25)


def test_sin_rule():
    out = dual_elementary("sin", d(0, 1))
    assert (float(out.primal), float(out.tangent)) == (0.0, 1.0)


@pytest.mark.parametrize(
    "op, args, primal, tangent",
    [
        ("add", ((1.5, 2.0), (2.0, -1.0)), 3.5, 1.0),
        ("sub", ((1.5, 2.0), (2.0, -1.0)), -0.5, 3.0),
        ("div", ((1.0, 1.0), (2.0, 0.0)), 0.5, 0.5),
        ("div", ((1.0, 0.0), (2.0, 1.0)), 0.5, -0.25),
        ("cos", ((0.0, 1.0),), 1.0, 0.0),
        ("exp", ((0.0, 2.0),), 1.0, 2.0),
        ("tanh", ((0.0, 3.0),), 0.0, 3.0),
    ],
)
def test_elementary_rules(op, args, primal, tangent):
    out = dual_elementary(op, *(d(*a) for a in args))
    assert math.isclose(float(out.primal), primal, abs_tol=1e-15)
    assert math.isclose(float(out.tangent), tangent, abs_tol=1e-15)


def test_abs_smoothed_rule():
    delta = 0.5
    x = 1.2
    out = dual_elementary("abs_smoothed", d(x, 1.0), delta=delta)
    assert math.isclose(float(out.primal), math.sqrt(x * x + delta * delta) - delta)
    assert math.isclose(float(out.tangent), x / math.sqrt(x * x + delta * delta))
    assert abs_smoothed(0.0, delta) == 0.0


def test_unknown_op():
    with pytest.raises(ValueError):
        dual_elementary("log", d(1, 1))


def test_sqrt_singularity_reports_index():
    x = np.array([4.0, 0.0, 9.0])
    with pytest.raises(DerivativeSingularityError) as err:
        jvp(np.sqrt, x, np.ones(3))
    assert err.value.index == 1


def test_sqrt_at_zero_with_zero_tangent_is_fine():
    p, t = jvp(np.sqrt, np.array([0.0, 4.0]), np.array([0.0, 1.0]))
    assert np.array_equal(p, [0.0, 2.0])
    assert np.array_equal(t, [0.0, 0.25])


def test_jvp_example():
    def F(x):
        return np.stack([x[0] * x[0], x[0] * x[1]])

    p, t = jvp(F, np.array([1.0, 2.0]), np.array([1.0, 0.0]))
    assert np.array_equal(p, [1.0, 2.0])
    assert np.array_equal(t, [2.0, 2.0])


def test_jvp_zero_direction_and_identity():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(7)
    v = rng.standard_normal(7)

    def F(y):
        return np.sin(y) * y + np.exp(0.1 * y)

    assert not jvp(F, x, np.zeros(7))[1].any()
    assert np.array_equal(jvp(lambda y: y, x, v)[1], v)


def test_maximum_and_where_follow_primal_branch():
    x = np.array([1.0, -1.0])
    v = np.array([2.0, 3.0])
    assert np.array_equal(jvp(lambda y: np.maximum(y, 0.0), x, v)[1], [2.0, 0.0])
    assert np.array_equal(jvp(lambda y: np.where(np.array([True, False]), y, 2 * y), x, v)[1], [2.0, 6.0])


def test_array_functions_roll_concat_sum():
    x = np.arange(6.0).reshape(2, 3)
    v = np.ones_like(x)

    def F(y):
        r = np.roll(y, 1, axis=1)
        return np.concatenate([(r * y).reshape(-1), np.sum(y * y).reshape(1)])

    p, t = jvp(F, x, v)
    assert np.array_equal(p, F(x))
    eps = 1e-6
    fd = (F(x + eps * v) - F(x - eps * v)) / (2 * eps)
    assert np.allclose(t, fd, rtol=1e-8, atol=1e-8)


def test_float32_stays_float32():
    x = np.ones(3, np.float32)
    p, t = jvp(lambda y: 0.5 * y * y + np.sqrt(y), x, x)
    assert p.dtype == np.float32 and t.dtype == np.float32


def _smooth(y):
    return np.tanh(y) * np.cos(y) + y * y * y - np.exp(-y * y) / (2.0 + y * y)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_tangent_linearity(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    x, v, w = rng.standard_normal((3, 16))
    lhs = jvp(_smooth, x, alpha * v + beta * w)[1]
    rhs = alpha * jvp(_smooth, x, v)[1] + beta * jvp(_smooth, x, w)[1]
    scale = max(1.0, float(np.abs(lhs).max()), float(np.abs(rhs).max()))
    assert np.abs(lhs - rhs).max() <= 8 * 2.0**-52 * scale * 16


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_primal_consistency(seed):
    rng = np.random.default_rng(seed)
    x, v = rng.standard_normal((2, 16))
    assert np.array_equal(jvp(_smooth, x, v)[0], _smooth(x))


def test_zero_tangent_reduces_to_primal_arithmetic():
    x = np.array([0.3, 1.7])
    out = _smooth(Dual(x))
    assert np.array_equal(out.primal, _smooth(x))
    assert not out.tangent.any()
