import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jfnk.krylov import KrylovConfig, KrylovMethod, Preconditioner, bicgstab, cg, gmres, solve
from jfnk.linops import LinearOperator

SOLVERS = {"gmres": gmres, "bicgstab": bicgstab, "cg": cg}


def op_of(A):
    return LinearOperator.from_matrix(np.asarray(A, float))


@pytest.mark.parametrize("name", SOLVERS)
def test_identity_one_iteration(name):
    b = np.array([0.3, -2.0, 5.0])
    A = op_of(np.eye(3))
    x, rep = SOLVERS[name](A, b, None, None, KrylovConfig(method=name))
    assert np.allclose(x, b) and rep.converged
    assert rep.iterations == 1 == A.call_count


def test_gmres_rotation():
    A = op_of([[0, -1], [1, 0]])
    x, rep = gmres(A, np.array([1.0, 0.0]))
    assert np.allclose(x, [0.0, -1.0], atol=1e-14)
    assert rep.converged and rep.iterations <= 2


@pytest.mark.parametrize("name", ["gmres", "cg"])
def test_diagonal(name):
    A = op_of(np.diag([1.0, 2.0, 3.0]))
    x, rep = SOLVERS[name](A, np.array([1.0, 2.0, 3.0]), None, None, KrylovConfig(method=name))
    assert np.allclose(x, 1.0) and rep.iterations <= 3


def test_bicgstab_examples():
    x, rep = bicgstab(op_of(np.diag([2.0, 3.0])), np.array([2.0, 3.0]))
    assert np.allclose(x, [1.0, 1.0]) and rep.converged
    x, rep = bicgstab(op_of([[2, 1], [0, 3]]), np.array([3.0, 3.0]))
    assert np.allclose(x, [1.0, 1.0]) and rep.converged


def test_cg_hand_solved_system():
    x, rep = cg(op_of([[4, 1], [1, 3]]), np.array([1.0, 2.0]), None, None,
                KrylovConfig(method="cg", rel_tol=1e-12))
    assert np.abs(x - [1 / 11, 7 / 11]).max() <= 1e-12
    assert rep.converged and rep.iterations <= 2


def test_cg_diagonal_spread():
    x, rep = cg(op_of(np.diag([1.0, 10.0, 100.0])), np.ones(3), None, None,
                KrylovConfig(method="cg", rel_tol=1e-12))
    assert np.allclose(x, [1.0, 0.1, 0.01], rtol=1e-12) and rep.iterations <= 3


def test_cg_flags_indefinite():
    x, rep = cg(op_of(np.diag([1.0, -1.0])), np.ones(2), None, None, KrylovConfig(method="cg"))
    assert rep.breakdown and not rep.converged


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 32), st.integers(0, 2**31 - 1))
def test_cg_exact_termination(n, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = Q @ np.diag(rng.uniform(1.0, 10.0, n)) @ Q.T
    b = rng.standard_normal(n)
    x, rep = cg(op_of(A), b, None, None, KrylovConfig(method="cg", rel_tol=1e-12, max_outer=n))
    assert rep.converged
    assert np.linalg.norm(b - A @ x) <= 1e-12 * np.linalg.norm(b)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 40), st.integers(0, 2**31 - 1), st.sampled_from(list(KrylovMethod)[:2]))
def test_nonsymmetric_solves_and_counts(n, seed, method):
    rng = np.random.default_rng(seed)
    A = np.eye(n) * 4 + rng.standard_normal((n, n)) / np.sqrt(n)
    b = rng.standard_normal(n)
    op = op_of(A)
    x, rep = solve(op, b, None, None, KrylovConfig(method=method, rel_tol=1e-10, restart_len=5))
    assert rep.converged
    assert np.linalg.norm(b - A @ x) <= 1e-9 * np.linalg.norm(b)
    assert rep.iterations == op.call_count
    assert rep.final_relres <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(5, 40), st.integers(0, 2**31 - 1))
def test_gmres_residuals_monotone_within_cycle(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 2 * np.eye(n)
    _, rep = gmres(op_of(A), rng.standard_normal(n), None, None,
                   KrylovConfig(rel_tol=1e-14, restart_len=6, max_outer=4))
    start = 0
    for k in rep.cycle_lengths:
        seg = rep.history[start:start + k]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(seg, seg[1:]))
        start += k


def test_gmres_restart_cap_reports_nonconvergence():
    n = 60
    A = np.diag(np.linspace(-1, 1, n)) + 1e-3 * np.eye(n)
    op = op_of(A)
    _, rep = gmres(op, np.ones(n), None, None, KrylovConfig(rel_tol=1e-12, restart_len=3, max_outer=4))
    assert not rep.converged
    assert rep.outer_iterations == 4 and rep.restarts == 3
    assert rep.iterations == op.call_count


def test_right_preconditioning_reports_true_residual():
    rng = np.random.default_rng(7)
    d = rng.uniform(1, 100, 30)
    A = np.diag(d) + 0.1 * rng.standard_normal((30, 30))
    M = Preconditioner(apply=lambda v: v / d)
    b = rng.standard_normal(30)
    for method in ("gmres", "bicgstab"):
        x, rep = solve(op_of(A), b, None, M, KrylovConfig(method=method, rel_tol=1e-10))
        assert rep.converged
        assert np.linalg.norm(b - A @ x) / np.linalg.norm(b) <= 1e-10


def test_zero_rhs():
    for name, fn in SOLVERS.items():
        x, rep = fn(op_of(np.eye(2)), np.zeros(2), None, None, KrylovConfig(method=name))
        assert rep.converged and not x.any() and rep.iterations == 0


def test_nonfinite_operator_is_breakdown():
    op = LinearOperator(dim=2, matvec=lambda v: np.full(2, np.nan))
    for name, fn in SOLVERS.items():
        _, rep = fn(op, np.ones(2), None, None, KrylovConfig(method=name))
        assert rep.breakdown and not rep.converged


def test_float32_dtype_preserved():
    A = op_of(np.diag([1.0, 2.0]).astype(np.float32))
    x, rep = gmres(A, np.ones(2, np.float32), None, None, KrylovConfig(rel_tol=1e-6))
    assert x.dtype == np.float32 and rep.converged


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        gmres(op_of(np.eye(3)), np.ones(2))
