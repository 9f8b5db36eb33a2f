import math

import numpy as np
import pytest

from jfnk.krylov import KrylovConfig
from jfnk.newton import NewtonConfig, line_search, newton_solve
from jfnk.numerics import Precision
from jfnk.problems import burgers

KC = KrylovConfig(rel_tol=1e-12)


def test_defaults():
    assert NewtonConfig.for_precision(Precision.FP32).tol_newton == 1e-4
    assert NewtonConfig.for_precision(Precision.FP64).tol_newton == 1e-6
    assert NewtonConfig.for_precision(Precision.FP64).max_newton == 15
    assert NewtonConfig.for_precision(Precision.FP64, bvp=True).max_newton == 50
    c = NewtonConfig()
    assert (c.c_decrease, c.max_backtracks) == (1e-4, 8)


def _oracle_iterates(x, n):
    out = [x]
    for _ in range(n):
        x = x - (x * x - 4) / (2 * x)
        out.append(x)
    return out


def test_square_root_of_four():
    F = lambda x: x * x - 4.0
    x0 = np.array([3.0])
    x, rep = newton_solve(F, x0, x0, "ad", KC, NewtonConfig(tol_newton=1e-6, line_search=False))
    oracle = _oracle_iterates(3.0, 4)
    assert math.isclose(oracle[1], 2.1666667, rel_tol=1e-7)
    assert math.isclose(oracle[2], 2.0064103, rel_tol=1e-7)
    assert math.isclose(oracle[3], 2.0000102, rel_tol=1e-7)
    assert rep.converged and rep.iterations == 4
    assert rep.relres_history[0] == 1.0
    expected = [abs(z * z - 4) / 5.0 for z in oracle]
    assert np.allclose(rep.relres_history, expected, rtol=1e-9, atol=1e-16)
    assert math.isclose(x[0], 2.0, rel_tol=1e-10)


def test_quadratic_convergence_ratio():
    F = lambda x: x * x - 4.0
    x0 = np.array([3.0])
    iterates = []
    x = x0
    for k in range(1, 5):
        x, _ = newton_solve(F, x0, x0, "ad", KC, NewtonConfig(tol_newton=0.0, max_newton=k, line_search=False))
        iterates.append(x[0])
    e = [abs(z - 2.0) for z in [3.0] + iterates]
    ratios = [e[k + 1] / e[k] ** 2 for k in (1, 2)]
    assert all(0.2 <= r <= 0.3 for r in ratios)


def test_already_converged():
    F = lambda x: x * x - 4.0
    x_star = np.array([3.0])
    x, rep = newton_solve(F, np.array([2.0]), x_star, "ad", KC, NewtonConfig())
    assert rep.iterations == 0 and rep.converged


@pytest.mark.parametrize("strategy", ["ad", "fd"])
def test_linear_residual_one_iteration(strategy):
    rng = np.random.default_rng(2)
    A = np.eye(6) * 3 + rng.standard_normal((6, 6)) * 0.3
    b = rng.standard_normal(6)
    x0 = np.zeros(6)
    x, rep = newton_solve(lambda y: A @ y - b, x0, x0, strategy, KC, NewtonConfig(tol_newton=1e-6))
    assert rep.converged and rep.iterations == 1
    assert np.allclose(A @ x, b, atol=1e-8)


def test_line_search_examples():
    F = lambda x: x * x
    cfg = NewtonConfig()
    r = line_search(F, np.array([2.0]), np.array([-1.0]), 4.0, cfg)
    assert (r.alpha, float(r.x[0]), r.backtracks, r.accepted) == (1.0, 1.0, 0, True)
    r = line_search(F, np.array([1.0]), np.array([-2.0]), 1.0, cfg)
    assert (r.alpha, float(r.x[0]), r.backtracks, r.accepted) == (0.5, 0.0, 1, True)


def test_line_search_zero_step_exhausts_backtracks():
    r = line_search(lambda x: x * x, np.array([2.0]), np.array([0.0]), 4.0, NewtonConfig())
    assert r.backtracks == 8 and not r.accepted
    assert np.array_equal(r.x, [2.0])


def test_line_search_nonfinite_trials():
    F = lambda x: np.where(x > 1.5, np.inf, x - 1.0)
    r = line_search(F, np.array([1.4]), np.array([100.0]), 0.4, NewtonConfig(max_backtracks=3))
    assert not r.accepted and r.alpha == 2.0**-3


def test_divergence_status():
    F = lambda x: np.log(x) if False else x * np.inf
    x0 = np.array([1.0])
    _, rep = newton_solve(F, x0, x0, "ad", KC, NewtonConfig())
    assert rep.status == "diverged" and not rep.converged


def test_line_search_keeps_history_monotone():
    F = lambda x: np.tanh(x)
    x0 = np.array([3.0])
    _, rep = newton_solve(F, x0, x0, "ad", KC, NewtonConfig(tol_newton=1e-10))
    assert rep.converged and rep.backtrack_count > 0
    h = rep.relres_history
    assert all(b <= a for a, b in zip(h, h[1:]))


def test_fd_and_ad_agree_on_burgers_step():
    g = burgers.default_grid(8)
    Un = burgers.burgers_ic("tgv", g)
    F = burgers.make_burgers_residual(Un, 0.2, 0.05, g)
    ncfg = NewtonConfig.for_precision(Precision.FP64)
    kcfg = KrylovConfig.for_precision("gmres", Precision.FP64)
    xa, ra = newton_solve(F, Un, Un, "ad", kcfg, ncfg)
    xf, rf = newton_solve(F, Un, Un, "fd", kcfg, ncfg)
    assert ra.converged and rf.converged
    assert np.linalg.norm(xa - xf) / np.linalg.norm(xa) <= 10 * ncfg.tol_newton
    assert ra.krylov_iters_total == sum(k.iterations for k in ra.krylov_reports)
