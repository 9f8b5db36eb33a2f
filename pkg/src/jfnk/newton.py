"""Jacobian-free Newton-Krylov driver with backtracking line search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .krylov import KrylovConfig, Preconditioner, solve
from .linops import JvpStrategy, LinearOperator, make_operator
from .numerics import Precision, norm2

DEFAULT_NEWTON_TOL = {Precision.FP32: 1e-4, Precision.FP64: 1e-6}
MAX_NEWTON_IBVP = 15
MAX_NEWTON_BVP = 50


@dataclass
class NewtonConfig:
    tol_newton: float = 1e-6
    max_newton: int = MAX_NEWTON_IBVP
    line_search: bool = True
    c_decrease: float = 1e-4
    max_backtracks: int = 8

    @classmethod
    def for_precision(cls, precision: Precision, bvp: bool = False, **overrides):
        kw = dict(
            tol_newton=DEFAULT_NEWTON_TOL[precision],
            max_newton=MAX_NEWTON_BVP if bvp else MAX_NEWTON_IBVP,
        )
        kw.update(overrides)
        return cls(**kw)


@dataclass
class NewtonReport:
    iterations: int = 0
    converged: bool = False
    # "converged", "max_iter", "diverged" (non-finite residual) or
    # "breakdown" (Krylov returned an unusable correction)
    status: str = "max_iter"
    relres_history: list = field(default_factory=list)
    krylov_iters_total: int = 0
    matvecs_total: int = 0
    krylov_reports: list = field(default_factory=list)
    backtrack_count: int = 0
    line_search_failures: int = 0
    final_relres: float = float("nan")
    fnorm_ref: float = float("nan")


class LineSearchResult(NamedTuple):
    alpha: float
    x: np.ndarray
    F: np.ndarray
    backtracks: int
    accepted: bool


def line_search(
    F: Callable,
    x: np.ndarray,
    delta: np.ndarray,
    Fnorm: float,
    ncfg: NewtonConfig,
) -> LineSearchResult:
    """Halve ``alpha`` from 1 until ``||F(x + alpha delta)|| <= (1 - c alpha) ||F(x)||``.

    The last trial is returned even when no trial is accepted; non-finite
    trials are always rejected.
    """
    dtype = x.dtype.type
    alpha = 1.0
    backtracks = 0
    while True:
        x_new = x + dtype(alpha) * delta
        F_new = F(x_new)
        fn = float(norm2(F_new))
        if np.isfinite(fn) and fn <= (1.0 - ncfg.c_decrease * alpha) * Fnorm:
            return LineSearchResult(alpha, x_new, F_new, backtracks, True)
        if backtracks == ncfg.max_backtracks:
            return LineSearchResult(alpha, x_new, F_new, backtracks, False)
        alpha *= 0.5
        backtracks += 1


def newton_solve(
    F: Callable,
    x0: np.ndarray,
    x_star: np.ndarray,
    strategy: JvpStrategy,
    kcfg: KrylovConfig,
    ncfg: NewtonConfig,
    M_builder: Optional[Callable[[np.ndarray], Preconditioner]] = None,
    F_star: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, NewtonReport]:
    """Solve ``F(x) = 0`` starting from ``x0``.

    Convergence is measured as ``||F(x)|| / max(||F(x_star)||, eps_mach)``.
    Each correction solves ``J(x) dx = -F(x)`` from a zero initial guess with
    the configured Krylov method, the operator being built by ``strategy``.
    ``F_star`` may carry a precomputed ``F(x_star)``.
    """
    x = np.array(x0, copy=True)
    precision = Precision.of(x)
    eps = precision.eps_mach
    report = NewtonReport()

    Fx = F(x)
    if F_star is None:
        F_star = Fx if x_star is x0 or np.array_equal(x_star, x0) else F(x_star)
    denom = max(float(norm2(F_star)), eps)
    report.fnorm_ref = denom
    fnorm = float(norm2(Fx))
    relres = fnorm / denom
    report.relres_history.append(relres)

    while True:
        report.final_relres = relres
        if not np.isfinite(relres) or not np.all(np.isfinite(x)):
            report.status = "diverged"
            break
        if relres < ncfg.tol_newton:
            report.converged = True
            report.status = "converged"
            break
        if report.iterations >= ncfg.max_newton:
            report.status = "max_iter"
            break

        op: LinearOperator = make_operator(F, x, Fx, strategy, precision)
        M = M_builder(x) if M_builder is not None else None
        delta, krep = solve(op, -Fx, None, M, kcfg)
        report.krylov_reports.append(krep)
        report.krylov_iters_total += krep.iterations
        report.matvecs_total += op.call_count
        report.iterations += 1
        if not np.all(np.isfinite(delta)):
            report.status = "breakdown"
            break

        if ncfg.line_search:
            ls = line_search(F, x, delta, fnorm, ncfg)
            report.backtrack_count += ls.backtracks
            report.line_search_failures += int(not ls.accepted)
            x, Fx = ls.x, ls.F
        else:
            x = x + delta
            Fx = F(x)
        fnorm = float(norm2(Fx))
        relres = fnorm / denom
        report.relres_history.append(relres)

    return x, report
