"""Matrix-free Krylov solvers: restarted GMRES, BiCGSTAB and CG.

All three touch the operator only through ``A.apply`` and use right
preconditioning, so the residual they monitor is that of the original system.
``KrylovReport.iterations`` counts operator applications, which makes it equal
to the change in ``A.call_count`` over the solve.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linops import LinearOperator
from .numerics import Precision, dot, mgs_orthogonalize, norm2


class KrylovMethod(enum.Enum):
    GMRES = "gmres"
    BICGSTAB = "bicgstab"
    CG = "cg"

    @classmethod
    def parse(cls, value: "str | KrylovMethod") -> "KrylovMethod":
        if isinstance(value, KrylovMethod):
            return value
        return cls(value.lower())


DEFAULT_KRYLOV_TOL = {Precision.FP32: 1e-6, Precision.FP64: 1e-8}


@dataclass
class KrylovConfig:
    method: KrylovMethod = KrylovMethod.GMRES
    rel_tol: float = 1e-8
    max_outer: int = 100
    restart_len: int = 20

    def __post_init__(self):
        self.method = KrylovMethod.parse(self.method)

    @classmethod
    def for_precision(cls, method, precision: Precision, **overrides) -> "KrylovConfig":
        kw = dict(method=method, rel_tol=DEFAULT_KRYLOV_TOL[precision])
        kw.update(overrides)
        return cls(**kw)


@dataclass
class KrylovReport:
    iterations: int = 0
    converged: bool = False
    final_relres: float = float("nan")
    breakdown: bool = False
    restarts: int = 0
    # GMRES restart cycles, BiCGSTAB full iterations, CG iterations
    outer_iterations: int = 0
    history: list = field(default_factory=list)
    # number of inner steps per GMRES cycle, for reading ``history`` by cycle
    cycle_lengths: list = field(default_factory=list)


@dataclass
class Preconditioner:
    """Approximate inverse action ``v -> M^{-1} v``."""

    apply: Callable[[np.ndarray], np.ndarray] = lambda v: v
    identity: bool = False

    @classmethod
    def none(cls) -> "Preconditioner":
        return cls(apply=lambda v: v, identity=True)


def _setup(A, b, x0, M):
    b = np.asarray(b)
    if b.dtype.kind != "f":
        b = b.astype(np.float64)
    if A.dim != b.size:
        raise ValueError(f"operator dim {A.dim} != rhs size {b.size}")
    precision = Precision.of(b)
    dtype = b.dtype
    if x0 is None:
        x = np.zeros_like(b)
    else:
        x = np.array(x0, dtype=dtype, copy=True)
        if x.shape != b.shape:
            raise ValueError("x0 and b shapes differ")
    if M is None:
        M = Preconditioner.none()
    eps = precision.eps_mach
    bnorm = max(float(norm2(b)), eps)
    return b, x, M, dtype, eps, bnorm


def _finite(value) -> bool:
    return bool(np.all(np.isfinite(value)))


def _initial_residual(A, b, x, report):
    if x.any():
        report.iterations += 1
        return b - A.apply(x)
    return b.copy()


def gmres(
    A: LinearOperator,
    b: np.ndarray,
    x0: Optional[np.ndarray] = None,
    M: Optional[Preconditioner] = None,
    cfg: Optional[KrylovConfig] = None,
) -> tuple[np.ndarray, KrylovReport]:
    """Restarted GMRES with modified Gram-Schmidt Arnoldi.

    Within a cycle the least-squares residual from the Givens-reduced
    Hessenberg matrix drives termination.  At the end of each cycle the true
    residual ``b - A x`` is recomputed; it both verifies convergence and seeds
    the next cycle.  ``cfg.max_outer`` bounds the number of cycles.
    """
    cfg = cfg or KrylovConfig(method=KrylovMethod.GMRES)
    b, x, M, dtype, eps, bnorm = _setup(A, b, x0, M)
    n = b.size
    m = max(1, min(cfg.restart_len, n))
    tol = cfg.rel_tol
    report = KrylovReport()

    r = _initial_residual(A, b, x, report)
    rnorm = norm2(r)
    relres = float(rnorm) / bnorm
    report.final_relres = relres
    if not np.isfinite(relres):
        report.breakdown = True
        return x, report
    if relres <= tol:
        report.converged = True
        return x, report

    V = np.empty((m + 1, n), dtype=dtype)
    H = np.zeros((m + 1, m), dtype=dtype)
    cs = np.zeros(m, dtype=dtype)
    sn = np.zeros(m, dtype=dtype)
    g = np.zeros(m + 1, dtype=dtype)
    hcol = np.zeros(m + 1, dtype=dtype)
    happy_tol = eps * np.sqrt(n)

    for cycle in range(cfg.max_outer):
        report.outer_iterations = cycle + 1
        V[0] = r / rnorm
        H[:] = 0
        g[:] = 0
        g[0] = rnorm
        k = 0
        happy = False
        bad = False
        for j in range(m):
            z = V[j] if M.identity else M.apply(V[j])
            w = np.array(A.apply(z), dtype=dtype)
            report.iterations += 1
            if not _finite(w):
                bad = True
                break
            wnorm0 = norm2(w)
            mgs_orthogonalize(V, j, w, hcol)
            H[: j + 1, j] = hcol[: j + 1]
            hnext = norm2(w)
            H[j + 1, j] = hnext
            if not _finite(H[: j + 2, j]):
                bad = True
                break
            for i in range(j):
                hi, hi1 = H[i, j], H[i + 1, j]
                H[i, j] = cs[i] * hi + sn[i] * hi1
                H[i + 1, j] = -sn[i] * hi + cs[i] * hi1
            denom = np.hypot(H[j, j], H[j + 1, j])
            if denom == 0:
                bad = True
                break
            cs[j] = H[j, j] / denom
            sn[j] = H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            k = j + 1
            relres = float(abs(g[j + 1])) / bnorm
            report.history.append(relres)
            # w is rounding noise once it drops to ~sqrt(n) eps of its original size
            if hnext <= happy_tol * wnorm0 or k == n:
                happy = True
                break
            V[j + 1] = w / hnext
            if relres <= tol:
                break
        report.cycle_lengths.append(k)

        if k > 0:
            y = np.zeros(k, dtype=dtype)
            for i in range(k - 1, -1, -1):
                y[i] = (g[i] - dot(H[i, i + 1 : k], y[i + 1 : k])) / H[i, i]
            dx = V[:k].T @ y
            x = x + (dx if M.identity else M.apply(dx))
        report.final_relres = relres
        if bad:
            report.breakdown = True
            break
        if happy:
            # the Krylov space is invariant: the least-squares residual is exact
            if relres <= tol:
                report.converged = True
            else:
                report.breakdown = True
            break
        r = b - A.apply(x)
        report.iterations += 1
        rnorm = norm2(r)
        relres = float(rnorm) / bnorm
        report.final_relres = relres
        if not np.isfinite(relres):
            report.breakdown = True
            break
        if relres <= tol:
            report.converged = True
            break
    report.restarts = max(0, report.outer_iterations - 1)
    return x, report


def bicgstab(
    A: LinearOperator,
    b: np.ndarray,
    x0: Optional[np.ndarray] = None,
    M: Optional[Preconditioner] = None,
    cfg: Optional[KrylovConfig] = None,
) -> tuple[np.ndarray, KrylovReport]:
    """Right-preconditioned BiCGSTAB.

    A full iteration applies the operator twice; the early exit after the
    first half-step saves the second application.
    """
    cfg = cfg or KrylovConfig(method=KrylovMethod.BICGSTAB)
    b, x, M, dtype, eps, bnorm = _setup(A, b, x0, M)
    tol = cfg.rel_tol
    report = KrylovReport()

    r = _initial_residual(A, b, x, report)
    relres = float(norm2(r)) / bnorm
    report.final_relres = relres
    if not np.isfinite(relres):
        report.breakdown = True
        return x, report
    if relres <= tol:
        report.converged = True
        return x, report

    r_hat = r.copy()
    r_hat_norm = norm2(r_hat)
    p = np.zeros_like(b)
    v = np.zeros_like(b)
    rho_prev = alpha = omega = dtype.type(1)

    for it in range(cfg.max_outer):
        report.outer_iterations = it + 1
        rho = dot(r_hat, r)
        if not np.isfinite(rho) or abs(rho) <= eps * r_hat_norm * norm2(r):
            report.breakdown = True
            break
        if it == 0:
            p = r.copy()
        else:
            beta = (rho / rho_prev) * (alpha / omega)
            p = r + beta * (p - omega * v)
        p_hat = p if M.identity else M.apply(p)
        v = np.asarray(A.apply(p_hat), dtype=dtype)
        report.iterations += 1
        denom = dot(r_hat, v)
        if not np.isfinite(denom) or abs(denom) <= eps * r_hat_norm * norm2(v):
            report.breakdown = True
            break
        alpha = rho / denom
        s = r - alpha * v
        relres = float(norm2(s)) / bnorm
        report.history.append(relres)
        if relres <= tol:
            x = x + alpha * p_hat
            report.final_relres = relres
            report.converged = True
            break
        s_hat = s if M.identity else M.apply(s)
        t = np.asarray(A.apply(s_hat), dtype=dtype)
        report.iterations += 1
        tt = dot(t, t)
        if not np.isfinite(tt) or tt == 0:
            x = x + alpha * p_hat
            report.final_relres = relres
            report.breakdown = True
            break
        omega = dot(t, s) / tt
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        relres = float(norm2(r)) / bnorm
        report.history.append(relres)
        report.final_relres = relres
        if not np.isfinite(relres):
            report.breakdown = True
            break
        if relres <= tol:
            report.converged = True
            break
        if abs(omega) <= eps:
            report.breakdown = True
            break
        rho_prev = rho
    return x, report


def cg(
    A: LinearOperator,
    b: np.ndarray,
    x0: Optional[np.ndarray] = None,
    M: Optional[Preconditioner] = None,
    cfg: Optional[KrylovConfig] = None,
) -> tuple[np.ndarray, KrylovReport]:
    """Preconditioned conjugate gradients.

    Nonpositive curvature ``p.Ap <= 0`` means the operator is not SPD and is
    reported as a breakdown.
    """
    cfg = cfg or KrylovConfig(method=KrylovMethod.CG)
    b, x, M, dtype, eps, bnorm = _setup(A, b, x0, M)
    tol = cfg.rel_tol
    report = KrylovReport()

    r = _initial_residual(A, b, x, report)
    relres = float(norm2(r)) / bnorm
    report.final_relres = relres
    if not np.isfinite(relres):
        report.breakdown = True
        return x, report
    if relres <= tol:
        report.converged = True
        return x, report

    z = r if M.identity else M.apply(r)
    p = np.array(z, copy=True)
    rz = dot(r, z)
    for it in range(cfg.max_outer):
        report.outer_iterations = it + 1
        Ap = np.asarray(A.apply(p), dtype=dtype)
        report.iterations += 1
        curvature = dot(p, Ap)
        if not np.isfinite(curvature) or curvature <= 0:
            report.breakdown = True
            break
        alpha = rz / curvature
        x = x + alpha * p
        r = r - alpha * Ap
        relres = float(norm2(r)) / bnorm
        report.history.append(relres)
        report.final_relres = relres
        if not np.isfinite(relres):
            report.breakdown = True
            break
        if relres <= tol:
            report.converged = True
            break
        z = r if M.identity else M.apply(r)
        rz_new = dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, report


_SOLVERS = {
    KrylovMethod.GMRES: gmres,
    KrylovMethod.BICGSTAB: bicgstab,
    KrylovMethod.CG: cg,
}


def solve(A, b, x0=None, M=None, cfg: Optional[KrylovConfig] = None):
    """Dispatch to the solver named by ``cfg.method``."""
    cfg = cfg or KrylovConfig()
    return _SOLVERS[cfg.method](A, b, x0, M, cfg)
