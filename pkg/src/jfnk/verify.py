"""Verification studies: spatial convergence, JVP oracle and discrete energy balance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autodiff import jvp
from .harness import run_ibvp
from .krylov import KrylovConfig
from .linops import JvpStrategy, fd_jvp
from .newton import NewtonConfig, newton_solve
from .numerics import Precision, norm2
from .problems import Boundary, GridSpec, ProblemSpec, burgers, maxwell, reaction_diffusion, suolson

STUDIES = ("spatial-convergence", "jvp-oracle", "energy-balance")


# ----------------------------------------------------------------------------
# spatial convergence


@dataclass
class ConvergenceResult:
    grids: list
    errors: list
    order: float
    final_time: float
    steps: int = 0

    @property
    def pairwise_orders(self) -> list[float]:
        return [
            math.log(self.errors[i] / self.errors[i + 1]) / math.log(self.grids[i + 1] / self.grids[i])
            for i in range(len(self.errors) - 1)
        ]


def _cfl_steps(spec: ProblemSpec, t_final: float) -> int:
    """Fewest uniform steps reaching ``t_final`` without exceeding the CFL step."""
    grid = spec.grid
    U0 = burgers.burgers_ic(spec.ic, grid, spec.precision.dtype)
    dt_cfl = burgers.burgers_dt(U0, spec.param, grid, spec.courant, spec.precision.eps_mach)
    return max(1, math.ceil(t_final / dt_cfl - 1e-12))


def _march(spec: ProblemSpec, t_final: float, n_steps: int, strategy) -> np.ndarray:
    rec = run_ibvp(spec, strategy, n_steps=n_steps, dt=t_final / n_steps)
    if not rec.succeeded:
        raise RuntimeError(f"march failed on {spec.n}x{spec.n}: {rec.failure_reason}")
    return rec.final_state


def spatial_convergence(
    grids=(16, 32, 64),
    reference: int = 128,
    nu: float = 0.05,
    t_final: float = 0.5,
    ic: str = "tgv",
    strategy=JvpStrategy.AD,
) -> ConvergenceResult:
    """Burgers error against a fine-grid solution at shared nodes.

    Every grid marches with the reference grid's CFL step, so the time
    discretization error is common to all of them and drops out of the
    differences.  Grid ``n`` nodes are every ``reference // n``-th reference
    node, so no interpolation is involved.  The observed order is the
    least-squares slope of ``log error`` against ``log h``.
    """
    def spec(n):
        return ProblemSpec("burgers", ic, nu, n=n, precision=Precision.FP64)

    n_steps = _cfl_steps(spec(reference), t_final)
    ref = _march(spec(reference), t_final, n_steps, strategy).reshape(2, reference, reference)
    errors = []
    for n in grids:
        if reference % n:
            raise ValueError(f"grid {n} does not divide the reference {reference}")
        U = _march(spec(n), t_final, n_steps, strategy)
        stride = reference // n
        diff = U.reshape(2, n, n) - ref[:, ::stride, ::stride]
        errors.append(float(np.sqrt(np.mean(diff * diff))))
    h = np.log(2.0 * math.pi / np.asarray(grids, dtype=float))
    slope = float(np.polyfit(h, np.log(errors), 1)[0])
    return ConvergenceResult(list(grids), errors, slope, t_final, n_steps)


# ----------------------------------------------------------------------------
# JVP oracle


@dataclass
class JvpCheck:
    name: str
    ad_vs_dense: float
    fd_vs_ad: float


def small_residuals(n: int = 8, seed: int = 0):
    """FP64 residual closures on ``n x n`` grids with a random state and direction each."""
    rng = np.random.default_rng(seed)
    cases = []

    g = burgers.default_grid(n)
    Un = burgers.burgers_ic("tgv", g)
    F = burgers.make_burgers_residual(Un, 0.05, 0.05, g)
    cases.append(("burgers", F, Un + 0.1 * rng.standard_normal(Un.size)))

    g = suolson.default_grid(n, "moving")
    Wn = suolson.suolson_ic("moving", g) + 0.1 * rng.random(2 * g.n_nodes)
    Q = suolson.suolson_source("moving", 0.05, g)
    F = suolson.make_suolson_residual(Wn, 0.1, 0.1, Q, g)
    cases.append(("suolson", F, Wn + 0.1 * rng.standard_normal(Wn.size)))

    g = reaction_diffusion.default_grid(n)
    un = reaction_diffusion.rd_ic("gaussian", g)
    F = reaction_diffusion.make_rd_residual(un, 0.01, 0.01, g)
    cases.append(("rd", F, un + 0.1 * rng.standard_normal(un.size)))

    g = maxwell.default_grid(n)
    J = maxwell.maxwell_source("gaussian", g)
    F = maxwell.make_maxwell_residual(maxwell.MaxwellParams(omega=3.0, chi=0.5), J, g)
    cases.append(("maxwell", F, rng.standard_normal(4 * g.n_nodes)))

    return [(name, F, x, rng.standard_normal(x.size)) for name, F, x in cases]


def dense_jacobian(F, x) -> np.ndarray:
    """Jacobian assembled one column at a time from unit tangent seeds."""
    n = x.size
    cols = []
    for i in range(n):
        e = np.zeros(n, dtype=x.dtype)
        e[i] = 1.0
        cols.append(jvp(F, x, e)[1])
    return np.stack(cols, axis=1)


def jvp_oracle(n: int = 8, seed: int = 0) -> list[JvpCheck]:
    out = []
    for name, F, x, v in small_residuals(n, seed):
        Jd = dense_jacobian(F, x)
        ad = jvp(F, x, v)[1]
        fd = fd_jvp(F, x, F(x), v, Precision.FP64)
        ref = Jd @ v
        scale = float(norm2(ref))
        out.append(JvpCheck(
            name,
            float(norm2(ad - ref)) / scale,
            float(norm2(fd - ad)) / float(norm2(ad)),
        ))
    return out


# ----------------------------------------------------------------------------
# energy balance


@dataclass
class EnergyBalance:
    imbalance: float
    bound: float
    newton_iters: int
    converged: bool

    @property
    def holds(self) -> bool:
        return self.converged and self.imbalance <= self.bound


def energy_balance(
    n: int = 32,
    xi: float = 1.0,
    precision=Precision.FP64,
    strategy=JvpStrategy.AD,
    courant: float = 1.0,
) -> EnergyBalance:
    """One converged Su-Olson step on a fully periodic grid.

    With no boundary the Laplacian sums to zero, so the change in
    ``sum(U + V / xi)`` must equal ``dt * sum(Q)`` up to the Newton residual.
    """
    precision = Precision.parse(precision)
    dtype = precision.dtype
    g = GridSpec.square(n, -5.0, 5.0, Boundary.PERIODIC)
    X, Y = g.coords()
    U0 = 0.5 * np.exp(-(X**2 + Y**2) / 4.0)
    W0 = np.concatenate([U0.reshape(-1), 0.25 * U0.reshape(-1)]).astype(dtype)
    dt = suolson.suolson_dt(g, xi, courant)
    Q = suolson.suolson_source("static", 0.5 * dt, g, dtype=dtype)
    F = suolson.make_suolson_residual(W0, dt, xi, Q, g)
    ncfg = NewtonConfig.for_precision(precision)
    kcfg = KrylovConfig.for_precision("gmres", precision)
    W1, rep = newton_solve(F, W0, W0, strategy, kcfg, ncfg)

    def content(W):
        U, V = np.asarray(W, dtype=np.float64).reshape(2, -1)
        return float(np.sum(U) + np.sum(V) / xi)

    imbalance = abs(content(W1) - content(W0) - dt * float(np.sum(Q, dtype=np.float64)))
    bound = 100.0 * ncfg.tol_newton * rep.fnorm_ref
    return EnergyBalance(imbalance, bound, rep.iterations, rep.converged)


def run_study(name: str):
    if name == "spatial-convergence":
        return spatial_convergence()
    if name == "jvp-oracle":
        return jvp_oracle()
    if name == "energy-balance":
        return energy_balance()
    raise ValueError(f"unknown study {name!r}; choose from {', '.join(STUDIES)}")
