"""Time-harmonic Maxwell equations in a lossy Kerr medium (2-D TE, PEC cavity).

Complex fields are stored as real pairs: the state is the four planes
``[Ex_re, Ex_im, Ey_re, Ey_im]`` on ``[0, 1]^2``.  The permittivity depends on
``|E|``, which is not holomorphic, so the problem is linearized as a real
system of twice the size.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..krylov import KrylovConfig, KrylovMethod, KrylovReport, Preconditioner, gmres
from ..linops import LinearOperator
from ..numerics import Precision
from .grid import Boundary, GridSpec, Stencil


@dataclass(frozen=True)
class MaxwellParams:
    omega: float
    chi: float = 0.05
    eps0: float = 1.0
    mu0: float = 1.0
    loss_factor: float = 0.05
    cslp_shift: float = 0.5


SOURCE_X0 = 0.5
SOURCE_Y0 = 0.5
DIPOLE_Y = (0.4, 0.6)
SOURCE_SIGMA = 0.05


def default_grid(n: int) -> GridSpec:
    return GridSpec.square(n, 0.0, 1.0, Boundary.PEC)


def _planes(grid: GridSpec) -> tuple[int, int, int]:
    return (4,) + grid.shape


def maxwell_source(kind: str, grid: GridSpec, dtype=np.float64) -> np.ndarray:
    """Current density planes ``[Jx, Jy]`` (real), shape ``(2, ny, nx)``."""
    X, Y = grid.coords()

    def bump(y0):
        return np.exp(-((X - SOURCE_X0) ** 2 + (Y - y0) ** 2) / (2.0 * SOURCE_SIGMA**2))

    key = kind.lower().replace("_", "").replace("-", "")
    if key in ("symmetricgaussian", "gaussian", "symmetric"):
        Jx = bump(SOURCE_Y0)
    elif key in ("antisymmetricdipole", "dipole", "antisymmetric"):
        Jx = bump(DIPOLE_Y[0]) - bump(DIPOLE_Y[1])
    else:
        raise ValueError(f"unknown Maxwell source {kind!r}")
    return np.stack([Jx, np.zeros_like(Jx)]).astype(dtype)


def _field_magnitude(E4, floor: float):
    mag2 = E4[0] * E4[0] + E4[1] * E4[1] + E4[2] * E4[2] + E4[3] * E4[3]
    # floor keeps the sqrt derivative finite at E = 0
    return np.sqrt(np.maximum(mag2, floor))


def make_maxwell_residual(params: MaxwellParams, J, grid: GridSpec, dtype=np.float64):
    """Residual closure ``E -> curl curl E - w^2 mu eps(E) E - i w mu J``."""
    if grid.boundary is not Boundary.PEC:
        raise ValueError("Maxwell residual requires PEC boundaries")
    dtype = np.dtype(dtype)
    floor = Precision.of(np.zeros(1, dtype)).eps_mach
    shape = _planes(grid)
    st = Stencil(grid)
    bmask = grid.boundary_mask()
    interior = (~bmask).astype(dtype)
    J = np.asarray(J, dtype=dtype).reshape((2,) + grid.shape)
    w2mu = float(params.omega**2 * params.mu0)
    # -i w mu J contributes only to the imaginary parts since J is real
    src = np.zeros(shape, dtype=dtype)
    src[1] = -params.omega * params.mu0 * J[0]
    src[3] = -params.omega * params.mu0 * J[1]
    src *= interior
    eps0 = float(params.eps0)
    loss = float(params.loss_factor)
    chi = float(params.chi)

    def F(E):
        E4 = E.reshape(shape) * interior
        Ex, Ey = E4[0:2], E4[2:4]
        ccx = st.dxy(Ey) - st.dyy(Ex)
        ccy = st.dxy(Ex) - st.dxx(Ey)
        # eps(E) = eps0 (1 - i loss) a with a = 1 + chi |E|
        a = eps0 * (1.0 + chi * _field_magnitude(E4, floor))
        b = -loss * a
        ex_re = a * Ex[0] - b * Ex[1]
        ex_im = a * Ex[1] + b * Ex[0]
        ey_re = a * Ey[0] - b * Ey[1]
        ey_im = a * Ey[1] + b * Ey[0]
        interior_rows = np.stack([
            ccx[0] - w2mu * ex_re,
            ccx[1] - w2mu * ex_im,
            ccy[0] - w2mu * ey_re,
            ccy[1] - w2mu * ey_im,
        ]) + src
        return np.where(bmask, E.reshape(shape), interior_rows).reshape(-1)

    return F


def maxwell_residual(E, params: MaxwellParams, J, grid: GridSpec):
    dtype = np.asarray(E.primal if hasattr(E, "primal") else E).dtype
    return make_maxwell_residual(params, J, grid, dtype)(E)


def maxwell_cslp(params: MaxwellParams, E_current, grid: GridSpec) -> Preconditioner:
    """Pointwise complex-diagonal shifted-Laplacian preconditioner.

    ``M_xx = 2/dy^2 - w^2 mu eps(E)(1 - i s)`` and ``M_yy`` with ``dx``; the
    action divides each complex component by its diagonal entry.
    """
    E_current = np.asarray(E_current)
    dtype = E_current.dtype
    eps_mach = Precision.of(E_current).eps_mach
    shape = _planes(grid)
    E4 = E_current.reshape(shape)
    a = params.eps0 * (1.0 + params.chi * _field_magnitude(E4.astype(np.float64), eps_mach))
    # eps_pre = a (1 - i loss)(1 - i shift)
    pre_re = a * (1.0 - params.loss_factor * params.cslp_shift)
    pre_im = -a * (params.loss_factor + params.cslp_shift)
    w2mu = params.omega**2 * params.mu0
    diag_re = np.empty((2,) + grid.shape)
    diag_re[0] = 2.0 / grid.dy**2 - w2mu * pre_re
    diag_re[1] = 2.0 / grid.dx**2 - w2mu * pre_re
    diag_im = np.broadcast_to(-w2mu * pre_im, (2,) + grid.shape)
    mod2 = diag_re**2 + diag_im**2
    bmask = grid.boundary_mask()
    passthrough = (np.sqrt(mod2) < eps_mach) | bmask
    # 1/M as a complex number; identity at pass-through nodes
    inv_re = np.where(passthrough, 1.0, diag_re / np.where(passthrough, 1.0, mod2))
    inv_im = np.where(passthrough, 0.0, -diag_im / np.where(passthrough, 1.0, mod2))
    inv_re = inv_re.astype(dtype)
    inv_im = inv_im.astype(dtype)

    def apply(v):
        v4 = np.asarray(v).reshape(shape)
        re = v4[0::2]
        im = v4[1::2]
        out = np.empty_like(v4)
        out[0::2] = inv_re * re - inv_im * im
        out[1::2] = inv_re * im + inv_im * re
        return out.reshape(-1)

    return Preconditioner(apply=apply, identity=False)


def maxwell_born_guess(
    params: MaxwellParams,
    J,
    grid: GridSpec,
    kcfg: KrylovConfig,
    dtype=np.float64,
) -> tuple[np.ndarray, KrylovReport]:
    """Solve the problem linearized at ``E = 0`` (GMRES with CSLP).

    Returns the field and the Krylov report; callers decide what a
    non-converged solve means for their run.
    """
    dtype = np.dtype(dtype)
    linear = replace(params, chi=0.0)
    F_lin = make_maxwell_residual(linear, J, grid, dtype)
    n = 4 * grid.n_nodes
    zero = np.zeros(n, dtype=dtype)
    F0 = F_lin(zero)
    rhs = -F0
    if not rhs.any():
        return zero, KrylovReport(converged=True, final_relres=0.0)

    def matvec(v):
        return F_lin(v) - F0

    op = LinearOperator(dim=n, matvec=matvec, dtype=dtype)
    M = maxwell_cslp(linear, zero, grid)
    cfg = replace(kcfg, method=KrylovMethod.GMRES)
    return gmres(op, rhs, None, M, cfg)
