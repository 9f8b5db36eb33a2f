"""Two-dimensional viscous Burgers equation, Crank-Nicolson in time.

State layout: ``[u-plane, v-plane]`` flattened row-major, each plane
``(ny, nx)`` on the periodic square ``[0, 2 pi)^2``.
"""

from __future__ import annotations

import math

import numpy as np

from .grid import Boundary, GridSpec, shift_x, shift_y


def default_grid(n: int) -> GridSpec:
    return GridSpec.square(n, 0.0, 2.0 * math.pi, Boundary.PERIODIC)


def _advection_diffusion(U, nu: float, grid: GridSpec):
    """``Adv(U) - nu Lap(U)`` for a stacked ``(2, ny, nx)`` velocity."""
    xp = shift_x(U, 1)
    xm = shift_x(U, -1)
    yp = shift_y(U, 1)
    ym = shift_y(U, -1)
    adv = U[0] * ((xp - xm) * (0.5 / grid.dx)) + U[1] * ((yp - ym) * (0.5 / grid.dy))
    two_u = 2.0 * U
    lap = (xp - two_u + xm) * (1.0 / grid.dx**2) + (yp - two_u + ym) * (1.0 / grid.dy**2)
    return adv - nu * lap


def burgers_residual(Uk, Un, dt: float, nu: float, grid: GridSpec):
    """Crank-Nicolson residual ``Uk - Un + dt/2 [N(Uk) + N(Un)]``."""
    return make_burgers_residual(Un, dt, nu, grid)(Uk)


def make_burgers_residual(Un, dt: float, nu: float, grid: GridSpec):
    """Residual closure over the frozen previous state ``Un``.

    The old-time advection-diffusion term is evaluated once here.
    """
    if grid.boundary is not Boundary.PERIODIC:
        raise ValueError("Burgers residual requires a periodic grid")
    Un = np.asarray(Un)
    shape = (2,) + grid.shape
    Un3 = Un.reshape(shape)
    half = 0.5 * float(dt)
    nu = float(nu)
    old = Un3 - half * _advection_diffusion(Un3, nu, grid)

    def F(Uk):
        U3 = Uk.reshape(shape)
        return (U3 - old + half * _advection_diffusion(U3, nu, grid)).reshape(-1)

    return F


def burgers_dt(U, nu: float, grid: GridSpec, C: float = 1.0, eps: float = 2.0**-52) -> float:
    """Adaptive CFL step from advective and diffusive limits."""
    U3 = np.asarray(U).reshape((2,) + grid.shape)
    umax = max(float(np.max(np.abs(U3[0]))), eps)
    vmax = max(float(np.max(np.abs(U3[1]))), eps)
    limits = [grid.dx / umax, grid.dy / vmax]
    if nu > 0:
        limits.append(1.0 / (2.0 * nu * (1.0 / grid.dx**2 + 1.0 / grid.dy**2)))
    return C * min(limits)


FOUR_VORTEX_CENTERS = (
    (0.5 * math.pi, 0.5 * math.pi),
    (1.5 * math.pi, 0.5 * math.pi),
    (1.5 * math.pi, 1.5 * math.pi),
    (0.5 * math.pi, 1.5 * math.pi),
)
FOUR_VORTEX_CIRCULATION = (1.0, -1.0, 1.0, -1.0)
FOUR_VORTEX_RADIUS = 0.5
DSL_RHO = 30.0
DSL_DELTA = 0.05


def tgv(X, Y):
    return np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y)


def double_shear_layer(X, Y, rho: float = DSL_RHO, delta: float = DSL_DELTA):
    u = np.where(Y <= math.pi, np.tanh(rho * (Y - 0.5 * math.pi)), np.tanh(rho * (1.5 * math.pi - Y)))
    v = delta * np.sin(X)
    return u, v


def four_vortex(X, Y, radius: float = FOUR_VORTEX_RADIUS):
    u = np.zeros_like(X)
    v = np.zeros_like(X)
    for (cx, cy), gamma in zip(FOUR_VORTEX_CENTERS, FOUR_VORTEX_CIRCULATION):
        r2 = (X - cx) ** 2 + (Y - cy) ** 2
        weight = gamma * np.exp(-r2 / radius**2)
        u -= weight * (Y - cy)
        v += weight * (X - cx)
    return u, v


IC_BUILDERS = {"tgv": tgv, "dsl": double_shear_layer, "4vc": four_vortex}


def burgers_ic(kind: str, grid: GridSpec, dtype=np.float64) -> np.ndarray:
    try:
        builder = IC_BUILDERS[kind.lower()]
    except KeyError:
        raise ValueError(f"unknown Burgers initial condition {kind!r}") from None
    X, Y = grid.coords()
    u, v = builder(X, Y)
    return np.stack([u, v]).reshape(-1).astype(dtype)
