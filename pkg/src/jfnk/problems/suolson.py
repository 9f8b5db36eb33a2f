"""Su-Olson non-equilibrium radiation diffusion on ``[-5, 5]^2``.

State layout: ``[U-plane, V-plane]`` (radiation, material).  Dirichlet
conditions apply to the radiation field only; the material equation has no
spatial coupling and is integrated pointwise everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Boundary, GridSpec, Stencil

DIFFUSION = 1.0 / 3.0
DT_REGULARIZER = 1e-8


@dataclass(frozen=True)
class SuOlsonSource:
    kind: str = "moving"  # "static" box or "moving" orbiting Gaussian
    amplitude: float = 1.0
    sigma: float = 0.4
    orbit_radius: float = 2.5
    orbit_speed: float = 0.5
    # box half-widths; ``None`` spans the whole axis (the 1-D slab profile)
    box_half_x: float = 0.5
    box_half_y: float | None = None


SOURCE_ALIASES = {
    "static": "static",
    "staticbox": "static",
    "box": "static",
    "moving": "moving",
    "orbitinggaussian": "moving",
    "orbit": "moving",
}


def _canonical(kind: str) -> str:
    try:
        return SOURCE_ALIASES[kind.lower().replace("_", "").replace("-", "")]
    except KeyError:
        raise ValueError(f"unknown Su-Olson source {kind!r}") from None


def default_grid(n: int, kind: str = "moving") -> GridSpec:
    boundary = (
        Boundary.PERIODIC_Y_DIRICHLET_X if _canonical(kind) == "static" else Boundary.DIRICHLET0
    )
    return GridSpec.square(n, -5.0, 5.0, boundary)


def suolson_source(kind: str, t: float, grid: GridSpec, params: SuOlsonSource | None = None,
                   dtype=np.float64) -> np.ndarray:
    """Source plane ``Q(x, y, t)`` with shape ``(ny, nx)``."""
    params = params or SuOlsonSource(kind=kind)
    X, Y = grid.coords()
    if _canonical(kind) == "static":
        inside = np.abs(X) <= params.box_half_x
        if params.box_half_y is not None:
            inside &= np.abs(Y) <= params.box_half_y
        Q = np.where(inside, params.amplitude, 0.0)
    else:
        cx = params.orbit_radius * math.cos(params.orbit_speed * t)
        cy = params.orbit_radius * math.sin(params.orbit_speed * t)
        r2 = (X - cx) ** 2 + (Y - cy) ** 2
        Q = params.amplitude * np.exp(-r2 / (2.0 * params.sigma**2))
    return Q.astype(dtype)


def suolson_ic(kind: str, grid: GridSpec, dtype=np.float64) -> np.ndarray:
    """Cold start for the static box; decaying concentric rings for the orbit."""
    U = np.zeros(grid.shape)
    if _canonical(kind) == "moving":
        X, Y = grid.coords()
        r = np.hypot(X, Y)
        U = np.cos(math.pi * r) ** 2 * np.exp(-r * r / 4.0)
        U[grid.boundary_mask()] = 0.0
    V = np.zeros(grid.shape)
    return np.stack([U, V]).reshape(-1).astype(dtype)


def make_suolson_residual(Wn, dt: float, xi: float, Q, grid: GridSpec):
    """Residual closure; ``Q`` is the source plane at the step midpoint."""
    Wn = np.asarray(Wn)
    shape = (2,) + grid.shape
    Un, Vn = Wn.reshape(shape)
    st = Stencil(grid)
    half = 0.5 * float(dt)
    xi = float(xi)
    Q = np.asarray(Q, dtype=Wn.dtype).reshape(grid.shape)
    bmask = grid.boundary_mask()
    has_boundary = bool(bmask.any())
    interior = (~bmask).astype(Wn.dtype)
    if has_boundary:
        Un_m = Un * interior
    else:
        Un_m = Un

    def F(Wk):
        Uk, Vk = Wk.reshape(shape)
        Uk_m = Uk * interior if has_boundary else Uk
        Us = Uk + Un
        Vs = Vk + Vn
        lap = st.lap(Uk_m + Un_m)
        FU = Uk - Un - half * (DIFFUSION * lap - Us + Vs + 2.0 * Q)
        FV = Vk - Vn - (half * xi) * (Us - Vs)
        if has_boundary:
            FU = np.where(bmask, Uk, FU)
        return np.concatenate([FU.reshape(-1), FV.reshape(-1)])

    return F


def suolson_residual(Wk, Wn, dt: float, xi: float, Q, grid: GridSpec):
    return make_suolson_residual(Wn, dt, xi, Q, grid)(Wk)


def suolson_dt(grid: GridSpec, xi: float, C: float = 1.0) -> float:
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    h = min(grid.dx, grid.dy)
    return min(C * h * h / DIFFUSION, C / (xi + DT_REGULARIZER))
