"""Uniform 2-D grids and second-order central-difference stencils.

Arrays are laid out as ``(..., ny, nx)``: the last axis runs along x.  The
stencils use ``np.roll`` so they evaluate identically over plain arrays and
dual numbers.  On Dirichlet axes, callers mask the boundary ring to zero
first; interior nodes then never read wrapped values and the boundary rows
are replaced afterwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    DIRICHLET0 = "dirichlet0"
    PEC = "pec"
    PERIODIC_Y_DIRICHLET_X = "periodic_y_dirichlet_x"


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grids need at least 3 nodes per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("empty domain")

    @property
    def periodic_x(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def periodic_y(self) -> bool:
        return self.boundary in (Boundary.PERIODIC, Boundary.PERIODIC_Y_DIRICHLET_X)

    @property
    def dx(self) -> float:
        n = self.nx if self.periodic_x else self.nx - 1
        return (self.x_max - self.x_min) / n

    @property
    def dy(self) -> float:
        n = self.ny if self.periodic_y else self.ny - 1
        return (self.y_max - self.y_min) / n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates ``(X, Y)``, each of shape ``(ny, nx)``."""
        x = self.x_min + self.dx * np.arange(self.nx)
        y = self.y_min + self.dy * np.arange(self.ny)
        return np.meshgrid(x, y, indexing="xy")

    def boundary_mask(self) -> np.ndarray:
        """True on nodes whose residual rows are replaced by the boundary condition."""
        mask = np.zeros(self.shape, dtype=bool)
        if not self.periodic_x:
            mask[:, 0] = mask[:, -1] = True
        if not self.periodic_y:
            mask[0, :] = mask[-1, :] = True
        return mask

    @classmethod
    def square(cls, n: int, lo: float, hi: float, boundary: Boundary) -> "GridSpec":
        return cls(n, n, lo, hi, lo, hi, boundary)


def _cyclic(f, k: int, axis: int):
    if not isinstance(f, np.ndarray):
        return np.roll(f, -k, axis=axis)
    # two slice copies; np.roll does the same with more overhead
    n = f.shape[axis]
    k %= n
    out = np.empty_like(f)
    head = [slice(None)] * f.ndim
    tail = [slice(None)] * f.ndim
    head[axis], tail[axis] = slice(0, n - k), slice(k, n)
    out[tuple(head)] = f[tuple(tail)]
    head[axis], tail[axis] = slice(n - k, n), slice(0, k)
    out[tuple(head)] = f[tuple(tail)]
    return out


def shift_x(f, k: int):
    """``out[..., i] = f[..., i + k]`` (cyclic)."""
    return _cyclic(f, k, len(f.shape) - 1)


def shift_y(f, k: int):
    return _cyclic(f, k, len(f.shape) - 2)


class Stencil:
    """Central differences on one grid, with scalars cast for a target dtype."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self.inv_2dx = 1.0 / (2.0 * grid.dx)
        self.inv_2dy = 1.0 / (2.0 * grid.dy)
        self.inv_dx2 = 1.0 / grid.dx**2
        self.inv_dy2 = 1.0 / grid.dy**2
        self.inv_4dxdy = 1.0 / (4.0 * grid.dx * grid.dy)

    def dx(self, f):
        return (shift_x(f, 1) - shift_x(f, -1)) * self.inv_2dx

    def dy(self, f):
        return (shift_y(f, 1) - shift_y(f, -1)) * self.inv_2dy

    def dxx(self, f):
        return (shift_x(f, 1) - 2.0 * f + shift_x(f, -1)) * self.inv_dx2

    def dyy(self, f):
        return (shift_y(f, 1) - 2.0 * f + shift_y(f, -1)) * self.inv_dy2

    def lap(self, f):
        return self.dxx(f) + self.dyy(f)

    def dxy(self, f):
        xp = shift_x(f, 1)
        xm = shift_x(f, -1)
        return (shift_y(xp, 1) - shift_y(xp, -1) - shift_y(xm, 1) + shift_y(xm, -1)) * self.inv_4dxdy
