"""Benchmark residuals and the glue that turns a :class:`ProblemSpec` into them."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..numerics import Precision
from . import burgers, maxwell, reaction_diffusion, suolson
from .grid import Boundary, GridSpec


class Problem(enum.Enum):
    BURGERS = "burgers"
    SUOLSON = "suolson"
    RD = "rd"
    MAXWELL = "maxwell"

    @classmethod
    def parse(cls, value: "str | Problem") -> "Problem":
        if isinstance(value, Problem):
            return value
        aliases = {"reactiondiffusion": "rd", "reaction-diffusion": "rd", "maxwellkerr": "maxwell"}
        key = value.lower()
        return cls(aliases.get(key, key))


# parameter sweeps and initial data of the benchmark suite
PARAMETER_SWEEPS = {
    Problem.BURGERS: (0.1, 0.05, 0.01),
    Problem.SUOLSON: (1.0, 0.1, 0.01),
    Problem.RD: (0.1, 0.01, 0.001),
    Problem.MAXWELL: (0.5, 0.1, 0.05),
}
SWEEP_CASES = {
    Problem.BURGERS: ("tgv", "dsl", "4vc"),
    Problem.SUOLSON: ("static", "moving"),
    Problem.RD: ("gaussian", "sinusoidal"),
    Problem.MAXWELL: ("gaussian", "dipole"),
}
DEFAULT_OMEGA_SWEEP = (14.0, 15.0, 16.0, 17.0, 18.0)


@dataclass(frozen=True)
class ProblemSpec:
    """One benchmark configuration.

    ``param`` is the viscosity, material coupling, diffusion coefficient or
    Kerr coefficient depending on ``problem``; ``ic`` names the initial
    condition or source.
    """

    problem: Problem
    ic: str
    param: float
    n: int = 64
    precision: Precision = Precision.FP64
    courant: float = 1.0
    boundary: Boundary | None = None

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem.parse(self.problem))
        object.__setattr__(self, "precision", Precision.parse(self.precision))
        if self.boundary is not None:
            object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def grid(self) -> GridSpec:
        if self.problem is Problem.BURGERS:
            grid = burgers.default_grid(self.n)
        elif self.problem is Problem.SUOLSON:
            grid = suolson.default_grid(self.n, self.ic)
        elif self.problem is Problem.RD:
            grid = reaction_diffusion.default_grid(self.n)
        else:
            grid = maxwell.default_grid(self.n)
        if self.boundary is not None and self.boundary is not grid.boundary:
            grid = GridSpec(grid.nx, grid.ny, grid.x_min, grid.x_max, grid.y_min, grid.y_max, self.boundary)
        return grid

    @property
    def is_bvp(self) -> bool:
        return self.problem is Problem.MAXWELL

    @property
    def problem_id(self) -> str:
        return f"{self.problem.value}/{self.ic}/{self.param:g}/{self.n}"

    def to_dict(self) -> dict:
        out = {
            "problem": self.problem.value,
            "ic": self.ic,
            "param": self.param,
            "n": self.n,
            "precision": self.precision.value,
            "courant": self.courant,
        }
        if self.boundary is not None:
            out["boundary"] = self.boundary.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        return cls(**data)


@dataclass
class TimeDependentSetup:
    """What the time-marching loop needs from a problem."""

    grid: GridSpec
    state0: np.ndarray
    step_dt: Callable[[np.ndarray], float]
    residual: Callable[[np.ndarray, float, float], Callable]


def build_ibvp(spec: ProblemSpec) -> TimeDependentSetup:
    grid = spec.grid
    dtype = spec.precision.dtype
    eps = spec.precision.eps_mach
    C = spec.courant
    p = float(spec.param)
    if spec.problem is Problem.BURGERS:
        return TimeDependentSetup(
            grid,
            burgers.burgers_ic(spec.ic, grid, dtype),
            lambda U: burgers.burgers_dt(U, p, grid, C, eps),
            lambda Un, dt, t: burgers.make_burgers_residual(Un, dt, p, grid),
        )
    if spec.problem is Problem.SUOLSON:
        dt_fixed = suolson.suolson_dt(grid, p, C)

        def residual(Wn, dt, t):
            Q = suolson.suolson_source(spec.ic, t + 0.5 * dt, grid, dtype=dtype)
            return suolson.make_suolson_residual(Wn, dt, p, Q, grid)

        return TimeDependentSetup(
            grid, suolson.suolson_ic(spec.ic, grid, dtype), lambda W: dt_fixed, residual
        )
    if spec.problem is Problem.RD:
        dt_fixed = reaction_diffusion.rd_dt(p, grid, C)
        return TimeDependentSetup(
            grid,
            reaction_diffusion.rd_ic(spec.ic, grid, dtype),
            lambda u: dt_fixed,
            lambda un, dt, t: reaction_diffusion.make_rd_residual(un, dt, p, grid),
        )
    raise ValueError(f"{spec.problem.value} is not a time-dependent problem")


__all__ = [
    "Boundary",
    "GridSpec",
    "Problem",
    "ProblemSpec",
    "TimeDependentSetup",
    "build_ibvp",
    "burgers",
    "maxwell",
    "reaction_diffusion",
    "suolson",
    "PARAMETER_SWEEPS",
    "SWEEP_CASES",
    "DEFAULT_OMEGA_SWEEP",
]
