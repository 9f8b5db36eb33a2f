"""Experiment harness: time marching, frequency continuation, sweeps and records."""

from __future__ import annotations

import enum
import itertools
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .krylov import KrylovConfig, KrylovMethod
from .linops import JvpStrategy, eps_clamp
from .newton import NewtonConfig, newton_solve
from .numerics import Precision, all_finite, norm2
from .problems import (
    DEFAULT_OMEGA_SWEEP,
    PARAMETER_SWEEPS,
    SWEEP_CASES,
    Problem,
    ProblemSpec,
    build_ibvp,
    maxwell,
)

SCHEMA_VERSION = 1
UNCONVERGED_FRACTION_LIMIT = 0.2
# an IBVP step counts as unconverged above this multiple of tol_newton
IBVP_STEP_SLACK = 100.0
DEFAULT_IBVP_STEPS = 200


class RunStatus(enum.Enum):
    CONVERGED = "Converged"
    CONVERGED_WITH_WARNINGS = "ConvergedWithWarnings"
    FAILED = "Failed"


class FailureReason(enum.Enum):
    NON_FINITE = "NonFinite"
    SOLVER_BREAKDOWN = "SolverBreakdown"
    TOO_MANY_UNCONVERGED = "TooManyUnconvergedSteps"


@dataclass
class RunRecord:
    spec: ProblemSpec
    strategy: JvpStrategy
    method: KrylovMethod
    wall_time_s: float = 0.0
    newton_iters_total: int = 0
    krylov_iters_total: int = 0
    matvecs_total: int = 0
    steps_total: int = 0
    steps_unconverged: int = 0
    backtracks_total: int = 0
    status: RunStatus = RunStatus.CONVERGED
    failure_reason: Optional[FailureReason] = None
    per_step_relres: list = field(default_factory=list)
    per_step_newton_iters: list = field(default_factory=list)
    # frequency continuation only: norm of the linearized guess per frequency
    born_norms: list = field(default_factory=list)
    error: Optional[str] = None
    # not serialized
    final_state: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    final_time: float = field(default=0.0, repr=False, compare=False)

    @property
    def solver_id(self) -> str:
        return f"{self.strategy.value}-{self.spec.precision.value}-{self.method.value}"

    @property
    def problem_id(self) -> str:
        return self.spec.problem_id

    @property
    def succeeded(self) -> bool:
        return self.status is not RunStatus.FAILED

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec.to_dict(),
            "strategy": self.strategy.value,
            "method": self.method.value,
            "wall_time_s": self.wall_time_s,
            "newton_iters_total": self.newton_iters_total,
            "krylov_iters_total": self.krylov_iters_total,
            "matvecs_total": self.matvecs_total,
            "steps_total": self.steps_total,
            "steps_unconverged": self.steps_unconverged,
            "backtracks_total": self.backtracks_total,
            "status": self.status.value,
            "failure_reason": None if self.failure_reason is None else self.failure_reason.value,
            "per_step_relres": [_json_float(r) for r in self.per_step_relres],
            "per_step_newton_iters": list(self.per_step_newton_iters),
            "born_norms": [_json_float(r) for r in self.born_norms],
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        reason = data.get("failure_reason")
        return cls(
            spec=ProblemSpec.from_dict(data["spec"]),
            strategy=JvpStrategy.parse(data["strategy"]),
            method=KrylovMethod.parse(data["method"]),
            wall_time_s=data["wall_time_s"],
            newton_iters_total=data["newton_iters_total"],
            krylov_iters_total=data["krylov_iters_total"],
            matvecs_total=data.get("matvecs_total", 0),
            steps_total=data["steps_total"],
            steps_unconverged=data["steps_unconverged"],
            backtracks_total=data["backtracks_total"],
            status=RunStatus(data["status"]),
            failure_reason=None if reason is None else FailureReason(reason),
            per_step_relres=[float(r) for r in data.get("per_step_relres", [])],
            per_step_newton_iters=list(data.get("per_step_newton_iters", [])),
            born_norms=[float(r) for r in data.get("born_norms", [])],
            error=data.get("error"),
        )


def _json_float(x: float):
    # JSON has no inf/nan; keep them readable as strings
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def classify(record: RunRecord, non_finite: bool = False, breakdown: bool = False):
    """Return ``(status, failure_reason)`` for a finished or aborted run."""
    if record.steps_total <= 0:
        raise ValueError("cannot classify a run with no steps")
    if non_finite:
        return RunStatus.FAILED, FailureReason.NON_FINITE
    if breakdown:
        return RunStatus.FAILED, FailureReason.SOLVER_BREAKDOWN
    frac = record.steps_unconverged / record.steps_total
    if frac > UNCONVERGED_FRACTION_LIMIT:
        return RunStatus.FAILED, FailureReason.TOO_MANY_UNCONVERGED
    if frac > 0:
        return RunStatus.CONVERGED_WITH_WARNINGS, None
    return RunStatus.CONVERGED, None


def _finish(record: RunRecord, non_finite=False, breakdown=False) -> RunRecord:
    record.status, record.failure_reason = classify(record, non_finite, breakdown)
    return record


def _configs(spec: ProblemSpec, method, kcfg, ncfg):
    method = KrylovMethod.parse(method if kcfg is None else kcfg.method)
    if kcfg is None:
        kcfg = KrylovConfig.for_precision(method, spec.precision)
    if ncfg is None:
        ncfg = NewtonConfig.for_precision(spec.precision, bvp=spec.is_bvp)
    return kcfg, ncfg


def run_ibvp(
    spec: ProblemSpec,
    strategy,
    kcfg: Optional[KrylovConfig] = None,
    ncfg: Optional[NewtonConfig] = None,
    n_steps: int = DEFAULT_IBVP_STEPS,
    *,
    method=KrylovMethod.GMRES,
    dt: Optional[float] = None,
    initial_state: Optional[np.ndarray] = None,
    inject_nan_at_step: Optional[int] = None,
) -> RunRecord:
    """March ``n_steps`` implicit steps, each solved by JFNK from the previous state.

    ``dt`` fixes the step instead of the problem's CFL rule.  Setting
    ``inject_nan_at_step = k`` poisons the state entering step ``k``
    (1-based), which exercises the non-finite failure path.
    """
    if spec.is_bvp:
        raise ValueError("run_ibvp needs a time-dependent problem")
    if n_steps <= 0:
        raise ValueError("n_steps must be positive")
    strategy = JvpStrategy.parse(strategy)
    kcfg, ncfg = _configs(spec, method, kcfg, ncfg)
    setup = build_ibvp(spec)
    dtype = spec.precision.dtype
    U = np.array(setup.state0 if initial_state is None else initial_state, dtype=dtype)
    record = RunRecord(spec=spec, strategy=strategy, method=kcfg.method)
    t = 0.0
    elapsed = 0.0
    step_limit = IBVP_STEP_SLACK * ncfg.tol_newton

    for step in range(1, n_steps + 1):
        if inject_nan_at_step == step:
            U = U.copy()
            U.flat[0] = np.nan
        record.steps_total = step
        if not all_finite(U):
            record.final_state, record.final_time = U, t
            record.wall_time_s = elapsed
            return _finish(record, non_finite=True)
        h = setup.step_dt(U) if dt is None else dt
        F = setup.residual(U, h, t)
        t0 = time.perf_counter()
        U_new, rep = newton_solve(F, U, U, strategy, kcfg, ncfg)
        elapsed += time.perf_counter() - t0

        record.newton_iters_total += rep.iterations
        record.krylov_iters_total += rep.krylov_iters_total
        record.matvecs_total += rep.matvecs_total
        record.backtracks_total += rep.backtrack_count
        record.per_step_relres.append(rep.final_relres)
        record.per_step_newton_iters.append(rep.iterations)
        t += h
        if rep.status == "diverged" or not all_finite(U_new):
            record.final_state, record.final_time = U_new, t
            record.wall_time_s = elapsed
            return _finish(record, non_finite=True)
        unconverged = not rep.final_relres <= step_limit
        record.steps_unconverged += int(unconverged)
        if unconverged and rep.status == "breakdown":
            record.final_state, record.final_time = U_new, t
            record.wall_time_s = elapsed
            return _finish(record, breakdown=True)
        U = U_new

    record.final_state, record.final_time = U, t
    record.wall_time_s = elapsed
    return _finish(record)


@dataclass
class FrequencyStep:
    omega: float
    born_norm: float
    born_converged: bool
    born_relres: float
    newton_iters: int
    final_relres: float
    converged: bool
    field: Optional[np.ndarray] = field(default=None, repr=False)


def run_bvp(
    spec: ProblemSpec,
    strategy,
    kcfg: Optional[KrylovConfig] = None,
    ncfg: Optional[NewtonConfig] = None,
    omega_sweep: Sequence[float] = DEFAULT_OMEGA_SWEEP,
    *,
    method=KrylovMethod.GMRES,
    require_born_convergence: bool = True,
    on_step: Optional[Callable[[FrequencyStep], None]] = None,
) -> RunRecord:
    """Frequency continuation for the Kerr problem.

    Each frequency starts Newton from its linearized guess and preconditions
    every correction with the pointwise shifted-Laplacian.  When the guess
    itself does not reach the Krylov tolerance the run fails with
    ``SolverBreakdown``; ``require_born_convergence=False`` instead starts
    Newton from the inexact guess.
    """
    if not spec.is_bvp:
        raise ValueError("run_bvp needs the Maxwell problem")
    omegas = [float(w) for w in omega_sweep]
    if not omegas:
        raise ValueError("omega sweep is empty")
    strategy = JvpStrategy.parse(strategy)
    kcfg, ncfg = _configs(spec, method, kcfg, ncfg)
    grid = spec.grid
    dtype = spec.precision.dtype
    J = maxwell.maxwell_source(spec.ic, grid, dtype)
    record = RunRecord(spec=spec, strategy=strategy, method=kcfg.method)
    elapsed = 0.0
    born_cfg = replace(kcfg, method=KrylovMethod.GMRES)

    for k, omega in enumerate(omegas, start=1):
        record.steps_total = k
        params = maxwell.MaxwellParams(omega=omega, chi=float(spec.param))
        t0 = time.perf_counter()
        E0, born = maxwell.maxwell_born_guess(params, J, grid, born_cfg, dtype)
        elapsed += time.perf_counter() - t0
        record.krylov_iters_total += born.iterations
        record.matvecs_total += born.iterations
        record.born_norms.append(float(norm2(E0)))
        if not all_finite(E0):
            record.wall_time_s = elapsed
            return _finish(record, non_finite=True)
        if not born.converged and require_born_convergence:
            record.per_step_relres.append(float("nan"))
            record.per_step_newton_iters.append(0)
            record.steps_unconverged += 1
            record.wall_time_s = elapsed
            return _finish(record, breakdown=True)

        F = maxwell.make_maxwell_residual(params, J, grid, dtype)
        # normalize by the residual of the zero field, i.e. the forcing norm,
        # so a better guess never tightens the target
        t0 = time.perf_counter()
        E, rep = newton_solve(
            F, E0, np.zeros_like(E0), strategy, kcfg, ncfg,
            M_builder=lambda x, p=params: maxwell.maxwell_cslp(p, x, grid),
        )
        elapsed += time.perf_counter() - t0
        record.newton_iters_total += rep.iterations
        record.krylov_iters_total += rep.krylov_iters_total
        record.matvecs_total += rep.matvecs_total
        record.backtracks_total += rep.backtrack_count
        record.per_step_relres.append(rep.final_relres)
        record.per_step_newton_iters.append(rep.iterations)
        unconverged = not rep.final_relres <= ncfg.tol_newton
        record.steps_unconverged += int(unconverged)
        if on_step is not None:
            on_step(FrequencyStep(
                omega, float(norm2(E0)), born.converged, born.final_relres,
                rep.iterations, rep.final_relres, not unconverged, E,
            ))
        if rep.status == "diverged" or not all_finite(E):
            record.final_state = E
            record.wall_time_s = elapsed
            return _finish(record, non_finite=True)
        if unconverged and rep.status == "breakdown":
            record.final_state = E
            record.wall_time_s = elapsed
            return _finish(record, breakdown=True)
        record.final_state = E

    record.wall_time_s = elapsed
    return _finish(record)


def run(
    spec: ProblemSpec,
    strategy,
    method=KrylovMethod.GMRES,
    n_steps: int = DEFAULT_IBVP_STEPS,
    omega_sweep: Sequence[float] = DEFAULT_OMEGA_SWEEP,
) -> RunRecord:
    """Run one configuration with default tolerances."""
    if spec.is_bvp:
        return run_bvp(spec, strategy, omega_sweep=omega_sweep, method=method)
    return run_ibvp(spec, strategy, n_steps=n_steps, method=method)


# ----------------------------------------------------------------------------
# sweeps


@dataclass
class SweepSpec:
    specs: list
    strategies: tuple = (JvpStrategy.FD, JvpStrategy.AD)
    methods: tuple = (KrylovMethod.GMRES, KrylovMethod.BICGSTAB)
    precisions: tuple = (Precision.FP32, Precision.FP64)
    seed: int = 0
    n_steps: int = DEFAULT_IBVP_STEPS
    omega_sweep: tuple = DEFAULT_OMEGA_SWEEP

    def combinations(self) -> list[tuple[ProblemSpec, JvpStrategy, KrylovMethod]]:
        """Every (spec at precision, strategy, method); CG only where the system is SPD."""
        out = []
        for spec in self.specs:
            methods = [KrylovMethod.parse(m) for m in self.methods]
            if spec.problem is Problem.RD and KrylovMethod.CG not in methods:
                methods.append(KrylovMethod.CG)
            if spec.problem is not Problem.RD:
                methods = [m for m in methods if m is not KrylovMethod.CG]
            for strategy, precision, method in itertools.product(
                self.strategies, self.precisions, methods
            ):
                out.append((
                    replace(spec, precision=Precision.parse(precision)),
                    JvpStrategy.parse(strategy),
                    method,
                ))
        return out

    def to_dict(self) -> dict:
        return {
            "specs": [s.to_dict() for s in self.specs],
            "strategies": [JvpStrategy.parse(s).value for s in self.strategies],
            "methods": [KrylovMethod.parse(m).value for m in self.methods],
            "precisions": [Precision.parse(p).value for p in self.precisions],
            "seed": self.seed,
            "n_steps": self.n_steps,
            "omega_sweep": list(self.omega_sweep),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        kw = dict(data)
        kw["specs"] = [ProblemSpec.from_dict(s) for s in data["specs"]]
        for key, parse in (
            ("strategies", JvpStrategy.parse),
            ("methods", KrylovMethod.parse),
            ("precisions", Precision.parse),
        ):
            if key in kw:
                kw[key] = tuple(parse(v) for v in kw[key])
        if "omega_sweep" in kw:
            kw["omega_sweep"] = tuple(float(w) for w in kw["omega_sweep"])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def cpu_desk_suite(
    n: int = 64,
    n_steps: int = DEFAULT_IBVP_STEPS,
    omega_sweep: Sequence[float] = DEFAULT_OMEGA_SWEEP,
    problems: Iterable[Problem] = tuple(Problem),
) -> SweepSpec:
    """All initial conditions and parameter values of every problem on an ``n x n`` grid."""
    specs = []
    for problem in problems:
        problem = Problem.parse(problem)
        for ic in SWEEP_CASES[problem]:
            for param in PARAMETER_SWEEPS[problem]:
                specs.append(ProblemSpec(problem, ic, param, n=n))
    return SweepSpec(specs=specs, n_steps=n_steps, omega_sweep=tuple(omega_sweep))


def sweep(
    suite: SweepSpec,
    out: Optional[str | Path] = None,
    progress: Optional[Callable[[RunRecord], None]] = None,
) -> list[RunRecord]:
    """Run every combination; a run that raises is recorded as failed."""
    combos = suite.combinations()
    if not combos:
        raise ValueError("sweep suite is empty")
    np.random.seed(suite.seed)
    records = []
    for spec, strategy, method in combos:
        try:
            rec = run(spec, strategy, method, suite.n_steps, suite.omega_sweep)
        except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError) as exc:
            rec = RunRecord(spec=spec, strategy=strategy, method=method, steps_total=1,
                            status=RunStatus.FAILED,
                            failure_reason=FailureReason.SOLVER_BREAKDOWN,
                            error=f"{type(exc).__name__}: {exc}")
        records.append(rec)
        if out is not None:
            append_jsonl(out, [rec])
        if progress is not None:
            progress(rec)
    return records


def completion_rate(records: Sequence[RunRecord], strategy=None) -> float:
    sel = [r for r in records if strategy is None or r.strategy is JvpStrategy.parse(strategy)]
    if not sel:
        return float("nan")
    return sum(r.succeeded for r in sel) / len(sel)


def append_jsonl(path, records: Iterable[RunRecord]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict()) + "\n")


def read_jsonl(path) -> list[RunRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(RunRecord.from_dict(json.loads(line)))
    return out


def fd_step_bounds(precision) -> tuple[float, float]:
    """Clamp interval of the finite-difference step, reported alongside runs."""
    return eps_clamp(Precision.parse(precision))
