"""Performance ratios and Dolan-More performance profiles over run records."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

METRICS = ("time", "iters")


@dataclass
class RatioTable:
    """``ratios[problem][solver]``; problems without a single success are flagged."""

    ratios: dict
    solvers: list
    problems: list
    unsolved: list = field(default_factory=list)

    def column(self, solver) -> list[float]:
        return [self.ratios[p][solver] for p in self.problems]


@dataclass
class ProfileCurve:
    solver_id: str
    tau_samples: np.ndarray
    rho_values: np.ndarray

    @property
    def success_fraction(self) -> float:
        return float(self.rho_values[-1]) if len(self.rho_values) else 0.0


def _metric_value(record, metric: str) -> float:
    if metric == "time":
        return float(record.wall_time_s)
    if metric in ("iters", "krylov_iters"):
        return float(record.krylov_iters_total)
    raise ValueError(f"unknown metric {metric!r}")


def ratios_from_costs(costs: Mapping[str, Mapping[str, Optional[float]]]) -> RatioTable:
    """``costs[problem][solver]`` is a cost, or ``None`` for a failed run."""
    problems = list(costs)
    solvers: list = []
    for row in costs.values():
        for s in row:
            if s not in solvers:
                solvers.append(s)
    table = {}
    unsolved = []
    for p in problems:
        row = costs[p]
        ok = [c for c in row.values() if c is not None]
        best = min(ok) if ok else None
        if best is None:
            unsolved.append(p)
        ratios = {}
        for s in solvers:
            c = row.get(s)
            if c is None or best is None:
                ratios[s] = math.inf
            elif best == 0:
                # a zero cost can only tie with another zero cost
                ratios[s] = 1.0 if c == 0 else math.inf
            else:
                ratios[s] = c / best
        table[p] = ratios
    return RatioTable(table, solvers, problems, unsolved)


def perf_ratios(records: Iterable, metric: str = "time") -> RatioTable:
    """``r_{p,s} = t_{p,s} / min_s t_{p,s}`` with failed runs at ``+inf``."""
    costs: dict = defaultdict(dict)
    for rec in records:
        p, s = rec.problem_id, rec.solver_id
        if s in costs[p]:
            raise ValueError(f"duplicate record for problem {p} and solver {s}")
        costs[p][s] = _metric_value(rec, metric) if rec.succeeded else None
    return ratios_from_costs(costs)


def default_taus(n: int = 64, tau_max: float = 1e4) -> np.ndarray:
    return np.logspace(0.0, math.log10(tau_max), n)


def profile(table: RatioTable, taus: Optional[Sequence[float]] = None) -> list[ProfileCurve]:
    """``rho_s(tau) = |{p : r_{p,s} <= tau}| / |P|``."""
    taus = default_taus() if taus is None else np.asarray(taus, dtype=float)
    if taus.size == 0 or taus[0] < 1 or np.any(np.diff(taus) < 0):
        raise ValueError("taus must be sorted and start at or above 1")
    n_problems = len(table.problems)
    curves = []
    for s in table.solvers:
        r = np.asarray(table.column(s), dtype=float)
        if n_problems == 0:
            rho = np.zeros_like(taus)
        else:
            rho = (r[None, :] <= taus[:, None]).sum(axis=1) / n_problems
        curves.append(ProfileCurve(s, taus.copy(), rho))
    return curves


def write_csv(curves: Sequence[ProfileCurve], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["solver_id", "tau", "rho"])
        for c in curves:
            for tau, rho in zip(c.tau_samples, c.rho_values):
                w.writerow([c.solver_id, repr(float(tau)), repr(float(rho))])


def write_svg(curves: Sequence[ProfileCurve], path, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for c in curves:
        ax.step(c.tau_samples, c.rho_values, where="post", label=c.solver_id)
    ax.set_xscale("log")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\rho_s(\tau)$")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    fig.savefig(Path(path), format="svg")
    plt.close(fig)
