"""Command-line entry point: ``jfnk run | sweep | verify | profile``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, is_dataclass

from . import harness, profiles, verify
from .krylov import KrylovConfig
from .linops import JvpStrategy
from .newton import NewtonConfig
from .numerics import Precision
from .problems import DEFAULT_OMEGA_SWEEP, ProblemSpec


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jfnk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one solver configuration")
    p.add_argument("--problem", required=True, choices=["burgers", "suolson", "rd", "maxwell"])
    p.add_argument("--ic", required=True, help="initial condition or source name")
    p.add_argument("--param", required=True, type=float, help="nu, xi, D or chi")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--precision", choices=["fp32", "fp64"], default="fp64")
    p.add_argument("--jvp", choices=["fd", "ad"], default="ad")
    p.add_argument("--krylov", choices=["gmres", "bicgstab", "cg"], default="gmres")
    p.add_argument("--steps", type=int, default=harness.DEFAULT_IBVP_STEPS)
    p.add_argument("--courant", type=float, default=1.0)
    p.add_argument("--omegas", type=_floats, default=DEFAULT_OMEGA_SWEEP,
                   help="comma-separated frequencies for maxwell")
    p.add_argument("--out", help="append the record to this JSON Lines file")

    p = sub.add_parser("sweep", help="run a suite of configurations")
    p.add_argument("--suite", required=True, help="'cpu-desk' or a JSON suite file")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, help="override the time-step count")
    p.add_argument("--grid", type=int, default=64, help="grid for cpu-desk")
    p.add_argument("--omegas", type=_floats, help="override the frequency sweep")

    p = sub.add_parser("verify", help="run a verification study")
    p.add_argument("--study", required=True, choices=verify.STUDIES)

    p = sub.add_parser("profile", help="performance profiles from run records")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--metric", choices=profiles.METRICS, default="time")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--taus", type=int, default=64, help="number of tau samples")
    return parser


def _summary(rec: harness.RunRecord) -> str:
    reason = f" ({rec.failure_reason.value})" if rec.failure_reason else ""
    return (
        f"{rec.problem_id} {rec.solver_id}: {rec.status.value}{reason} "
        f"steps={rec.steps_total} unconverged={rec.steps_unconverged} "
        f"newton={rec.newton_iters_total} krylov={rec.krylov_iters_total} "
        f"time={rec.wall_time_s:.3f}s"
    )


def _cmd_run(args) -> int:
    spec = ProblemSpec(args.problem, args.ic, args.param, n=args.grid,
                       precision=args.precision, courant=args.courant)
    precision = Precision.parse(args.precision)
    kcfg = KrylovConfig.for_precision(args.krylov, precision)
    ncfg = NewtonConfig.for_precision(precision, bvp=spec.is_bvp)
    if spec.is_bvp:
        rec = harness.run_bvp(spec, args.jvp, kcfg, ncfg, args.omegas)
    else:
        rec = harness.run_ibvp(spec, args.jvp, kcfg, ncfg, args.steps)
    print(_summary(rec))
    if args.out:
        harness.append_jsonl(args.out, [rec])
    return 0


def _cmd_sweep(args) -> int:
    if args.suite == "cpu-desk":
        suite = harness.cpu_desk_suite(n=args.grid)
    else:
        suite = harness.SweepSpec.load(args.suite)
    if args.steps is not None:
        suite.n_steps = args.steps
    if args.omegas is not None:
        suite.omega_sweep = args.omegas
    records = harness.sweep(suite, out=args.out, progress=lambda r: print(_summary(r), flush=True))
    for strategy in JvpStrategy:
        rate = harness.completion_rate(records, strategy)
        print(f"{strategy.value} completion rate: {rate:.3f}")
    return 0


def _jsonable(obj):
    if is_dataclass(obj):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return obj
    return obj


def _cmd_verify(args) -> int:
    result = verify.run_study(args.study)
    print(json.dumps(_jsonable(result), indent=2))
    return 0


def _cmd_profile(args) -> int:
    records = harness.read_jsonl(args.inp)
    table = profiles.perf_ratios(records, args.metric)
    curves = profiles.profile(table, profiles.default_taus(args.taus))
    profiles.write_csv(curves, args.out)
    if args.svg:
        profiles.write_svg(curves, args.svg, title=f"metric: {args.metric}")
    for p in table.unsolved:
        print(f"no successful solver for {p}", file=sys.stderr)
    for c in curves:
        print(f"{c.solver_id}: rho(1)={c.rho_values[0]:.3f} plateau={c.success_fraction:.3f}")
    return 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "verify": _cmd_verify, "profile": _cmd_profile}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
