"""Command-line entry point: ``ramsi gen|recover|bound|sweep|quality-sweep``.

Exit codes: 0 success, 2 bad arguments, 3 unreadable or malformed data,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .bounds import (
    bound_l1, bound_l1l1, bound_loose_l1l1, bound_loose_nl1, bound_nl1, bound_simple,
    feasibility_gamma,
)
from .core import DEFAULT_EPSILON, DEFAULT_LAMBDA, SolverConfig, generate_sensing_matrix
from .errors import (
    ArgumentError, ConvergenceError, DecompositionError, DimensionError, ParseError,
)
from .harness import (
    PolicyChoice, SweepSpec, ingest_vectors, quality_rows_csv, run_quality_sweep, run_sweep,
    scenario_csv,
)
from .solver import ramsi
from .synth import ScenarioSpec, generate_scenario

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def parse_grid(text: str) -> List[int]:
    """``200:700:50`` (inclusive stop) or ``200,250,300``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:step or a comma list") from None


def _scenario_args(p):
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--s0", type=int, default=128)
    p.add_argument("--sj", type=int, default=64)
    p.add_argument("--rj", type=int, default=51)
    p.add_argument("--J", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)


def _solver_args(p):
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--rel-tol", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=SolverConfig.max_iters)


def _output_args(p, formats):
    p.add_argument("--out", type=Path, default=None, help="write here instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ramsi", description="Sparse recovery with multiple side information signals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic scenario CSV")
    _scenario_args(p)
    _output_args(p, ["csv"])

    p = sub.add_parser("recover", help="recover x from Gaussian measurements of a scenario file")
    p.add_argument("input", type=Path)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--policy", default="adaptive")
    p.add_argument("--seed", type=int, default=0, help="sensing matrix seed")
    _solver_args(p)
    _output_args(p, ["text", "json"])

    p = sub.add_parser("bound", help="evaluate measurement bounds")
    p.add_argument("--input", type=Path, default=None, help="scenario CSV; otherwise synthesize")
    _scenario_args(p)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--zero-tol", type=float, default=None,
                   help="defaults to 0 for synthetic data and 1e-9 for files")
    _output_args(p, ["text", "json"])

    for name, helptext in [("sweep", "success rate vs. m"), ("quality-sweep", "required m vs. s_j")]:
        p = sub.add_parser(name, help=helptext)
        _scenario_args(p)
        _solver_args(p)
        p.add_argument("--m-grid", type=parse_grid, default=parse_grid("200:700:50"))
        p.add_argument("--trials", type=int, default=20)
        p.add_argument("--policy", action="append", default=None,
                       help="adaptive[:J], l1 or l1l1[:J]; repeatable")
        p.add_argument("--threshold", type=float, default=1e-2, help="relative error counted as success")
        p.add_argument("--workers", type=int, default=1)
        if name == "sweep":
            _output_args(p, ["csv", "json"])
        else:
            p.add_argument("--sj-values", type=parse_grid, required=True)
            p.add_argument("--target", type=float, default=0.98)
            _output_args(p, ["csv"])
    return parser


def _emit(text: str, out: Optional[Path]):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _solver(args) -> SolverConfig:
    return SolverConfig(lam=args.lam, epsilon=args.epsilon, rel_tol=args.rel_tol, max_iters=args.max_iters)


def _scenario(args) -> ScenarioSpec:
    return ScenarioSpec.uniform(args.n, args.s0, args.sj, args.rj, args.J, seed=args.seed)


def _policies(args) -> List[PolicyChoice]:
    texts = args.policy or [f"adaptive:{args.J}", "l1"]
    return [PolicyChoice.parse(t, default_J=args.J) for t in texts]


def cmd_gen(args):
    x, ens = generate_scenario(_scenario(args))
    _emit(scenario_csv(x, ens), args.out)


def cmd_recover(args):
    x, ens = ingest_vectors(args.input)
    pc = PolicyChoice.parse(args.policy, default_J=ens.shape[0])
    if pc.J > ens.shape[0]:
        raise ArgumentError(f"policy {pc.label} needs {pc.J} signals, file has {ens.shape[0]}")
    if not 0 < args.m <= x.size:
        raise ArgumentError(f"--m must lie in 1..{x.size}")
    A = generate_sensing_matrix(args.seed, args.m, x.size)
    xh, trace = ramsi(A.entries @ x, A, ens[:pc.J], _solver(args), pc.policy)
    nx = float(np.linalg.norm(x))
    err = float(np.linalg.norm(xh - x)) / nx if nx > 0 else float(np.linalg.norm(xh))
    info = {"policy": pc.label, "m": args.m, "rel_error": err, "iterations": trace.iterations,
            "converged": trace.converged, "final_relative_change": trace.final_relative_change}
    if args.format == "json":
        _emit(json.dumps(info, indent=2, sort_keys=True), args.out)
    else:
        _emit("\n".join(f"{k}: {v}" for k, v in info.items()), args.out)


def _bound_table(x, ens, epsilon, zero_tol):
    n = x.size
    s0 = int(np.count_nonzero(np.abs(x) > zero_tol))
    rep = bound_nl1(x, ens, epsilon, zero_tol)
    table = {"n": n, "J": int(ens.shape[0]), "s0": s0, "nl1": rep.as_dict(),
             "simple": bound_simple(x, ens, epsilon, zero_tol),
             "l1": bound_l1(n, s0) if 0 < s0 < n else math.nan}
    if ens.shape[0] >= 1:
        table["l1l1"] = bound_l1l1(x, ens[0], zero_tol)
        s1 = int(np.count_nonzero(np.abs(x - ens[0]) > zero_tol))
        try:
            table["loose_l1l1"] = bound_loose_l1l1(n, s0, s1)
        except ArgumentError:
            table["loose_l1l1"] = math.nan
    try:
        table["loose_nl1"] = bound_loose_nl1(n, rep.p)
    except ArgumentError:
        table["loose_nl1"] = math.nan
    gamma = feasibility_gamma()
    table["feasible"] = rep.p / n < 1.0 / gamma
    return table


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def cmd_bound(args):
    if args.input is not None:
        x, ens = ingest_vectors(args.input)
        zero_tol = 1e-9 if args.zero_tol is None else args.zero_tol
    else:
        x, ens = generate_scenario(_scenario(args))
        zero_tol = 0.0 if args.zero_tol is None else args.zero_tol
    table = _bound_table(x, ens, args.epsilon, zero_tol)
    if args.format == "json":
        _emit(json.dumps(_clean(table), indent=2, sort_keys=True), args.out)
        return
    lines = []
    for k, v in table.items():
        if isinstance(v, dict):
            lines.extend(f"nl1.{kk}: {vv}" for kk, vv in v.items())
        else:
            lines.append(f"{k}: {v}")
    _emit("\n".join(lines), args.out)


def cmd_sweep(args):
    spec = SweepSpec(scenario=_scenario(args), m_values=tuple(args.m_grid), trials=args.trials,
                     policies=tuple(_policies(args)), success_threshold=args.threshold,
                     base_seed=args.seed, solver=_solver(args))
    res = run_sweep(spec, workers=args.workers)
    _emit(res.to_json() if args.format == "json" else res.to_csv(), args.out)


def cmd_quality_sweep(args):
    rows = run_quality_sweep(args.n, args.s0, args.J, args.sj_values, args.m_grid, _policies(args),
                             trials=args.trials, target=args.target, base_seed=args.seed,
                             solver=_solver(args), success_threshold=args.threshold,
                             workers=args.workers)
    _emit(quality_rows_csv(rows), args.out)


COMMANDS = {"gen": cmd_gen, "recover": cmd_recover, "bound": cmd_bound,
            "sweep": cmd_sweep, "quality-sweep": cmd_quality_sweep}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ArgumentError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, DecompositionError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
