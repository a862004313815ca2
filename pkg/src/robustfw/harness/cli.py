"""Command line: ``robustfw gen | solve | bench``.

Exit codes: 0 success, 2 usage error, 3 instance error, 4 solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..core import DegenerateUncertaintyError, Method, SolverConfig
from ..lp import LPError
from ..solvers import solve
from ..uncertainty import ProjectionError
from .bench import (
    ExperimentSpec,
    GeneratorParams,
    load_spec,
    run_experiment,
    summary_row,
    write_trace_csv,
)
from .instances import InstanceError, dumps_instance, generate_instance, read_instance

EXIT_OK, EXIT_USAGE, EXIT_INSTANCE, EXIT_SOLVER = 0, 2, 3, 4

log = logging.getLogger("robustfw")


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_solver_flags(p):
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--mu", type=float, default=None, help="fixed smoothing parameter")
    p.add_argument("--max-iters", type=_positive_int, default=10000)
    p.add_argument("--max-lmo", type=_positive_int, default=2500)
    p.add_argument("--conv-hull-period", type=_positive_int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustfw", allow_abbrev=False,
                                     description="Oracle-based robust optimization solvers.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance file", allow_abbrev=False)
    g.add_argument("--kind", choices=["mst", "tsp", "vertex_list"], default="mst")
    g.add_argument("--n", type=int, required=True,
                   help="graph vertices (mst, tsp) or dimension (vertex_list)")
    g.add_argument("--gamma", type=float, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--edge-prob", type=float, default=None)
    g.add_argument("--out", type=Path, default=None, help="output file (default stdout)")

    s = sub.add_parser("solve", help="solve one instance with one method", allow_abbrev=False)
    s.add_argument("--instance", type=Path, required=True)
    s.add_argument("--method", choices=[m.value for m in Method], default="FW")
    _add_solver_flags(s)
    s.add_argument("--out", type=Path, default=None, help="trace CSV path")

    b = sub.add_parser("bench", help="run an experiment grid", allow_abbrev=False)
    b.add_argument("--spec", type=Path, default=None, help="experiment spec JSON")
    b.add_argument("--instance", type=Path, action="append", default=[])
    b.add_argument("--kind", choices=["mst", "tsp", "vertex_list"], default=None)
    b.add_argument("--n", type=int, default=None)
    b.add_argument("--gamma", type=float, action="append", default=[])
    b.add_argument("--seed", type=int, action="append", default=[])
    b.add_argument("--method", choices=[m.value for m in Method], action="append", default=[])
    _add_solver_flags(b)
    b.add_argument("--workers", type=_positive_int, default=1)
    b.add_argument("--out", type=Path, default=Path("results"))
    return parser


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(epsilon=args.epsilon, mu_override=args.mu, max_iters=args.max_iters,
                            max_lmo_calls=args.max_lmo, conv_hull_period=args.conv_hull_period)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_gen(args) -> int:
    try:
        inst = generate_instance(args.kind, args.n, args.gamma, args.seed, args.edge_prob)
    except InstanceError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = dumps_instance(inst)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_solve(args) -> int:
    config = replace(_config(args), method=Method(args.method))
    problem = read_instance(args.instance).to_problem()
    result = solve(problem, config)
    if args.out is not None:
        write_trace_csv(result.trace, args.out)
    print(json.dumps(summary_row(problem.name, result)))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.spec is not None:
        try:
            spec = load_spec(args.spec)
        except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
            raise UsageError(f"bad experiment spec: {exc}") from exc
    else:
        sources = list(args.instance)
        if args.kind is not None:
            if args.n is None or not args.gamma:
                raise UsageError("--kind needs --n and at least one --gamma")
            for g in args.gamma:
                for s in args.seed or [0]:
                    sources.append(GeneratorParams(args.kind, args.n, g, s))
        methods = args.method or [m.value for m in Method]
        try:
            spec = ExperimentSpec(sources, methods, args.out, _config(args), args.workers)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    report = run_experiment(spec)
    for line in report.failures:
        print(f"error: {line}", file=sys.stderr)
    print(f"{len(report.completed)} runs written to {spec.output}")
    return EXIT_OK if report.ok else EXIT_INSTANCE


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceError as exc:
        print(f"instance error: {exc}", file=sys.stderr)
        return EXIT_INSTANCE
    except (LPError, ProjectionError, DegenerateUncertaintyError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except Exception as exc:  # noqa: BLE001 - anything else is an internal fault
        log.exception("internal error")
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
