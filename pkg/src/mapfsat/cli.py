"""Command line interface.

Subcommands: solve, gen, bench, validate, plus `sat`, a DIMACS front end for
the embedded solver that speaks SAT-competition conventions (s/v lines, exit
10/20) so it can serve as an external solver command.

Exit codes (except `sat`): 0 success, 1 no solution / invalid solution,
2 usage error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import BenchError, SuiteConfig, parse_algorithm, run_suite, solve_with_algorithm
from .cnf import parse_dimacs, write_dimacs
from .encoder import dump_varmap
from .instance import (
    InfeasibleInstanceError,
    ParseError,
    format_grid,
    format_instance,
    format_solution,
    generate_grid_instance,
    parse_grid,
    parse_instance,
    parse_solution,
    validate_solution,
)
from .satloop import OPTIMAL, ExternalSolverError, Limits, make_backend, sat_solve

EXIT_OK, EXIT_NO_SOLUTION, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mapfsat", description="Optimal MAPF solving via SAT")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance to optimality")
    solve.add_argument("--map", help="grid map file (MovingAI format)")
    solve.add_argument("--instance", required=True, help="instance file")
    solve.add_argument("--algo", default="mdd-sat", choices=["basic-sat", "mdd-sat", "cbs"])
    solve.add_argument("--objective", default="soc", choices=["soc", "makespan"])
    solve.add_argument("--id", dest="id_mode", default="off", choices=["off", "sid", "id"])
    solve.add_argument("--backend", default="embedded", choices=["embedded", "external"])
    solve.add_argument("--solver-cmd", help="external solver command (or $MAPFSAT_SOLVER_CMD)")
    solve.add_argument("--timeout", type=float, help="wall-clock limit in seconds")
    solve.add_argument("--delta-cap", type=int, default=64, help="iteration cap")
    solve.add_argument("--emit-dimacs", metavar="PATH", help="write the last consulted formula")
    solve.add_argument("--emit-varmap", metavar="PATH", help="write the variable-map sidecar")
    solve.add_argument("--json", action="store_true", help="JSON output")

    gen = sub.add_parser("gen", help="generate a random grid instance")
    gen.add_argument("--width", type=int, required=True)
    gen.add_argument("--height", type=int, required=True)
    gen.add_argument("--obstacle-rate", type=float, default=0.1)
    gen.add_argument("--agents", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--walk-steps", type=int, default=200)
    gen.add_argument("--out", default="-", help="instance file (default stdout)")
    gen.add_argument("--map-out", help="also write the map and use grid coordinates")

    bench = sub.add_parser("bench", help="run a benchmark suite from a JSON config")
    bench.add_argument("--config", required=True, help="suite config file")
    bench.add_argument("--out", default="-", help="per-instance CSV (default stdout)")
    bench.add_argument("--workers", type=int, default=1)

    validate = sub.add_parser("validate", help="check a solution file against an instance")
    validate.add_argument("--map", help="grid map file")
    validate.add_argument("--instance", required=True)
    validate.add_argument("--solution", required=True)

    sat = sub.add_parser("sat", help="solve a DIMACS CNF file (exit 10 SAT / 20 UNSAT)")
    sat.add_argument("file")
    sat.add_argument("--timeout", type=float)
    return parser


def _load_instance(args):
    grid = parse_grid(Path(args.map).read_text()) if args.map else None
    return parse_instance(Path(args.instance).read_text(), grid)


def _run_solve(args) -> int:
    instance = _load_instance(args)
    algorithm = args.algo if args.id_mode == "off" else f"{args.id_mode}:{args.algo}"
    parse_algorithm(algorithm)
    if args.objective == "makespan" and (args.algo == "cbs" or args.id_mode != "off"):
        print("cbs and independence detection support the soc objective only", file=sys.stderr)
        return EXIT_USAGE
    if args.emit_dimacs and args.algo == "cbs":
        print("--emit-dimacs needs a SAT algorithm", file=sys.stderr)
        return EXIT_USAGE
    backend = make_backend(args.backend, args.solver_cmd)
    limits = Limits(time_limit=args.timeout, bound_cap=args.delta_cap)

    if args.emit_dimacs or args.emit_varmap:
        # hook onto the underlying sat loop; overwritten each iteration so the
        # last consulted formula remains
        from .satloop import solve_makespan_optimal, solve_soc_optimal

        def on_formula(formula, varmap, bound):
            if args.emit_dimacs:
                Path(args.emit_dimacs).write_text(write_dimacs(formula))
            if args.emit_varmap:
                Path(args.emit_varmap).write_text(dump_varmap(varmap))

        encoding = "basic" if args.algo == "basic-sat" else "mdd"
        if args.objective == "makespan":
            outcome = solve_makespan_optimal(instance, backend, limits, encoding, on_formula)
        else:
            outcome = solve_soc_optimal(instance, encoding, backend, limits, on_formula)
    else:
        outcome = solve_with_algorithm(instance, algorithm, args.objective, limits, backend)

    if args.json:
        payload = outcome.to_dict()
        payload["algorithm"] = algorithm
        payload["objective"] = args.objective
        print(json.dumps(payload))
    elif outcome.status == OPTIMAL:
        print(format_solution(outcome.solution), end="")
    else:
        print(f"status {outcome.status}", file=sys.stderr)
    return EXIT_OK if outcome.status == OPTIMAL else EXIT_NO_SOLUTION


def _run_gen(args) -> int:
    instance, grid = generate_grid_instance(
        args.width, args.height, args.obstacle_rate, args.agents, args.seed, args.walk_steps
    )
    if args.map_out:
        Path(args.map_out).write_text(format_grid(grid))
        text = format_instance(instance, grid)
    else:
        text = format_instance(instance)
    if args.out == "-":
        print(text, end="")
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def _run_bench(args) -> int:
    config = SuiteConfig.from_json(Path(args.config).read_text())
    result = run_suite(config, workers=args.workers)
    if args.out == "-":
        print(result.csv, end="")
    else:
        Path(args.out).write_text(result.csv)
    print(result.summary, end="")
    return EXIT_OK


def _run_validate(args) -> int:
    instance = _load_instance(args)
    paths = parse_solution(Path(args.solution).read_text())
    if len(paths) != instance.num_agents:
        print(f"expected {instance.num_agents} paths, got {len(paths)}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    if len({len(p) for p in paths}) != 1:
        print("paths differ in length", file=sys.stderr)
        return EXIT_NO_SOLUTION
    report = validate_solution(instance, paths)
    if report.ok:
        print("valid")
        return EXIT_OK
    for violation in report.violations:
        agents = " ".join(str(a) for a in violation.agents)
        print(f"violation {violation.kind} t={violation.time} agents {agents}", file=sys.stderr)
    return EXIT_NO_SOLUTION


def _run_sat(args) -> int:
    formula = parse_dimacs(Path(args.file).read_text())
    deadline = None
    if args.timeout is not None:
        import time

        deadline = time.monotonic() + args.timeout
    from .cdcl import CdclSolver

    solver = CdclSolver(formula)
    verdict = solver.solve(deadline=deadline)
    if verdict is None:
        print("s UNKNOWN")
        return 0
    if not verdict:
        print("s UNSATISFIABLE")
        return 20
    model = solver.model()
    print("s SATISFIABLE")
    lits = [v if model[v] else -v for v in range(1, formula.var_count + 1)]
    for i in range(0, len(lits), 20):
        print("v " + " ".join(str(l) for l in lits[i : i + 20]))
    print("v 0")
    return 10


def cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "solve":
            return _run_solve(args)
        if args.command == "gen":
            return _run_gen(args)
        if args.command == "bench":
            return _run_bench(args)
        if args.command == "validate":
            return _run_validate(args)
        return _run_sat(args)
    except (InfeasibleInstanceError, ExternalSolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (ParseError, BenchError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # internal
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
