"""Optimization loops over SAT queries, plus the SAT backend contract.

Sum-of-costs mode iterates slack delta = 0, 1, 2, ... encoding each decision
question at depth makespan_lb + delta; the first satisfiable formula is
optimal because solvability is monotone in the slack. Makespan mode iterates
the depth directly. Each iteration rebuilds TEGs and encodes from scratch.

Backends: the embedded CDCL solver, or any external SAT-competition style
command (gets a DIMACS path as its last argument, answers with `s ...` and
`v ...` lines).
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .cdcl import CdclSolver
from .cnf import CnfFormula, write_dimacs
from .encoder import decode_model, encode_makespan, encode_soc
from .instance import MapfInstance, Solution, shortest_path_costs, validate_solution
from .teg import build_mdd_teg, build_teg

SAT, UNSAT, TIMEOUT = "sat", "unsat", "timeout"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible-within-bound"
TIMEOUT_STATUS = "timeout"

ENV_SOLVER_CMD = "MAPFSAT_SOLVER_CMD"


class ExternalSolverError(RuntimeError):
    """External solver process failed or produced unparsable output."""


@dataclass
class Limits:
    time_limit: float | None = None  # wall-clock seconds for the whole solve
    bound_cap: int = 64  # max slack (soc mode) / max extra depth (makespan mode)


@dataclass
class IterationStat:
    bound: int  # delta in soc mode, depth in makespan mode
    var_count: int
    clause_count: int
    solver_time: float


@dataclass
class SolveOutcome:
    status: str  # optimal | infeasible-within-bound | timeout
    solution: Solution | None
    iterations: list[IterationStat] = field(default_factory=list)
    total_time: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "total_time": self.total_time,
            "iterations": [
                [it.bound, it.var_count, it.clause_count, it.solver_time] for it in self.iterations
            ],
        }
        if self.solution is not None:
            out["soc"] = self.solution.soc
            out["makespan"] = self.solution.makespan
            out["paths"] = [list(p) for p in self.solution.paths]
        return out


class EmbeddedBackend:
    """In-process CDCL solver; deterministic for identical input."""

    name = "embedded"

    def solve(self, formula: CnfFormula, assumptions=(), deadline: float | None = None):
        solver = CdclSolver(formula)
        verdict = solver.solve(assumptions=assumptions, deadline=deadline)
        if verdict is None:
            return TIMEOUT, None
        if verdict:
            return SAT, solver.model()
        return UNSAT, None


class ExternalBackend:
    """Adapter for an external DIMACS solver command.

    The command receives the CNF path as its last argument and must answer
    with `s SATISFIABLE` plus `v` value lines, or `s UNSATISFIABLE`.
    """

    name = "external"

    def __init__(self, command: str | list[str]):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise ValueError("empty external solver command")

    def solve(self, formula: CnfFormula, assumptions=(), deadline: float | None = None):
        if assumptions:
            formula = _with_assumptions(formula, assumptions)
        budget = None
        if deadline is not None:
            budget = deadline - time.monotonic()
            if budget <= 0:
                return TIMEOUT, None
        with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as handle:
            handle.write(write_dimacs(formula))
            path = handle.name
        try:
            try:
                proc = subprocess.run(
                    self.command + [path],
                    capture_output=True,
                    text=True,
                    timeout=budget,
                )
            except subprocess.TimeoutExpired:
                return TIMEOUT, None
            except OSError as exc:
                raise ExternalSolverError(f"cannot run {self.command!r}: {exc}") from exc
        finally:
            os.unlink(path)
        return _parse_solver_output(proc.stdout, formula.var_count, self.command, proc.returncode)


def _with_assumptions(formula: CnfFormula, assumptions) -> CnfFormula:
    augmented = CnfFormula(var_count=formula.var_count)
    augmented.clauses = [list(cl) for cl in formula.clauses]
    augmented.has_empty_clause = formula.has_empty_clause
    for lit in assumptions:
        augmented.add_clause([lit])
    return augmented


def _parse_solver_output(stdout: str, var_count: int, command, returncode: int):
    status = None
    values: list[int] = []
    for line in stdout.splitlines():
        line = line.strip()
        if line.startswith("s "):
            verdict = line[2:].strip()
            if verdict == "SATISFIABLE":
                status = SAT
            elif verdict == "UNSATISFIABLE":
                status = UNSAT
            elif verdict in ("UNKNOWN", "INDETERMINATE"):
                status = TIMEOUT
        elif line.startswith("v ") or line == "v":
            values.extend(int(tok) for tok in line[1:].split())
    if status is None:
        raise ExternalSolverError(
            f"no s-line from {command!r} (exit {returncode}): {stdout[:200]!r}"
        )
    if status != SAT:
        return status, None
    model: list[bool | None] = [None] + [False] * var_count
    for lit in values:
        if lit == 0:
            continue
        if abs(lit) <= var_count:
            model[abs(lit)] = lit > 0
    return SAT, model


def make_backend(name: str, command: str | None = None):
    """Backend from a CLI-ish spec; external command falls back to $MAPFSAT_SOLVER_CMD."""
    if name == "embedded":
        return EmbeddedBackend()
    if name == "external":
        command = command or os.environ.get(ENV_SOLVER_CMD)
        if not command:
            raise ValueError("external backend needs --solver-cmd or MAPFSAT_SOLVER_CMD")
        return ExternalBackend(command)
    raise ValueError(f"unknown backend {name!r}")


def sat_solve(backend, formula: CnfFormula, assumptions=(), deadline: float | None = None):
    """(status, model): SAT with a total assignment, UNSAT, or timeout."""
    return backend.solve(formula, assumptions=assumptions, deadline=deadline)


def _deadline(limits: Limits, started: float) -> float | None:
    if limits.time_limit is None:
        return None
    return started + limits.time_limit


def _expired(deadline: float | None) -> bool:
    return deadline is not None and time.monotonic() > deadline


def solve_soc_optimal(
    instance: MapfInstance,
    encoding: str = "mdd",
    backend=None,
    limits: Limits | None = None,
    on_formula=None,
) -> SolveOutcome:
    """Optimal sum-of-costs via slack iteration (encoding: "basic" or "mdd").

    `on_formula(formula, varmap, bound)` is called for every encoded
    iteration (DIMACS emission, formula capture in tests).
    """
    if encoding not in ("basic", "mdd"):
        raise ValueError(f"unknown encoding {encoding!r}")
    backend = backend or EmbeddedBackend()
    limits = limits or Limits()
    started = time.monotonic()
    deadline = _deadline(limits, started)
    costs = shortest_path_costs(instance)
    graph = instance.graph
    iterations: list[IterationStat] = []

    for delta in range(limits.bound_cap + 1):
        if _expired(deadline):
            return SolveOutcome(TIMEOUT_STATUS, None, iterations, time.monotonic() - started)
        mu = costs.makespan_lb + delta
        tegs = []
        for i, (start, goal) in enumerate(instance.agents):
            if encoding == "basic":
                tegs.append(build_teg(graph, mu, costs.solo[i], start, goal))
            else:
                tegs.append(build_mdd_teg(graph, mu, costs.solo[i], delta, start, goal))
        formula, varmap = encode_soc(instance, tegs, delta)
        if on_formula is not None:
            on_formula(formula, varmap, delta)
        t0 = time.monotonic()
        status, model = backend.solve(formula, deadline=deadline)
        iterations.append(IterationStat(delta, formula.var_count, formula.clause_count, time.monotonic() - t0))
        if status == TIMEOUT:
            return SolveOutcome(TIMEOUT_STATUS, None, iterations, time.monotonic() - started)
        if status == SAT:
            solution = decode_model(varmap, model, mu, instance.num_agents)
            _check_decoded(instance, solution)
            return SolveOutcome(OPTIMAL, solution, iterations, time.monotonic() - started)
    return SolveOutcome(INFEASIBLE, None, iterations, time.monotonic() - started)


def solve_makespan_optimal(
    instance: MapfInstance,
    backend=None,
    limits: Limits | None = None,
    encoding: str = "mdd",
    on_formula=None,
) -> SolveOutcome:
    """Optimal makespan via depth iteration; TEGs carry only standard edges."""
    if encoding not in ("basic", "mdd"):
        raise ValueError(f"unknown encoding {encoding!r}")
    backend = backend or EmbeddedBackend()
    limits = limits or Limits()
    started = time.monotonic()
    deadline = _deadline(limits, started)
    costs = shortest_path_costs(instance)
    graph = instance.graph
    iterations: list[IterationStat] = []

    for extra in range(limits.bound_cap + 1):
        if _expired(deadline):
            return SolveOutcome(TIMEOUT_STATUS, None, iterations, time.monotonic() - started)
        mu = costs.makespan_lb + extra
        tegs = []
        for i, (start, goal) in enumerate(instance.agents):
            if encoding == "basic":
                tegs.append(build_teg(graph, mu, mu, start, goal))
            else:
                tegs.append(build_mdd_teg(graph, mu, mu, 0, start, goal))
        formula, varmap = encode_makespan(instance, tegs)
        if on_formula is not None:
            on_formula(formula, varmap, mu)
        t0 = time.monotonic()
        status, model = backend.solve(formula, deadline=deadline)
        iterations.append(IterationStat(mu, formula.var_count, formula.clause_count, time.monotonic() - t0))
        if status == TIMEOUT:
            return SolveOutcome(TIMEOUT_STATUS, None, iterations, time.monotonic() - started)
        if status == SAT:
            solution = decode_model(varmap, model, mu, instance.num_agents)
            _check_decoded(instance, solution)
            return SolveOutcome(OPTIMAL, solution, iterations, time.monotonic() - started)
    return SolveOutcome(INFEASIBLE, None, iterations, time.monotonic() - started)


def _check_decoded(instance: MapfInstance, solution: Solution) -> None:
    report = validate_solution(instance, solution.paths)
    if not report.ok:
        raise RuntimeError(f"decoded solution fails validation: {report.violations[:3]}")
