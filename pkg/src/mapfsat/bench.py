"""Experiment harness: random grid suites, per-solve rows, aggregate summary.

Instances are generated deterministically from the suite seed, every solver
runs under the configured wall-clock timeout, every optimal row is
re-validated before it is written (a failure aborts the whole suite), and the
CSV is byte-identical across runs except for the wall_time_ms column.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .idframe import id_solve
from .instance import MapfInstance, generate_grid_instance, shortest_path_costs, validate_solution
from .satloop import OPTIMAL, EmbeddedBackend, Limits, SolveOutcome, solve_makespan_optimal, solve_soc_optimal
from .search import cbs_solve

CSV_COLUMNS = [
    "instance_id",
    "algorithm",
    "objective",
    "k",
    "status",
    "soc",
    "makespan",
    "delta",
    "var_count",
    "clause_count",
    "wall_time_ms",
]

SUMMARY_COLUMNS = [
    "algorithm",
    "grid",
    "obstacle_rate",
    "k",
    "solved",
    "total",
    "success_rate",
    "mean_ms_common",
]

BASE_ALGORITHMS = ("basic-sat", "mdd-sat", "cbs")


class BenchError(RuntimeError):
    """Suite aborted (invalid config or a solver produced an invalid solution)."""


def parse_algorithm(name: str) -> tuple[str, str]:
    """Split an algorithm spec into (id_mode, base); e.g. "id:mdd-sat"."""
    mode, _, base = name.rpartition(":")
    mode = mode or "off"
    if base not in BASE_ALGORITHMS or mode not in ("off", "sid", "id"):
        raise BenchError(f"unknown algorithm {name!r}")
    return mode, base


@dataclass
class SuiteConfig:
    grid_sizes: list[int] = field(default_factory=lambda: [8])
    obstacle_rates: list[float] = field(default_factory=lambda: [0.1])
    agent_counts: list[int] = field(default_factory=lambda: list(range(1, 9)))
    instances_per_point: int = 10
    timeout: float = 30.0
    algorithms: list[str] = field(default_factory=lambda: ["basic-sat", "mdd-sat", "cbs"])
    objective: str = "soc"
    seed: int = 0
    walk_steps: int = 200
    delta_cap: int = 64

    def validate(self) -> SuiteConfig:
        if not self.grid_sizes or any(s <= 0 for s in self.grid_sizes):
            raise BenchError("grid_sizes must be positive")
        if any(not (0 <= r < 1) for r in self.obstacle_rates):
            raise BenchError("obstacle_rates must lie in [0, 1)")
        if not self.agent_counts or any(k <= 0 for k in self.agent_counts):
            raise BenchError("agent_counts must be positive")
        if self.instances_per_point <= 0 or self.timeout <= 0 or self.delta_cap <= 0:
            raise BenchError("instances_per_point, timeout, delta_cap must be positive")
        if self.objective not in ("soc", "makespan"):
            raise BenchError(f"unknown objective {self.objective!r}")
        for name in self.algorithms:
            mode, base = parse_algorithm(name)
            if base == "cbs" and self.objective == "makespan":
                raise BenchError("cbs solves the sum-of-costs objective only")
            if mode != "off" and self.objective == "makespan":
                raise BenchError("independence detection applies to the sum-of-costs objective only")
        return self

    @staticmethod
    def from_json(text: str) -> SuiteConfig:
        data = json.loads(text)
        unknown = set(data) - set(SuiteConfig().__dict__)
        if unknown:
            raise BenchError(f"unknown config keys: {sorted(unknown)}")
        return SuiteConfig(**data).validate()


@dataclass
class ResultRow:
    instance_id: str
    algorithm: str
    objective: str
    k: int
    status: str
    soc: int | None
    makespan: int | None
    delta: int | None
    var_count: int | None
    clause_count: int | None
    wall_time_ms: float

    def to_csv(self) -> str:
        cells = [
            self.instance_id,
            self.algorithm,
            self.objective,
            str(self.k),
            self.status,
            "" if self.soc is None else str(self.soc),
            "" if self.makespan is None else str(self.makespan),
            "" if self.delta is None else str(self.delta),
            "" if self.var_count is None else str(self.var_count),
            "" if self.clause_count is None else str(self.clause_count),
            f"{self.wall_time_ms:.1f}",
        ]
        return ",".join(cells)


def solve_with_algorithm(
    instance: MapfInstance,
    algorithm: str,
    objective: str,
    limits: Limits,
    backend=None,
) -> SolveOutcome:
    """Dispatch one solve; `algorithm` may carry an `id:`/`sid:` prefix."""
    mode, base = parse_algorithm(algorithm)
    backend = backend or EmbeddedBackend()

    def base_solver(sub: MapfInstance, sub_limits: Limits) -> SolveOutcome:
        if base == "cbs":
            return cbs_solve(sub, sub_limits)
        encoding = "basic" if base == "basic-sat" else "mdd"
        if objective == "makespan":
            return solve_makespan_optimal(sub, backend, sub_limits, encoding=encoding)
        return solve_soc_optimal(sub, encoding, backend, sub_limits)

    if mode == "off":
        return base_solver(instance, limits)
    return id_solve(instance, base_solver, mode=mode, limits=limits, backend=backend)


def _point_tasks(config: SuiteConfig):
    index = 0
    for size in config.grid_sizes:
        for rate in config.obstacle_rates:
            for k in config.agent_counts:
                for i in range(config.instances_per_point):
                    seed = config.seed + index
                    yield (index, size, rate, k, i, seed)
                    index += 1


def _run_task(args) -> list[ResultRow]:
    config, (index, size, rate, k, i, seed) = args
    instance, _ = generate_grid_instance(size, size, rate, k, seed, config.walk_steps)
    costs = shortest_path_costs(instance)
    instance_id = f"g{size}x{size}-r{rate}-k{k}-i{i}-s{seed}"
    rows = []
    for algorithm in config.algorithms:
        limits = Limits(time_limit=config.timeout, bound_cap=config.delta_cap)
        t0 = time.perf_counter()
        outcome = solve_with_algorithm(instance, algorithm, config.objective, limits)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        soc = makespan = delta = var_count = clause_count = None
        if outcome.status == OPTIMAL:
            report = validate_solution(instance, outcome.solution.paths)
            if not report.ok:
                raise BenchError(
                    f"{algorithm} returned an invalid solution on {instance_id}: "
                    f"{report.violations[:3]}"
                )
            soc = outcome.solution.soc
            makespan = outcome.solution.makespan
            delta = soc - costs.soc_lb
        if outcome.iterations:
            var_count = outcome.iterations[-1].var_count
            clause_count = outcome.iterations[-1].clause_count
        rows.append(
            ResultRow(
                instance_id,
                algorithm,
                config.objective,
                k,
                outcome.status,
                soc,
                makespan,
                delta,
                var_count,
                clause_count,
                elapsed_ms,
            )
        )
    return rows


@dataclass
class BenchResult:
    rows: list[ResultRow]
    csv: str
    summary: str


def run_suite(config: SuiteConfig, workers: int = 1) -> BenchResult:
    """Run the whole suite; deterministic rows (modulo wall_time_ms)."""
    config.validate()
    tasks = list(_point_tasks(config))
    args = [(config, task) for task in tasks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_task = list(pool.map(_run_task, args))
    else:
        per_task = [_run_task(a) for a in args]
    rows = [row for chunk in per_task for row in chunk]

    csv_text = "\n".join([",".join(CSV_COLUMNS)] + [row.to_csv() for row in rows]) + "\n"
    return BenchResult(rows, csv_text, _summarize(config, rows))


def _summarize(config: SuiteConfig, rows: list[ResultRow]) -> str:
    """Per (algorithm, point) success rate plus mean runtime over instances
    solved by every algorithm; the mean cell is empty when no instance was."""
    by_point: dict[tuple, dict[str, list[ResultRow]]] = {}
    for row in rows:
        grid, rate = row.instance_id.split("-")[0], row.instance_id.split("-")[1][1:]
        key = (grid, rate, row.k)
        by_point.setdefault(key, {}).setdefault(row.algorithm, []).append(row)

    lines = [",".join(SUMMARY_COLUMNS)]
    for key in sorted(by_point, key=lambda key: (key[0], key[1], key[2])):
        grid, rate, k = key
        algos = by_point[key]
        solved_ids = {
            name: {r.instance_id for r in rs if r.status == OPTIMAL} for name, rs in algos.items()
        }
        common = set.intersection(*solved_ids.values()) if solved_ids else set()
        for name in config.algorithms:
            rs = algos.get(name, [])
            solved = len(solved_ids.get(name, ()))
            total = len(rs)
            rate_pct = f"{100.0 * solved / total:.1f}" if total else ""
            common_times = [r.wall_time_ms for r in rs if r.instance_id in common]
            mean_common = f"{sum(common_times) / len(common_times):.1f}" if common_times else ""
            lines.append(f"{name},{grid},{rate},{k},{solved},{total},{rate_pct},{mean_common}")
    return "\n".join(lines) + "\n"
