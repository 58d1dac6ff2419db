"""Optimal multi-agent path finding by compilation to SAT.

Solvers for the sum-of-costs and makespan objectives (full and MDD-restricted
time-expansion encodings), a conflict-based-search baseline, a brute-force
joint-state oracle, independence detection wrappers, and a benchmark harness.
"""

from .bench import SuiteConfig, run_suite, solve_with_algorithm
from .cdcl import CdclSolver
from .cnf import CnfFormula, add_at_most, parse_dimacs, write_dimacs
from .encoder import VarMap, decode_model, encode_makespan, encode_soc
from .idframe import id_solve, same_cost_replan
from .instance import (
    Graph,
    Grid,
    MapfInstance,
    Solution,
    ValidationReport,
    generate_grid_instance,
    parse_instance,
    parse_map,
    shortest_path_costs,
    validate_solution,
)
from .satloop import (
    EmbeddedBackend,
    ExternalBackend,
    Limits,
    SolveOutcome,
    make_backend,
    sat_solve,
    solve_makespan_optimal,
    solve_soc_optimal,
)
from .search import Constraint, cbs_solve, low_level_astar, oracle_solve
from .teg import Teg, build_mdd_teg, build_teg, dump_teg

__version__ = "0.1.0"

__all__ = [
    "CdclSolver",
    "CnfFormula",
    "Constraint",
    "EmbeddedBackend",
    "ExternalBackend",
    "Graph",
    "Grid",
    "Limits",
    "MapfInstance",
    "Solution",
    "SolveOutcome",
    "SuiteConfig",
    "Teg",
    "ValidationReport",
    "VarMap",
    "add_at_most",
    "build_mdd_teg",
    "build_teg",
    "cbs_solve",
    "decode_model",
    "dump_teg",
    "encode_makespan",
    "encode_soc",
    "generate_grid_instance",
    "id_solve",
    "low_level_astar",
    "make_backend",
    "oracle_solve",
    "parse_dimacs",
    "parse_instance",
    "parse_map",
    "run_suite",
    "same_cost_replan",
    "sat_solve",
    "shortest_path_costs",
    "solve_makespan_optimal",
    "solve_soc_optimal",
    "solve_with_algorithm",
    "validate_solution",
    "write_dimacs",
]
