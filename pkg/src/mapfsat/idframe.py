"""Simple and full independence detection over any soc-optimal group solver.

Agents start in singleton groups solved independently. When two groups'
solutions conflict, full ID first tries to replan either group at unchanged
cost while forbidding the cells the other group claims; simple ID (and ID on
a pair that conflicted before) merges immediately. Merged groups are re-solved
by the wrapped solver.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .encoder import decode_model, encode_soc
from .instance import MapfInstance, Solution, shortest_path_costs, validate_solution
from .satloop import (
    INFEASIBLE,
    OPTIMAL,
    SAT,
    TIMEOUT_STATUS,
    EmbeddedBackend,
    Limits,
    SolveOutcome,
)
from .search import find_first_claim_conflict, position
from .teg import build_mdd_teg


@dataclass
class _Group:
    agents: tuple[int, ...]  # ascending
    paths: dict[int, list[int]]  # agent id -> path
    soc: int

    @property
    def label(self) -> int:
        return self.agents[0]


def _sub_instance(instance: MapfInstance, agents) -> MapfInstance:
    return MapfInstance(instance.graph, tuple(instance.agents[i] for i in agents))


def same_cost_replan(
    instance: MapfInstance,
    group,
    forbidden,
    cost_budget: int,
    backend=None,
    deadline: float | None = None,
) -> dict[int, list[int]] | None:
    """Replan a group at exactly its current optimal cost, avoiding forbidden cells.

    Encodes the group sub-instance at the same depth and slack and adds a unit
    exclusion for every forbidden (vertex, time) admitted by some group TEG
    layer. None means no same-cost plan avoids the forbidden cells.
    """
    backend = backend or EmbeddedBackend()
    group = tuple(sorted(group))
    sub = _sub_instance(instance, group)
    costs = shortest_path_costs(sub)
    delta = cost_budget - costs.soc_lb
    if delta < 0:
        raise ValueError("cost budget below the group's lower bound")
    mu = costs.makespan_lb + delta
    tegs = [
        build_mdd_teg(instance.graph, mu, costs.solo[a], delta, start, goal)
        for a, (start, goal) in enumerate(sub.agents)
    ]
    formula, varmap = encode_soc(sub, tegs, delta)
    for v, t in sorted(forbidden):
        for a in range(sub.num_agents):
            var = varmap.x.get((a, v, t))
            if var is not None:
                formula.add_clause([-var])
    status, model = backend.solve(formula, deadline=deadline)
    if status != SAT:
        return None
    solution = decode_model(varmap, model, mu, sub.num_agents)
    if solution.soc != cost_budget:
        raise RuntimeError(f"replan changed cost: {solution.soc} != {cost_budget}")
    return {agent: list(path) for agent, path in zip(group, solution.paths)}


def _forbidden_cells(other: _Group, horizon: int) -> set[tuple[int, int]]:
    """Cells a replanned group may not occupy: every cell the other group
    occupies at t-1, t, or t+1 (claim avoidance under the target-empty rule)."""
    cells = set()
    for path in other.paths.values():
        for t in range(horizon + 1):
            v = position(path, t)
            for s in (t - 1, t, t + 1):
                if 0 <= s <= horizon:
                    cells.add((v, s))
    return cells


def id_solve(
    instance: MapfInstance,
    group_solver,
    mode: str = "id",
    limits: Limits | None = None,
    backend=None,
) -> SolveOutcome:
    """Independence detection around `group_solver(sub_instance, limits)`.

    mode "sid" merges conflicting groups outright; mode "id" first attempts a
    same-cost replan of the smaller group, then the larger, and merges when
    both fail or when the pair has conflicted before.
    """
    if mode not in ("sid", "id"):
        raise ValueError(f"unknown mode {mode!r}")
    limits = limits or Limits()
    backend = backend or EmbeddedBackend()
    started = time.monotonic()
    deadline = None if limits.time_limit is None else started + limits.time_limit

    def remaining() -> Limits:
        if deadline is None:
            return Limits(None, limits.bound_cap)
        return Limits(max(deadline - time.monotonic(), 0.01), limits.bound_cap)

    def solve_group(agents: tuple[int, ...]) -> _Group | SolveOutcome:
        outcome = group_solver(_sub_instance(instance, agents), remaining())
        if outcome.status != OPTIMAL:
            return SolveOutcome(outcome.status, None, [], time.monotonic() - started)
        paths = {a: list(p) for a, p in zip(agents, outcome.solution.paths)}
        return _Group(agents, paths, outcome.solution.soc)

    groups: list[_Group] = []
    for i in range(instance.num_agents):
        result = solve_group((i,))
        if isinstance(result, SolveOutcome):
            return result
        groups.append(result)
    history: set[frozenset[int]] = set()

    while True:
        if deadline is not None and time.monotonic() > deadline:
            return SolveOutcome(TIMEOUT_STATUS, None, [], time.monotonic() - started)
        flat_paths = [None] * instance.num_agents
        owner: dict[int, _Group] = {}
        for group in groups:
            for agent, path in group.paths.items():
                flat_paths[agent] = path
                owner[agent] = group
        conflict = find_first_claim_conflict(flat_paths)
        if conflict is None:
            break
        _, ai, aj, _ = conflict
        g1, g2 = owner[ai], owner[aj]
        if g1.label == g2.label:
            raise RuntimeError("conflict inside one group: group solver returned invalid paths")
        # smaller group replans first; labels break ties
        if (len(g2.agents), g2.label) < (len(g1.agents), g1.label):
            g1, g2 = g2, g1
        pair = frozenset((g1.label, g2.label))
        horizon = max(len(p) for p in flat_paths) - 1

        replanned = None
        if mode == "id" and pair not in history:
            history.add(pair)
            for group, other in ((g1, g2), (g2, g1)):
                cells = _forbidden_cells(other, horizon)
                paths = same_cost_replan(
                    instance, group.agents, cells, group.soc, backend=backend, deadline=deadline
                )
                if paths is not None:
                    group.paths = paths
                    replanned = group
                    break
        if replanned is not None:
            continue

        merged_agents = tuple(sorted(g1.agents + g2.agents))
        result = solve_group(merged_agents)
        if isinstance(result, SolveOutcome):
            return result
        groups = [g for g in groups if g.label not in (g1.label, g2.label)]
        groups.append(result)

    horizon = max(len(p) for g in groups for p in g.paths.values()) - 1
    full = [None] * instance.num_agents
    for group in groups:
        for agent, path in group.paths.items():
            full[agent] = path + [path[-1]] * (horizon + 1 - len(path))
    solution = Solution.from_paths(instance, full)
    report = validate_solution(instance, solution.paths)
    if not report.ok:
        raise RuntimeError(f"merged plan fails validation: {report.violations[:3]}")
    if solution.soc != sum(g.soc for g in groups):
        raise RuntimeError("combined cost differs from the sum of group optima")
    return SolveOutcome(OPTIMAL, solution, [], time.monotonic() - started)
