"""Search-based baselines: conflict-based search and a joint-state oracle.

Under the strict movement rules (one agent per vertex, move targets empty at
the source step) a joint plan is valid iff no two agents *claim* the same
(vertex, time), where an agent claims (v, t) when it occupies v at t or at
t+1. Conflicts are detected and constrained at the claim level, which makes
vertex constraints alone a sound and exhaustive branching rule for CBS.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass

from .instance import MapfInstance, Solution, shortest_path_costs, validate_solution
from .satloop import INFEASIBLE, OPTIMAL, TIMEOUT_STATUS, Limits, SolveOutcome


class SearchSpaceError(RuntimeError):
    """Joint state space exceeds the configured oracle bound."""


@dataclass(frozen=True, order=True)
class Constraint:
    """Agent may not claim vertex at this time (occupy at t, or enter at t+1)."""

    agent: int
    vertex: int
    time: int


def position(path, t: int) -> int:
    """Occupancy at t, with goal waits extending the path forever."""
    return path[t] if t < len(path) else path[-1]


def find_first_claim_conflict(paths) -> tuple[int, int, int, int] | None:
    """Earliest (time, agent_i, agent_j, vertex) where two paths claim one cell."""
    horizon = max(len(p) for p in paths) - 1
    for t in range(horizon + 1):
        claimed: dict[int, int] = {}
        for i, path in enumerate(paths):
            cells = {position(path, t)}
            if t < horizon:
                cells.add(position(path, t + 1))
            for v in sorted(cells):
                if v in claimed and claimed[v] != i:
                    return t, claimed[v], i, v
                claimed[v] = i
    return None


def low_level_astar(
    instance: MapfInstance,
    agent: int,
    constraints,
    horizon: int,
    other_paths=(),
) -> list[int] | None:
    """Cheapest single-agent space-time path honoring claim constraints.

    Cost is the arrival time at the goal (trailing goal waits are free); the
    goal counts as reached only once no later constraint touches it. Ties on
    cost prefer fewer claim collisions with `other_paths`.
    """
    start, goal = instance.agents[agent]
    graph = instance.graph
    dist = graph.bfs_distances(goal)
    if dist[start] < 0:
        return None

    # claiming (v,t) is forbidden -> occupying v at t and at t+1 is forbidden
    blocked = set()
    for con in constraints:
        if con.agent == agent:
            blocked.add((con.vertex, con.time))
            blocked.add((con.vertex, con.time + 1))
    last_goal_block = max((t for v, t in blocked if v == goal), default=-1)

    occupancy: dict[int, set[int]] = {}
    for j, path in enumerate(other_paths):
        if j == agent or path is None:
            continue
        for t in range(len(path)):
            occupancy.setdefault(t, set()).add((path[t], j))

    def collision_count(v: int, t: int) -> int:
        agents = set()
        for dt in (-1, 0, 1):
            for cell, j in occupancy.get(t + dt, ()):  # claims overlap within one step
                if cell == v:
                    agents.add(j)
        return len(agents)

    if (start, 0) in blocked:
        return None
    open_heap = [(dist[start], 0, 0, start)]  # (f, conflicts, t, vertex)
    parents: dict[tuple[int, int], tuple[int, int] | None] = {(start, 0): None}
    closed: set[tuple[int, int]] = set()
    while open_heap:
        f, conflicts, t, u = heapq.heappop(open_heap)
        if (u, t) in closed:
            continue
        closed.add((u, t))
        if u == goal and t > last_goal_block:
            path = []
            node = (u, t)
            while node is not None:
                path.append(node[0])
                node = parents[node]
            return path[::-1]
        if t >= horizon:
            continue
        for w in sorted((u, *graph.adjacency[u])):
            if dist[w] < 0 or (w, t + 1) in blocked or (w, t + 1) in closed:
                continue
            if (w, t + 1) not in parents:
                parents[(w, t + 1)] = (u, t)
                heapq.heappush(
                    open_heap,
                    (t + 1 + dist[w], conflicts + collision_count(w, t + 1), t + 1, w),
                )
    return None


def cbs_solve(instance: MapfInstance, limits: Limits | None = None) -> SolveOutcome:
    """Sum-of-costs optimal conflict-based search.

    Best-first over constraint-tree nodes ordered by cost; the earliest claim
    conflict is split into the two single-agent constraints. The per-agent
    horizon is makespan_lb + |V|.
    """
    limits = limits or Limits()
    started = time.monotonic()
    deadline = None if limits.time_limit is None else started + limits.time_limit
    costs = shortest_path_costs(instance)
    horizon = costs.makespan_lb + instance.graph.vertex_count
    k = instance.num_agents

    root_paths: list[list[int]] = []
    for i in range(k):
        path = low_level_astar(instance, i, (), horizon, other_paths=root_paths)
        if path is None:
            return SolveOutcome(INFEASIBLE, None, [], time.monotonic() - started)
        root_paths.append(path)

    counter = itertools.count()
    root_cost = sum(len(p) - 1 for p in root_paths)
    open_heap = [(root_cost, next(counter), frozenset(), root_paths)]
    while open_heap:
        if deadline is not None and time.monotonic() > deadline:
            return SolveOutcome(TIMEOUT_STATUS, None, [], time.monotonic() - started)
        cost, _, constraints, paths = heapq.heappop(open_heap)
        conflict = find_first_claim_conflict(paths)
        if conflict is None:
            padded = [p + [p[-1]] * (max(len(q) for q in paths) - len(p)) for p in paths]
            solution = Solution.from_paths(instance, padded)
            return SolveOutcome(OPTIMAL, solution, [], time.monotonic() - started)
        t, i, j, v = conflict
        for agent in (i, j):
            child_constraints = constraints | {Constraint(agent, v, t)}
            new_path = low_level_astar(instance, agent, child_constraints, horizon, other_paths=paths)
            if new_path is None:
                continue
            child_paths = list(paths)
            child_paths[agent] = new_path
            child_cost = sum(
                len(p) - 1 if n != agent else len(new_path) - 1 for n, p in enumerate(child_paths)
            )
            if child_cost < cost:
                raise RuntimeError("constraint-tree child cheaper than parent")
            heapq.heappush(open_heap, (child_cost, next(counter), child_constraints, child_paths))
    return SolveOutcome(INFEASIBLE, None, [], time.monotonic() - started)


def oracle_solve(
    instance: MapfInstance,
    soc_cap: int | None = None,
    state_bound: int = 2_000_000,
) -> Solution | None:
    """Exact optimum by uniform-cost search over joint states; None = no solution.

    States pair the arrangement with per-agent committed flags; an agent may
    commit once it stands on its goal, then stays forever at no further cost,
    so path costs match the individual-cost definition exactly. With a
    soc_cap, None means no solution of sum-of-costs <= soc_cap exists.
    """
    graph = instance.graph
    k = instance.num_agents
    if graph.vertex_count**k > state_bound:
        raise SearchSpaceError(f"{graph.vertex_count}^{k} joint states exceed bound {state_bound}")
    goals = tuple(g for _, g in instance.agents)
    starts = tuple(s for s, _ in instance.agents)
    if len(set(starts)) < k or len(set(goals)) < k:
        return None

    start_state = (starts, (False,) * k)
    best = {start_state: 0}
    parents: dict = {start_state: None}
    heap = [(0, start_state)]
    while heap:
        cost, state = heapq.heappop(heap)
        if cost > best.get(state, -1):
            continue
        positions, flags = state
        if all(flags):
            arrangements = []
            node = state
            while node is not None:
                arrangements.append(node[0])
                node = parents[node]
            arrangements.reverse()
            paths = [[arr[i] for arr in arrangements] for i in range(k)]
            return Solution.from_paths(instance, paths)

        occupied = set(positions)
        per_agent: list[list[tuple[int, bool, int]]] = []
        for i in range(k):
            p, committed = positions[i], flags[i]
            if committed:
                per_agent.append([(p, True, 0)])
                continue
            options = []
            if p == goals[i]:
                options.append((p, True, 0))
            options.append((p, False, 1))
            options.extend((w, False, 1) for w in graph.adjacency[p] if w not in occupied)
            per_agent.append(options)

        def expand(idx: int, used: set[int], chosen: list[tuple[int, bool, int]]):
            if idx == k:
                new_positions = tuple(c[0] for c in chosen)
                new_flags = tuple(c[1] for c in chosen)
                new_cost = cost + sum(c[2] for c in chosen)
                if soc_cap is not None and new_cost > soc_cap:
                    return
                new_state = (new_positions, new_flags)
                if new_cost < best.get(new_state, new_cost + 1):
                    best[new_state] = new_cost
                    parents[new_state] = state
                    heapq.heappush(heap, (new_cost, new_state))
                return
            for option in per_agent[idx]:
                if option[0] in used:
                    continue
                used.add(option[0])
                chosen.append(option)
                expand(idx + 1, used, chosen)
                chosen.pop()
                used.remove(option[0])

        expand(0, set(), [])
    return None


def oracle_outcome(instance: MapfInstance, soc_cap: int | None = None) -> SolveOutcome:
    """oracle_solve wrapped in the shared outcome shape."""
    started = time.monotonic()
    solution = oracle_solve(instance, soc_cap=soc_cap)
    elapsed = time.monotonic() - started
    if solution is None:
        return SolveOutcome(INFEASIBLE, None, [], elapsed)
    report = validate_solution(instance, solution.paths)
    if not report.ok:
        raise RuntimeError(f"oracle produced invalid solution: {report.violations[:3]}")
    return SolveOutcome(OPTIMAL, solution, [], elapsed)
