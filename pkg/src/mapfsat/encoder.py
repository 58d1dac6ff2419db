"""Compile per-agent TEGs plus a slack bound into CNF, and decode models.

Variables per agent: an occupancy variable for every admitted (vertex, time),
a transition variable for every TEG edge, and a cost variable for every time
step that has at least one outgoing extra edge. Constraints:

  * start/goal unit clauses; non-start vertices are excluded at time 0
  * occupancy at t implies exactly one outgoing transition (t < depth)
  * occupancy at t implies some incoming transition (t > 0)
  * a transition implies occupancy of both its endpoints
  * a move's target vertex is empty (for every other agent) at the source step
  * at most one agent per vertex per time step (pairwise)
  * sum-of-costs mode only: an extra transition sets the step's cost variable,
    a cost variable implies all earlier cost variables, and at most `delta`
    cost variables are true overall (sequential counter)

The time-0 exclusions and the incoming-transition clauses pin the model down
to exactly one occupied vertex per agent and time step, which is what makes
reading a solution straight off the occupancy variables sound.

Clause emission is fixed (agents ascending, time ascending, vertices
ascending within each constraint family) so DIMACS output is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import CnfFormula, add_at_most
from .instance import MapfInstance, Solution, individual_cost
from .teg import Teg


class EncodingError(RuntimeError):
    """A model violated an encoding invariant (solver or encoder bug)."""


@dataclass
class VarMap:
    """Bidirectional map between encoding entities and DIMACS variables."""

    x: dict[tuple[int, int, int], int] = field(default_factory=dict)  # (agent, vertex, t)
    e: dict[tuple[int, int, int, int], int] = field(default_factory=dict)  # (agent, t, from, to)
    c: dict[tuple[int, int], int] = field(default_factory=dict)  # (agent, t)


def _check_depths(tegs) -> int:
    depths = {teg.depth for teg in tegs}
    if len(depths) != 1:
        raise ValueError(f"inconsistent TEG depths: {sorted(depths)}")
    return depths.pop()


def _encode(instance: MapfInstance, tegs: list[Teg], delta: int | None) -> tuple[CnfFormula, VarMap]:
    mu = _check_depths(tegs)
    k = instance.num_agents
    if k != len(tegs):
        raise ValueError("one TEG per agent required")
    formula = CnfFormula()
    varmap = VarMap()
    with_cost = delta is not None

    edges_at = [[teg.edges_at(t) for t in range(mu)] for teg in tegs]
    for i, teg in enumerate(tegs):
        for t in range(mu + 1):
            for v in sorted(teg.layers[t]):
                varmap.x[(i, v, t)] = formula.new_var()
        for t in range(mu):
            for u, v, _ in edges_at[i][t]:
                varmap.e[(i, t, u, v)] = formula.new_var()
        if with_cost:
            for t in range(mu):
                if any(extra for _, _, extra in edges_at[i][t]):
                    varmap.c[(i, t)] = formula.new_var()

    x, e, c = varmap.x, varmap.e, varmap.c

    for i, (start, goal) in enumerate(instance.agents):
        if (i, start, 0) not in x or (i, goal, mu) not in x:
            raise ValueError(f"agent {i}: start or goal not admitted by its TEG")
        formula.add_clause([x[(i, start, 0)]])
        formula.add_clause([x[(i, goal, mu)]])
        for v in sorted(tegs[i].layers[0]):
            if v != start:
                formula.add_clause([-x[(i, v, 0)]])

    # occupancy propagates forward through exactly one outgoing transition
    for i, teg in enumerate(tegs):
        for t in range(mu):
            outgoing: dict[int, list[int]] = {}
            for u, v, _ in edges_at[i][t]:
                outgoing.setdefault(u, []).append(e[(i, t, u, v)])
            for u in sorted(teg.layers[t]):
                evars = outgoing.get(u, [])
                formula.add_clause([-x[(i, u, t)]] + evars)
                for a in range(len(evars)):
                    for b in range(a + 1, len(evars)):
                        formula.add_clause([-evars[a], -evars[b]])

    # occupancy at t > 0 requires an incoming transition
    for i, teg in enumerate(tegs):
        for t in range(1, mu + 1):
            incoming: dict[int, list[int]] = {}
            for u, v, _ in edges_at[i][t - 1]:
                incoming.setdefault(v, []).append(e[(i, t - 1, u, v)])
            for v in sorted(teg.layers[t]):
                formula.add_clause([-x[(i, v, t)]] + incoming.get(v, []))

    # a transition occupies both endpoints
    for i in range(k):
        for t in range(mu):
            for u, v, _ in edges_at[i][t]:
                evar = e[(i, t, u, v)]
                formula.add_clause([-evar, x[(i, u, t)]])
                formula.add_clause([-evar, x[(i, v, t + 1)]])

    # a move's target must be empty at the source time step
    for i in range(k):
        for t in range(mu):
            for u, v, _ in edges_at[i][t]:
                if u == v:
                    continue
                evar = e[(i, t, u, v)]
                for h in range(k):
                    if h != i and (h, v, t) in x:
                        formula.add_clause([-evar, -x[(h, v, t)]])

    # one agent per vertex per time step
    for t in range(mu + 1):
        for v in range(instance.graph.vertex_count):
            holders = [i for i in range(k) if (i, v, t) in x]
            for a in range(len(holders)):
                for b in range(a + 1, len(holders)):
                    formula.add_clause([-x[(holders[a], v, t)], -x[(holders[b], v, t)]])

    if with_cost:
        for i in range(k):
            for t in range(mu):
                for u, v, extra in edges_at[i][t]:
                    if extra:
                        formula.add_clause([-e[(i, t, u, v)], c[(i, t)]])
        for i in range(k):
            cost_times = sorted(t for (j, t) in c if j == i)
            for pos, t in enumerate(cost_times):
                for earlier in cost_times[:pos]:
                    formula.add_clause([-c[(i, t)], c[(i, earlier)]])
        cost_vars = [c[key] for key in sorted(c)]
        if cost_vars:
            add_at_most(formula, cost_vars, delta)

    return formula, varmap


def encode_soc(instance: MapfInstance, tegs: list[Teg], delta: int) -> tuple[CnfFormula, VarMap]:
    """Formula satisfiable iff a solution with sum-of-costs <= soc_lb + delta
    fits into the TEGs' depth."""
    if delta < 0:
        raise ValueError("negative slack")
    return _encode(instance, tegs, delta)


def encode_makespan(instance: MapfInstance, tegs: list[Teg]) -> tuple[CnfFormula, VarMap]:
    """Formula satisfiable iff a solution of makespan <= the TEGs' depth exists.

    Callers build the TEGs with the solo cost set to the depth so every edge
    is standard and no cost machinery is emitted.
    """
    for teg in tegs:
        if teg.extra_edges:
            raise ValueError("makespan encoding expects TEGs with only standard edges")
    return _encode(instance, tegs, None)


def decode_model(varmap: VarMap, model, mu: int, k: int) -> Solution:
    """Read the occupied vertex per (agent, time) out of a satisfying model."""
    positions: list[list[list[int]]] = [[[] for _ in range(mu + 1)] for _ in range(k)]
    for (i, v, t), var in varmap.x.items():
        if model[var]:
            positions[i][t].append(v)
    paths = []
    for i in range(k):
        path = []
        for t in range(mu + 1):
            occupied = positions[i][t]
            if len(occupied) != 1:
                raise EncodingError(f"agent {i} occupies {len(occupied)} vertices at step {t}")
            path.append(occupied[0])
        paths.append(path)
    costs = [individual_cost(path, path[-1]) for path in paths]
    horizon = max(costs) if costs else 0
    trimmed = tuple(tuple(p[: horizon + 1]) for p in paths)
    return Solution(paths=trimmed, soc=sum(costs), makespan=horizon)


def dump_varmap(varmap: VarMap) -> str:
    """Sidecar text for external model debugging: `x agent vertex time varid` lines."""
    lines = [f"x {i} {v} {t} {var}" for (i, v, t), var in sorted(varmap.x.items())]
    return "\n".join(lines) + ("\n" if lines else "")
