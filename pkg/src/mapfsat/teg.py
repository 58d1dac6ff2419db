"""Per-agent time expansion graphs with standard/extra edge partitioning.

A TEG of depth mu layers the underlying graph over time steps 0..mu; directed
edges connect consecutive layers and are either a graph edge or a wait loop.
A non-wait edge whose destination time step exceeds the agent's solo shortest
path cost is an "extra" edge (its traversal is charged against the slack
budget); wait edges are always standard.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Graph


@dataclass(frozen=True)
class Teg:
    depth: int
    layers: tuple[frozenset[int], ...]
    std_edges: frozenset[tuple[int, int, int]]  # (t, from, to), t < depth
    extra_edges: frozenset[tuple[int, int, int]]

    def edges_at(self, t: int) -> list[tuple[int, int, bool]]:
        """Sorted (from, to, is_extra) triples for the transition t -> t+1."""
        out = [(u, v, False) for (s, u, v) in self.std_edges if s == t]
        out += [(u, v, True) for (s, u, v) in self.extra_edges if s == t]
        return sorted(out)

    def has_extra_at(self, t: int) -> bool:
        return any(s == t for (s, _, _) in self.extra_edges)


def _directed_moves(graph: Graph) -> list[tuple[int, int]]:
    moves = []
    for a, b in graph.edges:
        moves.append((a, b))
        moves.append((b, a))
    return sorted(moves)


def build_teg(graph: Graph, mu: int, solo_cost: int, start: int, goal: int) -> Teg:
    """Full TEG: every layer holds all vertices, waits at every vertex."""
    if mu < solo_cost:
        raise ValueError(f"depth {mu} below solo shortest path cost {solo_cost}")
    layers = tuple(frozenset(range(graph.vertex_count)) for _ in range(mu + 1))
    std, extra = set(), set()
    moves = _directed_moves(graph)
    for t in range(mu):
        for u in range(graph.vertex_count):
            std.add((t, u, u))
        target = extra if t + 1 > solo_cost else std
        for u, v in moves:
            target.add((t, u, v))
    return Teg(mu, layers, frozenset(std), frozenset(extra))


def build_mdd_teg(graph: Graph, mu: int, solo_cost: int, delta: int, start: int, goal: int) -> Teg:
    """TEG restricted to vertices on some path of individual cost <= solo_cost + delta.

    A vertex is admitted at step t when it is reachable from the start in t
    steps and the goal is still reachable within the cost budget; the goal
    itself is additionally admitted at every t >= solo_cost, because waiting
    at the goal after final arrival is free and such layers are only ever
    reached by those free waits.
    """
    if mu < solo_cost:
        raise ValueError(f"depth {mu} below solo shortest path cost {solo_cost}")
    budget = solo_cost + delta
    from_start = graph.bfs_distances(start)
    to_goal = graph.bfs_distances(goal)
    layers = []
    for t in range(mu + 1):
        admitted = {
            u
            for u in range(graph.vertex_count)
            if 0 <= from_start[u] <= t and to_goal[u] >= 0 and t + to_goal[u] <= budget
        }
        if t >= solo_cost:
            admitted.add(goal)
        layers.append(frozenset(admitted))
    std, extra = set(), set()
    moves = _directed_moves(graph)
    for t in range(mu):
        here, there = layers[t], layers[t + 1]
        for u in here:
            if u in there:
                std.add((t, u, u))
        target = extra if t + 1 > solo_cost else std
        for u, v in moves:
            if u in here and v in there:
                target.add((t, u, v))
    return Teg(mu, tuple(layers), frozenset(std), frozenset(extra))


def dump_teg(teg: Teg) -> str:
    """Debug dump, one line per edge: `t from to {std|extra}`."""
    lines = []
    for t in range(teg.depth):
        for u, v, is_extra in teg.edges_at(t):
            lines.append(f"{t} {u} {v} {'extra' if is_extra else 'std'}")
    return "\n".join(lines) + ("\n" if lines else "")
