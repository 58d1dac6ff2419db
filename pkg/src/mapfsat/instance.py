"""MAPF instances: graphs, agents, solutions, parsing, generation, validation.

Movement rules are the strict ones: one agent per vertex per time step, and a
move's target vertex must be empty at the move's source time step (waits are
always allowed). An agent's individual path cost counts every step (move or
wait) strictly before its final arrival at its goal; waiting at the goal after
final arrival is free.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


class ParseError(ValueError):
    """Malformed map, instance, or solution text."""


class InfeasibleInstanceError(ValueError):
    """Some agent's goal is not reachable from its start."""


PASSABLE_CELLS = frozenset(".G")
IMPASSABLE_CELLS = frozenset("@OT")


@dataclass(frozen=True)
class Graph:
    """Undirected graph with dense vertex ids 0..vertex_count-1 and no self loops."""

    vertex_count: int
    edges: frozenset[tuple[int, int]]
    adjacency: tuple[tuple[int, ...], ...] = field(compare=False)

    @staticmethod
    def from_edges(vertex_count: int, edge_list) -> Graph:
        edges = set()
        for a, b in edge_list:
            if a == b:
                raise ValueError(f"self loop at vertex {a}")
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise ValueError(f"edge ({a},{b}) out of range")
            edges.add((min(a, b), max(a, b)))
        nbrs: list[set[int]] = [set() for _ in range(vertex_count)]
        for a, b in edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        return Graph(vertex_count, frozenset(edges), adjacency)

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def bfs_distances(self, source: int) -> list[int]:
        """BFS distance from source to every vertex (-1 if unreachable)."""
        dist = [-1] * self.vertex_count
        dist[source] = 0
        frontier = [source]
        while frontier:
            nxt = []
            for u in frontier:
                du = dist[u] + 1
                for v in self.adjacency[u]:
                    if dist[v] < 0:
                        dist[v] = du
                        nxt.append(v)
            frontier = nxt
        return dist


@dataclass(frozen=True)
class Grid:
    """A rectangular grid of passable/impassable cells.

    Passable cells get dense vertex ids in row-major order; the induced graph
    is 4-connected.
    """

    height: int
    width: int
    passable: tuple[tuple[bool, ...], ...]

    def cell_ids(self) -> dict[tuple[int, int], int]:
        ids = {}
        for r in range(self.height):
            for c in range(self.width):
                if self.passable[r][c]:
                    ids[(r, c)] = len(ids)
        return ids

    def graph(self) -> Graph:
        ids = self.cell_ids()
        edges = []
        for (r, c), u in ids.items():
            for dr, dc in ((0, 1), (1, 0)):
                v = ids.get((r + dr, c + dc))
                if v is not None:
                    edges.append((u, v))
        return Graph.from_edges(len(ids), edges)

    def vertex_of(self, row: int, col: int) -> int:
        ids = self.cell_ids()
        if (row, col) not in ids:
            raise ParseError(f"cell ({row},{col}) is not passable")
        return ids[(row, col)]


@dataclass(frozen=True)
class MapfInstance:
    """A graph plus ordered agents with (start, goal) vertex ids.

    Vertex ids are range-checked here. Distinctness of starts and of goals is
    checked by check_distinct(); parsers and the generator call it, while the
    raw constructor permits degenerate instances (the encoder maps those to
    unsatisfiable formulas rather than crashing).
    """

    graph: Graph
    agents: tuple[tuple[int, int], ...]

    def __post_init__(self):
        n = self.graph.vertex_count
        for i, (s, g) in enumerate(self.agents):
            if not (0 <= s < n and 0 <= g < n):
                raise ValueError(f"agent {i} endpoints ({s},{g}) out of range")

    @property
    def num_agents(self) -> int:
        return len(self.agents)

    def check_distinct(self) -> MapfInstance:
        starts = [s for s, _ in self.agents]
        goals = [g for _, g in self.agents]
        if len(set(starts)) != len(starts):
            raise ValueError("agent start vertices are not pairwise distinct")
        if len(set(goals)) != len(goals):
            raise ValueError("agent goal vertices are not pairwise distinct")
        return self


def individual_cost(path: list[int], goal: int) -> int:
    """Steps until the final arrival at goal; trailing waits at the goal are free."""
    last = 0
    for t, v in enumerate(path):
        if v != goal:
            last = t + 1
    return last


@dataclass(frozen=True)
class Solution:
    """Per-agent timed vertex sequences with derived sum-of-costs and makespan.

    Paths share one length makespan+1; trailing time steps where every agent
    already sits at its goal are trimmed by from_paths().
    """

    paths: tuple[tuple[int, ...], ...]
    soc: int
    makespan: int

    @staticmethod
    def from_paths(instance: MapfInstance, paths) -> Solution:
        if not paths:
            raise ValueError("no paths")
        lengths = {len(p) for p in paths}
        if len(lengths) != 1:
            raise ValueError("paths differ in length")
        costs = [individual_cost(list(p), g) for p, (_, g) in zip(paths, instance.agents)]
        horizon = max(costs)
        trimmed = tuple(tuple(p[: horizon + 1]) for p in paths)
        return Solution(trimmed, soc=sum(costs), makespan=horizon)


@dataclass(frozen=True)
class Violation:
    kind: str  # vertex-conflict | target-not-empty | invalid-move | endpoint-mismatch
    agents: tuple[int, ...]
    time: int


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]


def validate_solution(instance: MapfInstance, paths) -> ValidationReport:
    """Check endpoint, movement, occupancy, and target-empty rules.

    `paths` is a per-agent list of vertex sequences of one common length;
    every problem is reported, nothing raises (except unequal lengths, which
    violate the precondition).
    """
    paths = [list(p) for p in paths]
    if len({len(p) for p in paths}) != 1:
        raise ValueError("paths differ in length")
    graph = instance.graph
    horizon = len(paths[0]) - 1
    violations: list[Violation] = []

    for i, ((start, goal), path) in enumerate(zip(instance.agents, paths)):
        if path[0] != start or path[-1] != goal:
            violations.append(Violation("endpoint-mismatch", (i,), 0 if path[0] != start else horizon))
        for t in range(horizon):
            a, b = path[t], path[t + 1]
            if a != b and not graph.has_edge(a, b):
                violations.append(Violation("invalid-move", (i,), t))

    for t in range(horizon + 1):
        seen: dict[int, int] = {}
        for i, path in enumerate(paths):
            v = path[t]
            if v in seen:
                violations.append(Violation("vertex-conflict", (seen[v], i), t))
            else:
                seen[v] = i

    for t in range(horizon):
        occupied = {path[t]: i for i, path in enumerate(paths)}
        for i, path in enumerate(paths):
            a, b = path[t], path[t + 1]
            if a != b and b in occupied and occupied[b] != i:
                violations.append(Violation("target-not-empty", (i, occupied[b]), t))

    return ValidationReport(ok=not violations, violations=tuple(violations))


@dataclass(frozen=True)
class PathCosts:
    """Per-agent shortest-path costs ignoring other agents, plus the two lower bounds."""

    solo: tuple[int, ...]  # shortest start->goal distance per agent
    soc_lb: int  # sum of the solo costs (lower bound on optimal sum-of-costs)
    makespan_lb: int  # max of the solo costs (lower bound on optimal makespan)


def shortest_path_costs(instance: MapfInstance) -> PathCosts:
    solo = []
    for i, (start, goal) in enumerate(instance.agents):
        dist = instance.graph.bfs_distances(start)
        if dist[goal] < 0:
            raise InfeasibleInstanceError(f"agent {i}: goal {goal} unreachable from start {start}")
        solo.append(dist[goal])
    return PathCosts(tuple(solo), sum(solo), max(solo) if solo else 0)


def parse_grid(text: str) -> Grid:
    """Parse the MovingAI-style grid map format into a Grid."""
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip() != ""]
    if len(lines) < 4:
        raise ParseError("map header truncated")
    if lines[0].split() != ["type", "octile"]:
        raise ParseError(f"bad map header line: {lines[0]!r}")
    try:
        h_key, h_val = lines[1].split()
        w_key, w_val = lines[2].split()
        height, width = int(h_val), int(w_val)
    except ValueError as exc:
        raise ParseError("bad height/width header") from exc
    if h_key != "height" or w_key != "width" or height <= 0 or width <= 0:
        raise ParseError("bad height/width header")
    if lines[3].strip() != "map":
        raise ParseError("missing 'map' header line")
    rows = lines[4:]
    if len(rows) != height:
        raise ParseError(f"expected {height} map rows, got {len(rows)}")
    passable = []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row {r} has length {len(row)}, expected {width}")
        flags = []
        for c, ch in enumerate(row):
            if ch in PASSABLE_CELLS:
                flags.append(True)
            elif ch in IMPASSABLE_CELLS:
                flags.append(False)
            else:
                raise ParseError(f"unknown cell character {ch!r} at ({r},{c})")
        passable.append(tuple(flags))
    return Grid(height, width, tuple(passable))


def parse_map(text: str) -> Graph:
    """4-connected graph over the passable cells of a grid map."""
    return parse_grid(text).graph()


def format_grid(grid: Grid) -> str:
    rows = ["".join("." if p else "@" for p in row) for row in grid.passable]
    return f"type octile\nheight {grid.height}\nwidth {grid.width}\nmap\n" + "\n".join(rows) + "\n"


def generate_grid_instance(
    width: int,
    height: int,
    obstacle_rate: float,
    k: int,
    seed: int,
    walk_steps: int,
) -> tuple[MapfInstance, Grid]:
    """Random 4-connected grid instance, solvable by construction.

    Obstacle cells are drawn uniformly (count = obstacle_rate * cells rounded
    half-up), starts uniformly over distinct free cells, and goals are read
    off after walk_steps single-agent random moves from the start arrangement
    (one uniformly chosen agent moves per step, uniformly over its legal moves
    including wait, never onto an occupied cell). Deterministic for a seed.
    """
    if walk_steps < 0:
        raise ValueError("walk_steps must be >= 0")
    rng = random.Random(seed)
    cells = [(r, c) for r in range(height) for c in range(width)]
    n_obstacles = int(obstacle_rate * width * height + 0.5)
    blocked = set(rng.sample(cells, n_obstacles))
    passable = tuple(tuple((r, c) not in blocked for c in range(width)) for r in range(height))
    grid = Grid(height, width, passable)
    ids = grid.cell_ids()
    free = sorted(ids.values())
    if k > len(free):
        raise ValueError(f"{k} agents do not fit into {len(free)} free cells")
    graph = grid.graph()

    starts = rng.sample(free, k)
    positions = list(starts)
    occupied = set(positions)
    for _ in range(walk_steps):
        i = rng.randrange(k)
        moves = [positions[i]] + [v for v in graph.adjacency[positions[i]] if v not in occupied]
        target = moves[rng.randrange(len(moves))]
        if target != positions[i]:
            occupied.remove(positions[i])
            occupied.add(target)
            positions[i] = target

    agents = tuple(zip(starts, positions))
    return MapfInstance(graph, agents).check_distinct(), grid


def format_instance(instance: MapfInstance, grid: Grid | None = None) -> str:
    """Native instance text: grid coordinates when a grid is given, else the graph form."""
    if grid is not None:
        ids = grid.cell_ids()
        coords = {v: rc for rc, v in ids.items()}
        lines = [f"agents {instance.num_agents}"]
        for s, g in instance.agents:
            (sr, sc), (gr, gc) = coords[s], coords[g]
            lines.append(f"{sr} {sc} {gr} {gc}")
        return "\n".join(lines) + "\n"
    lines = [f"vertices {instance.graph.vertex_count}"]
    for a, b in sorted(instance.graph.edges):
        lines.append(f"edge {a} {b}")
    for s, g in instance.agents:
        lines.append(f"agent {s} {g}")
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> list[list[str]]:
    out = []
    for ln in text.splitlines():
        ln = ln.strip()
        if ln and not ln.startswith("#"):
            out.append(ln.split())
    return out


def parse_instance(text: str, grid: Grid | None = None) -> MapfInstance:
    """Parse the native instance format.

    The `agents K` + coordinate-rows dialect needs the map's Grid; the
    `vertices`/`edge`/`agent` dialect is self-contained.
    """
    rows = _content_lines(text)
    if not rows:
        raise ParseError("empty instance file")
    head = rows[0]
    if head[0] == "agents":
        if grid is None:
            raise ParseError("coordinate instance requires a map")
        try:
            k = int(head[1])
            quads = [tuple(int(x) for x in row) for row in rows[1:]]
        except (IndexError, ValueError) as exc:
            raise ParseError("malformed agents header or row") from exc
        if len(quads) != k or any(len(q) != 4 for q in quads):
            raise ParseError(f"expected {k} rows of 4 coordinates")
        agents = tuple((grid.vertex_of(sr, sc), grid.vertex_of(gr, gc)) for sr, sc, gr, gc in quads)
        return MapfInstance(grid.graph(), agents).check_distinct()

    if head[0] == "vertices":
        try:
            n = int(head[1])
        except (IndexError, ValueError) as exc:
            raise ParseError("malformed vertices header") from exc
        edges = []
        agents = []
        for row in rows[1:]:
            if row[0] == "edge" and len(row) == 3:
                edges.append((int(row[1]), int(row[2])))
            elif row[0] == "agent" and len(row) == 3:
                agents.append((int(row[1]), int(row[2])))
            else:
                raise ParseError(f"unexpected line: {' '.join(row)!r}")
        if not agents:
            raise ParseError("instance has no agents")
        return MapfInstance(Graph.from_edges(n, edges), tuple(agents)).check_distinct()

    raise ParseError(f"unrecognized instance header: {' '.join(head)!r}")


def parse_solution(text: str) -> list[list[int]]:
    """Parse `path v0 v1 ...` lines (the solve command's output format)."""
    paths = []
    for row in _content_lines(text):
        if row[0] == "path":
            try:
                paths.append([int(x) for x in row[1:]])
            except ValueError as exc:
                raise ParseError(f"bad path line: {' '.join(row)!r}") from exc
    if not paths:
        raise ParseError("no path lines found")
    return paths


def format_solution(solution: Solution) -> str:
    lines = [f"soc {solution.soc}", f"makespan {solution.makespan}"]
    for path in solution.paths:
        lines.append("path " + " ".join(str(v) for v in path))
    return "\n".join(lines) + "\n"
