"""Clause database, fresh variables, at-most-k sequential counter, DIMACS I/O."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CnfFormula:
    """CNF clause database; literals are nonzero DIMACS-style signed ints.

    Single-writer: one builder fills one formula. An empty clause is recorded
    (the formula is trivially unsatisfiable) and flagged via has_empty_clause.
    """

    var_count: int = 0
    clauses: list[list[int]] = field(default_factory=list)
    has_empty_clause: bool = False

    def new_var(self) -> int:
        self.var_count += 1
        return self.var_count

    def new_vars(self, n: int) -> list[int]:
        return [self.new_var() for _ in range(n)]

    def add_clause(self, literals) -> None:
        clause = list(literals)
        for lit in clause:
            if lit == 0 or abs(lit) > self.var_count:
                raise ValueError(f"literal {lit} out of range (var_count={self.var_count})")
        if not clause:
            self.has_empty_clause = True
        self.clauses.append(clause)

    @property
    def clause_count(self) -> int:
        return len(self.clauses)


def seq_counter_sizes(n: int, bound: int) -> tuple[int, int]:
    """(clauses, auxiliary vars) added by add_at_most for n inputs and this bound."""
    if bound >= n:
        return 0, 0
    if bound == 0:
        return n, 0
    return bound + (n - 2) * (2 * bound + 1) + 1, (n - 1) * bound


def add_at_most(formula: CnfFormula, variables, bound: int) -> None:
    """Constrain at most `bound` of `variables` to be true (sequential counter).

    Introduces unary register variables s[i][j] ("at least j+1 of the first
    i+1 inputs are true") for i in 0..n-2, j in 0..bound-1. Assignments of the
    inputs with <= bound true are exactly the ones extendable to a model.
    """
    xs = list(variables)
    if not xs:
        raise ValueError("at-most-k over an empty variable set")
    if bound < 0:
        raise ValueError("negative bound")
    n = len(xs)
    if bound >= n:
        return
    if bound == 0:
        for x in xs:
            formula.add_clause([-x])
        return
    s = [formula.new_vars(bound) for _ in range(n - 1)]
    formula.add_clause([-xs[0], s[0][0]])
    for j in range(1, bound):
        formula.add_clause([-s[0][j]])
    for i in range(1, n - 1):
        formula.add_clause([-xs[i], s[i][0]])
        formula.add_clause([-s[i - 1][0], s[i][0]])
        for j in range(1, bound):
            formula.add_clause([-xs[i], -s[i - 1][j - 1], s[i][j]])
            formula.add_clause([-s[i - 1][j], s[i][j]])
        formula.add_clause([-xs[i], -s[i - 1][bound - 1]])
    formula.add_clause([-xs[n - 1], -s[n - 2][bound - 1]])


def write_dimacs(formula: CnfFormula) -> str:
    """Serialize as DIMACS CNF, clauses in insertion order, ASCII with \\n endings."""
    lines = [f"p cnf {formula.var_count} {formula.clause_count}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause + [0]))
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    header = None
    literals: list[int] = []
    clauses: list[list[int]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header: {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(literals)
                literals = []
            else:
                literals.append(lit)
    if header is None:
        raise ValueError("missing DIMACS header")
    if literals:
        clauses.append(literals)  # tolerate a missing final 0
    var_count = max([header[0]] + [abs(l) for cl in clauses for l in cl])
    formula = CnfFormula(var_count=var_count)
    for clause in clauses:
        formula.add_clause(clause)
    return formula
