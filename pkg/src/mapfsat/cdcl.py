"""Embedded conflict-driven SAT solver.

Complete CDCL with two-watched-literal propagation, first-UIP clause learning
with basic minimization, VSIDS branching, phase saving, Luby restarts, and
activity-based learnt-clause reduction. Everything is list-ordered and free of
randomness, so verdicts and models are deterministic for a given sequence of
add_clause/solve calls.

Literals cross the API as DIMACS-style signed ints; internally literal l of
variable v is 2v (positive) or 2v+1 (negative).
"""

from __future__ import annotations

import time
from heapq import heappop, heappush

UNDEF, TRUE, FALSE = 0, 1, 2

VAR_DECAY = 0.95
CLAUSE_DECAY = 0.999
RESTART_BASE = 100
RESCALE_LIMIT = 1e100


def _luby(y: float, x: int) -> float:
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y**seq


def _internal(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class CdclSolver:
    def __init__(self, formula=None):
        self.num_vars = 0
        self.clauses: list[list[int] | None] = []
        self.learnt_ids: list[int] = []
        self.clause_act: dict[int, float] = {}
        self.watches: list[list[int]] = [[], []]
        self.values = bytearray(2)
        self.level = [0]
        self.reason = [-1]
        self.activity = [0.0]
        self.polarity = [False]
        self.seen = bytearray(1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.order_heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.max_learnts = 4000.0
        self.unsat = False
        self._model: list[bool | None] = []
        self.stats_conflicts = 0
        self.stats_decisions = 0
        self.stats_propagations = 0
        if formula is not None:
            self.grow_to(formula.var_count)
            for clause in formula.clauses:
                self.add_clause(clause)

    def grow_to(self, num_vars: int) -> None:
        while self.num_vars < num_vars:
            self.num_vars += 1
            v = self.num_vars
            self.watches.append([])
            self.watches.append([])
            self.values.extend((0, 0))
            self.level.append(0)
            self.reason.append(-1)
            self.activity.append(0.0)
            self.polarity.append(False)
            self.seen.append(0)
            heappush(self.order_heap, (0.0, v))

    def add_clause(self, literals) -> None:
        """Add a problem clause (DIMACS signed ints). Must be called at level 0."""
        lits = []
        seen = set()
        for lit in literals:
            self.grow_to(abs(lit))
            il = _internal(lit)
            if il ^ 1 in seen:
                return  # tautology
            if il not in seen:
                seen.add(il)
                lits.append(il)
        if not lits:
            self.unsat = True
            return
        values = self.values
        kept = []
        for l in lits:
            if self.level[l >> 1] == 0:
                if values[l] == TRUE:
                    return  # satisfied at level 0
                if values[l] == FALSE:
                    continue
            kept.append(l)
        lits = kept
        if not lits:
            self.unsat = True
            return
        if len(lits) == 1:
            if values[lits[0]] == FALSE:
                self.unsat = True
            elif values[lits[0]] == UNDEF:
                self._enqueue(lits[0], -1)
                if self._propagate() is not None:
                    self.unsat = True
            return
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)

    # -- assignment control --

    def _enqueue(self, lit: int, reason: int) -> None:
        values = self.values
        values[lit] = TRUE
        values[lit ^ 1] = FALSE
        v = lit >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _cancel_until(self, target_level: int) -> None:
        if len(self.trail_lim) <= target_level:
            return
        bound = self.trail_lim[target_level]
        values = self.values
        for i in range(len(self.trail) - 1, bound - 1, -1):
            lit = self.trail[i]
            v = lit >> 1
            self.polarity[v] = not (lit & 1)
            values[lit] = UNDEF
            values[lit ^ 1] = UNDEF
            self.reason[v] = -1
            heappush(self.order_heap, (-self.activity[v], v))
        del self.trail[bound:]
        del self.trail_lim[target_level:]
        self.qhead = len(self.trail)

    # -- propagation --

    def _propagate(self) -> list[int] | None:
        """Propagate to fixpoint; return the conflicting clause's literals or None."""
        values = self.values
        watches = self.watches
        clauses = self.clauses
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            watch_list = watches[false_lit]
            kept = []
            i = 0
            n = len(watch_list)
            while i < n:
                ci = watch_list[i]
                i += 1
                clause = clauses[ci]
                if clause is None:
                    continue
                if clause[0] == false_lit:
                    clause[0] = clause[1]
                    clause[1] = false_lit
                first = clause[0]
                if values[first] == TRUE:
                    kept.append(ci)
                    continue
                for j in range(2, len(clause)):
                    lj = clause[j]
                    if values[lj] != FALSE:
                        clause[1] = lj
                        clause[j] = false_lit
                        watches[lj].append(ci)
                        break
                else:
                    kept.append(ci)
                    if values[first] == FALSE:
                        kept.extend(watch_list[i:])
                        watches[false_lit] = kept
                        self.stats_propagations += self.qhead
                        self.qhead = len(trail)
                        return clause
                    values[first] = TRUE
                    values[first ^ 1] = FALSE
                    v = first >> 1
                    self.level[v] = len(self.trail_lim)
                    self.reason[v] = ci
                    trail.append(first)
            watches[false_lit] = kept
        self.stats_propagations += self.qhead
        return None

    # -- conflict analysis --

    def _bump_var(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > RESCALE_LIMIT:
            inv = 1.0 / RESCALE_LIMIT
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= inv
            self.var_inc *= inv
        if self.values[2 * v] == UNDEF:
            heappush(self.order_heap, (-self.activity[v], v))

    def _bump_clause(self, ci: int) -> None:
        if ci in self.clause_act:
            self.clause_act[ci] += self.cla_inc
            if self.clause_act[ci] > RESCALE_LIMIT:
                inv = 1.0 / RESCALE_LIMIT
                for k in self.clause_act:
                    self.clause_act[k] *= inv
                self.cla_inc *= inv

    def _analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        """First-UIP learnt clause (asserting literal first) and backjump level."""
        seen = self.seen
        level = self.level
        current = len(self.trail_lim)
        learnt = [0]
        counter = 0
        p = -1
        idx = len(self.trail) - 1
        reason_lits = conflict
        while True:
            for q in reason_lits:
                if q == p:
                    continue
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump_var(v)
                    if level[v] >= current:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = p >> 1
            seen[v] = 0
            counter -= 1
            if counter == 0:
                break
            ci = self.reason[v]
            self._bump_clause(ci)
            reason_lits = self.clauses[ci]
        learnt[0] = p ^ 1

        # cheap minimization: drop literals implied by the rest of the clause
        kept = [learnt[0]]
        for q in learnt[1:]:
            ci = self.reason[q >> 1]
            if ci < 0:
                kept.append(q)
                continue
            if any((r >> 1) != (q >> 1) and not seen[r >> 1] and level[r >> 1] > 0 for r in self.clauses[ci]):
                kept.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = 0
        learnt = kept

        if len(learnt) == 1:
            return learnt, 0
        max_i = 1
        for i in range(2, len(learnt)):
            if level[learnt[i] >> 1] > level[learnt[max_i] >> 1]:
                max_i = i
        learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _record_learnt(self, learnt: list[int]) -> None:
        if len(learnt) == 1:
            self._enqueue(learnt[0], -1)
            return
        ci = len(self.clauses)
        self.clauses.append(learnt)
        self.learnt_ids.append(ci)
        self.clause_act[ci] = self.cla_inc
        self.watches[learnt[0]].append(ci)
        self.watches[learnt[1]].append(ci)
        self._enqueue(learnt[0], ci)

    # -- learnt clause reduction (only at level 0) --

    def _locked(self, ci: int) -> bool:
        clause = self.clauses[ci]
        return self.values[clause[0]] == TRUE and self.reason[clause[0] >> 1] == ci

    def _reduce_db(self) -> None:
        candidates = [ci for ci in self.learnt_ids if len(self.clauses[ci]) > 2 and not self._locked(ci)]
        candidates.sort(key=lambda ci: self.clause_act[ci])
        drop = set(candidates[: len(candidates) // 2])
        for ci in drop:
            self.clauses[ci] = None
            del self.clause_act[ci]
        self.learnt_ids = [ci for ci in self.learnt_ids if ci not in drop]
        values = self.values
        self.watches = [[] for _ in range(2 * self.num_vars + 2)]
        for ci, clause in enumerate(self.clauses):
            if clause is None:
                continue
            for slot in range(2):
                if values[clause[slot]] == FALSE:
                    for j in range(slot + 1, len(clause)):
                        if values[clause[j]] != FALSE:
                            clause[slot], clause[j] = clause[j], clause[slot]
                            break
            self.watches[clause[0]].append(ci)
            self.watches[clause[1]].append(ci)

    # -- main search --

    def solve(self, assumptions=(), deadline: float | None = None) -> bool | None:
        """True = satisfiable (model available), False = unsatisfiable, None = deadline hit."""
        if self.unsat:
            return False
        assume = []
        for lit in assumptions:
            self.grow_to(abs(lit))
            assume.append(_internal(lit))
        self._cancel_until(0)
        if self._propagate() is not None:
            self.unsat = True
            return False

        restarts = 0
        conflicts_here = 0
        limit = _luby(2.0, restarts) * RESTART_BASE
        values = self.values
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.stats_conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    self.unsat = True
                    return False
                learnt, back_level = self._analyze(conflict)
                self._cancel_until(back_level)
                self._record_learnt(learnt)
                self.var_inc /= VAR_DECAY
                self.cla_inc /= CLAUSE_DECAY
                if deadline is not None and self.stats_conflicts % 256 == 0 and time.monotonic() > deadline:
                    self._cancel_until(0)
                    return None
                continue
            if conflicts_here >= limit:
                restarts += 1
                conflicts_here = 0
                limit = _luby(2.0, restarts) * RESTART_BASE
                self._cancel_until(0)
                if len(self.learnt_ids) > self.max_learnts:
                    self._reduce_db()
                    self.max_learnts *= 1.2
                continue
            if deadline is not None and self.stats_decisions % 512 == 0 and time.monotonic() > deadline:
                self._cancel_until(0)
                return None

            if len(self.trail_lim) < len(assume):
                lit = assume[len(self.trail_lim)]
                if values[lit] == TRUE:
                    self.trail_lim.append(len(self.trail))  # empty pseudo-level
                    continue
                if values[lit] == FALSE:
                    self._cancel_until(0)
                    return False
                self.trail_lim.append(len(self.trail))
                self._enqueue(lit, -1)
                continue

            heap = self.order_heap
            v = 0
            while heap:
                _, cand = heappop(heap)
                if values[2 * cand] == UNDEF:
                    v = cand
                    break
            if v == 0:
                self._model = [None] + [values[2 * u] == TRUE for u in range(1, self.num_vars + 1)]
                self._cancel_until(0)
                return True
            self.stats_decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(2 * v if self.polarity[v] else 2 * v + 1, -1)

    def model(self) -> list[bool | None]:
        """Assignment from the last satisfiable solve(), indexed by variable."""
        return self._model
