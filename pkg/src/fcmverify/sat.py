"""A conflict-driven clause-learning SAT solver.

Literals follow DIMACS conventions at the API boundary (``+v`` / ``-v`` for
1-based variable ``v``). Internally literal ``2*(v-1)`` is positive and
``2*(v-1)+1`` negative, so ``lit ^ 1`` negates.

Two watched literals, first-UIP learning with local minimization, VSIDS
branching with phase saving, Luby restarts and activity-based deletion of
learnt clauses. Branching ties are broken by variable index, so runs are
deterministic.
"""

from __future__ import annotations

import heapq
import time
from typing import Callable, Iterable, Sequence

UNDEF = -1


def luby(i: int) -> int:
    """The i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    def __init__(self, num_vars: int = 0):
        self.num_vars = 0
        self.clauses: list[list[int] | None] = []
        self.learnt: list[int] = []
        self.clause_act: dict[int, float] = {}
        self.watches: list[list[int]] = []
        self.value: list[int] = []  # per literal: 1 true, 0 false, -1 unassigned
        self.level: list[int] = []
        self.reason: list[int] = []
        self.activity: list[float] = []
        self.phase: list[int] = []  # preferred literal parity (1 = negative)
        self.seen: bytearray = bytearray()
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.heap: list[tuple[float, int]] = []
        self.ok = True
        self.stats = {"decisions": 0, "conflicts": 0, "propagations": 0, "restarts": 0, "learnt": 0}
        self.new_vars(num_vars)

    # -- construction --------------------------------------------------------

    def new_vars(self, k: int) -> None:
        for _ in range(k):
            v = self.num_vars
            self.num_vars += 1
            self.watches += [[], []]
            self.value += [UNDEF, UNDEF]
            self.level.append(0)
            self.reason.append(-1)
            self.activity.append(0.0)
            self.phase.append(1)
            self.seen.append(0)
            self.heap.append((0.0, v))
        heapq.heapify(self.heap)

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a DIMACS clause at decision level 0. Returns False once the formula is unsatisfiable."""
        if not self.ok:
            return False
        internal = set()
        for lit in lits:
            v = abs(lit) - 1
            if v >= self.num_vars:
                self.new_vars(v + 1 - self.num_vars)
            internal.add(2 * v + (lit < 0))
        clause = []
        for lit in sorted(internal):
            if lit ^ 1 in internal:
                return True
            val = self.value[lit]
            if val == 1 and self.level[lit >> 1] == 0:
                return True
            if val == 0 and self.level[lit >> 1] == 0:
                continue
            clause.append(lit)
        if not clause:
            self.ok = False
            return False
        if len(clause) == 1:
            if self.value[clause[0]] == UNDEF:
                self._enqueue(clause[0], -1)
            return True
        ci = len(self.clauses)
        self.clauses.append(clause)
        self.watches[clause[0]].append(ci)
        self.watches[clause[1]].append(ci)
        return True

    # -- core ----------------------------------------------------------------

    def _enqueue(self, lit: int, reason: int) -> None:
        self.value[lit] = 1
        self.value[lit ^ 1] = 0
        v = lit >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        value, clauses, watches, trail = self.value, self.clauses, self.watches, self.trail
        count = 0
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            count += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c is None:
                    continue
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if value[first] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if value[lk] != 0:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if value[first] == 0:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.stats["propagations"] += count
                        return ci
                    self._enqueue(first, ci)
            del ws[j:]
        self.stats["propagations"] += count
        return -1

    def _bump_var(self, v: int) -> None:
        act = self.activity[v] + self.var_inc
        self.activity[v] = act
        if act > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.var_inc *= 1e-100
            self.heap = [(-a, i) for i, a in enumerate(self.activity)]
            heapq.heapify(self.heap)
        else:
            heapq.heappush(self.heap, (-act, v))

    def _bump_clause(self, ci: int) -> None:
        if ci in self.clause_act:
            self.clause_act[ci] += self.cla_inc
            if self.clause_act[ci] > 1e20:
                for k in self.clause_act:
                    self.clause_act[k] *= 1e-20
                self.cla_inc *= 1e-20

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen, level, reason, trail, clauses = self.seen, self.level, self.reason, self.trail, self.clauses
        cur = len(self.trail_lim)
        learnt = [0]
        counter = 0
        p = -1
        idx = len(trail) - 1
        ci = confl
        while True:
            self._bump_clause(ci)
            c = clauses[ci]
            for q in c if p == -1 else c[1:]:
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump_var(v)
                    if level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            ci = reason[p >> 1]
            seen[p >> 1] = 0
            counter -= 1
            if counter == 0:
                break
        learnt[0] = p ^ 1
        # drop literals implied by the rest of the clause (local minimization)
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r == -1:
                kept.append(q)
                continue
            for x in clauses[r][1:]:
                if not seen[x >> 1] and level[x >> 1] > 0:
                    kept.append(q)
                    break
        for q in learnt[1:]:
            seen[q >> 1] = 0
        learnt = kept
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        value, phase, heap, activity = self.value, self.phase, self.heap, self.activity
        for lit in self.trail[start:]:
            v = lit >> 1
            value[lit] = UNDEF
            value[lit ^ 1] = UNDEF
            phase[v] = lit & 1
            self.reason[v] = -1
            heapq.heappush(heap, (-activity[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int:
        heap, value = self.heap, self.value
        while heap:
            _, v = heapq.heappop(heap)
            if value[2 * v] == UNDEF:
                return v
        return -1

    def _reduce_db(self) -> None:
        locked = {self.reason[lit >> 1] for lit in self.trail}
        cands = [ci for ci in self.learnt if len(self.clauses[ci]) > 2 and ci not in locked]
        cands.sort(key=lambda ci: self.clause_act[ci])
        drop = set(cands[: len(cands) // 2])
        for ci in drop:
            self.clauses[ci] = None
            del self.clause_act[ci]
        self.learnt = [ci for ci in self.learnt if ci not in drop]

    def solve(
        self,
        deadline: float | None = None,
        stop: Callable[[], bool] | None = None,
    ) -> bool | None:
        """True (satisfiable), False (unsatisfiable) or None when the deadline passes."""
        if not self.ok:
            return False
        if self._propagate() != -1:
            self.ok = False
            return False
        restart_no = 0
        max_learnts = max(len(self.clauses) // 3, 2000)
        while True:
            budget = 100 * luby(restart_no)
            conflicts = 0
            while True:
                confl = self._propagate()
                if confl != -1:
                    self.stats["conflicts"] += 1
                    conflicts += 1
                    if not self.trail_lim:
                        self.ok = False
                        return False
                    learnt, back = self._analyze(confl)
                    self._cancel_until(back)
                    if len(learnt) == 1:
                        self._enqueue(learnt[0], -1)
                    else:
                        ci = len(self.clauses)
                        self.clauses.append(learnt)
                        self.watches[learnt[0]].append(ci)
                        self.watches[learnt[1]].append(ci)
                        self.learnt.append(ci)
                        self.clause_act[ci] = self.cla_inc
                        self.stats["learnt"] += 1
                        self._enqueue(learnt[0], ci)
                    self.var_inc /= 0.95
                    self.cla_inc /= 0.999
                    if (self.stats["conflicts"] & 255) == 0:
                        if deadline is not None and time.monotonic() > deadline:
                            self._cancel_until(0)
                            return None
                        if stop is not None and stop():
                            self._cancel_until(0)
                            return None
                    continue
                if conflicts >= budget:
                    self.stats["restarts"] += 1
                    restart_no += 1
                    self._cancel_until(0)
                    break
                if len(self.learnt) - len(self.trail) >= max_learnts:
                    self._reduce_db()
                    max_learnts = int(max_learnts * 1.1)
                v = self._pick()
                if v == -1:
                    return True
                self.stats["decisions"] += 1
                if (self.stats["decisions"] & 1023) == 0 and deadline is not None and time.monotonic() > deadline:
                    self._cancel_until(0)
                    return None
                self.trail_lim.append(len(self.trail))
                self._enqueue(2 * v + self.phase[v], -1)

    def model(self) -> list[bool]:
        """Truth value of each variable (index ``v-1``) after a satisfiable solve."""
        return [self.value[2 * v] == 1 for v in range(self.num_vars)]


def solve_cnf(clauses: Iterable[Sequence[int]], num_vars: int = 0, deadline: float | None = None):
    """Convenience wrapper returning ``(status, model)``."""
    s = Solver(num_vars)
    for c in clauses:
        if not s.add_clause(c):
            break
    status = s.solve(deadline)
    return status, (s.model() if status else None)


def write_dimacs(clauses: Sequence[Sequence[int]], num_vars: int, path, comments: Iterable[str] = ()) -> None:
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"c {line}\n")
        fh.write(f"p cnf {num_vars} {len(clauses)}\n")
        for c in clauses:
            fh.write(" ".join(map(str, c)) + " 0\n")
