"""Conflict-driven clause-learning SAT core plus an external-solver bridge.

The embedded solver uses two-watched-literal propagation, first-UIP clause
learning, VSIDS-style variable activity with a lazy heap, phase saving
(initial phase FALSE, which suits the at-most-one-heavy placement CNFs),
Luby restarts, and a learned-clause cap with level-0 reduction. It is fully
deterministic: identical input yields identical results and statistics.

Any result is audited with `check_model` before being returned, regardless
of whether it came from the embedded core or an external DIMACS solver.
"""

from __future__ import annotations

import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from heapq import heappush, heappop
from pathlib import Path
from typing import Callable, Optional

from .encoder import CnfFormula, emit_dimacs, parse_dimacs

SAT = "sat"
UNSAT = "unsat"
TIMEOUT = "timeout"


@dataclass
class SolveBudget:
    max_seconds: Optional[float] = None
    max_conflicts: Optional[int] = None


@dataclass
class SolveStats:
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0
    learned: int = 0
    wall_time: float = 0.0


@dataclass
class SolveResult:
    status: str
    model: Optional[list[bool]]  # model[v] for v in 1..num_vars; model[0] unused
    stats: SolveStats = field(default_factory=SolveStats)


def check_model(cnf: CnfFormula, model: Optional[list[bool]]) -> bool:
    """True iff every clause has a true literal under `model`."""
    if model is None or len(model) < cnf.num_vars + 1:
        return False
    for cl in cnf.clauses:
        for lit in cl:
            if model[lit] if lit > 0 else not model[-lit]:
                break
        else:
            return False
    return True


def _luby(i: int) -> int:
    """Luby restart sequence 1,1,2,1,1,2,4,... for i >= 1."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) // 2
        seq -= 1
        x %= size
    return 1 << seq


class _Cdcl:
    RESTART_BASE = 100
    VAR_DECAY = 0.95

    def __init__(self, clauses: list[list[int]], num_vars: int,
                 on_learn: Optional[Callable[[list[int]], None]] = None) -> None:
        self.nv = num_vars
        self.assign: list[Optional[bool]] = [None] * (num_vars + 1)
        self.level = [0] * (num_vars + 1)
        self.reason: list[Optional[list[int]]] = [None] * (num_vars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[list[int]]] = [[] for _ in range(2 * num_vars + 2)]
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.activity = [0.0] * (num_vars + 1)
        self.var_inc = 1.0
        self.saved = [False] * (num_vars + 1)
        self.heap: list[tuple[float, int]] = []
        self.stats = SolveStats()
        self.on_learn = on_learn
        self.ok = True
        for cl in clauses:
            if not self._add_clause(cl):
                self.ok = False
                break
        for v in range(1, num_vars + 1):
            heappush(self.heap, (0.0, v))

    @staticmethod
    def _lidx(lit: int) -> int:
        return (lit << 1) if lit > 0 else ((-lit) << 1) + 1

    def _value(self, lit: int) -> Optional[bool]:
        a = self.assign[abs(lit)]
        if a is None:
            return None
        return a if lit > 0 else not a

    def _add_clause(self, cl: list[int]) -> bool:
        # copy: the search permutes clause literals in place
        cl = list(dict.fromkeys(cl))
        lits = set(cl)
        if any(-l in lits for l in cl):
            return True  # tautology
        if not cl:
            return False
        if len(cl) == 1:
            return self._enqueue(cl[0], None)
        self.clauses.append(cl)
        self._attach(cl)
        return True

    def _attach(self, cl: list[int]) -> None:
        self.watches[self._lidx(cl[0])].append(cl)
        self.watches[self._lidx(cl[1])].append(cl)

    def _enqueue(self, lit: int, reason: Optional[list[int]]) -> bool:
        val = self._value(lit)
        if val is not None:
            return val
        v = abs(lit)
        self.assign[v] = lit > 0
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def propagate(self) -> Optional[list[int]]:
        """Unit propagation; returns the conflicting clause or None."""
        assign = self.assign
        watches = self.watches
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            self.stats.propagations += 1
            li = self._lidx(-p)
            ws = watches[li]
            i = j = 0
            n = len(ws)
            conflict = None
            while i < n:
                cl = ws[i]
                i += 1
                if cl[0] == -p:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                fv = assign[first] if first > 0 else (None if assign[-first] is None else not assign[-first])
                if fv is True:
                    ws[j] = cl
                    j += 1
                    continue
                moved = False
                for k in range(2, len(cl)):
                    lk = cl[k]
                    kv = assign[lk] if lk > 0 else (None if assign[-lk] is None else not assign[-lk])
                    if kv is not False:
                        cl[1], cl[k] = cl[k], cl[1]
                        watches[self._lidx(cl[1])].append(cl)
                        moved = True
                        break
                if moved:
                    continue
                ws[j] = cl
                j += 1
                if fv is False:
                    conflict = cl
                    break
                self._enqueue(first, cl)
            if conflict is not None:
                while i < n:
                    ws[j] = ws[i]
                    j += 1
                    i += 1
                del ws[j:]
                return conflict
            del ws[j:]
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nv + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        heappush(self.heap, (-self.activity[v], v))

    def analyze(self, confl: list[int]) -> tuple[list[int], int]:
        """First-UIP learning; returns (learned clause, backjump level).
        The asserting literal sits at index 0."""
        learnt: list[int] = [0]
        seen = bytearray(self.nv + 1)
        counter = 0
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        cl = confl
        first_pass = True
        while True:
            # reason clauses carry their propagated literal at slot 0
            for q in (cl if first_pass else cl[1:]):
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            first_pass = False
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            v = abs(p)
            idx -= 1
            seen[v] = 0
            counter -= 1
            if counter == 0:
                break
            cl = self.reason[v]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        # put the highest-level remaining literal at slot 1 for watching
        max_i = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        limit = self.trail_lim[lvl]
        for lit in self.trail[limit:]:
            v = abs(lit)
            self.saved[v] = self.assign[v]
            self.assign[v] = None
            self.reason[v] = None
            heappush(self.heap, (-self.activity[v], v))
        del self.trail[limit:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def decide(self) -> Optional[int]:
        while self.heap:
            act, v = heappop(self.heap)
            if self.assign[v] is None and -act == self.activity[v]:
                return v if self.saved[v] else -v
        for v in range(1, self.nv + 1):
            if self.assign[v] is None:
                return v if self.saved[v] else -v
        return None

    def reduce_learnts(self) -> None:
        """Drop the longest half of the learned clauses. Called at level 0
        only, so no learned clause can be a reason on the trail."""
        keep = [cl for cl in self.learnts if len(cl) <= 2]
        long = sorted((cl for cl in self.learnts if len(cl) > 2), key=len)
        keep.extend(long[: len(long) // 2])
        dropped = set(map(id, self.learnts)) - set(map(id, keep))
        if not dropped:
            return
        self.learnts = keep
        for wl in self.watches:
            wl[:] = [cl for cl in wl if id(cl) not in dropped]

    def solve(self, budget: SolveBudget) -> SolveResult:
        t0 = time.perf_counter()
        stats = self.stats

        def timed_out() -> bool:
            if budget.max_conflicts is not None and stats.conflicts >= budget.max_conflicts:
                return True
            if budget.max_seconds is not None and time.perf_counter() - t0 > budget.max_seconds:
                return True
            return False

        if not self.ok or self.propagate() is not None:
            stats.wall_time = time.perf_counter() - t0
            return SolveResult(UNSAT, None, stats)

        learnt_cap = max(10000, len(self.clauses) // 4)
        conflicts_at_restart = 0
        restart_limit = self.RESTART_BASE * _luby(1)

        while True:
            confl = self.propagate()
            if confl is not None:
                stats.conflicts += 1
                conflicts_at_restart += 1
                if len(self.trail_lim) == 0:
                    stats.wall_time = time.perf_counter() - t0
                    return SolveResult(UNSAT, None, stats)
                learnt, back_lvl = self.analyze(confl)
                if self.on_learn is not None:
                    self.on_learn(list(learnt))
                self.backtrack(back_lvl)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self._attach(learnt)
                    self._enqueue(learnt[0], learnt)
                stats.learned += 1
                self.var_inc /= self.VAR_DECAY
                if stats.conflicts % 256 == 0 and timed_out():
                    stats.wall_time = time.perf_counter() - t0
                    return SolveResult(TIMEOUT, None, stats)
                continue

            if conflicts_at_restart >= restart_limit:
                stats.restarts += 1
                conflicts_at_restart = 0
                restart_limit = self.RESTART_BASE * _luby(stats.restarts + 1)
                self.backtrack(0)
                if len(self.learnts) > learnt_cap:
                    self.reduce_learnts()
                continue

            lit = self.decide()
            if lit is None:
                stats.wall_time = time.perf_counter() - t0
                model = [False] * (self.nv + 1)
                for v in range(1, self.nv + 1):
                    model[v] = bool(self.assign[v])
                return SolveResult(SAT, model, stats)
            stats.decisions += 1
            if stats.decisions % 256 == 0 and timed_out():
                stats.wall_time = time.perf_counter() - t0
                return SolveResult(TIMEOUT, None, stats)
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def solve(cnf: CnfFormula, budget: Optional[SolveBudget] = None, seed: int = 0,
          on_learn: Optional[Callable[[list[int]], None]] = None) -> SolveResult:
    """Decide satisfiability of `cnf` within `budget`.

    Returns SAT with an audited model, UNSAT after exhausting the search, or
    TIMEOUT at the budget. The core is deterministic; `seed` is accepted for
    interface stability and reserved for randomized strategies.
    """
    del seed  # deterministic core
    solver = _Cdcl(cnf.clauses, cnf.num_vars, on_learn=on_learn)
    result = solver.solve(budget or SolveBudget())
    if result.status == SAT and not check_model(cnf, result.model):
        raise RuntimeError("solver returned a model that fails the clause audit")
    return result


def solve_external(cnf: CnfFormula, command: str,
                   timeout: Optional[float] = None) -> SolveResult:
    """Run an external DIMACS solver and audit its answer.

    `command` is a shell template; `{cnf}` expands to the DIMACS path (it is
    appended when the placeholder is absent). Output is read in the SAT
    competition convention: an `s SATISFIABLE`/`s UNSATISFIABLE` line plus
    `v` literal lines, with exit codes 10/20 as fallback.
    """
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "problem.cnf"
        path.write_text(emit_dimacs(cnf))
        cmd = command.format(cnf=path) if "{cnf}" in command else f"{command} {path}"
        try:
            proc = subprocess.run(cmd, shell=True, capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            return SolveResult(TIMEOUT, None, SolveStats(wall_time=time.perf_counter() - t0))
    status = None
    lits: list[int] = []
    for line in proc.stdout.splitlines():
        if line.startswith("s "):
            word = line.split()[1].upper()
            if word == "SATISFIABLE":
                status = SAT
            elif word == "UNSATISFIABLE":
                status = UNSAT
        elif line.startswith("v "):
            lits.extend(int(t) for t in line.split()[1:])
    if status is None:
        status = {10: SAT, 20: UNSAT}.get(proc.returncode)
    if status is None:
        raise RuntimeError(f"external solver gave no verdict (exit {proc.returncode})")
    stats = SolveStats(wall_time=time.perf_counter() - t0)
    if status != SAT:
        return SolveResult(status, None, stats)
    model = [False] * (cnf.num_vars + 1)
    for lit in lits:
        if lit != 0 and abs(lit) <= cnf.num_vars:
            model[abs(lit)] = lit > 0
    if not check_model(cnf, model):
        raise RuntimeError("external solver model fails the clause audit")
    return SolveResult(SAT, model, stats)


def solve_dimacs(text: str, budget: Optional[SolveBudget] = None) -> SolveResult:
    return solve(parse_dimacs(text), budget)
