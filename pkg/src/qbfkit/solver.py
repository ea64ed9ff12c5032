"""Prefix-ordered search with clause and cube learning.

Propagation is deliberately conservative so that every learned object has
a derivation in traditional Q-resolution (clauses) or term resolution
(cubes), with no tautological resolvents and no contradictory cubes:

* clause unit rule: after static universal reduction, a clause propagates
  only when all literals but one are false and the remainder is an
  unassigned existential; it conflicts only when all reduced literals are
  false;
* cube unit rule, dually: a learned cube forces the negation of its single
  unassigned universal literal once every other literal is true;
* pure literals are assigned only when the variable sits in the leftmost
  block with unassigned variables, i.e. exactly when it could have been a
  decision, which keeps the trail prefix-ordered for every assignment that
  carries no reason.

Under these rules every literal of a clause in conflict analysis is false
on the trail and every literal of a cube in solution analysis is true, so
analysis needs resolution plus reduction only. Clause analysis stops at
existential decisions, cube analysis at universal decisions and universal
pures; everything deeper is resolved away.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from random import Random

from .formula import PCNF, is_tautology
from .trace import REFUTATION, SATISFACTION, TraceWriter

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

_DECISION = 0
_UNIT = 1
_CUBE = 2
_PURE = 3


class ResolutionError(ValueError):
    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


@dataclass(frozen=True)
class SolveOutcome:
    status: str
    wall_time: float
    reason_for_unknown: str = "none"

    def __post_init__(self):
        if self.status not in (SAT, UNSAT, UNKNOWN):
            raise ValueError(f"bad status {self.status!r}")
        if (self.reason_for_unknown != "none") != (self.status == UNKNOWN):
            raise ValueError("reason_for_unknown is for UNKNOWN results only")


def _canonical(lits):
    return tuple(sorted(lits, key=lambda l: (abs(l), l < 0)))


def universal_reduce(clause, f: PCNF):
    """Drop universal literals with no existential to their right."""
    if is_tautology(clause):
        raise ValueError("universal reduction of a tautological clause")
    max_e = 0
    for l in clause:
        if f.is_existential(abs(l)):
            max_e = max(max_e, f.level_of(abs(l)))
    return tuple(
        l for l in clause if f.is_existential(abs(l)) or f.level_of(abs(l)) < max_e
    )


def existential_reduce(cube, f: PCNF):
    """Drop existential literals with no universal to their right."""
    if is_tautology(cube):
        raise ValueError("existential reduction of a contradictory cube")
    max_u = 0
    for l in cube:
        if f.is_universal(abs(l)):
            max_u = max(max_u, f.level_of(abs(l)))
    return tuple(
        l for l in cube if f.is_universal(abs(l)) or f.level_of(abs(l)) < max_u
    )


def qresolve(c1, c2, pivot: int, f: PCNF):
    """Resolve two clauses on an existential pivot, then universally reduce.

    Tautological resolvents are illegal in the traditional calculus, so
    they raise instead of being returned.
    """
    if not f.is_existential(pivot):
        raise ResolutionError(f"pivot {pivot} is not existential", "universal-pivot")
    if pivot in c1 and -pivot in c2:
        pos, neg = c1, c2
    elif pivot in c2 and -pivot in c1:
        pos, neg = c2, c1
    else:
        raise ResolutionError(
            f"pivot {pivot} does not occur with both signs", "pivot-missing"
        )
    union = (set(pos) | set(neg)) - {pivot, -pivot}
    if any(-l in union for l in union):
        raise ResolutionError("tautological resolvent", "tautological-resolvent")
    return universal_reduce(_canonical(union), f)


def cube_resolve(q1, q2, pivot: int, f: PCNF):
    """Resolve two cubes on a universal pivot, then existentially reduce."""
    if not f.is_universal(pivot):
        raise ResolutionError(f"pivot {pivot} is not universal", "existential-pivot")
    if pivot in q1 and -pivot in q2:
        pos, neg = q1, q2
    elif pivot in q2 and -pivot in q1:
        pos, neg = q2, q1
    else:
        raise ResolutionError(
            f"pivot {pivot} does not occur with both signs", "pivot-missing"
        )
    union = (set(pos) | set(neg)) - {pivot, -pivot}
    if any(-l in union for l in union):
        raise ResolutionError("contradictory cube", "contradictory-cube")
    return existential_reduce(_canonical(union), f)


class _Limit(Exception):
    def __init__(self, reason: str):
        self.reason = reason


class _Clause:
    __slots__ = (
        "orig",
        "red",
        "learned",
        "input_step",
        "red_step",
        "derived_step",
        "n_true",
        "n_unassigned",
    )

    def __init__(self, orig, red, learned: bool):
        self.orig = orig
        self.red = red
        self.learned = learned
        self.input_step = None
        self.red_step = None
        self.derived_step = None
        self.n_true = 0
        self.n_unassigned = len(red)


class _Cube:
    __slots__ = ("lits", "derived_step", "n_false", "n_unassigned")

    def __init__(self, lits, derived_step):
        self.lits = lits
        self.derived_step = derived_step
        self.n_false = 0
        self.n_unassigned = len(lits)


class Solver:
    """Search state: trail, clause and cube databases, scores.

    The object doubles as the solver state for the propagate operation;
    `propagate` runs unit, cube and ripe-pure rules to fixpoint and reports
    'ok', 'conflict' or 'solution'.
    """

    def __init__(
        self,
        f: PCNF,
        *,
        seed: int = 0,
        time_limit: float | None = None,
        memory_limit: int | None = None,
        restarts: bool = False,
        restart_base: int = 64,
        restart_ratio: float = 1.5,
        check_every: int = 1024,
        trace=None,
    ):
        self.f = f
        self.time_limit = time_limit
        self.memory_limit = memory_limit
        self.restarts = restarts
        self.restart_base = restart_base
        self.restart_ratio = restart_ratio
        self.check_every = max(1, check_every)
        if trace is None or isinstance(trace, TraceWriter):
            self.trace = trace
        else:
            self.trace = TraceWriter(trace)

        self.value: dict[int, bool] = {}
        self.trail: list[tuple[int, int, int | None]] = []
        self.pos: dict[int, int] = {}

        self.blocks = [list(b.variables) for b in f.prefix]
        self.block_of = {
            v: i for i, b in enumerate(f.prefix) for v in b.variables
        }
        self.block_unassigned = [len(b) for b in self.blocks]

        self.clauses: list[_Clause] = []
        self.occ: dict[int, list[int]] = {}
        self.lit_count: dict[int, int] = {}
        self.matrix_ids: list[int] = []
        self.n_matrix_sat = 0
        for c in f.matrix:
            if is_tautology(c):
                continue
            red = universal_reduce(_canonical(set(c)), f)
            self._add_clause(c, red, learned=False)

        self.cubes: list[_Cube] = []
        self.cube_occ: dict[int, list[int]] = {}

        rng = Random(seed)
        self.activity = {
            v: rng.random() * 1e-9 for b in self.blocks for v in b
        }
        self.act_inc = 1.0

        self.n_conflicts = 0
        self.n_solutions = 0
        self.n_decisions = 0
        self.n_propagated = 0
        self.learned_clauses: list[tuple[int, ...]] = []
        self.learned_cubes: list[tuple[int, ...]] = []
        self._ops = 0
        self._deadline = None
        self._learned_lit_total = 0

    # ------------------------------------------------------------------
    # database

    def _add_clause(self, orig, red, learned: bool) -> int:
        ci = len(self.clauses)
        cl = _Clause(tuple(orig), tuple(red), learned)
        self.clauses.append(cl)
        for l in cl.red:
            self.occ.setdefault(l, []).append(ci)
            v = abs(l)
            if v in self.value:
                if self.value[v] == (l > 0):
                    cl.n_true += 1
                cl.n_unassigned -= 1
        if not learned:
            self.matrix_ids.append(ci)
            if cl.n_true:
                self.n_matrix_sat += 1
        if not cl.n_true:
            for l in cl.red:
                self.lit_count[l] = self.lit_count.get(l, 0) + 1
        return ci

    def _add_cube(self, lits, step) -> int:
        qi = len(self.cubes)
        cu = _Cube(tuple(lits), step)
        self.cubes.append(cu)
        for l in cu.lits:
            self.cube_occ.setdefault(l, []).append(qi)
            v = abs(l)
            if v in self.value:
                if self.value[v] != (l > 0):
                    cu.n_false += 1
                cu.n_unassigned -= 1
        return qi

    # ------------------------------------------------------------------
    # trail

    def _assign(self, lit: int, kind: int, reason: int | None):
        v = abs(lit)
        assert v not in self.value
        self.value[v] = lit > 0
        self.pos[v] = len(self.trail)
        self.trail.append((lit, kind, reason))
        self.block_unassigned[self.block_of[v]] -= 1
        self._ops += 1
        self.n_propagated += 1
        for ci in self.occ.get(lit, ()):
            cl = self.clauses[ci]
            cl.n_unassigned -= 1
            cl.n_true += 1
            if cl.n_true == 1:
                if not cl.learned:
                    self.n_matrix_sat += 1
                for m in cl.red:
                    self.lit_count[m] -= 1
        for ci in self.occ.get(-lit, ()):
            self.clauses[ci].n_unassigned -= 1
        for qi in self.cube_occ.get(lit, ()):
            self.cubes[qi].n_unassigned -= 1
        for qi in self.cube_occ.get(-lit, ()):
            cu = self.cubes[qi]
            cu.n_unassigned -= 1
            cu.n_false += 1

    def _unassign(self):
        lit, _kind, _reason = self.trail.pop()
        v = abs(lit)
        del self.value[v]
        del self.pos[v]
        self.block_unassigned[self.block_of[v]] += 1
        for ci in self.occ.get(lit, ()):
            cl = self.clauses[ci]
            cl.n_unassigned += 1
            cl.n_true -= 1
            if cl.n_true == 0:
                if not cl.learned:
                    self.n_matrix_sat -= 1
                for m in cl.red:
                    self.lit_count[m] += 1
        for ci in self.occ.get(-lit, ()):
            self.clauses[ci].n_unassigned += 1
        for qi in self.cube_occ.get(lit, ()):
            self.cubes[qi].n_unassigned += 1
        for qi in self.cube_occ.get(-lit, ()):
            cu = self.cubes[qi]
            cu.n_unassigned += 1
            cu.n_false -= 1

    def _backtrack(self, target_len: int):
        while len(self.trail) > target_len:
            self._unassign()

    def _leftmost_incomplete(self) -> int | None:
        for i, n in enumerate(self.block_unassigned):
            if n:
                return i
        return None

    # ------------------------------------------------------------------
    # limits

    def _check_limits(self):
        if self._ops < self.check_every:
            return
        self._ops = 0
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise _Limit("timeout")
        if self.memory_limit is not None:
            est = self._learned_lit_total * 64
            if self.trace is not None:
                est += self.trace.bytes_written
            if est > self.memory_limit:
                raise _Limit("memout")

    # ------------------------------------------------------------------
    # propagation

    def propagate(self):
        """Run unit, cube and ripe-pure rules to fixpoint.

        Returns ('conflict', clause_index), ('solution', ('cube', cube_index)),
        ('solution', ('matrix', None)) or ('ok', None).
        """
        while True:
            self._check_limits()
            for ci, cl in enumerate(self.clauses):
                if cl.n_true == 0 and cl.n_unassigned == 0:
                    return ("conflict", ci)
            progress = False
            for ci, cl in enumerate(self.clauses):
                if cl.n_true == 0 and cl.n_unassigned == 1:
                    unit = next(l for l in cl.red if abs(l) not in self.value)
                    if self.f.is_existential(abs(unit)):
                        self._assign(unit, _UNIT, ci)
                        progress = True
                        break
            if progress:
                continue
            for qi, cu in enumerate(self.cubes):
                if cu.n_false == 0 and cu.n_unassigned == 0:
                    return ("solution", ("cube", qi))
            for qi, cu in enumerate(self.cubes):
                if cu.n_false == 0 and cu.n_unassigned == 1:
                    unit = next(l for l in cu.lits if abs(l) not in self.value)
                    if self.f.is_universal(abs(unit)):
                        self._assign(-unit, _CUBE, qi)
                        progress = True
                        break
            if progress:
                continue
            if self.n_matrix_sat == len(self.matrix_ids):
                return ("solution", ("matrix", None))
            bi = self._leftmost_incomplete()
            if bi is not None:
                for v in self.blocks[bi]:
                    if v in self.value:
                        continue
                    n_pos = self.lit_count.get(v, 0)
                    n_neg = self.lit_count.get(-v, 0)
                    if n_pos == 0 and n_neg == 0:
                        continue
                    existential = self.f.is_existential(v)
                    if n_neg == 0:
                        lit = v if existential else -v
                    elif n_pos == 0:
                        lit = -v if existential else v
                    else:
                        continue
                    self._assign(lit, _PURE, None)
                    progress = True
                    break
            if not progress:
                return ("ok", None)

    # ------------------------------------------------------------------
    # trace plumbing

    def _clause_step(self, ci: int) -> int | None:
        if self.trace is None:
            return None
        cl = self.clauses[ci]
        if cl.derived_step is not None:
            return cl.derived_step
        if cl.input_step is None:
            cl.input_step = self.trace.input_step(cl.orig)
        if tuple(_canonical(set(cl.orig))) != cl.red and cl.red_step is None:
            cl.red_step = self.trace.reduction(cl.input_step, cl.red)
        return cl.red_step if cl.red_step is not None else cl.input_step

    # ------------------------------------------------------------------
    # conflict analysis

    def _ureduce_set(self, lits: set[int]):
        max_e = 0
        for l in lits:
            if self.f.is_existential(abs(l)):
                max_e = max(max_e, self.f.level_of(abs(l)))
        removed = {
            l
            for l in lits
            if self.f.is_universal(abs(l)) and self.f.level_of(abs(l)) >= max_e
        }
        return lits - removed, removed

    def _ereduce_set(self, lits: set[int]):
        max_u = 0
        for l in lits:
            if self.f.is_universal(abs(l)):
                max_u = max(max_u, self.f.level_of(abs(l)))
        removed = {
            l
            for l in lits
            if self.f.is_existential(abs(l)) and self.f.level_of(abs(l)) >= max_u
        }
        return lits - removed, removed

    def _analyze_conflict(self, ci: int):
        """Regress a falsified clause to an asserting one.

        Returns (literals, trace_step, stop_trail_pos); stop_trail_pos is
        None when the empty clause was derived.
        """
        work = set(self.clauses[ci].red)
        step = self._clause_step(ci)
        guard = 0
        while True:
            guard += 1
            assert guard < 1000000, "conflict analysis does not terminate"
            if not work:
                return work, step, None
            assert all(
                self.value[abs(l)] != (l > 0) for l in work
            ), "conflict clause literal not false"
            deepest = max(self.pos[abs(l)] for l in work)
            lit, kind, reason = self.trail[deepest]
            assert -lit in work
            v = abs(lit)
            if self.f.is_existential(v):
                if kind == _DECISION:
                    return work, step, deepest
                assert kind == _UNIT, "pure existential in a conflict clause"
                work, step = self._resolve_out(work, step, lit, reason)
            else:
                level = self.f.level_of(v)
                blockers = [
                    l
                    for l in work
                    if self.f.is_existential(abs(l))
                    and self.f.level_of(abs(l)) >= level
                ]
                if blockers:
                    b = max(blockers, key=lambda l: self.pos[abs(l)])
                    _blit, bkind, breason = self.trail[self.pos[abs(b)]]
                    assert bkind == _UNIT, "blocking existential has no clause reason"
                    work, step = self._resolve_out(work, step, -b, breason)
                else:
                    work, removed = self._ureduce_set(work)
                    assert -lit in removed
                    if self.trace is not None:
                        step = self.trace.reduction(step, work)

    def _resolve_out(self, work: set[int], step, lit: int, reason_ci: int):
        """Replace -lit in work by the reason clause of lit, then reduce."""
        red = self.clauses[reason_ci].red
        union = (work | set(red)) - {lit, -lit}
        assert not any(-l in union for l in union), "tautological resolvent"
        if self.trace is not None:
            rstep = self._clause_step(reason_ci)
            step = self.trace.resolution(step, rstep, union)
        union, removed = self._ureduce_set(union)
        if removed and self.trace is not None:
            step = self.trace.reduction(step, union)
        return union, step

    # ------------------------------------------------------------------
    # solution analysis

    def _implicant(self):
        lits = {}
        for ci in self.matrix_ids:
            cl = self.clauses[ci]
            best = None
            for l in cl.red:
                v = abs(l)
                if v in self.value and self.value[v] == (l > 0):
                    if best is None or self.pos[v] < self.pos[abs(best)]:
                        best = l
            assert best is not None, "implicant from an unsatisfied clause"
            lits[best] = True
        return set(lits)

    def _analyze_solution(self, origin):
        """Regress a solution cube to an asserting one; mirrors conflicts."""
        tag, qi = origin
        if tag == "cube":
            work = set(self.cubes[qi].lits)
            step = self.cubes[qi].derived_step
        else:
            work = self._implicant()
            step = self.trace.input_step(work) if self.trace is not None else None
            work, removed = self._ereduce_set(work)
            if removed and self.trace is not None:
                step = self.trace.reduction(step, work)
        guard = 0
        while True:
            guard += 1
            assert guard < 1000000, "solution analysis does not terminate"
            if not work:
                return work, step, None
            assert all(
                self.value[abs(l)] == (l > 0) for l in work
            ), "solution cube literal not true"
            deepest = max(self.pos[abs(l)] for l in work)
            lit, kind, reason = self.trail[deepest]
            assert lit in work
            v = abs(lit)
            if self.f.is_universal(v):
                if kind in (_DECISION, _PURE):
                    return work, step, deepest
                assert kind == _CUBE
                work, step = self._cube_resolve_out(work, step, lit, reason)
            else:
                level = self.f.level_of(v)
                blockers = [
                    l
                    for l in work
                    if self.f.is_universal(abs(l))
                    and self.f.level_of(abs(l)) >= level
                ]
                if blockers:
                    b = max(blockers, key=lambda l: self.pos[abs(l)])
                    _blit, bkind, breason = self.trail[self.pos[abs(b)]]
                    assert bkind == _CUBE, "blocking universal has no cube reason"
                    work, step = self._cube_resolve_out(work, step, -b, breason)
                else:
                    work, removed = self._ereduce_set(work)
                    assert lit in removed
                    if self.trace is not None:
                        step = self.trace.reduction(step, work)

    def _cube_resolve_out(self, work: set[int], step, lit: int, reason_qi: int):
        """Replace -lit in work by the reason cube of lit, then reduce.

        The trail literal lit was forced as the negation of the reason
        cube's pending universal, so the reason contains -lit.
        """
        cu = self.cubes[reason_qi]
        union = (work | set(cu.lits)) - {lit, -lit}
        assert not any(-l in union for l in union), "contradictory cube"
        if self.trace is not None:
            step = self.trace.resolution(step, cu.derived_step, union)
        union, removed = self._ereduce_set(union)
        if removed and self.trace is not None:
            step = self.trace.reduction(step, union)
        return union, step

    # ------------------------------------------------------------------
    # heuristics

    def _bump(self, lits):
        for l in lits:
            v = abs(l)
            self.activity[v] = self.activity.get(v, 0.0) + self.act_inc
        self.act_inc /= 0.95
        if self.act_inc > 1e100:
            for v in self.activity:
                self.activity[v] *= 1e-100
            self.act_inc *= 1e-100

    def _decide(self):
        bi = self._leftmost_incomplete()
        assert bi is not None
        block = self.blocks[bi]
        v = max(
            (u for u in block if u not in self.value),
            key=lambda u: (self.activity[u], -u),
        )
        n_pos = self.lit_count.get(v, 0)
        n_neg = self.lit_count.get(-v, 0)
        if self.f.is_existential(v):
            lit = v if n_pos >= n_neg else -v
        else:
            lit = -v if n_pos >= n_neg else v
        self.n_decisions += 1
        self._assign(lit, _DECISION, None)

    # ------------------------------------------------------------------
    # main loop

    def run(self) -> SolveOutcome:
        start = time.monotonic()
        if self.time_limit is not None:
            self._deadline = start + self.time_limit
        try:
            status = self._search()
            return SolveOutcome(status, time.monotonic() - start)
        except _Limit as lim:
            return SolveOutcome(UNKNOWN, time.monotonic() - start, lim.reason)

    def _search(self) -> str:
        conflict_budget = self.restart_base
        since_restart = 0
        while True:
            verdict, detail = self.propagate()
            if verdict == "ok":
                self._decide()
                continue
            if verdict == "conflict":
                self.n_conflicts += 1
                since_restart += 1
                work, step, stop = self._analyze_conflict(detail)
                if stop is None:
                    if self.trace is not None:
                        self.trace.footer(REFUTATION, step)
                    return UNSAT
                lits = _canonical(work)
                self.learned_clauses.append(lits)
                self._bump(lits)
                self._learned_lit_total += len(lits)
                flip_lit, _, _ = self.trail[stop]
                self._backtrack(stop)
                ci = self._add_clause(lits, lits, learned=True)
                self.clauses[ci].derived_step = step
                if self.restarts and since_restart >= conflict_budget:
                    since_restart = 0
                    conflict_budget = int(conflict_budget * self.restart_ratio) + 1
                    self._backtrack(0)
                    continue
                self._assign(-flip_lit, _UNIT, ci)
                continue
            self.n_solutions += 1
            work, step, stop = self._analyze_solution(detail)
            if stop is None:
                if self.trace is not None:
                    self.trace.footer(SATISFACTION, step)
                return SAT
            lits = _canonical(work)
            self.learned_cubes.append(lits)
            self._bump(lits)
            self._learned_lit_total += len(lits)
            flip_lit, _, _ = self.trail[stop]
            self._backtrack(stop)
            qi = self._add_cube(lits, step)
            self._assign(-flip_lit, _CUBE, qi)


def solve_search(
    f: PCNF,
    *,
    seed: int = 0,
    time_limit: float | None = None,
    memory_limit: int | None = None,
    restarts: bool = False,
    check_every: int = 1024,
    trace=None,
) -> SolveOutcome:
    """Solve by prefix-ordered search with learning; see Solver."""
    return Solver(
        f,
        seed=seed,
        time_limit=time_limit,
        memory_limit=memory_limit,
        restarts=restarts,
        check_every=check_every,
        trace=trace,
    ).run()
