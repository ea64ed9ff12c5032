"""Solving by expansion of universal variables.

The innermost universal block is expanded variable by variable: the matrix
is split into the u=true and u=false cofactors and every existential bound
to the right of the block is duplicated in the false copy. Variables of
the same block are not duplicated, both copies of the block see the same
remaining siblings, which is sound because sibling order inside a block is
irrelevant. Once the prefix is purely existential the residue goes to a
small clause-counting DPLL.
"""

from __future__ import annotations

import time

from .formula import FORALL, PCNF, QuantifierBlock, is_tautology
from .solver import SAT, UNSAT, UNKNOWN, SolveOutcome


def _assign_clause(clause, var: int, value: bool):
    """Cofactor a clause; None means satisfied."""
    out = []
    for l in clause:
        if abs(l) == var:
            if (l > 0) == value:
                return None
            continue
        out.append(l)
    return tuple(out)


def expand_universal(f: PCNF, var: int) -> PCNF:
    """Expand one variable of the innermost universal block."""
    if not f.prefix or f.prefix[-1].quantifier == FORALL:
        inner = len(f.prefix) - 1
    else:
        inner = len(f.prefix) - 2
    if inner < 0 or f.prefix[inner].quantifier != FORALL:
        raise ValueError("no universal block to expand")
    if var not in f.prefix[inner].variables:
        raise ValueError(f"variable {var} is not in the innermost universal block")

    rename_vars = [
        v
        for b in f.prefix[inner + 1 :]
        for v in b.variables
    ]
    next_var = f.max_var + 1
    renaming = {}
    for v in rename_vars:
        renaming[v] = next_var
        next_var += 1

    def rename(l: int) -> int:
        v = renaming.get(abs(l), abs(l))
        return v if l > 0 else -v

    matrix = []
    for c in f.matrix:
        t = _assign_clause(c, var, True)
        if t is not None:
            matrix.append(t)
        ff = _assign_clause(c, var, False)
        if ff is not None:
            matrix.append(tuple(rename(l) for l in ff))

    prefix = []
    for i, b in enumerate(f.prefix):
        if i == inner:
            rest = tuple(v for v in b.variables if v != var)
            if rest:
                prefix.append(QuantifierBlock(FORALL, rest))
        elif i > inner:
            both = tuple(b.variables) + tuple(renaming[v] for v in b.variables)
            prefix.append(QuantifierBlock(b.quantifier, both))
        else:
            prefix.append(b)
    return PCNF(tuple(prefix), tuple(matrix), max_var=next_var - 1)


def _cofactor(clauses, var: int, value: bool):
    out = []
    for c in clauses:
        r = _assign_clause(c, var, value)
        if r is not None:
            out.append(r)
    return out


def _dpll(clauses) -> bool:
    """Satisfiability of a purely existential residue, explicit stack."""
    stack = [[c for c in clauses if not is_tautology(c)]]
    while stack:
        cur = stack.pop()
        falsified = False
        while not falsified:
            unit = None
            for c in cur:
                if not c:
                    falsified = True
                    break
                if len(c) == 1:
                    unit = c[0]
                    break
            if falsified or unit is None:
                break
            cur = _cofactor(cur, abs(unit), unit > 0)
        if falsified:
            continue
        if not cur:
            return True
        v = min(abs(l) for c in cur for l in c)
        stack.append(_cofactor(cur, v, False))
        stack.append(_cofactor(cur, v, True))
    return False


def solve_expansion(
    f: PCNF,
    *,
    memory_limit: int = 10_000_000,
    time_limit: float | None = None,
) -> SolveOutcome:
    """Expand all universal blocks, then decide the existential residue.

    memory_limit bounds the total literal count of the working matrix;
    exceeding it yields UNKNOWN with reason memout.
    """
    start = time.monotonic()
    g = f
    while any(b.quantifier == FORALL for b in g.prefix):
        if time_limit is not None and time.monotonic() - start > time_limit:
            return SolveOutcome(UNKNOWN, time.monotonic() - start, "timeout")
        inner = len(g.prefix) - 1
        while g.prefix[inner].quantifier != FORALL:
            inner -= 1
        var = g.prefix[inner].variables[0]
        g = expand_universal(g, var)
        if sum(len(c) for c in g.matrix) > memory_limit:
            return SolveOutcome(UNKNOWN, time.monotonic() - start, "memout")
    status = SAT if _dpll(g.matrix) else UNSAT
    return SolveOutcome(status, time.monotonic() - start)
