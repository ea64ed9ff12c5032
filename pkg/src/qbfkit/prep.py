"""Preprocessing techniques, bundles of techniques, and the bundle loop.

Every successful rewrite strictly decreases the measure

    (occurring universal variables, occurring variables,
     clauses plus literals, bound variables)

in lexicographic order, which bounds every bundle loop: assignments drop a
variable, reductions drop literals, subsumption and blocked clauses drop
clauses, variable elimination drops an existential, and expansion drops a
universal while it may grow the matrix.

Tautological clauses are never produced, and existing ones are left alone
except where removing them is sound as a side effect of an assignment.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
import time

from .formula import EXISTS, FORALL, PCNF, QuantifierBlock, is_tautology, var_of
from .expansion import expand_universal
from .solver import universal_reduce

SAT = "SAT"
UNSAT = "UNSAT"

TECHNIQUES = (
    "unit",
    "pure",
    "universal_reduction",
    "subsumption",
    "blocked_clause_elim",
    "var_elim",
    "universal_expansion",
)


@dataclass(frozen=True)
class Bundle:
    name: str
    techniques: tuple[str, ...]
    once: bool = False

    def __post_init__(self):
        for t in self.techniques:
            if t not in TECHNIQUES:
                raise ValueError(f"unknown technique {t!r}")


DEFAULT_BUNDLES = {
    "A": Bundle("A", ("universal_reduction", "subsumption")),
    "B": Bundle(
        "B",
        (
            "unit",
            "pure",
            "universal_reduction",
            "subsumption",
            "blocked_clause_elim",
            "var_elim",
            "universal_expansion",
        ),
    ),
    "C": Bundle(
        "C",
        (
            "unit",
            "pure",
            "universal_reduction",
            "universal_expansion",
            "var_elim",
            "subsumption",
        ),
    ),
    "D": Bundle(
        "D",
        ("unit", "pure", "universal_reduction", "subsumption", "var_elim"),
    ),
}


@dataclass(frozen=True)
class PrepResult:
    formula: PCNF
    status: str | None
    log: tuple[tuple[str, int], ...]
    passes: int
    limited: bool = False


def measure(f: PCNF):
    """Termination measure; every rewrite decreases it lexicographically."""
    occurring = {var_of(l) for c in f.matrix for l in c}
    universal = sum(1 for v in occurring if f.is_universal(v))
    bound = sum(len(b.variables) for b in f.prefix)
    return (
        universal,
        len(occurring),
        len(f.matrix) + sum(len(c) for c in f.matrix),
        bound,
    )


def formula_status(f: PCNF) -> str | None:
    """SAT on an empty matrix, UNSAT on an empty clause, else None."""
    if any(not c for c in f.matrix):
        return UNSAT
    if not f.matrix:
        return SAT
    return None


def _drop_prefix_vars(prefix, gone):
    out = []
    for b in prefix:
        rest = tuple(v for v in b.variables if v not in gone)
        if rest:
            out.append(QuantifierBlock(b.quantifier, rest))
    return tuple(out)


def _assign_literal(f: PCNF, lit: int) -> PCNF:
    """Substitute lit=true: drop satisfied clauses, shorten the rest."""
    matrix = []
    for c in f.matrix:
        if lit in c:
            continue
        if -lit in c:
            matrix.append(tuple(l for l in c if l != -lit))
        else:
            matrix.append(c)
    prefix = _drop_prefix_vars(f.prefix, {var_of(lit)})
    return PCNF(prefix, tuple(matrix), max_var=f.max_var)


def _unit(f: PCNF):
    count = 0
    while True:
        unit = None
        for c in f.matrix:
            if len(c) == 1:
                unit = c[0]
                break
        if unit is None:
            return f, count
        count += 1
        if f.is_universal(var_of(unit)):
            matrix = tuple(() if c == (unit,) else c for c in f.matrix)
            return PCNF(f.prefix, matrix, max_var=f.max_var), count
        f = _assign_literal(f, unit)
        if formula_status(f) is not None:
            return f, count


def _pure(f: PCNF):
    count = 0
    while True:
        seen = Counter(l for c in f.matrix for l in set(c))
        pick = None
        for b in f.prefix:
            for v in b.variables:
                n_pos, n_neg = seen[v], seen[-v]
                if n_pos == 0 and n_neg == 0:
                    continue
                if n_neg == 0:
                    pick = v if b.quantifier == EXISTS else -v
                elif n_pos == 0:
                    pick = -v if b.quantifier == EXISTS else v
                if pick is not None:
                    break
            if pick is not None:
                break
        if pick is None:
            return f, count
        count += 1
        f = _assign_literal(f, pick)
        if formula_status(f) is not None:
            return f, count


def _universal_reduction(f: PCNF):
    count = 0
    matrix = []
    for c in f.matrix:
        if is_tautology(c):
            matrix.append(c)
            continue
        red = universal_reduce(c, f)
        if red != c:
            count += 1
        matrix.append(red)
    if not count:
        return f, 0
    return PCNF(f.prefix, tuple(matrix), max_var=f.max_var), count


def _subsumption(f: PCNF):
    order = sorted(range(len(f.matrix)), key=lambda i: (len(set(f.matrix[i])), i))
    kept_sets: list[frozenset] = []
    dropped = set()
    for i in order:
        s = frozenset(f.matrix[i])
        if any(k <= s for k in kept_sets):
            dropped.add(i)
        else:
            kept_sets.append(s)
    if not dropped:
        return f, 0
    matrix = tuple(c for i, c in enumerate(f.matrix) if i not in dropped)
    return PCNF(f.prefix, matrix, max_var=f.max_var), len(dropped)


def _blocked(f: PCNF, ci: int) -> bool:
    c = f.matrix[ci]
    cset = set(c)
    for l in sorted(cset, key=lambda l: (var_of(l), l < 0)):
        if not f.is_existential(var_of(l)):
            continue
        level = f.level_of(var_of(l))
        blocked = True
        for di, d in enumerate(f.matrix):
            if di == ci or -l not in d:
                continue
            resolvent = (cset | set(d)) - {l, -l}
            if not any(
                -m in resolvent and f.level_of(var_of(m)) <= level
                for m in resolvent
            ):
                blocked = False
                break
        if blocked:
            return True
    return False


def _blocked_clause_elim(f: PCNF):
    count = 0
    changed = True
    while changed:
        changed = False
        for ci, c in enumerate(f.matrix):
            if is_tautology(c):
                continue
            if _blocked(f, ci):
                matrix = f.matrix[:ci] + f.matrix[ci + 1 :]
                f = PCNF(f.prefix, matrix, max_var=f.max_var)
                count += 1
                changed = True
                break
    return f, count


def _var_elim(f: PCNF, budget: int):
    count = 0
    changed = True
    while changed:
        changed = False
        for v in sorted(v for b in f.prefix if b.quantifier == EXISTS
                        for v in b.variables):
            level = f.level_of(v)
            occ = [i for i, c in enumerate(f.matrix) if v in c or -v in c]
            if any(is_tautology(f.matrix[i]) for i in occ):
                continue
            if any(
                f.level_of(var_of(l)) > level
                for i in occ
                for l in f.matrix[i]
            ):
                continue
            pos = [i for i in occ if v in f.matrix[i]]
            neg = [i for i in occ if -v in f.matrix[i]]
            resolvents = []
            seen = set()
            ok = True
            for i in pos:
                for j in neg:
                    r = (set(f.matrix[i]) | set(f.matrix[j])) - {v, -v}
                    if any(-l in r for l in r):
                        continue
                    red = universal_reduce(
                        tuple(sorted(r, key=lambda l: (var_of(l), l < 0))), f
                    )
                    key = frozenset(red)
                    if key in seen:
                        continue
                    seen.add(key)
                    resolvents.append(red)
                    if len(resolvents) > len(occ) + budget:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            occ_set = set(occ)
            matrix = tuple(
                c for i, c in enumerate(f.matrix) if i not in occ_set
            ) + tuple(resolvents)
            prefix = _drop_prefix_vars(f.prefix, {v})
            f = PCNF(prefix, matrix, max_var=f.max_var)
            count += 1
            changed = True
            break
    return f, count


def _universal_expansion(f: PCNF, budget: int | None):
    count = 0
    start = len(f.matrix)
    if budget is None:
        budget = start
    while True:
        inner = None
        for i in range(len(f.prefix) - 1, -1, -1):
            if f.prefix[i].quantifier == FORALL:
                inner = i
                break
        if inner is None:
            return f, count
        u = min(f.prefix[inner].variables)
        occurs = any(u in map(var_of, c) for c in f.matrix)
        if not occurs:
            prefix = _drop_prefix_vars(f.prefix, {u})
            f = PCNF(prefix, f.matrix, max_var=f.max_var)
            count += 1
            continue
        g = expand_universal(f, u)
        if len(g.matrix) > start + budget:
            return f, count
        f = g
        count += 1


def apply_technique(
    f: PCNF,
    name: str,
    *,
    var_elim_budget: int = 0,
    expansion_budget: int | None = None,
):
    """Run one technique to its own fixpoint; returns (formula, rewrites)."""
    if name == "unit":
        return _unit(f)
    if name == "pure":
        return _pure(f)
    if name == "universal_reduction":
        return _universal_reduction(f)
    if name == "subsumption":
        return _subsumption(f)
    if name == "blocked_clause_elim":
        return _blocked_clause_elim(f)
    if name == "var_elim":
        return _var_elim(f, var_elim_budget)
    if name == "universal_expansion":
        return _universal_expansion(f, expansion_budget)
    raise ValueError(f"unknown technique {name!r}")


def preprocess(
    f: PCNF,
    bundle: Bundle | str = "B",
    *,
    limit: float | None = None,
    var_elim_budget: int = 0,
    expansion_budget: int | None = None,
) -> PrepResult:
    """Apply a bundle until fixpoint (or one pass for a once bundle).

    The wall-clock limit is checked between techniques; when it fires the
    best formula so far is returned with limited=True. A formula whose
    status becomes obvious (empty matrix, empty clause) stops the loop.
    """
    if isinstance(bundle, str):
        bundle = DEFAULT_BUNDLES[bundle]
    deadline = None if limit is None else time.monotonic() + limit
    log: list[tuple[str, int]] = []
    passes = 0

    status = formula_status(f)
    if status is not None:
        return PrepResult(f, status, (), 0)

    while True:
        changed = False
        for tech in bundle.techniques:
            if deadline is not None and time.monotonic() > deadline:
                return PrepResult(f, None, tuple(log), passes, limited=True)
            f2, n = apply_technique(
                f,
                tech,
                var_elim_budget=var_elim_budget,
                expansion_budget=expansion_budget,
            )
            if n:
                log.append((tech, n))
                changed = True
                f = f2
                status = formula_status(f)
                if status is not None:
                    return PrepResult(f, status, tuple(log), passes + 1)
        passes += 1
        if bundle.once or not changed:
            return PrepResult(f, None, tuple(log), passes)


def parse_bundles(text) -> dict[str, Bundle]:
    """Parse a bundle configuration.

    One bundle per line: ``LABEL = technique[,technique...] [once]``.
    Blank lines and lines starting with # are skipped.
    """
    if isinstance(text, bytes):
        text = text.decode()
    bundles: dict[str, Bundle] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, eq, rhs = line.partition("=")
        name = name.strip()
        if not eq or not name or " " in name:
            raise ValueError(f"line {lineno}: expected 'LABEL = techniques'")
        if name in bundles:
            raise ValueError(f"line {lineno}: duplicate bundle {name!r}")
        tokens = rhs.split()
        once = False
        if tokens and tokens[-1] == "once":
            once = True
            tokens = tokens[:-1]
        techs = tuple(
            t for t in (s.strip() for s in " ".join(tokens).split(",")) if t
        )
        if not techs:
            raise ValueError(f"line {lineno}: bundle {name!r} has no techniques")
        for t in techs:
            if t not in TECHNIQUES:
                raise ValueError(f"line {lineno}: unknown technique {t!r}")
        bundles[name] = Bundle(name, techs, once)
    return bundles
