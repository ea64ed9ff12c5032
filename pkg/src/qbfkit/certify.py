"""Proof checking, strategy extraction, and certificate validation.

A search trace records steps from both sides of the game, and its footer
names the side that won; only the steps backward reachable from the
footer's root, the proof core, belong to the derivation. The checkers
validate exactly that core against the traditional calculi: resolution
over a single existential pivot on the clause side (universal on the cube
side), never producing a step with complementary literals, and reduction
steps whose removed literals all sit deeper than the rest of the step.
They rebuild every derived step from set operations alone and share no
derivation code with the search solver.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .formula import (
    EXISTS,
    FORALL,
    PCNF,
    QuantifierBlock,
    canonical_digest,
    is_tautology,
)
from .solver import SAT, UNKNOWN, UNSAT, solve_search
from .trace import REFUTATION, SATISFACTION, parse_trace, scan_trace

MALFORMED_REFERENCE = "malformed-reference"
PIVOT_VIOLATION = "pivot-violation"
TAUTOLOGICAL_RESOLVENT = "tautological-resolvent"
BAD_REDUCTION = "bad-reduction"
NON_EMPTY_ROOT = "non-empty-root"
INPUT_MISMATCH = "input-mismatch"
RESOLVENT_MISMATCH = "resolvent-mismatch"
CONTRADICTORY_CUBE = "contradictory-cube"

REASONS = (
    MALFORMED_REFERENCE,
    PIVOT_VIOLATION,
    TAUTOLOGICAL_RESOLVENT,
    BAD_REDUCTION,
    NON_EMPTY_ROOT,
    INPUT_MISMATCH,
    RESOLVENT_MISMATCH,
    CONTRADICTORY_CUBE,
)

HERBRAND = "herbrand"
SKOLEM = "skolem"

VALIDATED = "validated"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


class CertificateError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CheckReport:
    accepted: bool
    kind: str
    steps_checked: int
    reason: str = "none"
    step: int | None = None
    detail: str = ""
    retained_peak: int = 0


def _closure(ants: dict, root: int) -> set:
    seen: set[int] = set()
    todo = [root]
    while todo:
        sid = todo.pop()
        if sid not in seen:
            seen.add(sid)
            todo.extend(ants.get(sid, ()))
    return seen


def proof_core(steps, root: int) -> set:
    """Ids of the steps backward reachable from the root."""
    return _closure({s.id: s.antecedents for s in steps}, root)


def _run(
    f: PCNF, events, side: str, focus, refs=None, max_retained=None
) -> CheckReport:
    """Check the focus steps of an event stream; refs enables eviction."""
    clause_side = side == "clause"
    kind = REFUTATION if clause_side else SATISFACTION
    keep_quant = EXISTS if clause_side else FORALL
    if clause_side:
        matrix_sets = {frozenset(c) for c in f.matrix}
    else:
        targets = [frozenset(c) for c in f.matrix if not is_tautology(c)]
    live: dict[int, frozenset] = {}
    peak = 0
    checked = 0
    root = None

    def bad(reason, sid, detail=""):
        return CheckReport(False, kind, checked, reason, sid, detail, peak)

    for event in events:
        if event[0] == "f":
            root = event[2]
            break
        s = event[1]
        if s.id not in focus:
            continue
        lits = frozenset(s.literals)
        n = len(s.antecedents)
        if n == 0:
            if clause_side:
                if lits not in matrix_sets:
                    return bad(INPUT_MISMATCH, s.id, "no matching matrix clause")
            else:
                if any(-l in lits for l in lits):
                    return bad(CONTRADICTORY_CUBE, s.id, "complementary literals")
                for c in targets:
                    if not lits & c:
                        return bad(INPUT_MISMATCH, s.id, "cube misses a clause")
        elif n == 1:
            parent = live.get(s.antecedents[0])
            if parent is None:
                return bad(
                    MALFORMED_REFERENCE, s.id, f"unknown step {s.antecedents[0]}"
                )
            removed = parent - lits
            if not removed or not lits <= parent:
                return bad(BAD_REDUCTION, s.id, "not a strict subset of the parent")
            bar = max(
                (
                    f.level_of(abs(l))
                    for l in lits
                    if f.quant_of(abs(l)) == keep_quant
                ),
                default=0,
            )
            for l in removed:
                v = abs(l)
                if f.quant_of(v) == keep_quant:
                    return bad(BAD_REDUCTION, s.id, f"removed literal {l}")
                if f.level_of(v) <= bar:
                    return bad(
                        BAD_REDUCTION, s.id, f"literal {l} not deeper than the rest"
                    )
        elif n == 2:
            left = live.get(s.antecedents[0])
            right = live.get(s.antecedents[1])
            if left is None or right is None:
                return bad(MALFORMED_REFERENCE, s.id, "unknown antecedent")
            clash = {abs(l) for l in left if -l in right}
            if len(clash) != 1:
                return bad(PIVOT_VIOLATION, s.id, f"{len(clash)} clashing variables")
            (pivot,) = clash
            if clause_side != f.is_existential(pivot):
                return bad(PIVOT_VIOLATION, s.id, f"pivot {pivot} on the wrong side")
            if any(-l in lits for l in lits):
                return bad(
                    TAUTOLOGICAL_RESOLVENT if clause_side else CONTRADICTORY_CUBE,
                    s.id,
                    "complementary literals",
                )
            expected = {l for l in left | right if abs(l) != pivot}
            if lits != expected:
                return bad(RESOLVENT_MISMATCH, s.id, "declared literals differ")
        else:
            return bad(MALFORMED_REFERENCE, s.id, f"{n} antecedents")
        checked += 1
        if refs is not None:
            for a in s.antecedents:
                refs[a] -= 1
                if refs[a] == 0:
                    live.pop(a, None)
            if refs.get(s.id, 0) <= 0:
                continue
        live[s.id] = lits
        peak = max(peak, len(live))
        if max_retained is not None and len(live) > max_retained:
            raise MemoryError(f"more than {max_retained} retained steps")
    root_lits = live.get(root)
    if root_lits is None:
        return bad(MALFORMED_REFERENCE, root, "unknown root step")
    if root_lits:
        return bad(NON_EMPTY_ROOT, root, "root step still has literals")
    return CheckReport(True, kind, checked, retained_peak=peak)


def check_refutation(f: PCNF, steps, root: int) -> CheckReport:
    events = [("s", s) for s in steps]
    events.append(("f", REFUTATION, root))
    return _run(f, events, "clause", proof_core(steps, root))


def check_satisfaction(f: PCNF, steps, root: int) -> CheckReport:
    events = [("s", s) for s in steps]
    events.append(("f", SATISFACTION, root))
    return _run(f, events, "cube", proof_core(steps, root))


def check_trace(f: PCNF, text) -> CheckReport:
    """Parse a trace and check it against its footer kind."""
    steps, kind, root = parse_trace(text)
    if kind == REFUTATION:
        return check_refutation(f, steps, root)
    return check_satisfaction(f, steps, root)


def check_trace_streaming(f: PCNF, text, *, max_retained=None) -> CheckReport:
    """Two passes over the text, retaining only steps still referenced.

    The first pass keeps just the id skeleton: antecedent lists, the proof
    core, and a reference count per core step. The second checks the core
    steps and drops each one's literals once its last reference has been
    consumed. Exceeding max_retained live steps raises MemoryError.
    """
    ants: dict[int, tuple] = {}
    kind = None
    for event in scan_trace(text):
        if event[0] == "s":
            ants[event[1].id] = event[1].antecedents
        else:
            _, kind, root = event
    focus = _closure(ants, root)
    refs: Counter = Counter()
    for sid in focus:
        for a in ants.get(sid, ()):
            refs[a] += 1
    refs[root] += 1
    side = "clause" if kind == REFUTATION else "cube"
    return _run(
        f, scan_trace(text), side, focus, refs=refs, max_retained=max_retained
    )


class FunctionGraph:
    """Hash-consed graph of constants, inputs, negations, conjunctions."""

    def __init__(self):
        self.nodes: list[tuple] = []
        self._memo: dict[tuple, int] = {}

    def __len__(self):
        return len(self.nodes)

    def _intern(self, node) -> int:
        got = self._memo.get(node)
        if got is None:
            got = self._memo[node] = len(self.nodes)
            self.nodes.append(node)
        return got

    def constant(self, value) -> int:
        return self._intern(("const", 1 if value else 0))

    def input(self, var: int) -> int:
        if var <= 0:
            raise ValueError("input variables are positive")
        return self._intern(("input", var))

    def negation(self, node: int) -> int:
        kind = self.nodes[node]
        if kind[0] == "not":
            return kind[1]
        if kind[0] == "const":
            return self.constant(not kind[1])
        return self._intern(("not", node))

    def conjunction(self, a: int, b: int) -> int:
        for x, y in ((a, b), (b, a)):
            nx = self.nodes[x]
            if nx == ("const", 0):
                return x
            if nx == ("const", 1):
                return y
            if nx == ("not", y):
                return self.constant(False)
        if a == b:
            return a
        if a > b:
            a, b = b, a
        return self._intern(("and", a, b))

    def disjunction(self, a: int, b: int) -> int:
        return self.negation(self.conjunction(self.negation(a), self.negation(b)))

    def literal(self, lit: int) -> int:
        node = self.input(abs(lit))
        return node if lit > 0 else self.negation(node)

    def conjoin(self, nodes) -> int:
        out = self.constant(True)
        for n in nodes:
            out = self.conjunction(out, n)
        return out

    def disjoin(self, nodes) -> int:
        out = self.constant(False)
        for n in nodes:
            out = self.disjunction(out, n)
        return out

    def input_vars(self) -> list[int]:
        return sorted({n[1] for n in self.nodes if n[0] == "input"})

    def evaluate(self, env: dict[int, int], full: int) -> list[int]:
        """Mask value per node; env maps input variables to bit masks."""
        vals: list[int] = []
        for node in self.nodes:
            k = node[0]
            if k == "const":
                vals.append(full if node[1] else 0)
            elif k == "input":
                vals.append(env[node[1]] & full)
            elif k == "not":
                vals.append(full ^ vals[node[1]])
            else:
                vals.append(vals[node[1]] & vals[node[2]])
        return vals


@dataclass(frozen=True)
class Certificate:
    kind: str  # SKOLEM or HERBRAND
    digest: str  # hex digest of the certified formula
    graph: FunctionGraph
    roots: dict[int, int]  # variable -> node

    def __post_init__(self):
        if self.kind not in (SKOLEM, HERBRAND):
            raise ValueError(f"bad certificate kind {self.kind!r}")


def extract_certificate(f: PCNF, steps, kind: str, root: int, report=None):
    """Strategy functions from an accepted trace.

    A refutation yields herbrand functions for the universal variables, a
    satisfaction skolem functions for the existential ones. Each reduction
    step removing a literal contributes one condition under which its
    variable is set to falsify (herbrand) or satisfy (skolem) that
    literal; multi-literal reductions count as a chain removing the
    deepest literal first. A function may only read variables to the left
    of its own, with same-side occurrences replaced by the functions
    already built for them; variables never reduced stay constant false.
    """
    if report is None:
        check = check_refutation if kind == REFUTATION else check_satisfaction
        report = check(f, steps, root)
    if not report.accepted:
        raise CertificateError(f"trace rejected: {report.reason}")
    herbrand = kind == REFUTATION
    holder = FORALL if herbrand else EXISTS
    focus = proof_core(steps, root)
    by_id: dict[int, frozenset] = {}
    removals: dict[int, list] = {}
    for s in steps:
        if s.id not in focus:
            continue
        lits = frozenset(s.literals)
        if len(s.antecedents) == 1:
            rest = set(by_id[s.antecedents[0]])
            gone = sorted(rest - lits, key=lambda l: -f.level_of(abs(l)))
            for lit in gone:
                rest.discard(lit)
                removals.setdefault(abs(lit), []).append((lit, frozenset(rest)))
        by_id[s.id] = lits
    graph = FunctionGraph()
    roots: dict[int, int] = {}
    holders = [v for v in f.bound_vars() if f.quant_of(v) == holder]
    for v in sorted(holders, key=f.level_of):
        level = f.level_of(v)
        conds = []
        for lit, remainder in removals.get(v, ()):
            if (lit < 0) != herbrand:
                continue
            terms = []
            for m in sorted(remainder, key=abs):
                if f.level_of(abs(m)) >= level:
                    continue
                if f.quant_of(abs(m)) == holder:
                    node = roots[abs(m)]
                    node = node if m > 0 else graph.negation(node)
                else:
                    node = graph.literal(m)
                terms.append(graph.negation(node) if herbrand else node)
            conds.append(graph.conjoin(terms))
        roots[v] = graph.disjoin(conds)
    return Certificate(HERBRAND if herbrand else SKOLEM,
                       canonical_digest(f).hex(), graph, roots)


@dataclass(frozen=True)
class ValidationReport:
    status: str  # VALIDATED, REFUTED, or INCONCLUSIVE
    method: str  # "exhaustive" or "search"
    assignments: int = 0
    detail: str = ""


def _check_shape(f: PCNF, cert: Certificate, inputs):
    """Structural discipline: right side covered, only outer reads."""
    for v in f.bound_vars():
        if v not in inputs and v not in cert.roots:
            raise CertificateError(f"no function for variable {v}")
    allowed = set(inputs)
    deepest = []
    for node in cert.graph.nodes:
        k = node[0]
        if k == "const":
            deepest.append(0)
        elif k == "input":
            if node[1] not in allowed:
                raise CertificateError(f"function reads variable {node[1]}")
            deepest.append(f.level_of(node[1]))
        elif k == "not":
            deepest.append(deepest[node[1]])
        else:
            deepest.append(max(deepest[node[1]], deepest[node[2]]))
    for v, node in cert.roots.items():
        if deepest[node] >= f.level_of(v):
            raise CertificateError(f"function for {v} reads a deeper variable")


def _tseitin(graph: FunctionGraph, root: int):
    """CNF over variables node+1 asserting the root node true."""
    clauses = []
    for i, node in enumerate(graph.nodes):
        v = i + 1
        k = node[0]
        if k == "const":
            clauses.append((v,) if node[1] else (-v,))
        elif k == "not":
            c = node[1] + 1
            clauses.append((v, c))
            clauses.append((-v, -c))
        elif k == "and":
            a, b = node[1] + 1, node[2] + 1
            clauses.append((-v, a))
            clauses.append((-v, b))
            clauses.append((v, -a, -b))
    clauses.append((root + 1,))
    return clauses


def validate_certificate(
    f: PCNF, cert: Certificate, *, budget: int = 1 << 16, time_limit=None
):
    """Semantic check: herbrand functions must falsify the matrix under
    every assignment of the existential variables, skolem functions must
    satisfy it under every universal one.

    Assignment spaces up to ``budget`` are enumerated as bit masks in one
    sweep; larger ones become a single propositional query for the search
    solver, whose timeout yields an explicit inconclusive report.
    """
    if cert.digest != canonical_digest(f).hex():
        raise CertificateError("certificate digest does not match the formula")
    herbrand = cert.kind == HERBRAND
    free_quant = EXISTS if herbrand else FORALL
    inputs = sorted(v for v in f.bound_vars() if f.quant_of(v) == free_quant)
    _check_shape(f, cert, inputs)
    n = len(inputs)
    if (1 << n) <= budget:
        width = 1 << n
        full = (1 << width) - 1
        env = {}
        for i, v in enumerate(inputs):
            block = 1 << (1 << i)
            env[v] = (full // (block + 1)) * block
        vals = cert.graph.evaluate(env, full)

        def mask_of(l):
            v = abs(l)
            base = vals[cert.roots[v]] if v in cert.roots else env[v]
            return base if l > 0 else full ^ base

        m = full
        for clause in f.matrix:
            cm = 0
            for l in clause:
                cm |= mask_of(l)
            m &= cm
        good = m == 0 if herbrand else m == full
        bad_at = m if herbrand else full ^ m
        detail = "" if good else f"assignment {(bad_at & -bad_at).bit_length() - 1}"
        return ValidationReport(VALIDATED if good else REFUTED,
                                "exhaustive", width, detail)
    g = FunctionGraph()
    remap = []
    for node in cert.graph.nodes:
        k = node[0]
        if k == "const":
            remap.append(g.constant(node[1]))
        elif k == "input":
            remap.append(g.input(node[1]))
        elif k == "not":
            remap.append(g.negation(remap[node[1]]))
        else:
            remap.append(g.conjunction(remap[node[1]], remap[node[2]]))
    clause_nodes = []
    for clause in f.matrix:
        nodes = []
        for l in clause:
            v = abs(l)
            node = remap[cert.roots[v]] if v in cert.roots else g.input(v)
            nodes.append(node if l > 0 else g.negation(node))
        clause_nodes.append(g.disjoin(nodes))
    matrix_node = g.conjoin(clause_nodes)
    query = matrix_node if herbrand else g.negation(matrix_node)
    clauses = _tseitin(g, query)
    prefix = (QuantifierBlock(EXISTS, tuple(range(1, len(g) + 1))),)
    outcome = solve_search(PCNF(prefix, tuple(clauses)), time_limit=time_limit)
    if outcome.status == UNKNOWN:
        return ValidationReport(INCONCLUSIVE, "search",
                                detail=outcome.reason_for_unknown)
    witness = outcome.status == SAT
    return ValidationReport(REFUTED if witness else VALIDATED, "search")


def write_certificate(cert: Certificate) -> str:
    lines = [f"p cert {cert.kind} {cert.digest}"]
    for i, node in enumerate(cert.graph.nodes):
        lines.append("n %d %s" % (i, " ".join(str(x) for x in node)))
    for v in sorted(cert.roots):
        lines.append(f"r {v} {cert.roots[v]}")
    return "\n".join(lines) + "\n"


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise CertificateError(f"bad number {token!r}", lineno) from None


def parse_certificate(text) -> Certificate:
    """Parse the textual format: one header, node lines, then root lines."""
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    graph = FunctionGraph()
    roots: dict[int, int] = {}
    kind = digest = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if kind is not None:
                raise CertificateError("duplicate header", lineno)
            if len(parts) != 4 or parts[1] != "cert" or parts[2] not in (
                SKOLEM,
                HERBRAND,
            ):
                raise CertificateError(f"bad header {line!r}", lineno)
            kind, digest = parts[2], parts[3]
        elif parts[0] == "n":
            if kind is None or roots:
                raise CertificateError("misplaced node line", lineno)
            idx = _int(parts[1], lineno)
            if idx != len(graph.nodes):
                raise CertificateError(f"node id {idx} out of order", lineno)
            op = parts[2] if len(parts) > 2 else ""
            args = [_int(t, lineno) for t in parts[3:]]
            if op == "const" and args in ([0], [1]):
                node = ("const", args[0])
            elif op == "input" and len(args) == 1 and args[0] > 0:
                node = ("input", args[0])
            elif op == "not" and len(args) == 1 and 0 <= args[0] < idx:
                node = ("not", args[0])
            elif op == "and" and len(args) == 2 and all(
                0 <= a < idx for a in args
            ):
                node = ("and", args[0], args[1])
            else:
                raise CertificateError(f"bad node line {line!r}", lineno)
            graph.nodes.append(node)
            graph._memo.setdefault(node, idx)
        elif parts[0] == "r":
            if kind is None:
                raise CertificateError("root before header", lineno)
            if len(parts) != 3:
                raise CertificateError(f"bad root line {line!r}", lineno)
            v = _int(parts[1], lineno)
            node = _int(parts[2], lineno)
            if v <= 0 or not 0 <= node < len(graph.nodes) or v in roots:
                raise CertificateError(f"bad root line {line!r}", lineno)
            roots[v] = node
        else:
            raise CertificateError(f"bad line {line!r}", lineno)
    if kind is None:
        raise CertificateError("missing header")
    return Certificate(kind, digest, graph, roots)
