"""Prenex CNF formulas: QDIMACS parsing, canonical digests, statistics.

Literals follow the DIMACS convention: a literal is a nonzero signed int,
its variable is abs(lit), negation is -lit. Clauses are tuples of literals.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

EXISTS = "e"
FORALL = "a"


class QdimacsError(ValueError):
    """Format violation; carries the 1-based input line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def var_of(lit: int) -> int:
    return abs(lit)


@dataclass(frozen=True)
class QuantifierBlock:
    quantifier: str  # EXISTS or FORALL
    variables: tuple[int, ...]

    def __post_init__(self):
        if self.quantifier not in (EXISTS, FORALL):
            raise ValueError(f"bad quantifier {self.quantifier!r}")
        if not self.variables:
            raise ValueError("empty quantifier block")
        if any(v <= 0 for v in self.variables):
            raise ValueError("variable ids must be positive")


@dataclass(frozen=True)
class PCNF:
    """Quantifier prefix plus clause matrix.

    Construction merges adjacent blocks with the same quantifier (so block
    levels are well defined and alternate) and checks that every literal's
    variable is bound and no variable is bound twice. Prefix variables with
    zero matrix occurrences are legal and kept.
    """

    prefix: tuple[QuantifierBlock, ...]
    matrix: tuple[tuple[int, ...], ...]
    max_var: int = 0

    def __post_init__(self):
        merged: list[QuantifierBlock] = []
        for block in self.prefix:
            if merged and merged[-1].quantifier == block.quantifier:
                merged[-1] = QuantifierBlock(
                    block.quantifier, merged[-1].variables + block.variables
                )
            else:
                merged.append(block)
        object.__setattr__(self, "prefix", tuple(merged))
        object.__setattr__(self, "matrix", tuple(tuple(c) for c in self.matrix))
        seen: set[int] = set()
        top = 0
        for block in self.prefix:
            for v in block.variables:
                if v in seen:
                    raise ValueError(f"variable {v} bound twice")
                seen.add(v)
                top = max(top, v)
        for clause in self.matrix:
            for lit in clause:
                if lit == 0:
                    raise ValueError("literal 0 in clause")
                if abs(lit) not in seen:
                    raise ValueError(f"unbound variable {abs(lit)}")
                top = max(top, abs(lit))
        object.__setattr__(self, "max_var", max(self.max_var, top))

    @cached_property
    def _var_info(self) -> dict[int, tuple[int, str]]:
        info = {}
        for level, block in enumerate(self.prefix, start=1):
            for v in block.variables:
                info[v] = (level, block.quantifier)
        return info

    def level_of(self, v: int) -> int:
        return self._var_info[v][0]

    def quant_of(self, v: int) -> str:
        return self._var_info[v][1]

    def is_existential(self, v: int) -> bool:
        return self._var_info[v][1] == EXISTS

    def is_universal(self, v: int) -> bool:
        return self._var_info[v][1] == FORALL

    def bound_vars(self) -> tuple[int, ...]:
        return tuple(v for b in self.prefix for v in b.variables)


@dataclass(frozen=True)
class FormulaStats:
    num_vars: int
    num_clauses: int
    num_existential: int
    num_universal: int
    num_blocks: int


@dataclass(frozen=True)
class CanonicalDigest:
    value: bytes
    algorithm: str

    def hex(self) -> str:
        return self.value.hex()


def parse_qdimacs(text, strict: bool = True) -> PCNF:
    """Parse QDIMACS. ``text`` may be str, bytes, or an iterable of lines.

    Comment lines starting with 'c' are skipped. Quantifier lines must
    precede clauses. Free variables are closed into the outermost
    existential block (creating or merging with it). In strict mode the
    header counts must match and variable ids must stay within the declared
    bound; lenient mode adjusts instead.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = text

    declared_vars = declared_clauses = None
    blocks: list[tuple[str, list[int]]] = []
    clauses: list[tuple[int, ...]] = []
    bound: set[int] = set()

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if declared_vars is not None:
                raise QdimacsError("duplicate header", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise QdimacsError(f"bad header {line!r}", lineno)
            try:
                declared_vars, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise QdimacsError(f"bad header {line!r}", lineno) from None
            continue
        if declared_vars is None:
            raise QdimacsError("missing 'p cnf' header", lineno)
        if line[0] in (EXISTS, FORALL) and line[:1].isalpha():
            if clauses:
                raise QdimacsError("quantifier line after clauses", lineno)
            parts = line.split()
            try:
                ids = [int(t) for t in parts[1:]]
            except ValueError:
                raise QdimacsError(f"bad quantifier line {line!r}", lineno) from None
            if not ids or ids[-1] != 0:
                raise QdimacsError("quantifier line must end with 0", lineno)
            ids = ids[:-1]
            if not ids:
                if strict:
                    raise QdimacsError("empty quantifier block", lineno)
                continue
            for v in ids:
                if v <= 0:
                    raise QdimacsError(f"bad variable id {v}", lineno)
                if v in bound:
                    raise QdimacsError(f"variable {v} bound twice", lineno)
                if strict and v > declared_vars:
                    raise QdimacsError(
                        f"variable {v} exceeds declared bound {declared_vars}", lineno
                    )
                bound.add(v)
            blocks.append((parts[0], ids))
            continue
        # clause line
        try:
            lits = [int(t) for t in line.split()]
        except ValueError:
            raise QdimacsError(f"bad clause line {line!r}", lineno) from None
        if not lits or lits[-1] != 0:
            raise QdimacsError("clause must end with 0", lineno)
        lits = lits[:-1]
        if any(l == 0 for l in lits):
            raise QdimacsError("literal 0 inside clause", lineno)
        if strict:
            for l in lits:
                if abs(l) > declared_vars:
                    raise QdimacsError(
                        f"variable {abs(l)} exceeds declared bound {declared_vars}",
                        lineno,
                    )
        clauses.append(tuple(lits))

    if declared_vars is None:
        raise QdimacsError("missing 'p cnf' header")
    if strict and declared_clauses != len(clauses):
        raise QdimacsError(
            f"header declares {declared_clauses} clauses, found {len(clauses)}"
        )

    free = sorted({abs(l) for c in clauses for l in c} - bound)
    if free:
        if blocks and blocks[0][0] == EXISTS:
            blocks[0] = (EXISTS, free + blocks[0][1])
        else:
            blocks.insert(0, (EXISTS, free))

    prefix = tuple(QuantifierBlock(q, tuple(ids)) for q, ids in blocks)
    return PCNF(prefix, tuple(clauses), max_var=declared_vars)


def write_qdimacs(f: PCNF) -> str:
    out = [f"p cnf {f.max_var} {len(f.matrix)}"]
    for block in f.prefix:
        out.append(f"{block.quantifier} {' '.join(map(str, block.variables))} 0")
    for clause in f.matrix:
        out.append(" ".join([*map(str, clause), "0"]))
    return "\n".join(out) + "\n"


def is_tautology(clause) -> bool:
    lits = set(clause)
    return any(-l in lits for l in lits)


def normalize_clause(clause) -> tuple[int, ...]:
    # dedup, then sort by (variable, polarity) with positive first
    return tuple(sorted(set(clause), key=lambda l: (abs(l), l < 0)))


def _clause_key(clause: tuple[int, ...]) -> str:
    return ",".join(map(str, clause))


def normalize(f: PCNF) -> PCNF:
    """Canonical matrix: taut clauses dropped, literals and clauses sorted.

    Clause order is bytewise on the decimal serialization, duplicates
    collapse. The prefix is left untouched (no renaming, unused variables
    stay), so normalization is usable for hashing without perturbing the
    formula's identity.
    """
    cleaned = {
        normalize_clause(c) for c in f.matrix if not is_tautology(c)
    }
    ordered = tuple(sorted(cleaned, key=_clause_key))
    return PCNF(f.prefix, ordered, max_var=f.max_var)


def canonical_serialization(f: PCNF) -> str:
    """Prefix blocks joined by '|', then '||', then sorted clauses by LF."""
    norm = normalize(f)
    prefix_part = "|".join(
        b.quantifier + ",".join(map(str, b.variables)) for b in norm.prefix
    )
    matrix_part = "\n".join(_clause_key(c) for c in norm.matrix)
    return prefix_part + "||" + matrix_part


def canonical_digest(f: PCNF, algorithm: str = "sha256") -> CanonicalDigest:
    h = hashlib.new(algorithm)
    h.update(canonical_serialization(f).encode("ascii"))
    return CanonicalDigest(h.digest(), algorithm)


def compute_stats(f: PCNF) -> FormulaStats:
    n_exist = sum(
        len(b.variables) for b in f.prefix if b.quantifier == EXISTS
    )
    n_univ = sum(len(b.variables) for b in f.prefix if b.quantifier == FORALL)
    return FormulaStats(
        num_vars=n_exist + n_univ,
        num_clauses=len(f.matrix),
        num_existential=n_exist,
        num_universal=n_univ,
        num_blocks=len(f.prefix),
    )
