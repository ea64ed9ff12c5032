"""qbfkit: a QBF toolkit - formulas, solving, preprocessing, benchmarking,
and Q-resolution proof certification."""

from .formula import (
    EXISTS,
    FORALL,
    PCNF,
    CanonicalDigest,
    FormulaStats,
    QdimacsError,
    QuantifierBlock,
    canonical_digest,
    compute_stats,
    normalize,
    parse_qdimacs,
    write_qdimacs,
)

__all__ = [
    "EXISTS",
    "FORALL",
    "PCNF",
    "CanonicalDigest",
    "FormulaStats",
    "QdimacsError",
    "QuantifierBlock",
    "canonical_digest",
    "compute_stats",
    "normalize",
    "parse_qdimacs",
    "write_qdimacs",
]
