"""
Checking proofs and validating certificates
===========================================

"""

# The search engine can narrate its derivation into a trace: input
# clauses and cubes, resolution steps, reductions, and a footer naming
# the root of the argument.
import io

from qbfkit.formula import EXISTS, FORALL, PCNF, QuantifierBlock
from qbfkit.solver import solve_search

f = PCNF(
    (QuantifierBlock(EXISTS, (1,)), QuantifierBlock(FORALL, (2,)),
     QuantifierBlock(EXISTS, (3,))),
    ((1, 2, 3), (1, -2, -3), (-1, 2, -3), (-1, -2, 3)),
)
sink = io.StringIO()
out = solve_search(f, trace=sink)
text = sink.getvalue()
print("status:", out.status, "trace lines:", len(text.splitlines()))

# The checker replays the steps that the footer's root actually depends
# on and accepts only legal applications of the calculus rules.
from qbfkit.certify import check_trace

report = check_trace(f, text)
print("accepted:", report.accepted, "kind:", report.kind,
      "steps checked:", report.steps_checked)

# From a checked trace, a strategy falls out: Herbrand functions for a
# refutation (how the universal player wins), Skolem functions for a
# satisfaction (how the existential player wins).
from qbfkit.certify import extract_certificate
from qbfkit.trace import parse_trace

steps, kind, root = parse_trace(text)
cert = extract_certificate(f, steps, kind, root)
print("certificate kind:", cert.kind, "over", len(cert.roots), "variable(s)")

# Validation substitutes the functions back into the matrix and tries
# every assignment of the remaining variables; small formulas finish
# exhaustively, bigger ones fall back to a solver query.
from qbfkit.certify import validate_certificate

verdict = validate_certificate(f, cert)
print("verdict:", verdict.status, "via", verdict.method,
      "over", verdict.assignments, "assignment(s)")

# Certificates serialize to a text form that round-trips losslessly.
from qbfkit.certify import parse_certificate, write_certificate

blob = write_certificate(cert)
print(blob.splitlines()[0])
assert parse_certificate(blob).roots == cert.roots

# A checker that accepts everything proves nothing, so here is a broken
# trace: the footer claims a refutation rooted at a non-empty clause.
bad = "1 1 0 0\nr refutation 1\n"
report = check_trace(f, bad)
print("tampered trace accepted?", report.accepted, "->", report.reason)
