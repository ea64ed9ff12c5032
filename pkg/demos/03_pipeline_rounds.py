"""
Chaining bundles into a pipeline
================================

"""

# A pipeline runs a sequence of bundles per round, up to a round limit,
# and stops early on a fixpoint (the formula's digest stopped moving) or
# when some bundle settles the formula outright.
from qbfkit.generate import random_pcnf
from qbfkit.pipeline import run_pipeline

f = random_pcnf(11, max_vars=8, max_clauses=18, max_blocks=3)
result = run_pipeline(f, "AB", max_rounds=6)
print("outcome:", result.outcome)
for report in result.rounds:
    moves = [(s.step, s.applications) for s in report.steps]
    print("  round", report.index, moves)

# Each round report chains digests, so the whole run is auditable:
# round n ends exactly where round n+1 begins.
for a, b in zip(result.rounds, result.rounds[1:]):
    assert a.digest_after == b.digest_before

# Sequences are plain label strings; repeated labels are fine.
for seq in ("A", "AABB", "DCBA"):
    r = run_pipeline(f, seq, max_rounds=6)
    print(seq, "->", r.outcome, "in", len(r.rounds), "round(s)")

# External filters can join the chain: any command reading QDIMACS on
# stdin and writing QDIMACS on stdout slots in between bundle labels.
import sys

from qbfkit.pipeline import ExternalStep

identity = ExternalStep(
    (sys.executable, "-c", "import sys; sys.stdout.write(sys.stdin.read())"),
    name="ident",
)
r = run_pipeline(f, [identity, "A"], max_rounds=6)
print("mixed chain:", r.outcome)
print("round 1 kinds:", [(s.step, s.kind) for s in r.rounds[0].steps])
