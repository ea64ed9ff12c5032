"""
Preprocessing bundles
=====================

"""

# Preprocessing rewrites a formula without changing its truth value.
# Techniques are grouped into named bundles; each bundle runs its
# techniques in order, over and over, until a full pass changes nothing.
from qbfkit.prep import DEFAULT_BUNDLES, preprocess

for label, bundle in DEFAULT_BUNDLES.items():
    print(label, "=", ", ".join(bundle.techniques))

# A formula with an easy unit clause and a pure literal to chew on.
from qbfkit.formula import EXISTS, FORALL, PCNF, QuantifierBlock

f = PCNF(
    (QuantifierBlock(EXISTS, (1, 2, 3)), QuantifierBlock(FORALL, (4,))),
    ((1,), (-1, 2, 4), (2, 3), (-3, 4, 2)),
)

# Bundle D applies unit, pure, universal reduction, subsumption, and
# variable elimination. The log counts applications per technique.
result = preprocess(f, "D")
print("status:", result.status)
for technique, count in result.log:
    print("  ", technique, "x", count)

# A solved status means the bundle alone settled the formula; otherwise
# the reduced formula comes back for a real solver. Rewriting must never
# change the answer, so compare against solving the original.
from qbfkit.generate import random_pcnf
from qbfkit.solver import solve_search

kept = solved = 0
for seed in range(40):
    g = random_pcnf(seed, max_vars=7, max_clauses=14, max_blocks=3)
    r = preprocess(g, "A")
    if r.status is None:
        kept += 1
        assert solve_search(r.formula).status == solve_search(g).status
    else:
        solved += 1
        assert r.status == solve_search(g).status
print("bundle A solved", solved, "of 40 outright, passed on:", kept)

# Growth budgets guard the heavier techniques. In this dense parity
# family (even-parity sign patterns over the edge triples of each
# triangle of a five-vertex clique) every elimination grows the matrix,
# so a zero budget keeps hands off entirely.
import itertools

edge = {}
for pair in itertools.combinations(range(1, 6), 2):
    edge[pair] = len(edge) + 1
clauses = []
for tri in itertools.combinations(range(1, 6), 3):
    vs = [edge[p] for p in itertools.combinations(tri, 2)]
    for signs in itertools.product((1, -1), repeat=3):
        if signs[0] * signs[1] * signs[2] == 1:
            clauses.append(tuple(s * v for s, v in zip(signs, vs)))
parity = PCNF((QuantifierBlock(EXISTS, tuple(range(1, 11))),), tuple(clauses))

tight = preprocess(parity, "D", var_elim_budget=0)
loose = preprocess(parity, "D", var_elim_budget=12)
print("clauses at budget 0:", len(tight.formula.matrix),
      "at budget 12:", len(loose.formula.matrix))
print("budget 12 log:", loose.log)
