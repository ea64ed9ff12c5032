"""
Building formulas and solving them
==================================

"""

# A formula lives in prenex conjunctive normal form: a quantifier prefix
# over blocks of variables, then a conjunction of clauses.
from qbfkit.formula import EXISTS, FORALL, PCNF, QuantifierBlock

# forall x exists y: (x or y) and (not x or not y), i.e. y must mirror
# not x, which a Skolem function can do, so the formula is true.
f = PCNF(
    (QuantifierBlock(FORALL, (1,)), QuantifierBlock(EXISTS, (2,))),
    ((1, 2), (-1, -2)),
)
print("blocks:", len(f.prefix), "clauses:", len(f.matrix))

# The same formula round-trips through the QDIMACS text format.
from qbfkit.formula import parse_qdimacs, write_qdimacs

text = write_qdimacs(f)
print(text)
assert parse_qdimacs(text).matrix == f.matrix

# The search engine runs clause and cube learning over a trail.
from qbfkit.solver import solve_search

out = solve_search(f)
print("search says:", out.status)

# The expansion engine eliminates universal blocks by copying, then
# decides the purely existential residue; both engines must agree.
from qbfkit.expansion import solve_expansion

print("expansion says:", solve_expansion(f).status)

# Swapping the quantifiers flips the answer: no single x suits both y.
g = PCNF(
    (QuantifierBlock(EXISTS, (1,)), QuantifierBlock(FORALL, (2,))),
    ((1, 2), (-1, 2)),
)
print("swapped prefix:", solve_search(g).status)

# Random instances come from a seeded generator, handy for quick suites.
from qbfkit.generate import random_pcnf

for seed in range(3):
    r = random_pcnf(seed, max_vars=6, max_clauses=12, max_blocks=3)
    print("seed", seed, "->", solve_search(r).status)
