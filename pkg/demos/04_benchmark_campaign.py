"""
Running a benchmark campaign
============================

"""

# A campaign walks a directory of instances, samples per family, runs
# every tool on every pick under limits, and scores the records. This
# demo builds a small corpus in a scratch directory and runs the
# package's own solver as two differently seeded tools.
import sys
import tempfile
from pathlib import Path

from qbfkit.formula import write_qdimacs
from qbfkit.generate import random_pcnf

root = Path(tempfile.mkdtemp(prefix="campaign-"))
for family, seeds in (("small", range(6)), ("wide", range(100, 104))):
    (root / family).mkdir()
    for seed in seeds:
        f = random_pcnf(seed, max_vars=7, max_clauses=14, max_blocks=3)
        (root / family / f"s{seed}.qdimacs").write_text(write_qdimacs(f))

# Registration digests every file and groups by directory (the family).
from qbfkit.bench import scan_registry

registry = scan_registry(root)
print("instances:", len(registry.instances),
      "families:", sorted({i.family for i in registry.instances}))

# Sampling caps each family at k picks, deterministically in the seed.
from qbfkit.bench import stratified_sample

sample = stratified_sample(registry, k=3, seed=5)
print("sampled:", [i.name for i in sample])

# Tools are plain commands; the instance path is appended. Exit code 10
# means SAT, 20 UNSAT, anything else unsolved.
from qbfkit.bench import ToolSpec, execute_runs, read_records

solver = (
    "import sys\n"
    "from qbfkit.formula import parse_qdimacs\n"
    "from qbfkit.solver import solve_search\n"
    "out = solve_search(parse_qdimacs(open(sys.argv[1]).read()), seed=SEED)\n"
    "sys.exit({'SAT': 10, 'UNSAT': 20}.get(out.status, 0))\n"
)
tools = [
    ToolSpec(name, (sys.executable, "-c", solver.replace("SEED", seed)))
    for name, seed in (("qs-0", "0"), ("qs-1", "1"))
]
records_path = root / "records.jsonl"
execute_runs(tools, sample, records_path, wall_limit=30.0, jobs=2)

# Rerunning the same call is a no-op: finished triples are skipped, so
# interrupted campaigns resume for free.
assert execute_runs(tools, sample, records_path, wall_limit=30.0) == []
records = read_records(records_path)
print("records:", len(records))

# Ranking is by solved count, ties by total time; PAR-10 charges each
# unsolved run ten times the limit.
from qbfkit.bench import rank_par, rank_solved

for row in rank_solved(records, 30.0):
    print(f"{row.tool}: solved {row.solved} ({row.sat} sat, {row.unsat} unsat)"
          f" unique {row.unique} total {row.total_s:.2f}s")
for row in rank_par(records, 30.0, k=10):
    print(f"{row.tool}: PAR-10 {row.par_s:.2f}s")

# Disagreements between tools (one says SAT, another UNSAT) are the
# first thing to audit after any campaign.
from qbfkit.bench import detect_discrepancies

print("discrepancies:", detect_discrepancies(records))

# Report files feed the plotting side: cactus.csv has one sorted
# (rank, time) series per tool, scores.csv one row per tool.
from qbfkit.bench import emit_reports

paths = emit_reports(records, root / "reports", 30.0)
for p in paths:
    print("wrote", p)
