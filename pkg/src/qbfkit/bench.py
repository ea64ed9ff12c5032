"""Benchmark registry, run execution, and scoring.

Instances are .qdimacs files under a root directory; the family of an
instance is the first path component under the root (or "default" for
top-level files) unless a manifest.json next to the root overrides it.
Results are appended to a records file with one JSON object per line and
exactly the keys tool, instance, family, status, wall_s, mem_bytes, exit,
trial; reruns skip (tool, instance, trial) triples already present, so
an interrupted campaign resumes where it stopped.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import statistics
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path
from random import Random

import psutil

from .formula import QdimacsError, parse_qdimacs

SOLVED_STATUSES = ("SAT", "UNSAT")

RECORD_KEYS = (
    "tool",
    "instance",
    "family",
    "status",
    "wall_s",
    "mem_bytes",
    "exit",
    "trial",
)


@dataclass(frozen=True)
class InstanceRecord:
    name: str
    path: str
    family: str
    digest: str
    expected: str | None = None


@dataclass(frozen=True)
class Registry:
    root: str
    instances: tuple[InstanceRecord, ...]
    rejected: tuple[tuple[str, str], ...]
    duplicates: tuple[tuple[str, tuple[str, ...]], ...]


@dataclass(frozen=True)
class ToolSpec:
    """Command for one competitor; {instance} is replaced by the file path,
    appended when the placeholder is absent."""

    name: str
    command: tuple[str, ...]

    def argv(self, path: str) -> list[str]:
        if any("{instance}" in a for a in self.command):
            return [a.replace("{instance}", path) for a in self.command]
        return list(self.command) + [path]


def scan_registry(root) -> Registry:
    """Scan a directory tree for .qdimacs instances.

    Digests are over the raw file bytes, so textually different encodings
    of the same formula stay distinct; files with identical bytes are
    kept but reported under duplicates.
    """
    rootp = Path(root)
    manifest = {"families": {}, "expected": {}}
    mpath = rootp / "manifest.json"
    if mpath.is_file():
        loaded = json.loads(mpath.read_text())
        manifest["families"].update(loaded.get("families", {}))
        manifest["expected"].update(loaded.get("expected", {}))

    instances = []
    rejected = []
    by_digest: dict[str, list[str]] = {}
    for p in sorted(rootp.rglob("*.qdimacs")):
        name = p.relative_to(rootp).as_posix()
        data = p.read_bytes()
        try:
            parse_qdimacs(data)
        except QdimacsError as e:
            rejected.append((name, str(e)))
            continue
        digest = hashlib.sha256(data).hexdigest()
        if name in manifest["families"]:
            family = manifest["families"][name]
        elif "/" in name:
            family = name.split("/", 1)[0]
        else:
            family = "default"
        expected = manifest["expected"].get(name)
        instances.append(InstanceRecord(name, str(p), family, digest, expected))
        by_digest.setdefault(digest, []).append(name)

    duplicates = tuple(
        (d, tuple(sorted(names)))
        for d, names in sorted(by_digest.items())
        if len(names) > 1
    )
    return Registry(
        str(rootp),
        tuple(sorted(instances, key=lambda i: i.name)),
        tuple(sorted(rejected)),
        duplicates,
    )


def expected_map(registry: Registry) -> dict[str, str]:
    return {i.name: i.expected for i in registry.instances if i.expected}


def stratified_sample(registry: Registry, k: int, seed: int):
    """Up to k instances per family, deterministic in the seed."""
    rng = Random(seed)
    families: dict[str, list[InstanceRecord]] = {}
    for inst in registry.instances:
        families.setdefault(inst.family, []).append(inst)
    picked = []
    for family in sorted(families):
        members = sorted(families[family], key=lambda i: i.name)
        picked.extend(rng.sample(members, min(k, len(members))))
    return sorted(picked, key=lambda i: (i.family, i.name))


def read_records(path):
    records = []
    p = Path(path)
    if not p.exists():
        return records
    with p.open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _run_one(argv, wall_limit: float, mem_limit: int | None, poll_s: float):
    """Run one tool process; returns (status_override, wall, peak_rss, exit)."""
    t0 = time.monotonic()
    proc = subprocess.Popen(
        argv, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL
    )
    peak = 0
    override = None
    try:
        ps = psutil.Process(proc.pid)
    except psutil.NoSuchProcess:
        ps = None
    while proc.poll() is None:
        if ps is not None:
            try:
                rss = ps.memory_info().rss
                for child in ps.children(recursive=True):
                    try:
                        rss += child.memory_info().rss
                    except psutil.NoSuchProcess:
                        pass
                peak = max(peak, rss)
            except psutil.NoSuchProcess:
                pass
        if mem_limit is not None and peak > mem_limit:
            override = "memout"
            proc.kill()
            break
        if time.monotonic() - t0 > wall_limit:
            override = "timeout"
            proc.kill()
            break
        time.sleep(poll_s)
    proc.wait()
    return override, time.monotonic() - t0, peak, proc.returncode


def _status_of_exit(code: int) -> str:
    if code == 10:
        return "SAT"
    if code == 20:
        return "UNSAT"
    if code == 0:
        return "UNKNOWN"
    return "error"


def execute_runs(
    tools,
    instances,
    records_path,
    *,
    trials: int = 1,
    wall_limit: float = 60.0,
    mem_limit: int | None = None,
    poll_s: float = 0.05,
    jobs: int = 1,
):
    """Run every tool on every instance for every trial, appending records.

    Triples already present in the records file are skipped, which makes
    interrupted campaigns resumable by rerunning the same call. Runs
    execute on a pool of ``jobs`` workers; records are written by this
    thread alone, in submission order.
    """
    done = {
        (r["tool"], r["instance"], r["trial"]) for r in read_records(records_path)
    }
    todo = [
        (inst, tool, trial)
        for inst in instances
        for tool in tools
        for trial in range(1, trials + 1)
        if (tool.name, inst.name, trial) not in done
    ]
    new_records = []
    path = Path(records_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as out:
        with concurrent.futures.ThreadPoolExecutor(max(1, jobs)) as pool:
            futures = [
                pool.submit(
                    _run_one, tool.argv(inst.path), wall_limit, mem_limit, poll_s
                )
                for inst, tool, trial in todo
            ]
            for (inst, tool, trial), fut in zip(todo, futures):
                override, wall, peak, code = fut.result()
                status = override or _status_of_exit(code)
                record = {
                    "tool": tool.name,
                    "instance": inst.name,
                    "family": inst.family,
                    "status": status,
                    "wall_s": round(wall, 6),
                    "mem_bytes": peak,
                    "exit": code,
                    "trial": trial,
                }
                out.write(json.dumps(record, sort_keys=True) + "\n")
                out.flush()
                new_records.append(record)
    return new_records


def _by_tool(records):
    tools: dict[str, list[dict]] = {}
    for r in records:
        tools.setdefault(r["tool"], []).append(r)
    return tools


@dataclass(frozen=True)
class ScoreRow:
    tool: str
    solved: int
    sat: int
    unsat: int
    unique: int
    avg_s: float
    total_s: float
    par_s: float


def _score_rows(records, limit: float, par_k: int):
    by_tool = _by_tool(records)
    solved_insts = {
        tool: {r["instance"] for r in rs if r["status"] in SOLVED_STATUSES}
        for tool, rs in by_tool.items()
    }
    rows = []
    for tool, rs in by_tool.items():
        times = [
            min(r["wall_s"], limit)
            for r in rs
            if r["status"] in SOLVED_STATUSES
        ]
        solved = len(times)
        sat = sum(1 for r in rs if r["status"] == "SAT")
        others = set().union(
            *(s for t, s in solved_insts.items() if t != tool), set()
        )
        unique = len(solved_insts[tool] - others)
        total = sum(times) + limit * (len(rs) - solved)
        par = (sum(times) + par_k * limit * (len(rs) - solved)) / len(rs)
        rows.append(
            ScoreRow(
                tool,
                solved,
                sat,
                solved - sat,
                unique,
                sum(times) / solved if solved else 0.0,
                total,
                par,
            )
        )
    return rows


def rank_solved(records, limit: float, par_k: int = 10):
    """Rank by solved count, ties by total time.

    Total time charges a solved run its wall clock capped at the limit
    and an unsolved run the full limit; unique counts instances no other
    tool solved.
    """
    rows = _score_rows(records, limit, par_k)
    rows.sort(key=lambda r: (-r.solved, r.total_s, r.tool))
    return rows


def rank_par(records, limit: float, k: int = 10):
    """Penalized average runtime: unsolved runs cost k times the limit."""
    rows = _score_rows(records, limit, k)
    rows.sort(key=lambda r: (r.par_s, r.tool))
    return rows


def best_foot(original_solved: int, preprocessed_solved: int) -> str:
    """Forward the better configuration; ties want preprocessing."""
    return "NO" if original_solved > preprocessed_solved else "WANT"


def kilo_label(seconds: float) -> str:
    return f"{round(seconds / 1000)}K"


def detect_discrepancies(records, expected: dict[str, str] | None = None):
    """Instances claimed SAT by one side and UNSAT by another.

    The expected status from the registry takes part as a pseudo-claim
    under the name 'expected'.
    """
    claims: dict[str, set] = {}
    for r in records:
        if r["status"] in SOLVED_STATUSES:
            claims.setdefault(r["instance"], set()).add((r["tool"], r["status"]))
    if expected:
        for inst, status in expected.items():
            if status in SOLVED_STATUSES:
                claims.setdefault(inst, set()).add(("expected", status))
    out = []
    for inst in sorted(claims):
        statuses = {s for _, s in claims[inst]}
        if "SAT" in statuses and "UNSAT" in statuses:
            out.append((inst, tuple(sorted(claims[inst]))))
    return out


def trial_table(records):
    """Per tool and instance: trials, solved trials, and time spread."""
    cells: dict[tuple[str, str], list[dict]] = {}
    for r in records:
        cells.setdefault((r["tool"], r["instance"]), []).append(r)
    rows = []
    for (tool, inst) in sorted(cells):
        rs = cells[(tool, inst)]
        times = sorted(r["wall_s"] for r in rs)
        rows.append(
            {
                "tool": tool,
                "instance": inst,
                "trials": len(rs),
                "solved": sum(1 for r in rs if r["status"] in SOLVED_STATUSES),
                "min_s": times[0],
                "median_s": statistics.median(times),
                "max_s": times[-1],
            }
        )
    return rows


def emit_reports(records, out_dir, limit: float, par_k: int = 10):
    """Write cactus.csv, family.csv, and scores.csv; byte-stable output."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = ["tool,rank,time"]
    for tool in sorted(_by_tool(records)):
        times = sorted(
            min(r["wall_s"], limit)
            for r in records
            if r["tool"] == tool and r["status"] in SOLVED_STATUSES
        )
        for rank, t in enumerate(times, start=1):
            lines.append(f"{tool},{rank},{t:.3f}")
    (out / "cactus.csv").write_text("\n".join(lines) + "\n")

    by_family: dict[str, dict] = {}
    for r in records:
        fam = by_family.setdefault(
            r["family"], {"instances": set(), "solved": {}}
        )
        fam["instances"].add(r["instance"])
        if r["status"] in SOLVED_STATUSES:
            fam["solved"].setdefault(r["tool"], set()).add(r["instance"])
    tools = sorted(_by_tool(records))
    lines = ["family,family_size,tool,solved"]
    for family in sorted(by_family):
        size = len(by_family[family]["instances"])
        for tool in tools:
            solved = len(by_family[family]["solved"].get(tool, ()))
            lines.append(f"{family},{size},{tool},{solved}")
    (out / "family.csv").write_text("\n".join(lines) + "\n")

    lines = ["tool,solved,sat,unsat,unique,avg_time,total_time,par"]
    for r in rank_solved(records, limit, par_k):
        lines.append(
            f"{r.tool},{r.solved},{r.sat},{r.unsat},{r.unique},"
            f"{r.avg_s:.3f},{r.total_s:.3f},{r.par_s:.3f}"
        )
    (out / "scores.csv").write_text("\n".join(lines) + "\n")
    return out / "cactus.csv", out / "family.csv", out / "scores.csv"
