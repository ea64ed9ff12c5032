"""Command line entry points.

Solve-style commands exit 10 for SAT, 20 for UNSAT, and 0 for UNKNOWN
or not-yet-solved; usage and input errors exit 2.
"""

import argparse
import dataclasses
import json
import shlex
import sys
from pathlib import Path

from .bench import (
    ToolSpec,
    best_foot,
    detect_discrepancies,
    emit_reports,
    execute_runs,
    expected_map,
    rank_par,
    rank_solved,
    read_records,
    scan_registry,
    stratified_sample,
)
from .bench import InstanceRecord, Registry
from .certify import (
    CertificateError,
    REFUTED,
    VALIDATED,
    check_trace,
    check_trace_streaming,
    extract_certificate,
    parse_certificate,
    validate_certificate,
    write_certificate,
)
from .expansion import solve_expansion
from .formula import QdimacsError, parse_qdimacs, write_qdimacs
from .pipeline import (
    ExternalStep,
    SOLVED_SAT,
    SOLVED_UNSAT,
    run_pipeline,
)
from .prep import DEFAULT_BUNDLES, SAT, UNSAT, parse_bundles, preprocess
from .solver import solve_search
from .trace import TraceError, parse_trace

STATUS_EXITS = {SAT: 10, UNSAT: 20}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _read_formula(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_qdimacs(text)


def _write_formula(f, path) -> None:
    text = write_qdimacs(f)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_bundles(path):
    if path is None:
        return dict(DEFAULT_BUNDLES)
    return parse_bundles(Path(path).read_text())


def _bytes(text: str) -> int:
    units = {"k": 1 << 10, "m": 1 << 20, "g": 1 << 30}
    if text and text[-1].lower() in units:
        return int(float(text[:-1]) * units[text[-1].lower()])
    return int(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbfkit", description="Solve a QDIMACS formula."
    )
    parser.add_argument("file", help="input file, or - for stdin")
    parser.add_argument(
        "--engine", choices=("search", "expansion"), default="search"
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--time", type=float, help="wall clock limit, seconds")
    parser.add_argument("--mem", type=_bytes, help="memory limit, bytes")
    parser.add_argument("--trace", help="write the proof trace to this file")
    args = parser.parse_args(argv)

    try:
        f = _read_formula(args.file)
    except (OSError, QdimacsError) as e:
        return _fail(str(e))
    sink = None
    if args.trace:
        sink = open(args.trace, "w")
    try:
        if args.engine == "expansion":
            out = solve_expansion(
                f,
                time_limit=args.time,
                **({"memory_limit": args.mem} if args.mem else {}),
            )
        else:
            out = solve_search(
                f,
                seed=args.seed,
                time_limit=args.time,
                memory_limit=args.mem,
                trace=sink,
            )
    finally:
        if sink is not None:
            sink.close()
    label = out.status
    if out.reason_for_unknown != "none":
        label += f" ({out.reason_for_unknown})"
    print(f"{label} {out.wall_time:.3f}s")
    return STATUS_EXITS.get(out.status, 0)


def main_prep(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="prep", description="Preprocess a QDIMACS formula."
    )
    parser.add_argument("file", help="input file, or - for stdin")
    parser.add_argument("-o", "--output", help="output file, default stdout")
    parser.add_argument("--bundle", default="B", help="bundle label")
    parser.add_argument("--bundles", help="bundle definition file")
    parser.add_argument("--limit", type=float, help="wall clock limit, seconds")
    parser.add_argument("--var-elim-budget", type=int, default=0)
    parser.add_argument("--expansion-budget", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        f = _read_formula(args.file)
        bundles = _load_bundles(args.bundles)
    except (OSError, QdimacsError, ValueError) as e:
        return _fail(str(e))
    if args.bundle not in bundles:
        return _fail(f"unknown bundle {args.bundle!r}")
    r = preprocess(
        f,
        bundles[args.bundle],
        limit=args.limit,
        var_elim_budget=args.var_elim_budget,
        expansion_budget=args.expansion_budget,
    )
    _write_formula(r.formula, args.output)
    for tech, n in r.log:
        print(f"{tech} {n}", file=sys.stderr)
    tail = f"passes {r.passes}"
    if r.limited:
        tail += " (limit hit)"
    if r.status is not None:
        tail += f" solved {r.status}"
    print(tail, file=sys.stderr)
    return STATUS_EXITS.get(r.status, 0)


def main_pipeline(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pipeline",
        description="Round-based preprocessing with fixpoint detection; "
        "one JSON object per round on stdout.",
    )
    parser.add_argument("file", help="input file, or - for stdin")
    parser.add_argument("--seq", required=True, help="step labels, e.g. AABB")
    parser.add_argument("--rounds", type=int, default=6)
    parser.add_argument(
        "--call-limit", type=float, default=120.0, dest="call_limit"
    )
    parser.add_argument("--bundles", help="bundle definition file")
    parser.add_argument(
        "--external",
        action="append",
        default=[],
        metavar="L=CMD",
        help="bind a step label to an external filter command",
    )
    parser.add_argument("-o", "--output", help="write the final formula here")
    args = parser.parse_args(argv)

    try:
        f = _read_formula(args.file)
        bundles = _load_bundles(args.bundles)
    except (OSError, QdimacsError, ValueError) as e:
        return _fail(str(e))
    externals = {}
    for spec in args.external:
        label, eq, command = spec.partition("=")
        if not eq or not label or not command:
            return _fail(f"bad --external {spec!r}, want L=CMD")
        externals[label] = ExternalStep(tuple(shlex.split(command)), name=label)
    steps = []
    for ch in args.seq:
        if ch in externals:
            steps.append(externals[ch])
        elif ch in bundles:
            steps.append(ch)
        else:
            return _fail(f"unknown step label {ch!r}")

    def emit(r):
        print(
            json.dumps(
                {
                    "round": r.index,
                    "digest_before": r.digest_before,
                    "digest_after": r.digest_after,
                    "steps": [dataclasses.asdict(s) for s in r.steps],
                },
                sort_keys=True,
            ),
            flush=True,
        )

    result = run_pipeline(
        f,
        steps,
        bundles=bundles,
        max_rounds=args.rounds,
        per_call_limit=args.call_limit,
        on_round=emit,
    )
    print(json.dumps({"outcome": result.outcome}, sort_keys=True), flush=True)
    if args.output:
        _write_formula(result.formula, args.output)
    if result.outcome == SOLVED_SAT:
        return 10
    if result.outcome == SOLVED_UNSAT:
        return 20
    return 0


def _registry_to_json(registry) -> str:
    return json.dumps(
        {
            "root": registry.root,
            "instances": [dataclasses.asdict(i) for i in registry.instances],
            "rejected": [list(r) for r in registry.rejected],
            "duplicates": [
                [digest, list(names)] for digest, names in registry.duplicates
            ],
        },
        indent=2,
        sort_keys=True,
    )


def _instances_from_json(path):
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["instances"]
    return [InstanceRecord(**d) for d in data]


def _registry_from_json(path) -> Registry:
    data = json.loads(Path(path).read_text())
    return Registry(
        data["root"],
        tuple(InstanceRecord(**d) for d in data["instances"]),
        tuple(tuple(r) for r in data["rejected"]),
        tuple((d, tuple(n)) for d, n in data["duplicates"]),
    )


def main_bench(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bench", description="Benchmark campaigns over QDIMACS corpora."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", help="scan a corpus directory")
    p.add_argument("root")
    p.add_argument("-o", "--output", help="registry JSON, default stdout")

    p = sub.add_parser("sample", help="stratified sample from a registry")
    p.add_argument("registry", help="registry JSON from bench register")
    p.add_argument("--k", type=int, default=6, help="instances per family")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="sample JSON, default stdout")

    p = sub.add_parser("run", help="execute tools on sampled instances")
    p.add_argument("sample", help="sample or registry JSON")
    p.add_argument(
        "--tool",
        action="append",
        required=True,
        metavar="NAME=CMD",
        help="competitor command; {instance} marks the file argument",
    )
    p.add_argument("--time", type=float, default=900.0)
    p.add_argument("--mem", type=_bytes, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("-o", "--records", default="records.jsonl")

    p = sub.add_parser("rank", help="score table from a records file")
    p.add_argument("records")
    p.add_argument("--time", type=float, default=900.0)
    p.add_argument(
        "--par",
        type=int,
        default=None,
        help="sort by PAR-k with this k instead of solved count",
    )

    p = sub.add_parser("bestfoot", help="compare two campaigns per tool")
    p.add_argument("original")
    p.add_argument("preprocessed")

    p = sub.add_parser("report", help="write cactus, family, and score CSVs")
    p.add_argument("records")
    p.add_argument("--time", type=float, default=900.0)
    p.add_argument("--par", type=int, default=10)
    p.add_argument("-o", "--out-dir", default="reports")

    p = sub.add_parser(
        "discrepancies", help="instances reported both SAT and UNSAT"
    )
    p.add_argument("records")
    p.add_argument("--registry", help="include expected statuses from here")

    args = parser.parse_args(argv)

    if args.command == "register":
        registry = scan_registry(args.root)
        text = _registry_to_json(registry)
        if args.output:
            Path(args.output).write_text(text + "\n")
        else:
            print(text)
        families = {i.family for i in registry.instances}
        print(
            f"{len(registry.instances)} instances in {len(families)} families, "
            f"{len(registry.rejected)} rejected, "
            f"{len(registry.duplicates)} duplicate groups",
            file=sys.stderr,
        )
        return 0

    if args.command == "sample":
        try:
            registry = _registry_from_json(args.registry)
        except (OSError, KeyError, json.JSONDecodeError) as e:
            return _fail(str(e))
        picked = stratified_sample(registry, args.k, args.seed)
        text = json.dumps(
            [dataclasses.asdict(i) for i in picked], indent=2, sort_keys=True
        )
        if args.output:
            Path(args.output).write_text(text + "\n")
        else:
            print(text)
        print(f"{len(picked)} instances", file=sys.stderr)
        return 0

    if args.command == "run":
        try:
            instances = _instances_from_json(args.sample)
        except (OSError, KeyError, TypeError, json.JSONDecodeError) as e:
            return _fail(str(e))
        tools = []
        for spec in args.tool:
            name, eq, command = spec.partition("=")
            if not eq or not name or not command:
                return _fail(f"bad --tool {spec!r}, want NAME=CMD")
            tools.append(ToolSpec(name, tuple(shlex.split(command))))
        new = execute_runs(
            tools,
            instances,
            args.records,
            trials=args.trials,
            wall_limit=args.time,
            mem_limit=args.mem,
            jobs=args.jobs,
        )
        print(f"{len(new)} new records in {args.records}", file=sys.stderr)
        return 0

    if args.command == "rank":
        records = read_records(args.records)
        if args.par is None:
            rows = rank_solved(records, args.time)
        else:
            rows = rank_par(records, args.time, args.par)
        print("tool solved sat unsat unique avg_s total_s par_s")
        for r in rows:
            print(
                f"{r.tool} {r.solved} {r.sat} {r.unsat} {r.unique} "
                f"{r.avg_s:.2f} {r.total_s:.2f} {r.par_s:.2f}"
            )
        return 0

    if args.command == "bestfoot":
        original = read_records(args.original)
        preprocessed = read_records(args.preprocessed)
        if {r["instance"] for r in original} != {
            r["instance"] for r in preprocessed
        }:
            return _fail("campaigns cover different instance sets")
        solved = {}
        for label, records in (("orig", original), ("prep", preprocessed)):
            for r in rank_solved(records, limit=float("inf")):
                solved.setdefault(r.tool, {})[label] = r.solved
        print("tool category best worst")
        for tool in sorted(solved):
            orig = solved[tool].get("orig", 0)
            prep = solved[tool].get("prep", 0)
            category = best_foot(orig, prep)
            print(f"{tool} {category} {max(orig, prep)} {min(orig, prep)}")
        return 0

    if args.command == "report":
        records = read_records(args.records)
        files = emit_reports(records, args.out_dir, args.time, args.par)
        for path in files:
            print(path)
        return 0

    expected = None
    if args.registry:
        try:
            expected = expected_map(_registry_from_json(args.registry))
        except (OSError, KeyError, json.JSONDecodeError) as e:
            return _fail(str(e))
    found = detect_discrepancies(read_records(args.records), expected)
    for inst, claims in found:
        tags = " ".join(f"{tool}:{status}" for tool, status in claims)
        print(f"{inst} {tags}")
    return 1 if found else 0


def main_cert(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cert", description="Check traces, extract and validate "
        "strategy certificates."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check a trace against its formula")
    p.add_argument("formula")
    p.add_argument("trace")
    p.add_argument(
        "--stream", action="store_true", help="two-pass low-retention mode"
    )
    p.add_argument("--max-retained", type=int, default=None)

    p = sub.add_parser("extract", help="strategy functions from a trace")
    p.add_argument("formula")
    p.add_argument("trace")
    p.add_argument("-o", "--output", help="certificate file, default stdout")

    p = sub.add_parser("validate", help="substitute a certificate back")
    p.add_argument("formula")
    p.add_argument("certificate")
    p.add_argument("--budget", type=int, default=1 << 16)
    p.add_argument("--time", type=float, default=None)

    args = parser.parse_args(argv)
    try:
        f = _read_formula(args.formula)
    except (OSError, QdimacsError) as e:
        return _fail(str(e))

    if args.command == "check":
        try:
            text = Path(args.trace).read_text()
            if args.stream:
                report = check_trace_streaming(
                    f, text, max_retained=args.max_retained
                )
            else:
                report = check_trace(f, text)
        except (OSError, TraceError, MemoryError) as e:
            return _fail(str(e))
        if report.accepted:
            print(f"accepted {report.kind} steps={report.steps_checked}")
            return 0
        where = "" if report.step is None else f" at step {report.step}"
        print(f"rejected {report.kind}{where}: {report.reason}")
        if report.detail:
            print(report.detail)
        return 1

    if args.command == "extract":
        try:
            steps, kind, root = parse_trace(Path(args.trace).read_text())
        except (OSError, TraceError) as e:
            return _fail(str(e))
        try:
            cert = extract_certificate(f, steps, kind, root)
        except CertificateError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        text = write_certificate(cert)
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    try:
        cert = parse_certificate(Path(args.certificate).read_text())
        report = validate_certificate(
            f, cert, budget=args.budget, time_limit=args.time
        )
    except OSError as e:
        return _fail(str(e))
    except CertificateError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    note = f" ({report.detail})" if report.detail else ""
    print(
        f"{report.status} {report.method} "
        f"assignments={report.assignments}{note}"
    )
    if report.status == VALIDATED:
        return 0
    return 1 if report.status == REFUTED else 2


if __name__ == "__main__":
    sys.exit(main())
