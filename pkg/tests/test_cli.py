"""Command line entry points, driven as subprocesses."""

import io
import json
import subprocess
import sys

from qbfkit.formula import EXISTS, FORALL, PCNF, QuantifierBlock, write_qdimacs
from qbfkit.generate import random_pcnf
from qbfkit.solver import solve_search
from qbfkit.trace import parse_trace

from oracles import game_status

F_SAT = PCNF(
    (QuantifierBlock(FORALL, (1,)), QuantifierBlock(EXISTS, (2,))),
    ((1, 2), (-1, -2)),
)
F_UNSAT = PCNF(
    (QuantifierBlock(EXISTS, (1,)), QuantifierBlock(FORALL, (2,))),
    ((1, 2), (-1, 2)),
)

SOLVER_WRAPPER = """\
import sys
from qbfkit.formula import parse_qdimacs
from qbfkit.solver import SAT, UNSAT, solve_search
out = solve_search(parse_qdimacs(open(sys.argv[1]).read()))
sys.exit(10 if out.status == SAT else 20 if out.status == UNSAT else 0)
"""


def run_cli(func, *args, stdin=None):
    code = (
        "import sys\n"
        f"from qbfkit.cli import {func}\n"
        f"sys.exit({func}(sys.argv[1:]))\n"
    )
    return subprocess.run(
        [sys.executable, "-c", code, *map(str, args)],
        capture_output=True,
        text=True,
        input=stdin,
        timeout=120,
    )


def write_formula(path, f):
    path.write_text(write_qdimacs(f))
    return path


class TestSolve:
    def test_unsat_exit_and_trace(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        trace = tmp_path / "f.qrp"
        p = run_cli("main", inp, "--trace", trace)
        assert p.returncode == 20
        assert p.stdout.startswith("UNSAT")
        steps, kind, root = parse_trace(trace.read_text())
        assert kind == "refutation"
        assert any(s.id == root for s in steps)

    def test_sat_exit(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_SAT)
        assert run_cli("main", inp).returncode == 10

    def test_stdin_dash(self):
        p = run_cli("main", "-", stdin=write_qdimacs(F_SAT))
        assert p.returncode == 10

    def test_expansion_engine_agrees(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        p = run_cli("main", inp, "--engine", "expansion")
        assert p.returncode == 20

    def test_missing_file(self):
        p = run_cli("main", "no-such-file.qdimacs")
        assert p.returncode == 2
        assert "error:" in p.stderr

    def test_bad_qdimacs(self, tmp_path):
        inp = tmp_path / "bad.qdimacs"
        inp.write_text("p cnf 1 1\nnot a clause\n")
        assert run_cli("main", inp).returncode == 2


class TestPrep:
    def test_bundle_a_reduces_without_solving(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        out = tmp_path / "out.qdimacs"
        p = run_cli("main_prep", inp, "--bundle", "A", "-o", out)
        assert p.returncode == 0
        assert "universal_reduction" in p.stderr
        from qbfkit.formula import parse_qdimacs

        g = parse_qdimacs(out.read_text())
        assert g.matrix == ((1,), (-1,))

    def test_bundle_b_solves(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        p = run_cli("main_prep", inp, "--bundle", "B", "-o", tmp_path / "o")
        assert p.returncode == 20
        assert "solved UNSAT" in p.stderr

    def test_custom_bundle_file(self, tmp_path):
        cfg = tmp_path / "bundles.cfg"
        cfg.write_text("X = subsumption once\n")
        inp = write_formula(tmp_path / "f.qdimacs", F_SAT)
        p = run_cli(
            "main_prep", inp, "--bundles", cfg, "--bundle", "X", "-o", "-"
        )
        assert p.returncode == 0
        assert "passes 1" in p.stderr

    def test_unknown_bundle(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_SAT)
        assert run_cli("main_prep", inp, "--bundle", "Z").returncode == 2


class TestPipeline:
    def test_round_stream_and_fixpoint(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        out = tmp_path / "final.qdimacs"
        p = run_cli("main_pipeline", inp, "--seq", "AA", "-o", out)
        assert p.returncode == 0
        lines = [json.loads(l) for l in p.stdout.splitlines()]
        assert lines[-1] == {"outcome": "fixpoint"}
        rounds = lines[:-1]
        assert [r["round"] for r in rounds] == list(
            range(1, len(rounds) + 1)
        )
        for r in rounds:
            for s in r["steps"]:
                assert set(s) == {
                    "step", "kind", "applications", "failed", "seconds",
                }
        for a, b in zip(rounds, rounds[1:]):
            assert a["digest_after"] == b["digest_before"]
        assert out.exists()

    def test_solved_exit(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_SAT)
        p = run_cli("main_pipeline", inp, "--seq", "B")
        assert p.returncode == 10
        assert json.loads(p.stdout.splitlines()[-1])["outcome"] == "solved-sat"

    def test_external_step(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        p = run_cli(
            "main_pipeline", inp, "--seq", "XA", "--external", "X=cat"
        )
        assert p.returncode == 0
        first = json.loads(p.stdout.splitlines()[0])
        kinds = {s["step"]: s["kind"] for s in first["steps"]}
        assert kinds == {"X": "external", "A": "bundle"}

    def test_unknown_label(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_SAT)
        assert run_cli("main_pipeline", inp, "--seq", "AZ").returncode == 2


class TestBench:
    def corpus(self, tmp_path):
        root = tmp_path / "corpus"
        for i in range(6):
            fam = "easy" if i < 3 else "hard"
            f = random_pcnf(i, max_vars=6, max_clauses=12, max_blocks=3)
            path = root / fam / f"i{i}.qdimacs"
            path.parent.mkdir(parents=True, exist_ok=True)
            write_formula(path, f)
        return root

    def test_campaign_flow(self, tmp_path):
        root = self.corpus(tmp_path)
        registry = tmp_path / "registry.json"
        p = run_cli("main_bench", "register", root, "-o", registry)
        assert p.returncode == 0
        assert "6 instances in 2 families" in p.stderr
        assert len(json.loads(registry.read_text())["instances"]) == 6

        sample = tmp_path / "sample.json"
        p = run_cli(
            "main_bench", "sample", registry, "--k", "2", "--seed", "1",
            "-o", sample,
        )
        assert p.returncode == 0
        picked = json.loads(sample.read_text())
        assert len(picked) == 4
        rerun = run_cli(
            "main_bench", "sample", registry, "--k", "2", "--seed", "1"
        )
        assert json.loads(rerun.stdout) == picked

        wrapper = tmp_path / "wrapper.py"
        wrapper.write_text(SOLVER_WRAPPER)
        records = tmp_path / "records.jsonl"
        p = run_cli(
            "main_bench", "run", sample,
            "--tool", f"search={sys.executable} {wrapper} {{instance}}",
            "--time", "60", "--jobs", "2", "-o", records,
        )
        assert p.returncode == 0
        assert "4 new records" in p.stderr
        rows = [json.loads(l) for l in records.read_text().splitlines()]
        from qbfkit.formula import parse_qdimacs

        for r in rows:
            f = parse_qdimacs((root / r["instance"]).read_text())
            assert r["status"] == game_status(f)
        p = run_cli(
            "main_bench", "run", sample,
            "--tool", f"search={sys.executable} {wrapper} {{instance}}",
            "--time", "60", "-o", records,
        )
        assert "0 new records" in p.stderr

        p = run_cli("main_bench", "rank", records, "--time", "60")
        assert p.returncode == 0
        header, row = p.stdout.splitlines()
        assert header.split() == [
            "tool", "solved", "sat", "unsat", "unique", "avg_s",
            "total_s", "par_s",
        ]
        assert row.split()[0] == "search"
        assert row.split()[1] == "4"

        outdir = tmp_path / "reports"
        p = run_cli(
            "main_bench", "report", records, "--time", "60", "-o", outdir
        )
        assert p.returncode == 0
        for name in ("cactus.csv", "family.csv", "scores.csv"):
            assert (outdir / name).exists()

        p = run_cli("main_bench", "discrepancies", records)
        assert p.returncode == 0
        assert p.stdout == ""
        liar = dict(rows[0])
        liar["tool"] = "liar"
        liar["status"] = "SAT" if rows[0]["status"] == "UNSAT" else "UNSAT"
        liar["exit"] = 10 if liar["status"] == "SAT" else 20
        with records.open("a") as fh:
            fh.write(json.dumps(liar) + "\n")
        p = run_cli("main_bench", "discrepancies", records)
        assert p.returncode == 1
        assert rows[0]["instance"] in p.stdout

    def test_bestfoot(self, tmp_path):
        root = self.corpus(tmp_path)
        registry = tmp_path / "registry.json"
        run_cli("main_bench", "register", root, "-o", registry)
        sample = tmp_path / "sample.json"
        run_cli(
            "main_bench", "sample", registry, "--k", "1", "--seed", "2",
            "-o", sample,
        )
        wrapper = tmp_path / "wrapper.py"
        wrapper.write_text(SOLVER_WRAPPER)
        tool = f"search={sys.executable} {wrapper} {{instance}}"
        orig = tmp_path / "orig.jsonl"
        prep = tmp_path / "prep.jsonl"
        run_cli("main_bench", "run", sample, "--tool", tool, "-o", orig)
        run_cli("main_bench", "run", sample, "--tool", tool, "-o", prep)
        p = run_cli("main_bench", "bestfoot", orig, prep)
        assert p.returncode == 0
        assert p.stdout.splitlines()[1].split()[1] == "WANT"

        other = tmp_path / "other.jsonl"
        other.write_text(
            json.dumps(
                {
                    "tool": "t", "instance": "elsewhere", "family": "f",
                    "status": "SAT", "wall_s": 1.0, "mem_bytes": 0,
                    "exit": 10, "trial": 1,
                }
            )
            + "\n"
        )
        assert run_cli("main_bench", "bestfoot", orig, other).returncode == 2


class TestCert:
    def trace_file(self, tmp_path, f=F_UNSAT):
        sink = io.StringIO()
        solve_search(f, trace=sink)
        path = tmp_path / "proof.qrp"
        path.write_text(sink.getvalue())
        return path

    def test_check_accepts(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        trace = self.trace_file(tmp_path)
        p = run_cli("main_cert", "check", inp, trace)
        assert p.returncode == 0
        assert p.stdout.startswith("accepted refutation")
        p = run_cli("main_cert", "check", inp, trace, "--stream")
        assert p.returncode == 0

    def test_check_rejects(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        bad = tmp_path / "bad.qrp"
        bad.write_text("1 1 2 0 0\n2 1 0 1 5 0\nr refutation 2\n")
        p = run_cli("main_cert", "check", inp, bad)
        assert p.returncode == 1
        assert "rejected" in p.stdout
        assert "malformed-reference" in p.stdout

    def test_extract_validate_loop(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        trace = self.trace_file(tmp_path)
        cert = tmp_path / "proof.cert"
        p = run_cli("main_cert", "extract", inp, trace, "-o", cert)
        assert p.returncode == 0
        assert cert.read_text().startswith("p cert herbrand")
        p = run_cli("main_cert", "validate", inp, cert)
        assert p.returncode == 0
        assert p.stdout.startswith("validated exhaustive")

    def test_validate_refutes_tampered(self, tmp_path):
        inp = write_formula(tmp_path / "f.qdimacs", F_UNSAT)
        trace = self.trace_file(tmp_path)
        cert = tmp_path / "proof.cert"
        run_cli("main_cert", "extract", inp, trace, "-o", cert)
        cert.write_text(cert.read_text().replace("const 0", "const 1"))
        p = run_cli("main_cert", "validate", inp, cert)
        assert p.returncode == 1
        assert p.stdout.startswith("refuted")

    def test_validate_wrong_formula(self, tmp_path):
        unsat = write_formula(tmp_path / "u.qdimacs", F_UNSAT)
        sat = write_formula(tmp_path / "s.qdimacs", F_SAT)
        trace = self.trace_file(tmp_path)
        cert = tmp_path / "proof.cert"
        run_cli("main_cert", "extract", unsat, trace, "-o", cert)
        p = run_cli("main_cert", "validate", sat, cert)
        assert p.returncode == 1
        assert "digest" in p.stderr

    def test_missing_subcommand(self):
        p = run_cli("main_cert")
        assert p.returncode == 2
