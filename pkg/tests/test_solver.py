"""Search and expansion solvers against the brute-force game oracle."""

import io

import pytest

from qbfkit.expansion import expand_universal, solve_expansion
from qbfkit.formula import EXISTS, FORALL, PCNF, QuantifierBlock, parse_qdimacs
from qbfkit.generate import random_pcnf
from qbfkit.solver import (
    ResolutionError,
    SolveOutcome,
    Solver,
    cube_resolve,
    existential_reduce,
    qresolve,
    solve_search,
    universal_reduce,
)
from qbfkit.trace import REFUTATION, SATISFACTION, parse_trace

from oracles import SAT, UNSAT, game_status


def pcnf(prefix, matrix):
    return PCNF(
        tuple(QuantifierBlock(q, tuple(vs)) for q, vs in prefix),
        tuple(tuple(c) for c in matrix),
    )


F_SAT = pcnf([(FORALL, [1]), (EXISTS, [2])], [[1, 2], [-1, -2]])
F_UNSAT = pcnf([(EXISTS, [1]), (FORALL, [2])], [[1, 2], [-1, 2]])


class TestReductionAndResolution:
    def test_universal_reduce_drops_trailing_universals(self):
        f = pcnf([(EXISTS, [1]), (FORALL, [2]), (EXISTS, [3])], [[1]])
        assert universal_reduce((1, 2), f) == (1,)
        assert universal_reduce((1, -2, 3), f) == (1, -2, 3)
        assert universal_reduce((-2,), f) == ()

    def test_universal_reduce_no_existential_empties_clause(self):
        f = pcnf([(FORALL, [1, 2])], [[1, 2]])
        assert universal_reduce((1, -2), f) == ()

    def test_universal_reduce_idempotent(self):
        f = pcnf([(EXISTS, [1]), (FORALL, [2]), (EXISTS, [3])], [[1]])
        for clause in [(1, 2), (1, -2, 3), (-1,), (2,)]:
            once = universal_reduce(clause, f)
            assert universal_reduce(once, f) == once

    def test_universal_reduce_rejects_tautology(self):
        f = pcnf([(EXISTS, [1]), (FORALL, [2])], [[1]])
        with pytest.raises(ValueError):
            universal_reduce((2, -2), f)

    def test_existential_reduce_dual(self):
        f = pcnf([(FORALL, [1]), (EXISTS, [2]), (FORALL, [3])], [[1]])
        assert existential_reduce((1, 2), f) == (1,)
        assert existential_reduce((1, -2, 3), f) == (1, -2, 3)
        assert existential_reduce((2,), f) == ()

    def test_qresolve_basic(self):
        f = pcnf([(EXISTS, [1, 2, 3])], [[1]])
        assert qresolve((1, 2), (-1, 3), 1, f) == (2, 3)

    def test_qresolve_reduces_resolvent(self):
        f = pcnf([(EXISTS, [1, 2]), (FORALL, [3])], [[1]])
        assert qresolve((1, 3), (-1, 3), 1, f) == ()

    def test_qresolve_rejects_universal_pivot(self):
        f = pcnf([(EXISTS, [1]), (FORALL, [2]), (EXISTS, [3])], [[1]])
        with pytest.raises(ResolutionError) as e:
            qresolve((1, 2), (-2, 3), 2, f)
        assert e.value.reason == "universal-pivot"

    def test_qresolve_rejects_missing_pivot(self):
        f = pcnf([(EXISTS, [1, 2, 3])], [[1]])
        with pytest.raises(ResolutionError) as e:
            qresolve((1, 2), (1, 3), 1, f)
        assert e.value.reason == "pivot-missing"

    def test_qresolve_rejects_tautological_resolvent(self):
        f = pcnf([(EXISTS, [1, 2, 3])], [[1]])
        with pytest.raises(ResolutionError) as e:
            qresolve((1, 2, 3), (-1, -2), 1, f)
        assert e.value.reason == "tautological-resolvent"

    def test_cube_resolve_dual(self):
        f = pcnf([(FORALL, [1]), (EXISTS, [2]), (FORALL, [3])], [[1]])
        assert cube_resolve((1, 2), (-1, 2), 1, f) == ()
        assert cube_resolve((1, 2, 3), (-1, 2, 3), 1, f) == (2, 3)
        with pytest.raises(ResolutionError) as e:
            cube_resolve((1, 2), (-1, -2), 1, f)
        assert e.value.reason == "contradictory-cube"


class TestSpecimens:
    def test_sat_specimen(self):
        out = solve_search(F_SAT)
        assert out.status == "SAT"
        assert out.reason_for_unknown == "none"

    def test_unsat_specimen(self):
        out = solve_search(F_UNSAT)
        assert out.status == "UNSAT"

    def test_empty_matrix_is_sat(self):
        assert solve_search(pcnf([(EXISTS, [1])], [])).status == "SAT"

    def test_empty_clause_is_unsat(self):
        assert solve_search(pcnf([(EXISTS, [1])], [[]])).status == "UNSAT"

    def test_propositional_corner(self):
        assert solve_search(pcnf([(EXISTS, [1])], [[1], [-1]])).status == "UNSAT"
        assert solve_search(pcnf([(FORALL, [1])], [[1, -1]])).status == "SAT"

    def test_parse_and_solve(self):
        f = parse_qdimacs("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n")
        assert solve_search(f).status == "SAT"


class TestTraces:
    def test_unsat_trace_shape(self):
        sink = io.StringIO()
        out = solve_search(F_UNSAT, trace=sink)
        assert out.status == "UNSAT"
        steps, kind, root = parse_trace(sink.getvalue())
        assert kind == REFUTATION
        by_id = {s.id: s for s in steps}
        assert by_id[root].literals == ()
        inputs = [s for s in steps if not s.antecedents]
        matrix = {frozenset(c) for c in F_UNSAT.matrix}
        assert all(frozenset(s.literals) in matrix for s in inputs)

    def test_sat_trace_shape(self):
        sink = io.StringIO()
        out = solve_search(F_SAT, trace=sink)
        assert out.status == "SAT"
        steps, kind, root = parse_trace(sink.getvalue())
        assert kind == SATISFACTION
        by_id = {s.id: s for s in steps}
        assert by_id[root].literals == ()
        for s in steps:
            if not s.antecedents:
                assn = {abs(l): l > 0 for l in s.literals}
                for c in F_SAT.matrix:
                    assert any(assn.get(abs(l)) == (l > 0) for l in c)

    def test_trace_ids_and_references_are_ordered(self):
        sink = io.StringIO()
        solve_search(F_SAT, trace=sink)
        steps, _, _ = parse_trace(sink.getvalue())
        seen = set()
        for s in steps:
            assert all(a in seen for a in s.antecedents)
            seen.add(s.id)


class TestAgainstOracle:
    def test_small_random_suite(self):
        for seed in range(300):
            f = random_pcnf(seed, max_vars=6, max_clauses=14, max_blocks=3)
            expect = game_status(f)
            got = solve_search(f, seed=seed).status
            assert got == expect, f"seed {seed}"

    def test_deeper_prefixes(self):
        for seed in range(150):
            f = random_pcnf(10_000 + seed, max_vars=8, max_clauses=18, max_blocks=5)
            assert solve_search(f).status == game_status(f), f"seed {seed}"

    def test_seed_only_changes_the_path(self):
        for seed in range(40):
            f = random_pcnf(777 + seed, max_vars=7, max_clauses=16, max_blocks=4)
            expect = game_status(f)
            for s in (0, 1, 2):
                assert solve_search(f, seed=s).status == expect

    def test_restarts_do_not_change_answers(self):
        for seed in range(60):
            f = random_pcnf(52_000 + seed, max_vars=7, max_clauses=16, max_blocks=4)
            out = solve_search(f, restarts=True)
            assert out.status == game_status(f), f"seed {seed}"


class TestLearnedObjects:
    def test_learned_clauses_preserve_status(self):
        for seed in range(80):
            f = random_pcnf(31_000 + seed, max_vars=6, max_clauses=14, max_blocks=3)
            s = Solver(f)
            out = s.run()
            assert out.status == game_status(f)
            for learned in s.learned_clauses:
                g = PCNF(f.prefix, f.matrix + (learned,), max_var=f.max_var)
                assert game_status(g) == game_status(f), f"seed {seed}: {learned}"

    def test_learned_clauses_never_tautological(self):
        for seed in range(80):
            f = random_pcnf(47_000 + seed, max_vars=7, max_clauses=16, max_blocks=4)
            s = Solver(f)
            s.run()
            for learned in s.learned_clauses:
                assert not any(-l in learned for l in learned)
            for cube in s.learned_cubes:
                assert not any(-l in cube for l in cube)


class TestLimits:
    def test_timeout_reports_unknown(self):
        f = random_pcnf(5, max_vars=8, max_clauses=20, max_blocks=4)
        out = solve_search(f, time_limit=0.0, check_every=1)
        assert out.status == "UNKNOWN"
        assert out.reason_for_unknown == "timeout"

    def test_memout_reports_unknown(self):
        for seed in range(50):
            f = random_pcnf(90_000 + seed, max_vars=8, max_clauses=20, max_blocks=4)
            out = solve_search(f, memory_limit=1, check_every=1)
            if out.status == "UNKNOWN":
                assert out.reason_for_unknown == "memout"
                break
        else:
            pytest.fail("no instance needed learning")

    def test_outcome_validation(self):
        with pytest.raises(ValueError):
            SolveOutcome("MAYBE", 0.0)
        with pytest.raises(ValueError):
            SolveOutcome("SAT", 0.0, "timeout")


class TestPropagateOperation:
    def test_unit_and_conflict(self):
        f = pcnf([(EXISTS, [1, 2])], [[1], [-1, 2], [-2, -1]])
        s = Solver(f)
        verdict, detail = s.propagate()
        assert verdict == "conflict"
        assert {abs(l) for l, _, _ in s.trail} == {1, 2}

    def test_weak_unit_skips_universal_remainder(self):
        f = pcnf(
            [(EXISTS, [1]), (FORALL, [2]), (EXISTS, [3])],
            [[1, 2, 3], [1, -2, 3]],
        )
        s = Solver(f)
        s._assign(-1, 0, None)
        s._assign(-3, 0, None)
        verdict, _ = s.propagate()
        assert verdict == "ok"
        assert 2 not in s.value

    def test_pure_literal_waits_for_its_block(self):
        f = pcnf(
            [(EXISTS, [1, 2]), (FORALL, [3]), (EXISTS, [4])],
            [[1, 2, 3, 4], [-1, -2, 3, -4]],
        )
        s = Solver(f)
        verdict, _ = s.propagate()
        assert verdict == "ok"
        assert s.trail == []
        assert 3 not in s.value

    def test_solution_on_satisfied_matrix(self):
        f = pcnf([(EXISTS, [1, 2])], [[1, 2]])
        s = Solver(f)
        verdict, detail = s.propagate()
        assert verdict == "solution"
        assert detail[0] == "matrix"


class TestExpansion:
    def test_expand_universal_specimen(self):
        g = expand_universal(F_SAT, 1)
        assert all(b.quantifier == EXISTS for b in g.prefix)
        assert solve_expansion(F_SAT).status == "SAT"

    def test_expand_renames_inner_existentials_only(self):
        f = pcnf(
            [(EXISTS, [1]), (FORALL, [2]), (EXISTS, [3])],
            [[1, 2, 3], [-1, -2, -3]],
        )
        g = expand_universal(f, 2)
        inner = [v for b in g.prefix if b.quantifier == EXISTS for v in b.variables]
        assert 1 in inner and 3 in inner and f.max_var + 1 in inner

    def test_expansion_agrees_with_oracle(self):
        for seed in range(200):
            f = random_pcnf(64_000 + seed, max_vars=7, max_clauses=16, max_blocks=4)
            out = solve_expansion(f)
            assert out.status == game_status(f), f"seed {seed}"

    def test_expansion_memout(self):
        f = random_pcnf(3, max_vars=8, max_clauses=20, max_blocks=4)
        out = solve_expansion(f, memory_limit=0)
        if any(b.quantifier == FORALL for b in f.prefix):
            assert out.status == "UNKNOWN"
            assert out.reason_for_unknown == "memout"

    def test_both_engines_agree(self):
        for seed in range(150):
            f = random_pcnf(71_000 + seed, max_vars=7, max_clauses=16, max_blocks=4)
            assert solve_search(f).status == solve_expansion(f).status, f"seed {seed}"
