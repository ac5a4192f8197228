"""Instance generation, the program corpus drivers and the differential
check and benchmark machinery."""

import json

import pytest

from aspmagic import (
    Atom,
    BenchmarkCell,
    ProgramError,
    Substitution,
    benchmark_json,
    benchmark_table,
    check_equivalence,
    const,
    gen_related_instance,
    is_odd_cycle_free,
    is_stratified,
    parse_query,
    random_edb,
    random_program,
    random_query,
    run_benchmark,
    universe,
)


# ------------------------------------------------------------ genealogy grid


@pytest.mark.parametrize("n", [1, 2, 3])
def test_grid_instance_counts(n):
    inst = gen_related_instance(n)
    assert len(inst.persons) == n * n
    assert len(inst.facts) == 2 * n * (n - 1)
    assert all(r.is_fact for r in inst.facts)
    mentioned = {t.name for t in universe(inst.program)}
    if n >= 2:
        assert mentioned == set(inst.persons)


def test_grid_query_spans_the_diagonal():
    inst = gen_related_instance(3)
    assert str(inst.query) == "ancestor(p_1_1,p_3_3)?"
    assert inst.program.predicates["related"] == 2


def test_grid_rejects_bad_arguments():
    with pytest.raises(ValueError, match="at least 1"):
        gen_related_instance(0)
    with pytest.raises(ValueError, match="unknown pattern"):
        gen_related_instance(2, pattern="torus")


# ----------------------------------------------------------------- fact sets


def test_random_edb_density_extremes():
    p = random_program(0, "stratified")
    assert random_edb(p, 7, 0.0) == frozenset()
    full = random_edb(p, 7, 1.0)
    assert full
    assert all(a.predicate in p.edb_predicates for a in full)
    assert all(not a.variables() for a in full)


def test_random_edb_is_deterministic_per_seed():
    p = random_program(0, "stratified")
    assert random_edb(p, 3, 0.5) == random_edb(p, 3, 0.5)
    draws = {random_edb(p, s, 0.5) for s in range(6)}
    assert len(draws) > 1


def test_random_edb_brings_fresh_constants():
    p = random_program(0, "stratified")
    names = {t.name for a in random_edb(p, 1, 1.0) for t in a.args}
    assert {"f1", "f2"} <= names
    only_old = {
        t.name for a in random_edb(p, 1, 1.0, fresh_constants=0) for t in a.args
    }
    assert not {n for n in only_old if n.startswith("f")}


def test_random_edb_max_facts_thins_the_draw():
    p = random_program(0, "stratified")
    capped = random_edb(p, 1, 1.0, max_facts=3)
    assert len(capped) == 3
    assert capped <= random_edb(p, 1, 1.0)


def test_random_edb_needs_an_extensional_predicate(guarded_pair):
    with pytest.raises(ProgramError, match="no extensional"):
        random_edb(guarded_pair, 0, 0.5)


# -------------------------------------------------------------- program pool


def test_random_program_is_deterministic():
    assert random_program(5, "arbitrary") == random_program(5, "arbitrary")
    assert random_program(5, "arbitrary") != random_program(6, "arbitrary")


def test_random_program_rejects_unknown_profile():
    with pytest.raises(ValueError, match="unknown profile"):
        random_program(0, "total")


@pytest.mark.parametrize("seed", range(15))
def test_profiles_deliver_their_class(seed):
    assert is_stratified(random_program(seed, "stratified"))
    assert is_odd_cycle_free(random_program(seed, "odd_cycle_free"))


@pytest.mark.parametrize("profile", ["stratified", "odd_cycle_free", "arbitrary"])
def test_generated_programs_stay_small(profile):
    for seed in range(10):
        p = random_program(seed, profile)
        assert len(p.rules) <= 12
        assert set(p.predicates) <= {"g1", "g2", "p1", "p2"}
        assert all(arity <= 2 for arity in p.predicates.values())
        assert p.edb_predicates, "always at least one fact predicate"


def test_random_query_targets_an_intensional_predicate():
    p = random_program(2, "odd_cycle_free")
    q = random_query(p, 4)
    assert q == random_query(p, 4)
    assert q.atom.predicate in p.idb_predicates
    assert q.atom.arity == p.predicates[q.atom.predicate]


def test_random_query_varies_with_the_seed():
    p = random_program(2, "odd_cycle_free")
    assert len({random_query(p, s) for s in range(8)}) > 1


# ------------------------------------------------------- differential checks


def test_equivalence_holds_on_the_genealogy_program(ancestry):
    q = parse_query("ancestor(p1,X)?")
    report = check_equivalence(ancestry, q, trials=3, seed=1)
    assert report.ok
    assert report.fact_sets_tested == 3
    assert not report.skipped
    assert len(report.ground_rule_counts) == 3
    assert len(report.timings_ms) == 3
    assert all(a > 0 and b > 0 for a, b in report.ground_rule_counts)
    assert len(report.program_id) == 12


def test_equivalence_flags_the_odd_loop_program(choice_with_odd_loop):
    # dropping the unqueried constraint-like rule changes the brave answer
    q = parse_query("q(a)?")
    report = check_equivalence(choice_with_odd_loop, q, trials=1, density=0.0)
    assert not report.ok
    (mm,) = report.brave_mismatches
    assert mm.only_original == ()
    assert mm.only_rewritten == (Substitution(),)
    assert report.cautious_mismatches == ()


def test_equivalence_with_no_trials(ancestry):
    report = check_equivalence(ancestry, parse_query("ancestor(p1,X)?"), trials=0)
    assert report.ok
    assert report.fact_sets_tested == 0
    assert report.ground_rule_counts == ()


def test_equivalence_counts_capped_trials(ancestry):
    q = parse_query("ancestor(p1,X)?")
    report = check_equivalence(ancestry, q, trials=2, candidate_cap=1)
    assert report.fact_sets_tested == 0
    assert len(report.skipped) == 2
    assert "trial 0" in report.skipped[0]


def test_equivalence_report_is_reproducible(ancestry):
    q = parse_query("ancestor(p1,X)?")
    a = check_equivalence(ancestry, q, trials=2, seed=9)
    b = check_equivalence(ancestry, q, trials=2, seed=9)
    assert a.program_id == b.program_id
    assert a.ground_rule_counts == b.ground_rule_counts
    assert a.brave_mismatches == b.brave_mismatches


# ----------------------------------------------------------------- benchmark


def test_run_benchmark_small_grid():
    cells = run_benchmark([1, 2], mode="both")
    assert len(cells) == 4
    assert [c.status for c in cells] == ["ok"] * 4
    by_key = {(c.n, c.mode): c for c in cells}
    assert by_key[(1, "plain")].answer == "no"
    assert by_key[(1, "dms")].answer == "no"
    assert by_key[(2, "plain")].answer == "yes"
    assert by_key[(2, "dms")].answer == "yes"
    for c in cells:
        assert c.time_ms is not None and c.time_ms >= 0
        assert c.ground_rules > 0
        assert c.candidates > 0


def test_run_benchmark_counts_are_stable_across_reps():
    cells = run_benchmark([1], mode="plain", repetitions=2)
    assert len(cells) == 2
    assert cells[0].ground_rules == cells[1].ground_rules
    assert cells[0].candidates == cells[1].candidates
    assert cells[0].answer == cells[1].answer


def test_run_benchmark_timeout_row():
    (cell,) = run_benchmark([3], mode="plain", timeout=0.05)
    assert cell.status == "timeout"
    assert cell.time_ms is None
    assert cell.answer is None


def test_run_benchmark_rejects_unknown_mode():
    with pytest.raises(ValueError, match="unknown mode"):
        run_benchmark([1], mode="fast")


def test_benchmark_table_format():
    cells = (
        BenchmarkCell(1, "plain", 0, "ok", 1.25, 10, 3, "no"),
        BenchmarkCell(3, "dms", 0, "timeout"),
    )
    lines = benchmark_table(cells).splitlines()
    assert lines[0] == "n,mode,time_ms,ground_rules,candidates,answer"
    assert lines[1] == "1,plain,1.2,10,3,no"
    assert lines[2] == "3,dms,,,,"


def test_benchmark_json_round_trips():
    cells = (BenchmarkCell(2, "dms", 1, "ok", 4.0, 44, 9, "yes"),)
    payload = json.loads(benchmark_json(cells))
    assert "assumption" in payload["instance_pattern"]
    assert payload["cells"][0]["n"] == 2
    assert payload["cells"][0]["answer"] == "yes"


def test_grid_program_mentions_only_related_facts():
    inst = gen_related_instance(2)
    edb_atoms = {r.head[0] for r in inst.facts}
    assert Atom("related", (const("p_1_1"), const("p_1_2"))) in edb_atoms
    assert all(a.predicate == "related" for a in edb_atoms)
