"""Dependency classification checks.

The odd-cycle test is compared against a brute-force oracle that walks
every simple cycle of the predicate graph and counts its negative edges.
"""

import pytest

from aspmagic import (
    DependencyEdge,
    ScStatus,
    answer_sets,
    check_super_consistent,
    dependency_graph,
    is_odd_cycle_free,
    is_stratified,
    parse_program,
    random_program,
    sc_candidate_atoms,
)


def _odd_simple_cycle_exists(p) -> bool:
    dg = dependency_graph(p)
    adj: dict[str, list[tuple[str, int]]] = {}
    for e in dg.edges:
        adj.setdefault(e.source, []).append((e.target, 1 if e.negative else 0))

    def walk(start: str, node: str, parity: int, visited: frozenset) -> bool:
        for nxt, flip in adj.get(node, ()):
            if nxt == start and (parity + flip) % 2 == 1:
                return True
            if nxt not in visited and nxt != start:
                if walk(start, nxt, parity + flip, visited | {nxt}):
                    return True
        return False

    return any(walk(n, n, 0, frozenset({n})) for n in dg.nodes)


def test_dependency_graph_of_ancestry(ancestry):
    dg = dependency_graph(ancestry)
    assert set(dg.nodes) == {"father", "brother", "ancestor", "related"}
    assert DependencyEdge("father", "brother", True) in dg.edges
    assert DependencyEdge("ancestor", "father", False) in dg.edges
    assert DependencyEdge("ancestor", "ancestor", False) in dg.edges
    assert not any(e.source == "related" for e in dg.edges)


def test_disjunctive_heads_all_depend_on_the_body():
    p = parse_program("e(a). q(X) v p(X) :- e(X).")
    dg = dependency_graph(p)
    assert DependencyEdge("q", "e", False) in dg.edges
    assert DependencyEdge("p", "e", False) in dg.edges


def test_even_loop_is_odd_cycle_free_but_not_stratified(ancestry):
    assert not is_stratified(ancestry)
    assert is_odd_cycle_free(ancestry)


def test_classic_classifications():
    assert is_stratified(parse_program("e(a). p(X) :- e(X), not q(X). q(X) :- e(X)."))
    assert not is_odd_cycle_free(parse_program("a :- not a."))
    assert is_odd_cycle_free(parse_program("a :- not b. b :- not a."))
    three = parse_program("p :- not q. q :- not r. r :- not p.")
    assert not is_odd_cycle_free(three)
    assert not is_stratified(three)


def test_guarded_pair_is_not_odd_cycle_free(guarded_pair):
    assert not is_odd_cycle_free(guarded_pair)
    assert not is_stratified(guarded_pair)


def test_choice_with_odd_loop_classification(choice_with_odd_loop):
    assert not is_odd_cycle_free(choice_with_odd_loop)


@pytest.mark.parametrize("profile", ["odd_cycle_free", "arbitrary", "stratified"])
@pytest.mark.parametrize("seed", range(25))
def test_odd_cycle_check_matches_cycle_enumeration(profile, seed):
    p = random_program(seed, profile)
    assert is_odd_cycle_free(p) == (not _odd_simple_cycle_exists(p))


@pytest.mark.parametrize(
    "text, odd",
    [
        ("a :- b, not c. b :- a. c :- not a.", False),
        ("a :- b. b :- not a.", True),
        ("a :- not b. b :- not c. c :- not d. d :- not a.", False),
        ("p :- q. q :- p.", False),
        ("p :- not q, not p.", True),
    ],
)
def test_odd_cycle_handpicked(text, odd):
    p = parse_program(text)
    assert is_odd_cycle_free(p) == (not odd)
    assert _odd_simple_cycle_exists(p) == odd


@pytest.mark.parametrize("seed", range(15))
def test_stratified_profile_and_inclusion(seed):
    p = random_program(seed, "stratified")
    assert is_stratified(p)
    assert is_odd_cycle_free(p)  # class inclusion


def test_sc_shortcut_on_even_cycles(ancestry):
    verdict = check_super_consistent(ancestry)
    assert verdict.status is ScStatus.SUPER_CONSISTENT
    assert verdict.via_shortcut


def test_sc_full_enumeration_on_two_atoms(guarded_pair):
    verdict = check_super_consistent(guarded_pair, use_shortcut=False)
    assert verdict.status is ScStatus.SUPER_CONSISTENT
    assert not verdict.via_shortcut
    assert verdict.sets_tested == 4  # subsets of {a, b}


def test_sc_counterexample_found(choice_with_odd_loop):
    verdict = check_super_consistent(choice_with_odd_loop)
    assert verdict.status is ScStatus.NOT_SUPER_CONSISTENT
    assert verdict.counterexample is not None
    assert {str(a) for a in verdict.counterexample} == {"q(a)"}
    assert verdict.sets_tested == 11
    # the counterexample really breaks the program
    broken = choice_with_odd_loop.with_facts(verdict.counterexample)
    assert not answer_sets(broken).answer_sets


def test_sc_budget_is_a_verdict(choice_with_odd_loop):
    verdict = check_super_consistent(choice_with_odd_loop, budget=3)
    assert verdict.status is ScStatus.BUDGET_EXCEEDED
    assert verdict.sets_tested == 3
    assert verdict.counterexample is None


def test_sc_candidate_atoms_cover_rule_variables(choice_with_odd_loop):
    atoms = sc_candidate_atoms(choice_with_odd_loop)
    # four unary predicates over a plus one witness constant per rule variable
    assert len(atoms) == 4 * 3
    names = {a.args[0].name for a in atoms}
    assert names == {"a", "xi_1", "xi_2"}
    assert list(atoms) == sorted(atoms)


def test_sc_witness_constants_skip_collisions():
    p = parse_program("e(xi_1). p(X) :- e(X).")
    names = {a.args[0].name for a in sc_candidate_atoms(p)}
    assert "xi_1" in names  # the program's own constant
    assert "xi_2" in names  # the fresh witness avoided the clash
    assert len(names) == 2


@pytest.mark.parametrize("seed", range(8))
def test_ocf_programs_survive_budgeted_fact_injection(seed):
    """No counterexample may surface for an odd-cycle-free program, no
    matter how far the budget gets."""
    p = random_program(seed, "odd_cycle_free")
    verdict = check_super_consistent(p, budget=120, use_shortcut=False)
    assert verdict.status is not ScStatus.NOT_SUPER_CONSISTENT
