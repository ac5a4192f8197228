"""Predicate dependency analysis and consistency guarantees.

The classes checked here form a chain: programs with no recursion through
negation, programs whose dependency cycles all cross an even number of
negative edges, and programs that stay consistent under every added set of
facts.  Membership in the second class is decidable from the dependency
graph alone and implies membership in the third, which is what the
rewriting relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations, product

import networkx as nx

from .semantics import (
    CANDIDATE_CAP_DEFAULT,
    GROUND_CAP_DEFAULT,
    answer_sets,
)
from .syntax import Atom, Program, Term, universe

__all__ = [
    "DependencyEdge",
    "DependencyGraph",
    "dependency_graph",
    "is_stratified",
    "is_odd_cycle_free",
    "ScStatus",
    "ScVerdict",
    "sc_candidate_atoms",
    "check_super_consistent",
]


@dataclass(frozen=True, order=True)
class DependencyEdge:
    """Head predicate ``source`` depends on body predicate ``target``."""

    source: str
    target: str
    negative: bool


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[str, ...]
    edges: tuple[DependencyEdge, ...]


def dependency_graph(p: Program) -> DependencyGraph:
    edges: dict[DependencyEdge, None] = {}
    for rule in p.rules:
        heads = {a.predicate for a in rule.head}
        for h in sorted(heads):
            for a in rule.pos_body:
                edges.setdefault(DependencyEdge(h, a.predicate, False))
            for a in rule.neg_body:
                edges.setdefault(DependencyEdge(h, a.predicate, True))
    return DependencyGraph(
        nodes=tuple(sorted(p.predicates)), edges=tuple(sorted(edges))
    )


def _scc_index(nodes, edges) -> dict:
    g = nx.DiGraph()
    g.add_nodes_from(nodes)
    g.add_edges_from(edges)
    index = {}
    for i, scc in enumerate(nx.strongly_connected_components(g)):
        for node in scc:
            index[node] = i
    return index


def is_stratified(p: Program) -> bool:
    """True when no dependency cycle crosses a negative edge."""
    dg = dependency_graph(p)
    scc = _scc_index(dg.nodes, [(e.source, e.target) for e in dg.edges])
    return not any(
        e.negative and scc[e.source] == scc[e.target] for e in dg.edges
    )


def is_odd_cycle_free(p: Program) -> bool:
    """True when every dependency cycle crosses an even number of negative
    edges.

    Each predicate is split into an even and an odd copy and every edge
    flips the parity exactly when it is negative; an odd cycle through a
    predicate exists precisely when its two copies share a strongly
    connected component."""
    dg = dependency_graph(p)
    nodes = [(n, parity) for n in dg.nodes for parity in (0, 1)]
    edges = []
    for e in dg.edges:
        flip = 1 if e.negative else 0
        for parity in (0, 1):
            edges.append(((e.source, parity), (e.target, parity ^ flip)))
    scc = _scc_index(nodes, edges)
    return not any(scc[(n, 0)] == scc[(n, 1)] for n in dg.nodes)


class ScStatus(Enum):
    SUPER_CONSISTENT = "super_consistent"
    NOT_SUPER_CONSISTENT = "not_super_consistent"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class ScVerdict:
    status: ScStatus
    counterexample: frozenset[Atom] | None = None
    sets_tested: int = 0
    via_shortcut: bool = False


def _witness_constants(p: Program) -> list[Term]:
    """The program's constants plus one fresh constant per rule variable.

    Facts added to the program can only interact with a rule through the
    constants it mentions or through values a variable may take; one fresh
    constant per variable occurrence, with all rules renamed apart, is
    enough to expose any inconsistency that some larger fact set would."""
    taken = {t.name for t in universe(p)}
    fresh: list[Term] = []
    counter = 0
    for rule in p.rules:
        for _ in sorted(rule.variables()):
            counter += 1
            name = f"xi_{counter}"
            while name in taken:
                counter += 1
                name = f"xi_{counter}"
            taken.add(name)
            fresh.append(Term(name))
    return sorted(universe(p) | set(fresh))


def sc_candidate_atoms(p: Program) -> tuple[Atom, ...]:
    """Every atom a hostile fact set could contain, in sorted order."""
    consts = _witness_constants(p)
    atoms = []
    for pred, arity in sorted(p.predicates.items()):
        for args in product(consts, repeat=arity):
            atoms.append(Atom(pred, args))
    return tuple(sorted(atoms))


def check_super_consistent(
    p: Program,
    budget: int = 10_000,
    *,
    use_shortcut: bool = True,
    ground_cap: int = GROUND_CAP_DEFAULT,
    candidate_cap: int = CANDIDATE_CAP_DEFAULT,
) -> ScVerdict:
    """Decide whether ``p`` stays consistent under every added fact set.

    With the shortcut enabled, an even-cycled dependency graph settles the
    question immediately.  Otherwise fact sets over the witness constants
    are enumerated by ascending size; ``budget`` bounds how many are tested
    before giving up."""
    if use_shortcut and is_odd_cycle_free(p):
        return ScVerdict(ScStatus.SUPER_CONSISTENT, via_shortcut=True)
    candidates = sc_candidate_atoms(p)
    tested = 0
    for size in range(len(candidates) + 1):
        for combo in combinations(candidates, size):
            if tested >= budget:
                return ScVerdict(ScStatus.BUDGET_EXCEEDED, sets_tested=tested)
            tested += 1
            extended = p.with_facts(combo)
            report = answer_sets(
                extended, ground_cap=ground_cap, candidate_cap=candidate_cap
            )
            if not report.answer_sets:
                return ScVerdict(
                    ScStatus.NOT_SUPER_CONSISTENT,
                    counterexample=frozenset(combo),
                    sets_tested=tested,
                )
    return ScVerdict(ScStatus.SUPER_CONSISTENT, sets_tested=tested)
