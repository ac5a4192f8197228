"""Reference evaluation: grounding, reducts, answer sets, query answering.

Two independent routes compute answer sets.  The primary one branches over
the atoms that occur in negative bodies, keeps monotone lower and upper
bounds to cut hopeless branches early, and enumerates the minimal models of
the positive remainder at each leaf.  The cross-check route enumerates
candidate interpretations outright and accepts those that are models
containing no nonempty unfounded subset.  Both are exhaustive and
deterministic; neither is meant to compete with a real solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Iterable, Mapping, Sequence

from .rewriter import AdornedPredicate, dms_with_details, magic_atom, split_magic_name
from .syntax import (
    Atom,
    Interpretation,
    Program,
    ProgramError,
    Query,
    Rule,
    Term,
    base,
    universe,
)

__all__ = [
    "SolverCapError",
    "GroundingTooLarge",
    "CandidateSpaceTooLarge",
    "GROUND_CAP_DEFAULT",
    "CANDIDATE_CAP_DEFAULT",
    "GroundProgram",
    "SolveMethod",
    "AnswerSetReport",
    "Substitution",
    "ground",
    "reduct",
    "is_model",
    "minimal_models",
    "answer_sets",
    "is_unfounded_set",
    "answer_sets_via_unfounded",
    "substitutions_brave",
    "substitutions_cautious",
    "brave",
    "cautious",
    "killed_atoms",
    "magic_variant",
]

GROUND_CAP_DEFAULT = 10**6
CANDIDATE_CAP_DEFAULT = 2**22


class SolverCapError(Exception):
    """A configured resource cap would be exceeded."""


class GroundingTooLarge(SolverCapError):
    pass


class CandidateSpaceTooLarge(SolverCapError):
    pass


class SolveMethod(Enum):
    REDUCT_MINIMALITY = "ReductMinimality"
    UNFOUNDED_FREE = "UnfoundedFree"


@dataclass(frozen=True, eq=False)
class GroundProgram:
    """Ground rules together with the program they came from."""

    rules: tuple[Rule, ...]
    source: Program

    def __post_init__(self) -> None:
        for r in self.rules:
            if r.variables():
                raise ProgramError(f"ground program contains variables: {r}")


def ground(p: Program, ground_cap: int = GROUND_CAP_DEFAULT) -> GroundProgram:
    """All instances of the rules of ``p`` over its universe.

    The instance count is bounded before any instance is materialized;
    crossing ``ground_cap`` raises :class:`GroundingTooLarge`.
    """
    terms = sorted(universe(p))
    total = 0
    for rule in p.rules:
        total += len(terms) ** len(rule.variables())
        if total > ground_cap:
            raise GroundingTooLarge(
                f"grounding needs more than {ground_cap} instances"
            )
    out: dict[Rule, None] = {}
    for rule in p.rules:
        rule_vars = sorted(rule.variables())
        if not rule_vars:
            out.setdefault(rule)
            continue
        for combo in product(terms, repeat=len(rule_vars)):
            binding = dict(zip(rule_vars, combo))
            out.setdefault(rule.substitute(binding))
    return GroundProgram(rules=tuple(out), source=p)


def reduct(g: GroundProgram, i: Interpretation) -> GroundProgram:
    """The reduct of ``g`` by ``i``: rules whose negative body meets ``i``
    are dropped, the negative bodies of the rest are stripped."""
    kept = []
    for rule in g.rules:
        if any(a in i for a in rule.neg_body):
            continue
        kept.append(Rule(rule.head, rule.pos_body))
    return GroundProgram(rules=tuple(kept), source=g.source)


def is_model(i: Interpretation, g: GroundProgram) -> bool:
    """Whether every rule with a true body has a true head atom."""
    for rule in g.rules:
        if not all(a in i for a in rule.pos_body):
            continue
        if any(a in i for a in rule.neg_body):
            continue
        if not any(a in i for a in rule.head):
            return False
    return True


@dataclass(frozen=True)
class AnswerSetReport:
    answer_sets: frozenset[Interpretation]
    candidates_examined: int
    method: SolveMethod


class _Budget:
    """Counts candidate states and enforces the configured cap."""

    def __init__(self, cap: int) -> None:
        self.cap = cap
        self.spent = 0

    def spend(self, amount: int = 1) -> None:
        self.spent += amount
        if self.spent > self.cap:
            raise CandidateSpaceTooLarge(
                f"more than {self.cap} candidate states examined"
            )


def _index_rules(
    rules: Sequence[Rule],
) -> tuple[list[Atom], dict[Atom, int], list[tuple[int, int, int]]]:
    atoms = sorted({a for r in rules for a in r.atoms()})
    pos_of = {a: i for i, a in enumerate(atoms)}
    masked = []
    for r in rules:
        h = p = n = 0
        for a in r.head:
            h |= 1 << pos_of[a]
        for a in r.pos_body:
            p |= 1 << pos_of[a]
        for a in r.neg_body:
            n |= 1 << pos_of[a]
        masked.append((h, p, n))
    return atoms, pos_of, masked


def _possible_atoms(masked: list[tuple[int, int, int]]) -> int:
    """Least fixpoint of head derivability, ignoring negative bodies."""
    possible = 0
    changed = True
    while changed:
        changed = False
        for h, p, _ in masked:
            if p & ~possible == 0 and h & ~possible:
                possible |= h
                changed = True
    return possible


def _closure_normal(normal: list[tuple[int, int]], start: int) -> int:
    i = start
    changed = True
    while changed:
        changed = False
        for h, p in normal:
            if p & ~i == 0 and h & ~i:
                i |= h
                changed = True
    return i


def _minimal_models_masks(
    rules: list[tuple[int, int]], budget: _Budget
) -> list[int]:
    """Minimal models of a positive ground program in mask form.

    Models are produced by closing under single-head rules and branching on
    each head atom of the first unsatisfied disjunctive rule; every minimal
    model arises this way, so filtering the collected closures down to the
    inclusion-minimal ones is exact.
    """
    normal = [(h, p) for h, p in rules if h & (h - 1) == 0]
    disjunctive = [(h, p) for h, p in rules if h & (h - 1) != 0]
    found: set[int] = set()
    expanded: set[int] = set()

    def explore(i: int) -> None:
        budget.spend()
        i = _closure_normal(normal, i)
        if i in expanded:
            return
        expanded.add(i)
        for h, p in disjunctive:
            if p & ~i == 0 and h & i == 0:
                choice = h
                while choice:
                    bit = choice & -choice
                    explore(i | bit)
                    choice ^= bit
                return
        found.add(i)

    explore(0)
    models = sorted(found, key=lambda m: (m.bit_count(), m))
    minimal: list[int] = []
    for m in models:
        if not any(o & ~m == 0 for o in minimal):
            minimal.append(m)
    return minimal


def _stable_models(
    masked: list[tuple[int, int, int]], budget: _Budget
) -> list[int]:
    """All stable models of a pruned ground program, in mask form.

    The search assigns a truth value to every atom occurring in a negative
    body.  At each node two monotone bounds prune the branch: atoms assumed
    true must stay optimistically derivable, and atoms certainly derivable
    (by single-head rules whose negative body is already all-false) must not
    be assumed false.  Each surviving leaf fixes the reduct; its minimal
    models that reproduce the assumed assignment are exactly the stable
    models there.
    """
    nb_mask = 0
    for _, _, n in masked:
        nb_mask |= n
    normal = [(h, p, n) for h, p, n in masked if h & (h - 1) == 0]
    results: list[int] = []

    def upper(t: int) -> int:
        possible = 0
        changed = True
        while changed:
            changed = False
            for h, p, n in masked:
                if n & t == 0 and p & ~possible == 0 and h & ~possible:
                    possible |= h
                    changed = True
        return possible

    def lower(f: int) -> int:
        cert = 0
        changed = True
        while changed:
            changed = False
            for h, p, n in normal:
                if n & ~f == 0 and p & ~cert == 0 and h & ~cert:
                    cert |= h
                    changed = True
        return cert

    def leaf(t: int) -> None:
        red = [(h, p) for h, p, n in masked if n & t == 0]
        for m in _minimal_models_masks(red, budget):
            if m & nb_mask == t:
                results.append(m)

    def search(t: int, f: int) -> None:
        budget.spend()
        while True:
            possible = upper(t)
            if t & ~possible:
                return
            cert = lower(f)
            if cert & f:
                return
            undecided = nb_mask & ~t & ~f
            force_true = undecided & cert
            force_false = undecided & ~possible
            if force_true or force_false:
                t |= force_true
                f |= force_false
                continue
            break
        open_atoms = nb_mask & ~t & ~f
        if open_atoms == 0:
            leaf(t)
            return
        bit = open_atoms & -open_atoms
        search(t | bit, f)
        search(t, f | bit)

    search(0, 0)
    return results


def answer_sets(
    p: Program,
    *,
    ground_cap: int = GROUND_CAP_DEFAULT,
    candidate_cap: int = CANDIDATE_CAP_DEFAULT,
) -> AnswerSetReport:
    """Every answer set of ``p``: the interpretations that are subset-minimal
    models of their own reduct.

    Only atoms derivable when all negative literals are ignored can appear
    in an answer set, so the search space is pruned to those up front.
    ``candidate_cap`` bounds the number of search states examined.
    """
    g = ground(p, ground_cap)
    atoms, _, masked = _index_rules(g.rules)
    possible = _possible_atoms(masked)
    pruned = [
        (h, p_, n & possible)
        for h, p_, n in masked
        if p_ & ~possible == 0
    ]
    budget = _Budget(candidate_cap)
    models = _stable_models(pruned, budget)
    out = frozenset(
        frozenset(a for i, a in enumerate(atoms) if m >> i & 1) for m in models
    )
    return AnswerSetReport(
        answer_sets=out,
        candidates_examined=budget.spent,
        method=SolveMethod.REDUCT_MINIMALITY,
    )


def minimal_models(g: GroundProgram) -> frozenset[Interpretation]:
    """The subset-minimal models of a positive ground program."""
    for r in g.rules:
        if r.neg_body:
            raise ProgramError(f"program is not positive: {r}")
    atoms, _, masked = _index_rules(g.rules)
    budget = _Budget(CANDIDATE_CAP_DEFAULT)
    models = _minimal_models_masks([(h, p) for h, p, _ in masked], budget)
    return frozenset(
        frozenset(a for i, a in enumerate(atoms) if m >> i & 1) for m in models
    )


def is_unfounded_set(
    x: frozenset[Atom], p: Program | GroundProgram, i: Interpretation
) -> bool:
    """Whether ``x`` is unfounded with respect to ``i``: every rule with a
    head atom in ``x`` is either blocked under ``i``, consumes an atom of
    ``x`` positively, or is already satisfied by ``i`` outside ``x``."""
    g = p if isinstance(p, GroundProgram) else ground(p)
    for rule in g.rules:
        if not any(a in x for a in rule.head):
            continue
        if not all(a in i for a in rule.pos_body):
            continue
        if any(a in i for a in rule.neg_body):
            continue
        if any(a in x for a in rule.pos_body):
            continue
        if any(a in i and a not in x for a in rule.head):
            continue
        return False
    return True


def answer_sets_via_unfounded(
    p: Program,
    *,
    ground_cap: int = GROUND_CAP_DEFAULT,
    candidate_cap: int = CANDIDATE_CAP_DEFAULT,
) -> AnswerSetReport:
    """Answer sets characterized without reducts: models of the ground
    program containing no nonempty unfounded subset.

    This route enumerates every subset of the ground head atoms, so it only
    suits small programs; it exists as an independent oracle for the primary
    solver."""
    g = ground(p, ground_cap)
    atoms, pos_of, masked = _index_rules(g.rules)
    head_atoms = sorted({a for r in g.rules for a in r.head})
    if 2 ** len(head_atoms) > candidate_cap:
        raise CandidateSpaceTooLarge(
            f"{2 ** len(head_atoms)} candidate interpretations exceed the cap"
        )
    head_bits = [1 << pos_of[a] for a in head_atoms]

    def unfounded_free(imask: int) -> bool:
        inside = [b for b in head_bits if imask & b]
        full = 0
        for b in inside:
            full |= b
        sub = full
        while sub:
            ok = False
            for h, pb, nb in masked:
                if h & sub == 0:
                    continue
                if pb & ~imask:
                    continue
                if nb & imask:
                    continue
                if pb & sub:
                    continue
                if h & imask & ~sub:
                    continue
                ok = True
                break
            if not ok:
                return False
            sub = (sub - 1) & full
        return True

    found = []
    for k in range(2 ** len(head_atoms)):
        imask = 0
        for j, b in enumerate(head_bits):
            if k >> j & 1:
                imask |= b
        sat = True
        for h, pb, nb in masked:
            if pb & ~imask == 0 and nb & imask == 0 and h & imask == 0:
                sat = False
                break
        if sat and unfounded_free(imask):
            found.append(imask)
    out = frozenset(
        frozenset(a for i_, a in enumerate(atoms) if m >> i_ & 1) for m in found
    )
    return AnswerSetReport(
        answer_sets=out,
        candidates_examined=2 ** len(head_atoms),
        method=SolveMethod.UNFOUNDED_FREE,
    )


@dataclass(frozen=True, order=True)
class Substitution:
    """An assignment of constants to the variables of a query, kept as a
    sorted tuple of (variable, constant) pairs."""

    bindings: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, Term]) -> "Substitution":
        return cls(tuple(sorted((v, t.name) for v, t in mapping.items())))

    def as_mapping(self) -> dict[str, Term]:
        return {v: Term(c) for v, c in self.bindings}

    @property
    def is_identity(self) -> bool:
        return not self.bindings

    def __str__(self) -> str:
        if not self.bindings:
            return "{}"
        return ", ".join(f"{v} = {c}" for v, c in self.bindings)


def _ground_instances(
    q: Query, domain: Iterable[Term]
) -> list[tuple[Substitution, Atom]]:
    names = sorted(q.variables())
    terms = sorted(set(domain))
    out = []
    for combo in product(terms, repeat=len(names)):
        binding = dict(zip(names, combo))
        out.append((Substitution.of(binding), q.atom.substitute(binding)))
    return out


def substitutions_brave(
    report: AnswerSetReport, q: Query, domain: Iterable[Term]
) -> frozenset[Substitution]:
    """Substitutions whose query instance holds in at least one answer set.
    An inconsistent program bravely entails nothing."""
    out = set()
    for sub, atom in _ground_instances(q, domain):
        if any(atom in m for m in report.answer_sets):
            out.add(sub)
    return frozenset(out)


def substitutions_cautious(
    report: AnswerSetReport, q: Query, domain: Iterable[Term]
) -> frozenset[Substitution]:
    """Substitutions whose query instance holds in every answer set.  An
    inconsistent program cautiously entails every instance."""
    out = set()
    for sub, atom in _ground_instances(q, domain):
        if all(atom in m for m in report.answer_sets):
            out.add(sub)
    return frozenset(out)


def brave(
    p: Program,
    q: Query,
    *,
    domain: Iterable[Term] | None = None,
    ground_cap: int = GROUND_CAP_DEFAULT,
    candidate_cap: int = CANDIDATE_CAP_DEFAULT,
) -> frozenset[Substitution]:
    report = answer_sets(p, ground_cap=ground_cap, candidate_cap=candidate_cap)
    return substitutions_brave(report, q, universe(p) if domain is None else domain)


def cautious(
    p: Program,
    q: Query,
    *,
    domain: Iterable[Term] | None = None,
    ground_cap: int = GROUND_CAP_DEFAULT,
    candidate_cap: int = CANDIDATE_CAP_DEFAULT,
) -> frozenset[Substitution]:
    report = answer_sets(p, ground_cap=ground_cap, candidate_cap=candidate_cap)
    return substitutions_cautious(report, q, universe(p) if domain is None else domain)


def _magic_lookup(n: Interpretation) -> dict[tuple[str, str], set[tuple[Term, ...]]]:
    out: dict[tuple[str, str], set[tuple[Term, ...]]] = {}
    for atom in n:
        decoded = split_magic_name(atom.predicate)
        if decoded is not None:
            out.setdefault(decoded, set()).add(atom.args)
    return out


def _covered_by_magic(
    atom: Atom, lookup: Mapping[tuple[str, str], set[tuple[Term, ...]]]
) -> bool:
    for (pred, adornment), seen_args in lookup.items():
        if pred != atom.predicate or len(adornment) != atom.arity:
            continue
        kept = tuple(a for a, l in zip(atom.args, adornment) if l == "b")
        if kept in seen_args:
            return True
    return False


def killed_atoms(
    m: Interpretation, n: Interpretation, p: Program, rewritten: Program
) -> frozenset[Atom]:
    """Atoms of the base of ``p`` outside ``n`` that the rewriting proves
    irrelevant under ``n``: extensional atoms, and atoms whose magic version
    belongs to ``n``."""
    if not n <= m:
        raise ValueError("n must be contained in m")
    lookup = _magic_lookup(n)
    edb = p.edb_predicates
    out = set()
    for atom in base(p) - n:
        if atom.predicate in edb or _covered_by_magic(atom, lookup):
            out.add(atom)
    return frozenset(out)


def magic_variant(
    i: Interpretation,
    q: Query,
    p: Program,
    *,
    ground_cap: int = GROUND_CAP_DEFAULT,
) -> Interpretation:
    """Rebuild, from an interpretation of ``p``, the matching interpretation
    of the rewritten program.

    Starting from the extensional facts, the fixpoint alternately imports an
    atom of ``i`` once one of its magic versions is present, and fires the
    ground magic rules whose bodies are satisfied (the seed enters through
    its empty body)."""
    details = dms_with_details(q, p)
    g = ground(details.program, ground_cap)
    magic_ground = [
        r
        for r in g.rules
        if split_magic_name(r.head[0].predicate) is not None and len(r.head) == 1
    ]
    adorned_by_pred: dict[str, list[AdornedPredicate]] = {}
    for ap in details.adorned:
        adorned_by_pred.setdefault(ap.predicate, []).append(ap)

    v: set[Atom] = {r.head[0] for r in details.edb_rules}
    while True:
        additions: set[Atom] = set()
        for atom in i:
            if atom in v:
                continue
            for ap in adorned_by_pred.get(atom.predicate, ()):
                if len(ap.adornment) == atom.arity and magic_atom(ap, atom.args) in v:
                    additions.add(atom)
                    break
        for rule in magic_ground:
            if rule.head[0] not in v and all(a in v for a in rule.pos_body):
                additions.add(rule.head[0])
        if not additions:
            return frozenset(v)
        v |= additions
