"""Differential testing and benchmarking around the rewriting.

Three pieces live here: a generator for the genealogy grid instances used
by the benchmark, deterministic random generators for programs, fact sets
and queries, and the drivers that compare query answers between an
original program and its rewriting, or time both on growing instances.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import random
import time
from dataclasses import dataclass
from functools import cached_property
from io import StringIO
from itertools import product
from typing import Iterable

from .analysis import is_odd_cycle_free, is_stratified
from .parser import parse_program, parse_query, print_program, print_query
from .rewriter import dms
from .semantics import (
    CANDIDATE_CAP_DEFAULT,
    GROUND_CAP_DEFAULT,
    SolverCapError,
    Substitution,
    answer_sets,
    ground,
    substitutions_brave,
    substitutions_cautious,
)
from .syntax import (
    Atom,
    Program,
    ProgramError,
    Query,
    Rule,
    Term,
    fact,
    universe,
    var,
)

__all__ = [
    "ancestry_program",
    "RelatedInstance",
    "gen_related_instance",
    "random_edb",
    "random_program",
    "random_query",
    "Mismatch",
    "EquivReport",
    "check_equivalence",
    "BenchmarkCell",
    "run_benchmark",
    "benchmark_table",
    "benchmark_json",
]

_ANCESTRY_TEXT = """
father(X,Y) :- related(X,Y), not brother(X,Y).
brother(X,Y) :- related(X,Y), not father(X,Y).
ancestor(X,Y) :- father(X,Y).
ancestor(X,Y) :- father(X,Z), ancestor(Z,Y).
"""


def ancestry_program() -> Program:
    """The genealogy rules: each related pair is a father or a brother
    link, and ancestry is the transitive closure of father links."""
    return parse_program(_ANCESTRY_TEXT)


@dataclass(frozen=True, eq=False)
class RelatedInstance:
    """A genealogy instance on an n-by-n grid of persons.

    Facts connect each person to the right and to the down neighbour, so
    every fact set has 2n(n-1) edges over the n^2 person constants, and
    the query asks whether the top-left person can be an ancestor of the
    bottom-right one.  The layout is our choice, selected by ``pattern``.
    """

    n: int
    pattern: str
    persons: tuple[str, ...]
    facts: tuple[Rule, ...]
    query: Query

    @cached_property
    def program(self) -> Program:
        return Program((*ancestry_program().rules, *self.facts))


def gen_related_instance(n: int, pattern: str = "grid") -> RelatedInstance:
    if n < 1:
        raise ValueError("n must be at least 1")
    if pattern != "grid":
        raise ValueError(f"unknown pattern {pattern!r}")
    name = lambda i, j: f"p_{i}_{j}"
    persons = tuple(name(i, j) for i in range(1, n + 1) for j in range(1, n + 1))
    facts = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if j < n:
                facts.append(fact(Atom("related", (Term(name(i, j)), Term(name(i, j + 1))))))
            if i < n:
                facts.append(fact(Atom("related", (Term(name(i, j)), Term(name(i + 1, j))))))
    query = Query(Atom("ancestor", (Term(name(1, 1)), Term(name(n, n)))))
    return RelatedInstance(
        n=n, pattern=pattern, persons=persons, facts=tuple(facts), query=query
    )


def random_edb(
    p: Program,
    seed: int,
    density: float,
    fresh_constants: int = 2,
    max_facts: int | None = None,
) -> frozenset[Atom]:
    """A reproducible random set of ground facts over the extensional
    predicates of ``p``.

    The constant pool is the universe of ``p`` plus ``fresh_constants``
    constants not occurring in it; each candidate atom is kept with
    probability ``density``.  ``max_facts``, when given, thins an
    oversized draw so downstream exhaustive checks stay feasible.
    """
    edb = sorted(p.edb_predicates)
    if not edb:
        raise ProgramError("program has no extensional predicate")
    pool = set(universe(p))
    taken = {t.name for t in pool}
    added = 0
    i = 0
    while added < fresh_constants:
        i += 1
        name = f"f{i}"
        if name in taken:
            continue
        taken.add(name)
        pool.add(Term(name))
        added += 1
    pool = sorted(pool)
    candidates = []
    for pred in edb:
        arity = p.predicates[pred]
        for args in product(pool, repeat=arity):
            candidates.append(Atom(pred, args))
    candidates.sort()
    rng = random.Random(f"edb:{seed}")
    chosen = [a for a in candidates if rng.random() < density]
    if max_facts is not None and len(chosen) > max_facts:
        chosen = rng.sample(chosen, max_facts)
    return frozenset(chosen)


_PROFILES = ("stratified", "odd_cycle_free", "arbitrary")


def _profile_holds(p: Program, profile: str) -> bool:
    if profile == "stratified":
        return is_stratified(p)
    if profile == "odd_cycle_free":
        return is_odd_cycle_free(p)
    return True


def _draw_program(rng: random.Random, profile: str) -> Program:
    c1, c2 = Term("c1"), Term("c2")
    x, y = var("X"), var("Y")
    use_g2 = rng.random() < 0.5
    use_p2 = rng.random() < 0.7
    edb_preds = [("g1", 1)] + ([("g2", 2)] if use_g2 else [])
    idb_preds = [("p1", 1)] + ([("p2", 1)] if use_p2 else [])
    strata = {"g1": 0, "g2": 0, "p1": 1, "p2": 2}

    rules: list[Rule] = [fact(Atom("g1", (c1,)))]
    if rng.random() < 0.6:
        rules.append(fact(Atom("g1", (c2,))))
    if use_g2:
        for _ in range(rng.randint(1, 2)):
            rules.append(fact(Atom("g2", (rng.choice((c1, c2)), rng.choice((c1, c2))))))

    def body_atom(pred: str, arity: int) -> Atom:
        args = []
        for _ in range(arity):
            roll = rng.random()
            if roll < 0.15:
                args.append(rng.choice((c1, c2)))
            elif roll < 0.6:
                args.append(x)
            else:
                args.append(y)
        return Atom(pred, tuple(args))

    for pred, _ in idb_preds:
        for _ in range(rng.randint(1, 2)):
            head = [Atom(pred, (x,))]
            if use_p2 and rng.random() < 0.25:
                other = "p2" if pred == "p1" else "p1"
                head.append(Atom(other, (x,)))
            head_floor = min(strata[h.predicate] for h in head)
            pos: list[Atom] = []
            neg: list[Atom] = []
            for _ in range(rng.randint(1, 2)):
                negate = rng.random() < 0.35
                choices = edb_preds + idb_preds
                if profile == "stratified":
                    allowed = [
                        (bp, ba)
                        for bp, ba in choices
                        if strata[bp] < head_floor
                        or (not negate and strata[bp] <= head_floor)
                    ]
                    choices = allowed or [("g1", 1)]
                bp, ba = rng.choice(choices)
                if negate and (profile != "stratified" or strata[bp] < head_floor):
                    neg.append(body_atom(bp, ba))
                else:
                    pos.append(body_atom(bp, ba))
            needed = set()
            for a in (*head, *neg):
                needed |= a.variables()
            for a in pos:
                needed -= a.variables()
            for v in sorted(needed):
                pos.append(Atom("g1", (var(v),)))
            rules.append(Rule(tuple(head), tuple(pos), tuple(neg)))
    return Program(tuple(rules))


def random_program(seed: int, profile: str = "odd_cycle_free") -> Program:
    """A reproducible small program in the requested class.

    Stratified draws are built against a fixed predicate ordering; the
    odd-cycle-free profile redraws until the dependency check passes.
    Sizes are kept small enough that the exhaustive cross-check solver
    can handle the grounded result.
    """
    if profile not in _PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    rng = random.Random(f"{profile}:{seed}")
    last = None
    for _ in range(60):
        last = _draw_program(rng, profile)
        if _profile_holds(last, profile):
            return last
    # Give up on redrawing and strip the negative bodies; a positive
    # program is in every class we generate for.
    assert last is not None
    stripped = tuple(
        Rule(r.head, r.pos_body) if r.neg_body else r for r in last.rules
    )
    return Program(stripped)


def random_query(p: Program, seed: int) -> Query:
    """A reproducible query against an intensional predicate of ``p``,
    with each argument position randomly bound to a constant or left as
    a variable."""
    rng = random.Random(f"query:{seed}")
    idb = sorted(p.idb_predicates)
    preds = idb or sorted(p.predicates)
    if not preds:
        raise ProgramError("program has no predicates to query")
    pred = rng.choice(preds)
    consts = sorted(universe(p))
    names = "XYZW"
    args = []
    for i in range(p.predicates[pred]):
        if consts and rng.random() < 0.6:
            args.append(rng.choice(consts))
        else:
            args.append(var(names[i % len(names)]))
    return Query(Atom(pred, tuple(args)))


@dataclass(frozen=True)
class Mismatch:
    """Substitution sets that differ between original and rewriting for
    one sampled fact set."""

    fact_set: tuple[Atom, ...]
    only_original: tuple[Substitution, ...]
    only_rewritten: tuple[Substitution, ...]


@dataclass(frozen=True)
class EquivReport:
    program_id: str
    query: Query
    fact_sets_tested: int
    brave_mismatches: tuple[Mismatch, ...]
    cautious_mismatches: tuple[Mismatch, ...]
    ground_rule_counts: tuple[tuple[int, int], ...]
    timings_ms: tuple[tuple[float, float], ...]
    skipped: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.brave_mismatches and not self.cautious_mismatches


def _diff(
    a: frozenset[Substitution], b: frozenset[Substitution], facts: Iterable[Atom]
) -> Mismatch | None:
    if a == b:
        return None
    return Mismatch(
        fact_set=tuple(sorted(facts)),
        only_original=tuple(sorted(a - b)),
        only_rewritten=tuple(sorted(b - a)),
    )


def check_equivalence(
    p: Program,
    q: Query,
    trials: int = 5,
    seed: int = 0,
    density: float = 0.3,
    *,
    fresh_constants: int = 2,
    max_facts: int | None = None,
    ground_cap: int = GROUND_CAP_DEFAULT,
    candidate_cap: int = CANDIDATE_CAP_DEFAULT,
    program_id: str | None = None,
) -> EquivReport:
    """Compare brave and cautious answers of ``p`` and its rewriting on
    ``trials`` sampled fact sets.

    The rewriting is computed once; each trial adds the same sampled
    facts to both sides and evaluates the query over a shared
    substitution domain, so any reported difference is a genuine answer
    difference.  Trials tripping a solver cap are skipped and counted.
    """
    if program_id is None:
        digest = hashlib.sha1(print_program(p).encode()).hexdigest()
        program_id = digest[:12]
    rewritten = dms(q, p)
    qconsts = frozenset(t for t in q.atom.args if t.is_constant)

    brave_bad: list[Mismatch] = []
    cautious_bad: list[Mismatch] = []
    counts: list[tuple[int, int]] = []
    timings: list[tuple[float, float]] = []
    skipped: list[str] = []
    tested = 0
    for t in range(trials):
        trial_seed = seed * 1_000_003 + t
        facts = random_edb(p, trial_seed, density, fresh_constants, max_facts)
        side_a = p.with_facts(facts)
        side_b = rewritten.with_facts(facts)
        domain = universe(side_a) | qconsts
        try:
            t0 = time.perf_counter()
            report_a = answer_sets(
                side_a, ground_cap=ground_cap, candidate_cap=candidate_cap
            )
            t1 = time.perf_counter()
            report_b = answer_sets(
                side_b, ground_cap=ground_cap, candidate_cap=candidate_cap
            )
            t2 = time.perf_counter()
        except SolverCapError as exc:
            skipped.append(f"trial {t}: {exc}")
            continue
        tested += 1
        counts.append(
            (len(ground(side_a, ground_cap).rules), len(ground(side_b, ground_cap).rules))
        )
        timings.append(((t1 - t0) * 1000.0, (t2 - t1) * 1000.0))
        mm = _diff(
            substitutions_brave(report_a, q, domain),
            substitutions_brave(report_b, q, domain),
            facts,
        )
        if mm:
            brave_bad.append(mm)
        mm = _diff(
            substitutions_cautious(report_a, q, domain),
            substitutions_cautious(report_b, q, domain),
            facts,
        )
        if mm:
            cautious_bad.append(mm)
    return EquivReport(
        program_id=program_id,
        query=q,
        fact_sets_tested=tested,
        brave_mismatches=tuple(brave_bad),
        cautious_mismatches=tuple(cautious_bad),
        ground_rule_counts=tuple(counts),
        timings_ms=tuple(timings),
        skipped=tuple(skipped),
    )


@dataclass(frozen=True)
class BenchmarkCell:
    n: int
    mode: str
    rep: int
    status: str
    time_ms: float | None = None
    ground_rules: int | None = None
    candidates: int | None = None
    answer: str | None = None


def _bench_worker(conn, program_text: str, query_text: str, mode: str,
                  ground_cap: int, candidate_cap: int) -> None:
    try:
        p = parse_program(program_text)
        q = parse_query(query_text)
        target = dms(q, p) if mode == "dms" else p
        t0 = time.perf_counter()
        report = answer_sets(
            target, ground_cap=ground_cap, candidate_cap=candidate_cap
        )
        answer = "yes" if any(q.atom in m for m in report.answer_sets) else "no"
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        payload = {
            "status": "ok",
            "time_ms": elapsed_ms,
            "ground_rules": len(ground(target, ground_cap).rules),
            "candidates": report.candidates_examined,
            "answer": answer,
        }
    except SolverCapError as exc:
        payload = {"status": f"cap exceeded: {exc}"}
    except Exception as exc:  # surfaced in the report, not swallowed
        payload = {"status": f"error: {exc}"}
    try:
        conn.send(payload)
    finally:
        conn.close()


def run_benchmark(
    sizes: Iterable[int],
    mode: str = "both",
    repetitions: int = 1,
    *,
    pattern: str = "grid",
    timeout: float = 60.0,
    ground_cap: int = GROUND_CAP_DEFAULT,
    candidate_cap: int = CANDIDATE_CAP_DEFAULT,
) -> tuple[BenchmarkCell, ...]:
    """Time the corner-to-corner query on grid instances of the given
    sizes, evaluating the plain program, its rewriting, or both.

    Every cell runs in a forked worker killed at ``timeout`` seconds, so
    a blown-up size yields a timeout row instead of hanging the run.
    """
    if mode not in ("plain", "dms", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    mode_list = ("plain", "dms") if mode == "both" else (mode,)
    ctx = multiprocessing.get_context("fork")
    cells = []
    for n in sizes:
        inst = gen_related_instance(n, pattern)
        ptext = print_program(inst.program)
        qtext = print_query(inst.query)
        for m in mode_list:
            for rep in range(repetitions):
                recv_end, send_end = ctx.Pipe(duplex=False)
                proc = ctx.Process(
                    target=_bench_worker,
                    args=(send_end, ptext, qtext, m, ground_cap, candidate_cap),
                )
                proc.start()
                send_end.close()
                proc.join(timeout)
                if proc.is_alive():
                    proc.terminate()
                    proc.join()
                    cells.append(BenchmarkCell(n, m, rep, "timeout"))
                else:
                    if recv_end.poll():
                        got = recv_end.recv()
                    else:
                        got = {"status": "error: worker produced no result"}
                    cells.append(
                        BenchmarkCell(
                            n=n,
                            mode=m,
                            rep=rep,
                            status=got["status"],
                            time_ms=got.get("time_ms"),
                            ground_rules=got.get("ground_rules"),
                            candidates=got.get("candidates"),
                            answer=got.get("answer"),
                        )
                    )
                recv_end.close()
    return tuple(cells)


def benchmark_table(cells: Iterable[BenchmarkCell]) -> str:
    """The cells as comma-separated text, one row per repetition."""
    out = StringIO()
    out.write("n,mode,time_ms,ground_rules,candidates,answer\n")
    for c in cells:
        time_ms = "" if c.time_ms is None else f"{c.time_ms:.1f}"
        ground_rules = "" if c.ground_rules is None else str(c.ground_rules)
        candidates = "" if c.candidates is None else str(c.candidates)
        answer = c.answer or ""
        out.write(f"{c.n},{c.mode},{time_ms},{ground_rules},{candidates},{answer}\n")
    return out.getvalue()


def benchmark_json(cells: Iterable[BenchmarkCell], pattern: str = "grid") -> str:
    """A structured report; records the grid layout, which is our own
    choice of instance shape rather than a given."""
    payload = {
        "instance_pattern": f"{pattern} (right and down edges; layout is an assumption)",
        "cells": [
            {
                "n": c.n,
                "mode": c.mode,
                "rep": c.rep,
                "status": c.status,
                "time_ms": c.time_ms,
                "ground_rules": c.ground_rules,
                "candidates": c.candidates,
                "answer": c.answer,
            }
            for c in cells
        ],
    }
    return json.dumps(payload, indent=2)
