"""Given-clause saturation with binary resolution and factoring.

Each selection step asks the strategy's round-robin schedule for a CEF,
takes that CEF's lowest-weight unprocessed clause as the given clause,
moves it to the processed set, and generates all binary resolvents against
the processed clauses plus all factors of the given clause.  New clauses
that are too large, tautological, or subsumed by a processed clause are
dropped.  The search stops on the empty clause, an empty unprocessed set,
or a resource limit, and always returns a full record of the derivation.

Equality is an ordinary predicate here; when it occurs, the standard
equality axioms (reflexivity, symmetry, transitivity, and congruence for
the problem's symbols) are added as extra input clauses.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import dataclass, field

from .clauses import (
    App, Clause, EQUALITY, Literal, ROLE_DERIVED, ROLE_INPUT, Signature,
    Term, Var, clause_depth,
)
from .guidance import (
    CEF, LEARNED, Strategy, evaluate, format_strategy, next_entry_index,
)
from .tptp import format_clause, parse_clause_text

OUTCOME_PROOF = "proof_found"
OUTCOME_SATURATED = "saturated"
OUTCOME_RESOURCE_OUT = "resource_out"

RECORD_FORMAT = "proof-search-record v1"

SUBSUMPTION_LITERAL_CAP = 8


@dataclass
class Limits:
    max_processed: int = 1000
    max_generated: int = 100000
    timeout: float | None = None
    # caps on generated clauses; larger ones are discarded (and counted)
    max_literals: int = 8
    max_depth: int = 6


@dataclass
class ProofState:
    """Live state of one search: disjoint processed/unprocessed sets.

    ``step`` counts given-clause selections and always equals
    ``len(processed)``; a clause id is never in both sets.
    """

    processed: dict[int, Clause] = field(default_factory=dict)
    unprocessed: dict[int, Clause] = field(default_factory=dict)
    step: int = 0
    limits: Limits = field(default_factory=Limits)
    stats: dict[str, int] = field(default_factory=dict)


@dataclass
class ProofSearchRecord:
    problem: str
    strategy: str
    outcome: str
    given_sequence: list[int]
    dag: dict[int, tuple[int, ...]]
    empty_clause: int | None
    stats: dict[str, int]
    # printed form of every kept clause, keyed by id
    clause_texts: dict[int, str]

    def clause(self, cid: int, sig: Signature) -> Clause:
        literals = parse_clause_text(self.clause_texts[cid], sig)
        role = ROLE_INPUT if not self.dag[cid] else ROLE_DERIVED
        return Clause(cid, literals, self.dag[cid], age=cid, role=role)


def _deref(t: Term, subst: dict) -> Term:
    while isinstance(t, Var):
        bound = subst.get(t.name)
        if bound is None:
            return t
        t = bound
    return t


def _occurs(name: str, t: Term, subst: dict) -> bool:
    stack = [t]
    while stack:
        cur = _deref(stack.pop(), subst)
        if isinstance(cur, Var):
            if cur.name == name:
                return True
        else:
            stack.extend(cur.args)
    return False


def unify(t1: Term, t2: Term, subst: dict | None = None) -> dict | None:
    """Most general unifier of two terms, or None; occurs-check enforced.

    The caller is responsible for renaming the terms apart.
    """
    subst = {} if subst is None else subst
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a = _deref(a, subst)
        b = _deref(b, subst)
        if isinstance(a, Var):
            if isinstance(b, Var) and a.name == b.name:
                continue
            if _occurs(a.name, b, subst):
                return None
            subst[a.name] = b
        elif isinstance(b, Var):
            if _occurs(b.name, a, subst):
                return None
            subst[b.name] = a
        else:
            if a.symbol != b.symbol or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
    return subst


def unify_atoms(l1: Literal, l2: Literal) -> dict | None:
    if l1.predicate != l2.predicate or len(l1.args) != len(l2.args):
        return None
    subst: dict = {}
    for a, b in zip(l1.args, l2.args):
        if unify(a, b, subst) is None:
            return None
    return subst


def apply_subst(t: Term, subst: dict) -> Term:
    t = _deref(t, subst)
    if isinstance(t, Var):
        return t
    return App(t.symbol, tuple(apply_subst(a, subst) for a in t.args))


def apply_subst_literal(lit: Literal, subst: dict) -> Literal:
    return Literal(lit.positive, lit.predicate,
                   tuple(apply_subst(a, subst) for a in lit.args))


def _term_vars(t: Term, out: set) -> None:
    if isinstance(t, Var):
        out.add(t.name)
    else:
        for a in t.args:
            _term_vars(a, out)


def rename_apart(literals, taken_literals) -> tuple[Literal, ...]:
    """Rename the variables of ``literals`` away from ``taken_literals``."""
    taken: set = set()
    for lit in taken_literals:
        for a in lit.args:
            _term_vars(a, taken)
    own: set = set()
    for lit in literals:
        for a in lit.args:
            _term_vars(a, own)
    mapping = {}
    for name in own:
        if name not in taken:
            continue
        k = 0
        while f"{name}_R{k}" in taken or f"{name}_R{k}" in own:
            k += 1
        mapping[name] = Var(f"{name}_R{k}")
    if not mapping:
        return tuple(literals)
    return tuple(apply_subst_literal(lit, mapping) for lit in literals)


def normalize_variables(literals) -> tuple[Literal, ...]:
    """Rename variables to X0, X1, ... in first-occurrence order."""
    mapping: dict[str, Term] = {}

    def rename(t: Term) -> Term:
        if isinstance(t, Var):
            if t.name not in mapping:
                mapping[t.name] = Var(f"X{len(mapping)}")
            return mapping[t.name]
        return App(t.symbol, tuple(rename(a) for a in t.args))

    return tuple(Literal(lit.positive, lit.predicate,
                         tuple(rename(a) for a in lit.args))
                 for lit in literals)


def _dedup_literals(literals) -> tuple[Literal, ...]:
    seen = set()
    out = []
    for lit in literals:
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def _derived(literals, parents: tuple[int, ...]) -> Clause:
    literals = normalize_variables(_dedup_literals(literals))
    return Clause(-1, literals, parents, age=-1, role=ROLE_DERIVED)


def resolvents(given: Clause, partner: Clause) -> list[Clause]:
    """All binary resolvents of the two clauses (ids unassigned).

    The partner's variables are renamed apart internally, so the same
    clause may be passed on both sides.
    """
    out = []
    partner_literals = rename_apart(partner.literals, given.literals)
    for i, lit_g in enumerate(given.literals):
        for j, lit_p in enumerate(partner_literals):
            if lit_g.positive == lit_p.positive:
                continue
            subst = unify_atoms(lit_g, lit_p)
            if subst is None:
                continue
            rest = [apply_subst_literal(l, subst)
                    for k, l in enumerate(given.literals) if k != i]
            rest.extend(apply_subst_literal(l, subst)
                        for k, l in enumerate(partner_literals) if k != j)
            out.append(_derived(rest, (given.id, partner.id)))
    return out


def factors(clause: Clause) -> list[Clause]:
    """All binary factors: unify two same-polarity literals, drop one."""
    out = []
    lits = clause.literals
    for i in range(len(lits)):
        for j in range(i + 1, len(lits)):
            if lits[i].positive != lits[j].positive:
                continue
            subst = unify_atoms(lits[i], lits[j])
            if subst is None:
                continue
            rest = [apply_subst_literal(l, subst)
                    for k, l in enumerate(lits) if k != j]
            out.append(_derived(rest, (clause.id,)))
    return out


def _match_term(pattern: Term, target: Term, subst: dict) -> bool:
    if isinstance(pattern, Var):
        bound = subst.get(pattern.name)
        if bound is None:
            subst[pattern.name] = target
            return True
        return bound == target
    if isinstance(target, Var) or pattern.symbol != target.symbol:
        return False
    return all(_match_term(a, b, subst) for a, b in zip(pattern.args, target.args))


def subsumes(c: Clause, d: Clause, literal_cap: int = SUBSUMPTION_LITERAL_CAP) -> bool:
    """Whether some substitution makes ``c`` a sub-multiset of ``d``.

    Clauses with more than ``literal_cap`` literals are conservatively
    reported as not subsuming (bounded search fallback).
    """
    if len(c.literals) > len(d.literals) or len(c.literals) > literal_cap:
        return False
    used = [False] * len(d.literals)

    def backtrack(i: int, subst: dict) -> bool:
        if i == len(c.literals):
            return True
        lit = c.literals[i]
        for j, cand in enumerate(d.literals):
            if used[j] or cand.positive != lit.positive \
                    or cand.predicate != lit.predicate:
                continue
            attempt = dict(subst)
            if all(_match_term(a, b, attempt)
                   for a, b in zip(lit.args, cand.args)):
                used[j] = True
                if backtrack(i + 1, attempt):
                    return True
                used[j] = False
        return False

    return backtrack(0, {})


def is_tautology(clause: Clause) -> bool:
    atoms = {(lit.predicate, lit.args, lit.positive) for lit in clause.literals}
    return any((pred, args, not pos) in atoms for pred, args, pos in atoms)


def _symbols_in_clauses(clauses) -> tuple[set, set]:
    functions: set = set()
    predicates: set = set()

    def scan(t: Term) -> None:
        if isinstance(t, App):
            functions.add(t.symbol)
            for a in t.args:
                scan(a)

    for clause in clauses:
        for lit in clause.literals:
            predicates.add(lit.predicate)
            for a in lit.args:
                scan(a)
    return functions, predicates


def equality_axioms(clauses, sig: Signature) -> list[tuple[Literal, ...]]:
    """Equality/congruence axioms for the symbols the clauses use.

    Returns an empty list when no clause mentions the equality predicate.
    """
    functions, predicates = _symbols_in_clauses(clauses)
    eq = None
    for pred in predicates:
        if sig.name_of(pred) == EQUALITY:
            eq = pred
    if eq is None:
        return []
    x, y, z = Var("X"), Var("Y"), Var("Z")
    axioms = [
        (Literal(True, eq, (x, x)),),
        (Literal(False, eq, (x, y)), Literal(True, eq, (y, x))),
        (Literal(False, eq, (x, y)), Literal(False, eq, (y, z)),
         Literal(True, eq, (x, z))),
    ]
    for fn in sorted(functions):
        arity = sig.symbol(fn).arity
        if arity == 0:
            continue
        xs = tuple(Var(f"X{k}") for k in range(arity))
        ys = tuple(Var(f"Y{k}") for k in range(arity))
        body = tuple(Literal(False, eq, (a, b)) for a, b in zip(xs, ys))
        axioms.append(body + (Literal(True, eq, (App(fn, xs), App(fn, ys))),))
    for pred in sorted(predicates):
        if pred == eq:
            continue
        arity = sig.symbol(pred).arity
        if arity == 0:
            continue
        xs = tuple(Var(f"X{k}") for k in range(arity))
        ys = tuple(Var(f"Y{k}") for k in range(arity))
        body = tuple(Literal(False, eq, (a, b)) for a, b in zip(xs, ys))
        axioms.append(body + (Literal(False, pred, xs), Literal(True, pred, ys)))
    return axioms


class _CefQueue:
    """Lazy per-CEF ordering view over the unprocessed set.

    Clauses are parked in ``pending`` until this CEF is asked to select;
    weights are then computed (memoized per CEF) and pushed on a heap.
    Heap entries for clauses that were selected by another CEF in the
    meantime are skipped on pop.
    """

    def __init__(self, cef: CEF, sig: Signature, memo: dict, stats: dict):
        self.cef = cef
        self.sig = sig
        self.memo = memo
        self.stats = stats
        self.heap: list[tuple[float, int, int]] = []
        self.pending: list[Clause] = []

    def add(self, clause: Clause) -> None:
        self.pending.append(clause)

    def pop(self, unprocessed: dict) -> Clause | None:
        for clause in self.pending:
            if clause.id not in unprocessed:
                continue
            w = self.memo.get(clause.id)
            if w is None:
                w = evaluate(clause, self.cef, self.sig, self.stats)
                self.memo[clause.id] = w
            heapq.heappush(self.heap, (w, clause.age, clause.id))
        self.pending.clear()
        while self.heap:
            _, _, cid = heapq.heappop(self.heap)
            clause = unprocessed.get(cid)
            if clause is not None:
                return clause
        return None


def _memo_key(cef: CEF):
    if cef.kind == LEARNED:
        return (cef.kind, cef.gamma, id(cef.model))
    return (cef.kind,)


def prove(problem, strategy: Strategy, limits: Limits, sig: Signature,
          problem_id: str = "", inject_equality: bool = True) -> ProofSearchRecord:
    """Run the given-clause loop on a list of input clauses.

    The record stores the full given-clause sequence and derivation DAG
    regardless of outcome; hitting a limit is the ``resource_out`` outcome,
    not an error.
    """
    if not problem:
        raise ValueError("problem must contain at least one clause")
    started = time.monotonic()
    state = ProofState(limits=limits, stats={
        "generated": 0, "processed": 0, "kept": 0, "subsumed": 0,
        "discarded": 0, "tautologies": 0, "equality_axioms": 0,
        "dropped_triples": 0})
    stats = state.stats
    clauses: dict[int, Clause] = {}
    dag: dict[int, tuple[int, ...]] = {}
    given_sequence: list[int] = []
    empty_clause: int | None = None

    memos: dict = {}
    queues = []
    for _, cef in strategy.entries:
        memo = memos.setdefault(_memo_key(cef), {})
        queues.append(_CefQueue(cef, sig, memo, stats))

    def register(literals, parents, role) -> Clause:
        cid = len(clauses)
        clause = Clause(cid, tuple(literals), tuple(parents), age=cid, role=role)
        clauses[cid] = clause
        dag[cid] = clause.parents
        return clause

    def admit(clause: Clause) -> None:
        state.unprocessed[clause.id] = clause
        for queue in queues:
            queue.add(clause)
        stats["kept"] += 1

    input_literal_sets = [clause.literals for clause in problem]
    if inject_equality:
        eq_axioms = equality_axioms(problem, sig)
        stats["equality_axioms"] = len(eq_axioms)
        input_literal_sets.extend(eq_axioms)
    for literals in input_literal_sets:
        clause = register(literals, (), ROLE_INPUT)
        if not clause.literals and empty_clause is None:
            empty_clause = clause.id
        admit(clause)

    outcome = None
    if empty_clause is not None:
        outcome = OUTCOME_PROOF

    while outcome is None:
        if not state.unprocessed:
            outcome = OUTCOME_SATURATED
            break
        if state.step >= limits.max_processed \
                or stats["generated"] >= limits.max_generated:
            outcome = OUTCOME_RESOURCE_OUT
            break
        if limits.timeout is not None and time.monotonic() - started > limits.timeout:
            outcome = OUTCOME_RESOURCE_OUT
            break
        given = queues[next_entry_index(strategy, state.step)].pop(state.unprocessed)
        assert given is not None, "unprocessed nonempty but queue is dry"
        del state.unprocessed[given.id]
        state.processed[given.id] = given
        given_sequence.append(given.id)
        state.step += 1
        stats["processed"] += 1

        candidates = []
        for partner in state.processed.values():
            candidates.extend(resolvents(given, partner))
        candidates.extend(factors(given))
        for cand in candidates:
            stats["generated"] += 1
            if len(cand.literals) > limits.max_literals \
                    or clause_depth(cand) > limits.max_depth:
                stats["discarded"] += 1
                continue
            if is_tautology(cand):
                stats["tautologies"] += 1
                continue
            if any(subsumes(old, cand, limits.max_literals)
                   for old in state.processed.values()):
                stats["subsumed"] += 1
                continue
            clause = register(cand.literals, cand.parents, ROLE_DERIVED)
            if not clause.literals:
                empty_clause = clause.id
                outcome = OUTCOME_PROOF
                break
            admit(clause)

    texts = {cid: format_clause(clause, sig) for cid, clause in clauses.items()}
    return ProofSearchRecord(
        problem=problem_id,
        strategy=format_strategy(strategy),
        outcome=outcome,
        given_sequence=given_sequence,
        dag=dag,
        empty_clause=empty_clause,
        stats=stats,
        clause_texts=texts,
    )


def record_to_json(record: ProofSearchRecord) -> dict:
    return {
        "format": RECORD_FORMAT,
        "problem": record.problem,
        "strategy": record.strategy,
        "outcome": record.outcome,
        "empty_clause": record.empty_clause,
        "given_sequence": list(record.given_sequence),
        "dag": {str(cid): list(parents) for cid, parents in record.dag.items()},
        "clauses": {str(cid): text for cid, text in record.clause_texts.items()},
        "stats": dict(record.stats),
    }


def record_from_json(data: dict) -> ProofSearchRecord:
    if data.get("format") != RECORD_FORMAT:
        raise ValueError(f"not a proof-search record: {data.get('format')!r}")
    return ProofSearchRecord(
        problem=data["problem"],
        strategy=data["strategy"],
        outcome=data["outcome"],
        given_sequence=[int(x) for x in data["given_sequence"]],
        dag={int(cid): tuple(parents) for cid, parents in data["dag"].items()},
        empty_clause=data["empty_clause"],
        stats={k: int(v) for k, v in data["stats"].items()},
        clause_texts={int(cid): text for cid, text in data["clauses"].items()},
    )


def save_record(record: ProofSearchRecord, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(record_to_json(record), fp, indent=1)
        fp.write("\n")


def load_record(path: str) -> ProofSearchRecord:
    with open(path, "r", encoding="utf-8") as fp:
        return record_from_json(json.load(fp))
