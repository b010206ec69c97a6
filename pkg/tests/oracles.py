"""Independent reference implementations used only to check the real ones.

Nothing here shares code with the solver or prover under test: the SVM
oracle minimizes the primal objective directly (active-set Newton steps
with a gradient-descent fallback), and the entailment oracle grounds
clauses over a finite universe and enumerates truth assignments.
"""

import itertools

import numpy as np


def svm_primal_value(w, x_rows, y, c):
    margins = 1.0 - y * (x_rows @ w)
    hinge = np.maximum(margins, 0.0)
    return 0.5 * float(w @ w) + c * float(hinge @ hinge)


def svm_primal_grad(w, x_rows, y, c):
    margins = 1.0 - y * (x_rows @ w)
    active = margins > 0
    return w - 2.0 * c * (x_rows[active].T @ (y[active] * margins[active]))


def svm_reference_minimizer(x_rows, y, c, grad_tol=1e-10):
    """Minimize 0.5 w'w + c sum max(1 - y x'w, 0)^2 from first principles.

    The objective is piecewise quadratic and convex: on each active set it
    is an exact quadratic, so solving the active-set normal equations and
    falling back to damped steps when the value would rise converges to the
    global minimum for these small dense instances.
    """
    x_rows = np.asarray(x_rows, dtype=float)
    y = np.asarray(y, dtype=float)
    _, dim = x_rows.shape
    w = np.zeros(dim)
    for _ in range(200):
        margins = 1.0 - y * (x_rows @ w)
        active = margins > 0
        a = np.eye(dim) + 2.0 * c * (x_rows[active].T @ x_rows[active])
        b = 2.0 * c * (x_rows[active].T @ y[active])
        target = np.linalg.solve(a, b)
        if np.allclose(target, w, atol=1e-15, rtol=0.0):
            break
        step = 1.0
        value = svm_primal_value(w, x_rows, y, c)
        while step > 1e-12:
            candidate = w + step * (target - w)
            if svm_primal_value(candidate, x_rows, y, c) <= value + 1e-15:
                break
            step /= 2.0
        w = w + step * (target - w)
    # polish: plain gradient descent mops up any active-set cycling
    for _ in range(200000):
        g = svm_primal_grad(w, x_rows, y, c)
        if np.max(np.abs(g)) < grad_tol:
            break
        w = w - 0.05 / (1.0 + 2.0 * c * np.abs(x_rows).sum()) * g
    assert np.max(np.abs(svm_primal_grad(w, x_rows, y, c))) < 1e-6, \
        "oracle failed to reach first-order optimality"
    return w


def brute_force_min_cover(sets):
    """Smallest sub-collection covering the union, by exhaustive search."""
    universe = set()
    for s in sets:
        universe |= s
    indices = range(len(sets))
    for size in range(len(sets) + 1):
        for combo in itertools.combinations(indices, size):
            covered = set()
            for i in combo:
                covered |= sets[i]
            if covered == universe:
                return list(combo)
    raise AssertionError("unreachable: the full collection always covers")


def _ground_terms(sig, constants, functions, depth):
    """Herbrand terms over the given constants, up to a term depth."""
    from satguide.clauses import App
    layers = [App(c) for c in constants]
    all_terms = list(layers)
    for _ in range(depth - 1):
        new = []
        for fn, arity in functions:
            for args in itertools.product(all_terms, repeat=arity):
                new.append(App(fn, args))
        all_terms.extend(t for t in new if t not in all_terms)
    return all_terms


def _clause_vars(clause):
    from satguide.clauses import Var

    def walk(t, out):
        if isinstance(t, Var):
            out.add(t.name)
        else:
            for a in t.args:
                walk(a, out)

    out = set()
    for lit in clause.literals:
        for a in lit.args:
            walk(a, out)
    return sorted(out)


def _ground_literal(lit, assignment):
    from satguide.clauses import App, Literal, Var

    def walk(t):
        if isinstance(t, Var):
            return assignment[t.name]
        return App(t.symbol, tuple(walk(a) for a in t.args))

    return Literal(lit.positive, lit.predicate, tuple(walk(a) for a in lit.args))


def ground_instances(clause, terms):
    """All groundings of a clause's variables over the given terms."""
    names = _clause_vars(clause)
    instances = []
    for combo in itertools.product(terms, repeat=len(names)):
        assignment = dict(zip(names, combo))
        instances.append(tuple(_ground_literal(lit, assignment)
                               for lit in clause.literals))
    return instances


def ground_unsatisfiable(clauses, sig, max_atoms=18):
    """Truth-table unsatisfiability of function-free clauses.

    Grounds every clause over the constants occurring in the problem and
    enumerates assignments; exact for function-free inputs, where the
    constant universe is the whole Herbrand universe.
    """
    from satguide.clauses import App, KIND_FUNCTION

    constants = set()
    for c in clauses:
        for lit in c.literals:
            for a in lit.args:
                stack = [a]
                while stack:
                    t = stack.pop()
                    if isinstance(t, App):
                        assert not t.args, "oracle only handles function-free input"
                        constants.add(t.symbol)
    if not constants:
        constants.add(sig.intern_symbol("o_default", 0, KIND_FUNCTION))
    terms = [App(c) for c in sorted(constants)]

    instances = [inst for c in clauses for inst in ground_instances(c, terms)]
    atoms = sorted({(lit.predicate, lit.args)
                    for inst in instances for lit in inst}, key=repr)
    assert len(atoms) <= max_atoms, f"fixture too large: {len(atoms)} atoms"
    index = {atom: k for k, atom in enumerate(atoms)}
    for values in itertools.product((False, True), repeat=len(atoms)):
        if all(any(values[index[(lit.predicate, lit.args)]] == lit.positive
                   for lit in inst)
               for inst in instances):
            return False
    return True


def ground_entails(parents, clause, sig, depth=2, max_atoms=18):
    """Whether every truth assignment satisfying all ground instances of the
    parents (over the bounded Herbrand universe) satisfies every ground
    instance of the clause.

    Sound for spotting bad inferences: genuine entailment can never fail
    this check, so any failure is a real soundness bug.
    """
    from satguide.clauses import App, KIND_FUNCTION

    constants = []
    functions = []
    seen = set()

    def scan(t):
        if isinstance(t, App):
            if t.symbol not in seen:
                seen.add(t.symbol)
                sym = sig.symbol(t.symbol)
                if sym.arity == 0:
                    constants.append(t.symbol)
                elif sym.kind == KIND_FUNCTION:
                    functions.append((t.symbol, sym.arity))
            for a in t.args:
                scan(a)

    for c in list(parents) + [clause]:
        for lit in c.literals:
            for a in lit.args:
                scan(a)
    if not constants:
        constants.append(sig.intern_symbol("o_default", 0, KIND_FUNCTION))
    terms = _ground_terms(sig, sorted(constants), sorted(functions), depth)

    parent_instances = [inst for p in parents for inst in ground_instances(p, terms)]
    clause_instances = ground_instances(clause, terms)

    atoms = sorted({(lit.predicate, lit.args)
                    for inst in parent_instances + clause_instances
                    for lit in inst}, key=repr)
    assert len(atoms) <= max_atoms, f"fixture too large: {len(atoms)} atoms"
    index = {atom: k for k, atom in enumerate(atoms)}

    def satisfied(inst, values):
        return any(values[index[(lit.predicate, lit.args)]] == lit.positive
                   for lit in inst)

    for values in itertools.product((False, True), repeat=len(atoms)):
        if all(satisfied(inst, values) for inst in parent_instances):
            if not all(satisfied(inst, values) for inst in clause_instances):
                return False
    return True
