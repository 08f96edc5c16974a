"""Classical propositional logic over the two-sorted language.

Truth tables are evaluated bit-parallel: every atom is an integer whose bit
``i`` is its value in assignment ``i``, so one DAG pass evaluates all rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .errors import NotUnifiable, TauNotUnifier
from .formula import (
    AND, ATOM, BOT, BOTTOM, IMP, OR, TOP, Atom, Formula, Substitution, all_atoms,
    apply, big_or, compose, conj, disj, fold, iff, imp, is_parameter_only, neg,
    replace_atom, simplify, variables,
)


def _masks(atoms: Sequence[Atom]) -> tuple[dict, int]:
    n = len(atoms)
    rows = 1 << n
    full = (1 << rows) - 1
    masks = {}
    for i, a in enumerate(atoms):
        # bit r of the mask is bit i of r
        block = (1 << (1 << i)) - 1
        pattern = 0
        period = 1 << (i + 1)
        for start in range(1 << i, rows, period):
            pattern |= block << start
        masks[a] = pattern
    return masks, full


def truth_table(f: Formula, atoms: Sequence[Atom] | None = None) -> int:
    """Bitmask of satisfying rows; row ``r`` sets atom ``i`` iff bit ``i`` of ``r``."""
    if atoms is None:
        atoms = sorted(all_atoms(f))
    masks, full = _masks(list(atoms))

    def leaf(g):
        return 0 if g.kind == BOT else masks[g.atom]

    def node(kind, a, b):
        if kind == AND:
            return a & b
        if kind == OR:
            return a | b
        return (~a | b) & full

    return fold(f, leaf, node)


def evaluate(f: Formula, assignment: dict) -> bool:
    """Value of ``f`` under an explicit assignment (missing atoms are false)."""
    def leaf(g):
        return False if g.kind == BOT else bool(assignment.get(g.atom, False))

    def node(kind, a, b):
        if kind == AND:
            return a and b
        if kind == OR:
            return a or b
        return (not a) or b

    return fold(f, leaf, node)


def taut_c(f: Formula) -> bool:
    atoms = sorted(all_atoms(f))
    return truth_table(f, atoms) == (1 << (1 << len(atoms))) - 1


def entails_c(premises: Iterable[Formula], goal: Formula) -> bool:
    prem = list(premises)
    left = prem[0] if prem else TOP
    for p in prem[1:]:
        left = conj(left, p)
    return taut_c(imp(left, goal))


def equivalent_c(a: Formula, b: Formula) -> bool:
    atoms = sorted(all_atoms(a, b))
    return truth_table(a, atoms) == truth_table(b, atoms)


def instantiate(f: Formula, values: dict) -> Formula:
    """Replace atoms by ``TOP``/``BOTTOM`` according to ``values``."""
    def leaf(g):
        if g.kind == ATOM and g.atom in values:
            return TOP if values[g.atom] else BOTTOM
        return g
    return fold(f, leaf, lambda k, a, b: Formula(k, a, b))


def uap_c(f: Formula) -> Formula:
    """Strongest parameter-only classical consequence of ``f``.

    Disjunction of all {true, false} instantiations of the variables.
    """
    vs = sorted(variables(f))
    disjuncts = []
    for bits in product((True, False), repeat=len(vs)):
        disjuncts.append(simplify(instantiate(f, dict(zip(vs, bits)))))
    return simplify(big_or(disjuncts))


def is_positive_c(f: Formula, a: Atom) -> bool:
    """``a`` is positive in ``f`` iff ``f -> f[a := true]`` is a tautology."""
    return taut_c(imp(f, replace_atom(f, a, TOP)))


def is_positive_semantic(f: Formula, a: Atom) -> bool:
    """Direct monotonicity check: raising ``a`` never lowers the value of ``f``."""
    atoms = sorted(all_atoms(f) | {a})
    others = [b for b in atoms if b != a]
    for bits in product((False, True), repeat=len(others)):
        env = dict(zip(others, bits))
        low = evaluate(f, {**env, a: False})
        high = evaluate(f, {**env, a: True})
        if low and not high:
            return False
    return True


def theta_pos(f: Formula, x: Atom) -> Substitution:
    """``x := f & x``; makes ``x`` positive in the image of ``f``."""
    return Substitution({x: conj(f, Formula(ATOM, atom=x))})


def unifier_c(f: Formula) -> Substitution:
    """A classical unifier of ``f``, built by making every variable positive.

    Raises NotUnifiable when the uniform post-interpolant is not ``true``.
    """
    if not taut_c(uap_c(f)):
        raise NotUnifiable(f)
    current = f
    acc = Substitution()
    # each pass removes one non-positive variable; order is by name
    while True:
        bad = sorted(x for x in variables(current) if not is_positive_c(current, x))
        if not bad:
            break
        step = theta_pos(current, bad[0])
        acc = compose(step, acc) if acc else step
        current = apply(step, current)
    to_top = Substitution({x: TOP for x in variables(current)})
    result = compose(to_top, acc) if acc else to_top
    # collect every variable of the original formula
    result = Substitution({x: result.image(x) for x in variables(f)})
    assert taut_c(apply(result, f))
    return result


def epsilon_unifier(f: Formula, tau: Substitution) -> Substitution:
    """``x := (f & x) | (~f & tau(x))``; a projective unifier when tau unifies f."""
    if not taut_c(apply(tau, f)):
        raise TauNotUnifier(f, tau)
    nf = neg(f)
    return Substitution({
        x: disj(conj(f, Formula(ATOM, atom=x)), conj(nf, tau.image(x)))
        for x in sorted(variables(f))
    })


@dataclass(frozen=True)
class ClassicalProjection:
    theta: Substitution
    projection: Formula


def par_projective_c(f: Formula) -> ClassicalProjection:
    """Projective parametrifier of ``f``; exists for every classical formula."""
    e = uap_c(f)
    if is_parameter_only(f):
        return ClassicalProjection(Substitution(), f)
    b = imp(e, f)
    theta = epsilon_unifier(b, unifier_c(b))
    return ClassicalProjection(theta, e)


def mgu_ext_c(f: Formula, e: Formula) -> Substitution:
    """Most general unifier of ``f`` in classical logic extended by ``e``."""
    if not is_parameter_only(e):
        raise ValueError("extension axiom must be parameter-only")
    b = imp(e, f)
    if not taut_c(uap_c(b)):
        raise NotUnifiable(b)
    return epsilon_unifier(b, unifier_c(b))


# ---------------------------------------------------------------- checks

def is_identity_for_c(theta: Substitution, f: Formula) -> bool:
    """``f`` classically entails ``theta(a) <-> a`` for each bound atom."""
    return all(taut_c(imp(f, iff(t, Formula(ATOM, atom=a)))) for a, t in theta.items())


def less_general_c(gamma: Substitution, theta: Substitution, lam: Substitution,
                   atoms: Iterable[Atom], axiom: Formula = TOP) -> bool:
    """``axiom |- gamma(x) <-> lam(theta(x))`` classically for the given atoms."""
    for x in atoms:
        lhs = gamma.image(x)
        rhs = apply(lam, theta.image(x))
        if not taut_c(imp(axiom, iff(lhs, rhs))):
            return False
    return True
