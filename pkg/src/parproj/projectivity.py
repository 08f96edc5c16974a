"""Projectivity in intuitionistic logic, projective approximations and
complete sets of unifiers for extensions by a parameter-only axiom."""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .bisim import DEFAULT_LIMITS, Bank, Limits, _bits, build_bank
from .errors import (
    InternalInvariantBroken, LimitExceeded, NotProjective, NotUnifiable,
)
from .formula import (
    BOTTOM, TOP, Atom, Formula, Substitution, all_atoms, apply, atom, atoms_of,
    complexity, compose_all, conj, iff, imp, is_parameter_only, parameters,
    variables,
)
from .kripke import (
    KripkeModel, all_models, forces_everywhere, par_variants, random_model,
    restrict_atoms, weakly_forces,
)
from .prover import DEFAULT_PROVER, Prover

log = logging.getLogger(__name__)

MAX_GHILARDI_VARIABLES = 4


# ---------------------------------------------------------------- Ghilardi substitutions

def ghilardi_step(a: Formula, xs: Iterable[Atom]) -> Substitution:
    """``x := A -> x`` for ``x`` in ``xs``, ``x := A & x`` for the other variables of ``A``."""
    chosen = set(xs)
    vs = variables(a)
    if not chosen <= vs:
        raise ValueError("step set must contain variables of the formula only")
    return Substitution({x: imp(a, atom(x)) if x in chosen else conj(a, atom(x))
                         for x in sorted(vs)})


def powerset_order(vs: Iterable[Atom]) -> list[tuple[Atom, ...]]:
    """All subsets, larger ones first, ties broken lexicographically."""
    vs = sorted(vs)
    out = []
    for r in range(len(vs), -1, -1):
        out.extend(combinations(vs, r))
    return out


@dataclass(frozen=True)
class GhilardiResult:
    theta: Substitution
    per_step: tuple  # ((X_i, theta^{X_i}), ...)


def ghilardi_theta(a: Formula, max_variables: int = MAX_GHILARDI_VARIABLES) -> GhilardiResult:
    """Composite of the steps over the whole powerset of the variables of ``a``."""
    vs = variables(a)
    if len(vs) > max_variables:
        raise LimitExceeded("variables for the Ghilardi substitution", len(vs), max_variables)
    steps = tuple((xs, ghilardi_step(a, xs)) for xs in powerset_order(vs))
    theta = compose_all(t for _, t in steps) if vs else Substitution()
    return GhilardiResult(theta, steps)


def is_identity_for(theta: Substitution, a: Formula, prover: Prover | None = None) -> bool:
    """``a |- theta(x) <-> x`` for every bound variable."""
    pr = prover or DEFAULT_PROVER
    return all(pr.prove([a], iff(t, atom(x))) for x, t in theta.items())


def is_e_fier(theta: Substitution, a: Formula, e: Formula, prover: Prover | None = None) -> bool:
    return (prover or DEFAULT_PROVER).equivalent(apply(theta, a), e)


def decide_E_projective(a: Formula, e: Formula, prover: Prover | None = None) -> Substitution:
    """Projective ``e``-fier of ``a`` or :class:`NotProjective`."""
    if not is_parameter_only(e):
        raise ValueError("projection target must be parameter-only")
    theta = ghilardi_theta(a).theta
    if not is_e_fier(theta, a, e, prover):
        raise NotProjective(a, e)
    return theta


def is_E_projective(a: Formula, e: Formula, prover: Prover | None = None) -> bool:
    try:
        decide_E_projective(a, e, prover)
    except NotProjective:
        return False
    return True


# ---------------------------------------------------------------- semantic oracle

def semantic_extendable(a: Formula, e: Formula, max_nodes: int = 4, samples: int = 300,
                        seed: int = 0, atoms: Iterable[Atom] | None = None,
                        prover: Prover | None = None, use_bank: bool = True) -> bool:
    """Bounded check of ``e``-extendability of ``a``.

    Every model up to ``max_nodes`` nodes (plus bank representatives when the
    bank is small, plus ``samples`` random larger models) that forces ``e``
    and forces ``a`` off the root must have a parameter-preserving variant
    forcing ``a`` everywhere.
    """
    pr = prover or DEFAULT_PROVER
    if not is_parameter_only(e):
        raise ValueError("target must be parameter-only")
    if not pr.implies(a, e):
        return False
    work = sorted(set(atoms or ()) | all_atoms(a, e))
    for k in _oracle_models(a, e, work, max_nodes, samples, seed, use_bank):
        if not extension_counterexample(k, a, e, work):
            continue
        return False
    return True


def extension_counterexample(k: KripkeModel, a: Formula, e: Formula, atoms) -> bool:
    """True when ``k`` violates extendability for ``(a, e)``."""
    if not forces_everywhere(k, e) or not weakly_forces(k, a):
        return False
    return not any(forces_everywhere(v, a) for v in par_variants(k, atoms))


def _oracle_models(a, e, atoms, max_nodes, samples, seed, use_bank):
    yield from all_models(max_nodes, atoms)
    if use_bank:
        level = max(complexity(a), complexity(e)) + 1
        try:
            bank = build_bank(atoms, level)
        except LimitExceeded:
            bank = None
        if bank is not None:
            yield from bank.reps
    rng = random.Random(seed)
    for _ in range(samples):
        yield random_model(rng, atoms, max_nodes + 3)


# ---------------------------------------------------------------- uniform post-interpolant

def effective_complexity(e: Formula, prover: Prover | None = None,
                         limits: Limits = DEFAULT_LIMITS) -> int:
    """Least ``k`` such that ``e`` is equivalent to a formula of implication depth ``<= k``.

    Only parameter-only formulas over small atom sets are searched; otherwise
    the syntactic depth is returned. Top counts as depth 0 since it holds
    everywhere.
    """
    pr = prover or DEFAULT_PROVER
    c = complexity(e)
    if pr.valid(e):
        return 0
    atoms = sorted(all_atoms(e))
    for k in range(min(c, limits.max_depth + 1)):
        try:
            bank = build_bank(atoms, k, limits)
        except LimitExceeded:
            break
        mask = bank.truth_mask(e)
        if not bank.is_downset(mask):
            continue
        if pr.equivalent(bank.formula_for_downset(mask), e):
            return k
    return c


def uap_i(a: Formula, bound: int | None = None, prover: Prover | None = None,
          limits: Limits = DEFAULT_LIMITS) -> Formula:
    """Strongest parameter-only consequence of ``a`` among formulas of depth ``<= bound``.

    For each class ``c`` of the parameter bank, ``a`` entails "the model is
    not above ``c``" or it does not; the result defines the intersection of
    all such entailed sets.
    """
    pr = prover or DEFAULT_PROVER
    vs, ps = atoms_of(a)
    if not vs:
        return a
    if not ps:
        return BOTTOM if pr.valid(imp(a, BOTTOM)) else TOP
    if bound is None:
        bound = complexity(a) + 1
    bank = build_bank(ps, bound, limits)
    result = bank.all_mask
    reached = 0  # classes below the parameter class of some model of ``a``
    for c in sorted(range(len(bank)), key=lambda i: bin(bank.below[i]).count("1")):
        if not result >> c & 1 or reached >> c & 1:
            continue
        not_above = bank.all_mask & ~_above(bank, c)
        witness = pr.countermodel([a], bank.formula_for_downset(not_above))
        if witness is None:
            result &= not_above
        else:
            reached |= bank.below[bank.classify(restrict_atoms(witness, ps))]
    out = bank.formula_for_downset(result)
    if not pr.implies(a, out):
        raise InternalInvariantBroken("interpolant is not a consequence")
    return out


def _above(bank: Bank, c: int) -> int:
    return sum(1 << j for j in range(len(bank)) if bank.below[j] >> c & 1)


def par_projective_i(a: Formula, bound: int | None = None,
                     prover: Prover | None = None) -> tuple[Substitution, Formula]:
    """``(theta, E)`` with ``theta`` a projective ``E``-fier and ``E`` the interpolant."""
    e = uap_i(a, bound, prover)
    return decide_E_projective(a, e, prover), e


# ---------------------------------------------------------------- approximations

@dataclass(frozen=True)
class ApproxEntry:
    formula: Formula
    projection: Formula
    theta: Substitution
    classes: int = 0  # bitmask of bank representatives forcing ``formula``


@dataclass
class ApproxConfig:
    gamma: tuple
    n: int
    working_atoms: tuple


@dataclass
class ApproxResult:
    config: ApproxConfig
    pi: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.pi)

    def __len__(self):
        return len(self.pi)

    def formulas(self) -> list[Formula]:
        return [e.formula for e in self.pi]


def parameter_part(gamma: Iterable[Formula]) -> list[Formula]:
    return [e for e in gamma if is_parameter_only(e)]


def approx_config(a: Formula, gamma: Sequence[Formula], prover: Prover | None = None,
                  limits: Limits = DEFAULT_LIMITS) -> ApproxConfig:
    pars = parameter_part(gamma)
    if not pars:
        raise ValueError("gamma has no parameter-only member")
    n = max([complexity(a)] + [1 + effective_complexity(e, prover, limits) for e in pars])
    atoms = tuple(sorted(all_atoms(a, *pars)))
    return ApproxConfig(tuple(gamma), n, atoms)


class _Extendability:
    """Extendability of downsets of representatives at one bank level."""

    def __init__(self, bank: Bank, e_mask: int):
        self.bank = bank
        self.e_mask = e_mask
        self.vals = bank_vals(bank)
        self.chain = _chain(bank)

    def root_class(self, v: frozenset, union: frozenset) -> int | None:
        chain, n = self.chain, self.bank.level
        if n == 0:
            return None
        levels = [None] * n
        levels[n - 1] = union
        for j in range(n - 1, 0, -1):
            s = set()
            for k in levels[j]:
                s |= chain[j].keys[k]
            levels[j - 1] = frozenset(s)
        ceiling = frozenset(self.bank.atoms)
        for k in levels[0]:
            ceiling &= chain[0].keys[k]
        if not v <= ceiling:
            return None
        r = chain[0].index[v]
        for j in range(1, n):
            r = chain[j].index[frozenset(levels[j - 1] | {r})]
        return self.bank.index[frozenset(union | {r})]

    def failure(self, s_mask: int):
        """A union of member classes with a root valuation that cannot be repaired."""
        bank = self.bank
        unions = {frozenset()}
        for i in _bits(s_mask):
            k = bank.keys[i]
            unions |= {u | k for u in unions}
        for u in sorted(unions, key=len):
            for v in self.vals:
                c = self.root_class(v, u)
                if c is None or not self.e_mask >> c & 1:
                    continue
                pv = frozenset(a for a in v if not a.is_variable)
                repaired = False
                for w in self.vals:
                    if frozenset(a for a in w if not a.is_variable) != pv:
                        continue
                    c2 = self.root_class(w, u)
                    if c2 is not None and s_mask >> c2 & 1:
                        repaired = True
                        break
                if not repaired:
                    return u, v
        return None


def bank_vals(bank: Bank) -> list[frozenset]:
    atoms = bank.atoms
    return [frozenset(c) for r in range(len(atoms) + 1) for c in combinations(atoms, r)]


def _chain(bank: Bank) -> list[Bank]:
    out = []
    b = bank
    while b is not None:
        out.append(b)
        b = b.lower
    return out[::-1]


def maximal_extendable_downsets(bank: Bank, start: int, e_mask: int,
                                max_nodes: int = 20000) -> list[int]:
    """Maximal downsets inside ``start`` that are extendable for the class set ``e_mask``."""
    if bank.level == 0:
        raise ValueError("extendability needs bank level >= 1")
    ext = _Extendability(bank, e_mask)
    results: list[int] = []
    seen: set[int] = set()
    stack = [start & e_mask]
    while stack:
        s = stack.pop()
        if s in seen or any(s & ~r == 0 for r in results):
            continue
        seen.add(s)
        if len(seen) > max_nodes:
            raise LimitExceeded("extendability search nodes", len(seen), max_nodes)
        fail = ext.failure(s)
        if fail is None:
            results = [r for r in results if r & ~s] + [s]
            continue
        union, _ = fail
        covering = [i for i in _bits(s) if bank.keys[i] <= union]
        for e in sorted(union):
            drop = 0
            for i in covering:
                if e in bank.keys[i]:
                    drop |= _above(bank, i)
            stack.append(s & ~drop)
    return sorted(results)


def projective_approx(a: Formula, gamma: Sequence[Formula], prover: Prover | None = None,
                      limits: Limits = DEFAULT_LIMITS) -> ApproxResult:
    """Finite set of Gamma-projective formulas implying ``a`` that covers every
    Gamma-unifier of ``a``.

    Each returned entry is re-verified: it implies ``a`` and the Ghilardi
    substitution of the entry projects it onto its parameter-only target.
    """
    pr = prover or DEFAULT_PROVER
    cfg = approx_config(a, gamma, pr, limits)
    bank = build_bank(cfg.working_atoms, cfg.n, limits)
    a_mask = bank.truth_mask(a)
    result = ApproxResult(cfg)
    seen = set()
    for e in parameter_part(gamma):
        e_mask = bank.truth_mask(e)
        for s in maximal_extendable_downsets(bank, a_mask, e_mask):
            b = bank.formula_for_downset(s)
            if not pr.implies(b, a):
                raise InternalInvariantBroken(f"approximant {b} does not imply {a}")
            try:
                theta = decide_E_projective(b, e, pr)
            except NotProjective:
                raise InternalInvariantBroken(
                    f"extendable class {b} is not {e}-projective") from None
            if (s, id(e)) in seen:
                continue
            seen.add((s, id(e)))
            result.pi.append(ApproxEntry(b, e, theta, s))
    return result


def complete_unifiers_ext(a: Formula, e: Formula, prover: Prover | None = None,
                          limits: Limits = DEFAULT_LIMITS) -> list[Substitution]:
    """Finite complete set of unifiers of ``a`` in IPC extended by ``e``."""
    if not is_parameter_only(e):
        raise ValueError("extension axiom must be parameter-only")
    pr = prover or DEFAULT_PROVER
    approx = projective_approx(a, [e], pr, limits)
    if not approx.pi:
        _confirm_not_unifiable(a, e, pr)
        raise NotUnifiable(a, f"in IPC + {e}")
    out = []
    for entry in approx:
        if not pr.implies(e, apply(entry.theta, a)):
            raise InternalInvariantBroken(f"{entry.theta} does not unify {a}")
        out.append(entry.theta)
    return out


def _confirm_not_unifiable(a: Formula, e: Formula, pr: Prover) -> None:
    """Ground substitutions into constants and parameters must all fail."""
    vs = sorted(variables(a))
    pool = [TOP, BOTTOM] + [atom(p) for p in sorted(parameters(a) | parameters(e))]
    from itertools import product
    for images in product(pool, repeat=len(vs)):
        theta = Substitution(dict(zip(vs, images)))
        if pr.implies(e, apply(theta, a)):
            raise InternalInvariantBroken(f"{theta} unifies {a} but no approximant was found")


def small_equivalents(atoms: Iterable[Atom]) -> list[Formula]:
    """Short formulas over ``atoms``, shortest first: constants, literals and
    binary combinations of those."""
    from .formula import disj, neg
    base = [TOP, BOTTOM]
    for a in sorted(atoms):
        base += [atom(a), neg(atom(a))]
    out = list(base)
    seen = set(map(id, out))
    for f in base:
        for g in base:
            for h in (conj(f, g), disj(f, g), imp(f, g)):
                if id(h) not in seen:
                    seen.add(id(h))
                    out.append(h)
    return out


def compact(f: Formula, prover: Prover | None = None, max_atoms: int = 4,
            classical: bool = False) -> Formula:
    """An equivalent formula from the small pool, else ``f``.

    Equivalence is intuitionistic unless ``classical`` is set.
    """
    from .classical import truth_table
    pr = prover or DEFAULT_PROVER
    atoms = sorted(all_atoms(f))
    if len(atoms) > max_atoms:
        return f
    table = truth_table(f, atoms)
    for g in small_equivalents(atoms):
        if truth_table(g, atoms) == table and (classical or pr.equivalent(f, g)):
            return g
    return f


def compact_substitution(theta: Substitution, prover: Prover | None = None,
                         classical: bool = False) -> Substitution:
    """Same substitution up to provable equivalence of each image."""
    return Substitution({x: compact(t, prover, classical=classical) for x, t in theta.items()})


def less_general(gamma: Substitution, theta: Substitution, lam: Substitution,
                 atoms: Iterable[Atom], axiom: Formula = TOP,
                 prover: Prover | None = None) -> bool:
    """``axiom |- gamma(x) <-> lam(theta(x))`` for each given variable."""
    pr = prover or DEFAULT_PROVER
    for x in atoms:
        rhs = apply(lam, theta.image(x))
        if not pr.implies(axiom, iff(gamma.image(x), rhs)):
            return False
    return True
