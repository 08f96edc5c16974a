"""Admissibility relative to parameter-only contexts, preservativity and
refuting contexts for non-derivable implications."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Sequence

from .bisim import DEFAULT_LIMITS, Limits
from .errors import InternalInvariantBroken, SignatureExhausted
from .formula import (
    PARAMETER, TOP, Atom, Formula, Substitution, all_atoms, apply, atom, big_and,
    conj, iff, imp, is_parameter_only, variables,
)
from .projectivity import ApproxEntry, parameter_part, projective_approx
from .prover import DEFAULT_PROVER, Prover


@dataclass(frozen=True)
class Rule:
    premise: Formula
    conclusions: tuple

    def __post_init__(self):
        object.__setattr__(self, "conclusions", tuple(self.conclusions))


@dataclass
class AdmissibilityCertificate:
    """Per-entry evidence for a verdict.

    On a positive verdict ``covered`` pairs every approximant with a conclusion
    it implies. On a negative verdict ``refutation`` is an approximant none of
    whose conclusions follow; its substitution unifies the premise in the
    context of its projection but no conclusion.
    """
    admissible: bool
    covered: list = field(default_factory=list)      # (ApproxEntry, conclusion)
    refutation: ApproxEntry | None = None


def admissible_gamma(rule: Rule, gamma: Sequence[Formula], prover: Prover | None = None,
                     limits: Limits = DEFAULT_LIMITS) -> AdmissibilityCertificate:
    """Decide ``premise |~_gamma conclusions`` through projective approximations."""
    pr = prover or DEFAULT_PROVER
    if not rule.conclusions:
        raise ValueError("a rule needs at least one conclusion")
    approx = projective_approx(rule.premise, gamma, pr, limits)
    cert = AdmissibilityCertificate(True)
    for entry in approx:
        hit = next((d for d in rule.conclusions if pr.implies(entry.formula, d)), None)
        if hit is None:
            return AdmissibilityCertificate(False, cert.covered, entry)
        cert.covered.append((entry, hit))
    return cert


def check_refutation(rule: Rule, entry: ApproxEntry, prover: Prover | None = None) -> bool:
    """Re-verify a negative certificate: the substitution unifies the premise
    relative to the projection, and no conclusion."""
    pr = prover or DEFAULT_PROVER
    e, theta = entry.projection, entry.theta
    if not pr.implies(e, apply(theta, rule.premise)):
        return False
    return not any(pr.implies(e, apply(theta, d)) for d in rule.conclusions)


def admissible_L(a: Formula, b: Formula, prover: Prover | None = None) -> bool:
    """Admissibility relative to all parameter-only contexts coincides with derivability."""
    return (prover or DEFAULT_PROVER).implies(a, b)


def preservative(a: Formula, b: Formula, gamma: Iterable[Formula],
                 prover: Prover | None = None) -> bool:
    pr = prover or DEFAULT_PROVER
    return all(pr.implies(e, b) for e in gamma if pr.implies(e, a))


def fresh_parameters(k: int, used: Iterable[Atom], prefix: str = "p",
                     limit: int = 1000) -> list[Atom]:
    taken = {a.name for a in used}
    out = []
    for i in count(1):
        if len(out) == k:
            return out
        if i > limit:
            raise SignatureExhausted(f"no {k} fresh parameters named {prefix}<n> available")
        name = f"{prefix}{i}"
        if name not in taken:
            out.append(Atom(name, PARAMETER))


def witness_context(a: Formula, b: Formula, prover: Prover | None = None,
                    max_fresh: int = 1000) -> tuple[Formula, Substitution] | None:
    """A projective formula implying ``a`` but not ``b``, with its projective substitution.

    Each variable ``x_i`` of ``a`` is tied to a fresh parameter ``p_i``:
    ``E := a & /\\ (x_i <-> p_i)`` and ``theta(x_i) := p_i``. Then ``E`` is
    ``theta(a)``-projective via ``theta``, so ``a |~ b`` fails in the context
    ``theta(a)``. Returns None when ``a -> b`` is derivable.
    """
    pr = prover or DEFAULT_PROVER
    if pr.implies(a, b):
        return None
    vs = sorted(variables(a))
    ps = fresh_parameters(len(vs), all_atoms(a, b), limit=max_fresh)
    theta = Substitution({x: atom(p) for x, p in zip(vs, ps)})
    e = conj(a, big_and([iff(atom(x), atom(p)) for x, p in zip(vs, ps)])) if vs else a
    if not verify_witness(a, b, e, theta, pr):
        raise InternalInvariantBroken("witness context failed its checks")
    return e, theta


def verify_witness(a: Formula, b: Formula, e: Formula, theta: Substitution,
                   prover: Prover | None = None) -> bool:
    """``e`` is ``theta(a)``-projective via ``theta``, implies ``a`` and not ``b``."""
    pr = prover or DEFAULT_PROVER
    proj = apply(theta, a)
    if not is_parameter_only(proj) or not pr.equivalent(apply(theta, e), proj):
        return False
    if not all(pr.prove([e], iff(t, atom(x))) for x, t in theta.items()):
        return False
    return pr.implies(e, a) and not pr.implies(e, b)


# ---------------------------------------------------------------- oracles

def substitution_pool(vs: Sequence[Atom], atoms: Sequence[Atom], size: int,
                      rng: random.Random) -> list[Substitution]:
    """Random substitutions whose bindings have implication depth at most one."""
    from .formula import BOTTOM, disj
    leaves = [TOP, BOTTOM] + [atom(a) for a in atoms]

    def small() -> Formula:
        x, y = rng.choice(leaves), rng.choice(leaves)
        return rng.choice([x, conj(x, y), disj(x, y), imp(x, y)])

    return [Substitution({v: small() for v in vs}) for _ in range(size)]


def refuting_substitution(rule: Rule, gamma: Sequence[Formula], pool: Iterable[Substitution],
                          prover: Prover | None = None):
    """First ``(E, theta)`` with ``E |- theta(premise)`` but no ``E |- theta(D)``."""
    pr = prover or DEFAULT_PROVER
    contexts = parameter_part(gamma)
    for theta in pool:
        for e in contexts:
            if not pr.implies(e, apply(theta, rule.premise)):
                continue
            if not any(pr.implies(e, apply(theta, d)) for d in rule.conclusions):
                return e, theta
    return None


def relativised_by_reduction(rule: Rule, e: Formula, prover: Prover | None = None,
                             limits: Limits = DEFAULT_LIMITS) -> bool:
    """``A |~_E D`` computed as ``(E -> A) |~_T (E -> D)``."""
    reduced = Rule(imp(e, rule.premise), tuple(imp(e, d) for d in rule.conclusions))
    return admissible_gamma(reduced, [TOP], prover, limits).admissible
