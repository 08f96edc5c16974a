"""Acceptance criteria 1-10.

Each criterion records its parts in ``RESULTS``; the terminal summary (see
conftest.py) prints one PASS/FAIL line per criterion. Running this file
directly with ``python3 tests/test_acceptance.py`` does the same without pytest.
"""
import functools
import random
import sys
import time
from itertools import product

import pytest

from parproj.admissibility import (
    Rule, admissible_L, admissible_gamma, check_refutation, refuting_substitution,
    substitution_pool, witness_context,
)
from parproj.bisim import build_bank, leq_n, node_keys
from parproj.classical import (
    entails_c, is_identity_for_c, par_projective_c, taut_c, truth_table, uap_c, unifier_c,
)
from parproj.errors import LimitExceeded, NotProjective, NotUnifiable
from parproj.formula import (
    BOTTOM, TOP, apply, atom, complexity, conj, disj, iff, imp, is_parameter_only, neg, parse,
    variables,
)
from parproj.kripke import from_dict
from parproj.projectivity import (
    complete_unifiers_ext, decide_E_projective, is_e_fier, is_identity_for, less_general,
    projective_approx, semantic_extendable, uap_i,
)
from parproj.prover import countermodel_i, equivalent_i, implies_i, prove_i, valid_i

from strategies import P, Q, X, Y, Z, random_formula

F = parse
RESULTS: dict[int, list] = {}
PROJECTIONS: dict = {}          # formula -> projections found by successful runs


def record(n: int, part: str, ok: bool, detail: str = "") -> None:
    RESULTS.setdefault(n, []).append((part, ok, detail))
    print(f"criterion {n} [{part}]: {'PASS' if ok else 'FAIL'} {detail}".rstrip())


def summary_lines() -> list[str]:
    out = []
    for n in sorted(RESULTS):
        parts = RESULTS[n]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{p[0]}: {p[2] or ('ok' if p[1] else 'failed')}" for p in parts)
        out.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return out


def note_projection(a, e) -> None:
    PROJECTIONS.setdefault(a, [])
    if e not in PROJECTIONS[a]:
        PROJECTIONS[a].append(e)


# ---------------------------------------------------------------- criterion 1 and 3

@functools.lru_cache(maxsize=None)
def classical_corpus() -> tuple:
    rng = random.Random(101)
    return tuple(random_formula(rng, [P, Q, X, Y, Z], 4) for _ in range(300))


def test_c1_classical_totality():
    start = time.perf_counter()
    bad = []
    for a in classical_corpus():
        res = par_projective_c(a)
        theta, e = res.theta, res.projection
        ok = (is_parameter_only(e) and taut_c(iff(apply(theta, a), e))
              and is_identity_for_c(theta, a))
        if not ok:
            bad.append(a)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 60
    record(1, "300 formulas", ok, f"{300 - len(bad)}/300 verified in {elapsed:.1f}s (< 60s)")
    assert ok


def test_c3_triple_equivalence():
    mismatches = positives = 0
    for a in classical_corpus():
        try:
            unifier_c(a)
            unified = True
        except NotUnifiable:
            unified = False
        top = taut_c(uap_c(a))
        res = par_projective_c(a)
        projective = taut_c(apply(res.theta, a)) and is_identity_for_c(res.theta, a)
        positives += unified
        mismatches += not (unified == top == projective)
    ok = mismatches == 0
    record(3, "corpus of criterion 1", ok, f"{mismatches} mismatches, {positives} unifiable")
    assert ok


# ---------------------------------------------------------------- criterion 2

def depth_corpus(leaves, depth):
    layer = list(leaves)
    for _ in range(depth):
        layer = layer + [op(a, b) for op in (conj, disj, imp) for a in layer for b in layer]
    return layer


def brute_strongest(f) -> int:
    """Truth table over p of the strongest parameter function entailed by f."""
    candidates = [BOTTOM, atom(P), neg(atom(P)), TOP]
    entailed = [truth_table(g, [P]) for g in candidates if entails_c([f], g)]
    best = 0b11
    for t in entailed:
        best &= t
    assert best in entailed
    return best


def test_c2_uap_c_exact():
    seen = {}
    for f in depth_corpus([BOTTOM, TOP, atom(P), atom(X)], 2):
        seen.setdefault(truth_table(f, [P, X]), f)
    bad = [f for f in seen.values() if truth_table(uap_c(f), [P]) != brute_strongest(f)]
    ok = not bad
    record(2, "{p,x} depth <= 2", ok, f"{len(seen) - len(bad)}/{len(seen)} truth tables match")
    assert ok


# ---------------------------------------------------------------- criterion 4

def validated_countermodel(f) -> bool:
    k = countermodel_i([], f)
    if k is None:
        return False
    k = from_dict(k.to_dict())
    return not k.forces_root(f)


def test_c4_prover_against_bank():
    bank = build_bank([P, X], 2)
    rng = random.Random(404)
    corpus = []
    while len(corpus) < 200:
        f = random_formula(rng, [P, X], 5, max_complexity=2)
        if complexity(f) <= 2:
            corpus.append(f)
    disagree = negatives = unvalidated = 0
    for f in corpus:
        verdict = valid_i(f)
        disagree += verdict != (bank.truth_mask(f) == bank.all_mask)
        if not verdict:
            negatives += 1
            unvalidated += not validated_countermodel(f)
    fixed = [("x | ~x", False), ("((x -> y) -> x) -> x", False),
             ("~~(x | ~x)", True), ("x & y -> x", True)]
    fixed_bad = 0
    for text, expected in fixed:
        f = F(text)
        fixed_bad += prove_i([], f) is not expected
        if not expected:
            negatives += 1
            unvalidated += not validated_countermodel(f)
    ok = disagree == fixed_bad == unvalidated == 0
    record(4, "bank oracle", ok,
           f"{disagree} disagreements on 200, {fixed_bad} fixed-list errors, "
           f"{negatives - unvalidated}/{negatives} countermodels validated")
    assert ok


# ---------------------------------------------------------------- criterion 5

def test_c5_bisimulation_stack():
    start = time.perf_counter()
    rng = random.Random(505)
    problems = []
    for n in range(3):
        bank = build_bank([P, X], n)
        models = [bank.model(i) for i in range(len(bank))]
        if n == 0:
            below = [sum(1 << i for i, m in enumerate(models) if leq_n(m, mj, 0))
                     for mj in models]
        else:
            keys = [node_keys(m, n, [P, X])[m.root] for m in models]
            below = [sum(1 << i for i, k in enumerate(keys) if k <= kj) for kj in keys]
        # (a) forcing is downward persistent along <=n for formulas of complexity <= n
        corpus = []
        while len(corpus) < 60:
            f = random_formula(rng, [P, X], 4, max_complexity=n)
            if complexity(f) <= n:
                corpus.append(f)
        for f in corpus:
            forced = sum(1 << i for i, m in enumerate(models) if m.forces_root(f))
            if any(forced >> j & 1 and below[j] & ~forced for j in range(len(models))):
                problems.append(f"n={n}: persistence of {f}")
        # (b) characteristic formulas define exactly the <=n-downsets
        for r in range(len(bank)):
            chi = bank.characteristic(r)
            got = sum(1 << i for i, m in enumerate(models) if m.forces_root(chi))
            if got != below[r]:
                problems.append(f"n={n}: characteristic formula of {r}")
        # (c) closure is idempotent
        for _ in range(200):
            mask = rng.getrandbits(len(bank))
            once = bank.downset_closure(mask)
            if bank.downset_closure(once) != once or mask & ~once:
                problems.append(f"n={n}: closure of {mask:#x}")
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 300
    record(5, "{p,x}, n=0,1,2", ok, f"{len(problems)} problems, {elapsed:.1f}s (< 300s)")
    assert ok, problems[:5]


# ---------------------------------------------------------------- criterion 6

TARGETS = ["true", "p", "~p", "p | ~p", "~p | p", "~~p"]
FIXED_6 = ["x | ~x", "p & x", "p -> x", "x -> p", "~x | ~~x", "(x -> y) | (y -> x)",
           "~~x -> x", "(p -> x) -> p", "p | x", "x & (y | p)", "~p -> x | y", "x <-> y"]


@functools.lru_cache(maxsize=None)
def criterion_6():
    rng = random.Random(606)
    corpus = [F(s) for s in FIXED_6]
    while len(corpus) < 40:
        a = random_formula(rng, [P, X, Y], 4, max_complexity=2)
        if variables(a) and complexity(a) <= 2:
            corpus.append(a)
    pairs = disagree = positives = 0
    for a in corpus:
        for text in TARGETS:
            e = F(text)
            try:
                theta = decide_E_projective(a, e)
                decided = True
                note_projection(a, e)
            except NotProjective:
                decided = False
            pairs += 1
            positives += decided
            disagree += decided != semantic_extendable(a, e, max_nodes=3, samples=60)
    return pairs, positives, disagree


def test_c6_projectivity_equivalence():
    pairs, positives, disagree = criterion_6()
    ok = disagree == 0
    record(6, "decision vs extendability", ok,
           f"{pairs - disagree}/{pairs} pairs agree ({positives} projective)")
    assert ok


# ---------------------------------------------------------------- criterion 7

@functools.lru_cache(maxsize=None)
def criterion_7():
    parts = {}
    a = F("p & x")
    cres = par_projective_c(a)
    theta_i = decide_E_projective(a, F("p"))
    note_projection(a, F("p"))
    parts["p & x"] = (equivalent_i(cres.projection, F("p"))
                      and taut_c(iff(apply(cres.theta, a), cres.projection))
                      and is_identity_for_c(cres.theta, a)
                      and is_e_fier(theta_i, a, F("p")) and is_identity_for(theta_i, a))
    b = F("x | ~x")
    try:
        decide_E_projective(b, TOP)
        not_projective = False
    except NotProjective:
        not_projective = True
    unifiers = complete_unifiers_ext(b, TOP)
    images = sorted(("T" if valid_i(t.image(X)) else "F" if valid_i(neg(t.image(X))) else "?")
                    for t in unifiers)
    parts["x | ~x"] = valid_i(uap_i(b)) and not_projective and images == ["F", "T"]
    parts["~p -> q | r"] = not semantic_extendable(F("~p -> q | r"), TOP, max_nodes=3, samples=60)
    return parts


def test_c7_worked_instances():
    parts = criterion_7()
    for name, ok in parts.items():
        record(7, name, ok)
    assert all(parts.values())


# ---------------------------------------------------------------- criterion 8

@functools.lru_cache(maxsize=None)
def criterion_8():
    rng = random.Random(808)
    pool = substitution_pool([X, Y], [P, X, Y], 200, rng)
    pairs = skipped = unifying = covered = 0
    while pairs < 30:
        a = random_formula(rng, [P, X, Y], 3, max_complexity=1)
        if not variables(a) or complexity(a) > 1:
            continue
        e = rng.choice([TOP, atom(P)])
        try:
            thetas = complete_unifiers_ext(a, e)
        except NotUnifiable:
            # consistency: no pool member may unify
            assert not any(implies_i(e, apply(g, a)) for g in pool)
            skipped += 1
            continue
        pairs += 1
        for entry in projective_approx(a, [e]):
            note_projection(entry.formula, entry.projection)
        vs = sorted(variables(a))
        for g in pool:
            if not implies_i(e, apply(g, a)):
                continue
            unifying += 1
            covered += any(less_general(g, t, g, vs, e) for t in thetas)
    return pairs, skipped, unifying, covered


def test_c8_finitary_unification():
    pairs, skipped, unifying, covered = criterion_8()
    ok = unifying > 0 and covered == unifying
    record(8, "30 pairs, pool of 200", ok,
           f"{covered}/{unifying} unifying samples covered "
           f"({skipped} non-unifiable pairs resampled)")
    assert ok


# ---------------------------------------------------------------- criterion 9

def test_c9_admissible_L_and_witnesses():
    rng = random.Random(909)
    mismatch = refuted = bad_witness = 0
    for _ in range(100):
        a = random_formula(rng, [P, X, Y], 3)
        b = random_formula(rng, [P, X, Y], 3)
        derivable = prove_i([], imp(a, b))
        mismatch += admissible_L(a, b) != derivable
        w = witness_context(a, b)
        if derivable:
            bad_witness += w is not None
            continue
        refuted += 1
        if w is None:
            bad_witness += 1
            continue
        e, theta = w
        # the refuting context implies the premise, its image collapses to theta(a),
        # and a countermodel separates it from the conclusion
        k = countermodel_i([e], b)
        ok = (k is not None and k.forces_root(e) and not k.forces_root(b)
              and implies_i(e, a) and equivalent_i(apply(theta, e), apply(theta, a))
              and is_parameter_only(apply(theta, a)))
        bad_witness += not ok
    ok = mismatch == bad_witness == 0
    record(9, "100 pairs", ok, f"{mismatch} mismatches, {refuted - bad_witness}/{refuted} "
                               "refuting contexts verified")
    assert ok


def check_rule(rule, pool_seed):
    cert = admissible_gamma(rule, [TOP])
    certified = cert.admissible and all(implies_i(entry.formula, d) for entry, d in cert.covered)
    pool = substitution_pool(sorted(variables(rule.premise)), [P, X, Y, Z], 200,
                             random.Random(pool_seed))
    survives = refuting_substitution(rule, [TOP], pool) is None
    return certified, survives, len(cert.covered)


def test_c9_disjunction_rule():
    certified, survives, n = check_rule(Rule(F("x | y"), [F("x"), F("y")]), 91)
    ok = certified and survives
    record(9, "disjunction rule", ok, f"admissible with {n} certified entries, "
                                      f"half-oracle {'silent' if survives else 'refutes'}")
    assert ok


def test_c9_refuting_certificate():
    cert = admissible_gamma(Rule(F("x"), [BOTTOM]), [TOP])
    ok = not cert.admissible and check_refutation(Rule(F("x"), [BOTTOM]), cert.refutation)
    record(9, "x / false", ok, "refuted with a checked certificate" if ok else "")
    assert ok


@pytest.mark.xfail(raises=LimitExceeded, strict=True,
                   reason="needs the level-2 bisimulation bank over three atoms")
def test_c9_kreisel_putnam():
    rule = Rule(F("~x -> y | z"), [F("(~x -> y) | (~x -> z)")])
    try:
        certified, survives, n = check_rule(rule, 92)
    except LimitExceeded as exc:
        record(9, "Kreisel-Putnam rule", False, f"not decided: {exc}")
        raise
    ok = certified and survives
    record(9, "Kreisel-Putnam rule", ok, f"admissible with {n} certified entries")
    assert ok


# ---------------------------------------------------------------- criterion 10

def test_c10_uniqueness_of_projections():
    criterion_6(), criterion_7(), criterion_8()
    pairs = clashes = multi = 0
    for a, es in PROJECTIONS.items():
        multi += len(es) > 1
        for e1, e2 in product(es, es):
            pairs += 1
            clashes += not equivalent_i(e1, e2)
    ok = clashes == 0 and len(PROJECTIONS) > 0
    record(10, "runs of criteria 6-8", ok,
           f"{len(PROJECTIONS)} formulas, {multi} with several projections, {clashes} clashes")
    assert ok


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    for t in sorted(tests, key=lambda f: f.__code__.co_firstlineno):
        try:
            t()
        except (AssertionError, LimitExceeded):
            pass
    print()
    print("\n".join(summary_lines()))
    sys.exit(0 if all(p[1] for parts in RESULTS.values() for p in parts) else 1)
