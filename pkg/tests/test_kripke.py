import json
import random

import pytest

from parproj.errors import ClusterError, NotRooted, PersistenceViolation, XDisagreement
from parproj.formula import AND, BOT, IMP, OR, Substitution, TOP, apply, compose, parse
from parproj.kripke import (
    all_models, chain, dump, forces_everywhere, from_dict, generated, load, par_variants,
    point, random_model, rooted_frames, subst_image, sum_with_fresh_root, validate, variant,
    variants, weakly_forces,
)

from strategies import P, Q, X, Y, random_formula

F = parse


def naive_forces(k, w, f):
    """Forcing straight from the clauses, by recursion over successors."""
    if f.kind == BOT:
        return False
    if f.kind == AND:
        return naive_forces(k, w, f.left) and naive_forces(k, w, f.right)
    if f.kind == OR:
        return naive_forces(k, w, f.left) or naive_forces(k, w, f.right)
    if f.kind == IMP:
        return all(not naive_forces(k, u, f.left) or naive_forces(k, u, f.right)
                   for u in range(len(k)) if k.leq(w, u))
    return f.atom in k.vals[w]


def two_chain():
    return chain([], [X])


class TestValidate:
    def test_single_node(self):
        k = validate(["w"], [], {"w": [P]})
        assert k.forces_root(F("p"))

    def test_persistence_violation(self):
        with pytest.raises(PersistenceViolation):
            validate(["w", "u"], [("w", "u")], {"w": [P], "u": []})

    def test_not_rooted(self):
        with pytest.raises(NotRooted):
            validate(["a", "b"], [], {})

    def test_cluster_rejected(self):
        with pytest.raises(ClusterError):
            validate(["a", "b"], [("a", "b"), ("b", "a")], {})

    def test_transitive_closure(self):
        k = validate(["a", "b", "c"], [("a", "b"), ("b", "c")], {"c": [X]})
        assert k.leq(0, 2)

    def test_file_format_roundtrip(self, tmp_path):
        data = {"root": "w0", "nodes": [{"id": "w0", "val": ["p"]}, {"id": "w1", "val": ["p", "x"]}],
                "order": [["w0", "w1"]]}
        k = from_dict(data)
        path = tmp_path / "m.json"
        dump(k, path)
        again = load(path)
        assert again.canonical_key() == k.canonical_key()
        assert json.loads(path.read_text())["root"] == "w0"


class TestForcing:
    def test_textbook_countermodel(self):
        k = two_chain()
        assert k.forces_root(F("~~x"))
        assert not k.forces_root(F("x | ~x"))

    def test_constants(self):
        for k in all_models(3, [P]):
            assert k.truth_set(F("false")) == 0
            assert forces_everywhere(k, F("p -> p"))

    def test_agrees_with_naive_clauses(self):
        rng = random.Random(11)
        for _ in range(150):
            k = random_model(rng, [P, X, Y], 6)
            f = random_formula(rng, [P, X, Y], 4)
            mask = k.truth_set(f)
            for w in range(len(k)):
                assert bool(mask >> w & 1) == naive_forces(k, w, f)

    def test_persistence_of_forcing(self):
        rng = random.Random(5)
        for _ in range(100):
            k = random_model(rng, [P, X], 6)
            f = random_formula(rng, [P, X], 4)
            mask = k.truth_set(f)
            for w in range(len(k)):
                if mask >> w & 1:
                    assert all(mask >> u & 1 for u in range(len(k)) if k.leq(w, u))


class TestWeakForcing:
    def test_examples(self):
        k = two_chain()
        assert weakly_forces(k, F("x"))
        assert not k.forces_root(F("x"))
        assert weakly_forces(point(), F("false"))


class TestGenerated:
    def test_root_and_top(self):
        k = two_chain()
        assert generated(k, k.root).canonical_key() == k.canonical_key()
        top = generated(k, 1)
        assert len(top) == 1 and top.forces_root(F("x"))

    def test_forcing_preserved_on_cone(self):
        rng = random.Random(7)
        for _ in range(80):
            k = random_model(rng, [P, X], 6)
            w = rng.randrange(len(k))
            g = generated(k, w)
            f = random_formula(rng, [P, X], 4)
            for i, name in enumerate(g.names):
                assert g.forces(i, f) == k.forces(k.index(name), f)


class TestVariants:
    def test_all_fixed_gives_itself(self):
        k = chain([P], [P, X])
        assert [v.canonical_key() for v in variants(k, [])] == [k.canonical_key()]

    def test_free_revaluation(self):
        k = chain([], [P, X])
        roots = {v.vals[v.root] for v in variants(k, [P, X])}
        assert roots == {frozenset(), frozenset({P}), frozenset({X}), frozenset({P, X})}

    def test_par_variants_of_two_chain(self):
        k = chain([P], [P])
        assert {v.vals[v.root] for v in par_variants(k, [P, X])} == {frozenset({P})}
        k = chain([P], [P, X])
        assert {v.vals[v.root] for v in par_variants(k, [P, X])} == {frozenset({P}), frozenset({P, X})}

    def test_variant_errors(self):
        k = chain([], [X])
        with pytest.raises(XDisagreement):
            variant(k, [X], fixed=[X])
        with pytest.raises(PersistenceViolation):
            variant(k, [P], fixed=[])


class TestSubstImage:
    def test_identity(self):
        k = chain([P], [P, X])
        assert subst_image(Substitution(), k).vals == k.vals

    def test_top(self):
        k = chain([], [P])
        img = subst_image(Substitution({X: TOP}), k, [P, X])
        assert all(X in v for v in img.vals)

    def test_forcing_equivalence_and_composition(self):
        rng = random.Random(13)
        atoms = [P, X, Y]
        for _ in range(80):
            k = random_model(rng, atoms, 5)
            theta = Substitution({X: random_formula(rng, atoms, 2), Y: random_formula(rng, atoms, 2)})
            gamma = Substitution({X: random_formula(rng, atoms, 2)})
            f = random_formula(rng, atoms, 3)
            assert subst_image(theta, k, atoms).truth_set(f) == k.truth_set(apply(theta, f))
            both = subst_image(compose(theta, gamma), k, atoms)
            stepwise = subst_image(gamma, subst_image(theta, k, atoms), atoms)
            assert both.vals == stepwise.vals


class TestSum:
    def test_empty(self):
        k = sum_with_fresh_root([])
        assert len(k) == 1 and k.vals[0] == frozenset()

    def test_single(self):
        k = sum_with_fresh_root([chain([P], [P, X])])
        assert len(k) == 3 and k.vals[k.root] == frozenset() and len(k.successors(k.root)) == 2

    def test_old_nodes_keep_forcing(self):
        rng = random.Random(17)
        for _ in range(40):
            ms = [random_model(rng, [P, X], 4) for _ in range(rng.randrange(1, 3))]
            s = sum_with_fresh_root(ms)
            f = random_formula(rng, [P, X], 3)
            for mi, m in enumerate(ms):
                for i, name in enumerate(m.names):
                    assert m.forces(i, f) == s.forces(s.index(f"m{mi}.{name}"), f)


def test_frame_counts():
    assert [len(rooted_frames(n)) for n in range(1, 6)] == [1, 1, 2, 5, 16]


def test_enumerated_models_are_valid():
    for k in all_models(3, [P, X]):
        for i in range(len(k)):
            for j in range(len(k)):
                if k.leq(i, j):
                    assert k.vals[i] <= k.vals[j]
