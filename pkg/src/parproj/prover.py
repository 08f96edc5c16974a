"""Decision procedure for intuitionistic propositional logic.

The formula is named subformula-by-subformula into two kinds of clauses:
flat clauses ``a1 & ... & an -> b1 | ... | bm`` handled by a SAT solver, and
implication clauses ``(a -> b) -> c`` between atoms. Search alternates SAT
calls with recursive attempts to justify implication clauses; every success
is learned as a new flat clause. A failed search leaves behind a tree of SAT
models, which is a Kripke countermodel.
"""
from __future__ import annotations

import logging
from itertools import count
from typing import Iterable

from pysat.solvers import Solver

from .classical import truth_table
from .errors import InternalInvariantBroken
from .formula import (
    AND, ATOM, BOT, IMP, OR, TOP, Atom, Formula, all_atoms, big_and, iff, imp,
    postorder,
)
from .kripke import KripkeModel, generated, point

log = logging.getLogger(__name__)

SAT_BACKEND = "m22"


class _Clauses:
    """Named clause form of one goal formula."""

    def __init__(self, goal: Formula):
        self.ids: dict[int, int] = {}
        self.atom_of: dict[int, Atom] = {}
        self.flat: list[list[int]] = []
        self.impl: list[tuple[int, int, int]] = []
        fresh = count(1)
        for g in postorder(goal):
            v = next(fresh)
            self.ids[id(g)] = v
            if g.kind == BOT:
                self.flat.append([-v])
            elif g.kind == ATOM:
                self.atom_of[v] = g.atom
            else:
                a, b = self.ids[id(g.left)], self.ids[id(g.right)]
                if g.kind == AND:
                    self.flat += [[-v, a], [-v, b], [-a, -b, v]]
                elif g.kind == OR:
                    self.flat += [[-v, a, b], [-a, v], [-b, v]]
                else:
                    self.flat += [[-v, -a, b], [-b, v]]
                    self.impl.append((a, b, v))
        self.goal = self.ids[id(goal)]


class _Search:
    def __init__(self, clauses: _Clauses, solver: Solver):
        self.c = clauses
        self.sat = solver
        self.calls = 0

    def prove(self, assumptions: frozenset, q: int):
        """Return ``(True, core)`` or ``(False, tree)``; tree = (true atoms, children)."""
        while True:
            self.calls += 1
            if not self.sat.solve(assumptions=sorted(assumptions) + [-q]):
                core = self.sat.get_core() or []
                return True, frozenset(l for l in core if l > 0 and l in assumptions)
            model = frozenset(l for l in self.sat.get_model() if l > 0)
            children = []
            learned = False
            for a, b, c in self.c.impl:
                if c in model or a in model:
                    continue
                ok, res = self.prove(model | {a}, b)
                if ok:
                    self.sat.add_clause([-l for l in sorted(res) if l != a] + [c])
                    learned = True
                    break
                children.append(res)
            if not learned:
                return False, (model, children)


def _tree_to_model(tree, atom_of: dict, atoms: Iterable[Atom]) -> KripkeModel:
    keep = set(atoms)
    names, vals, ups = [], [], []

    def walk(node) -> int:
        model, children = node
        i = len(names)
        names.append(f"w{i}")
        vals.append(frozenset(atom_of[v] for v in model if v in atom_of and atom_of[v] in keep))
        ups.append(1 << i)
        for ch in children:
            j = walk(ch)
            ups[i] |= ups[j]
        return i

    walk(tree)
    return KripkeModel(names, ups, vals, 0)


class Prover:
    """IPC prover with a per-instance result cache keyed by formula identity."""

    def __init__(self, cache_limit: int | None = None):
        self.cache_limit = cache_limit
        self._cache: dict[int, tuple[bool, KripkeModel | None]] = {}
        self.stats = {"queries": 0, "cache_hits": 0, "sat_calls": 0}

    def _decide(self, f: Formula) -> tuple[bool, KripkeModel | None]:
        self.stats["queries"] += 1
        hit = self._cache.get(id(f))
        if hit is not None:
            self.stats["cache_hits"] += 1
            return hit
        result = self._search(f)
        if self.cache_limit is None or len(self._cache) < self.cache_limit:
            self._cache[id(f)] = result
        return result

    def _search(self, f: Formula) -> tuple[bool, KripkeModel | None]:
        atoms = sorted(all_atoms(f))
        if len(atoms) <= 16:
            table = truth_table(f, atoms)
            full = (1 << (1 << len(atoms))) - 1
            if table != full:
                # a refuting row is a one-node countermodel
                row = ((~table) & full).bit_length() - 1
                val = [a for i, a in enumerate(atoms) if row >> i & 1]
                return False, point(val)
        clauses = _Clauses(f)
        with Solver(name=SAT_BACKEND, bootstrap_with=clauses.flat) as solver:
            search = _Search(clauses, solver)
            ok, res = search.prove(frozenset(), clauses.goal)
            self.stats["sat_calls"] += search.calls
        if ok:
            return True, None
        model = _tree_to_model(res, clauses.atom_of, atoms)
        if model.forces_root(f):
            raise InternalInvariantBroken(f"extracted model does not refute {f}")
        return False, model

    def valid(self, f: Formula) -> bool:
        return self._decide(f)[0]

    def prove(self, premises: Iterable[Formula], goal: Formula) -> bool:
        return self.valid(_judgement(premises, goal))

    def countermodel(self, premises: Iterable[Formula], goal: Formula) -> KripkeModel | None:
        prem = list(premises)
        model = self._decide(_judgement(prem, goal))[1]
        if model is None or not prem:
            return model
        good = model.truth_set(big_and(prem)) & ~model.truth_set(goal)
        w = (good & -good).bit_length() - 1
        return generated(model, w).relabel()

    def equivalent(self, a: Formula, b: Formula) -> bool:
        return a is b or self.valid(iff(a, b))

    def implies(self, a: Formula, b: Formula) -> bool:
        return a is b or b is TOP or self.valid(imp(a, b))

    def clear(self):
        self._cache.clear()


def _judgement(premises: Iterable[Formula], goal: Formula) -> Formula:
    prem = list(premises)
    if not prem:
        return goal
    return imp(big_and(prem), goal)


DEFAULT_PROVER = Prover()


def prove_i(premises: Iterable[Formula], goal: Formula, prover: Prover | None = None) -> bool:
    """``premises |-i goal``."""
    return (prover or DEFAULT_PROVER).prove(premises, goal)


def valid_i(f: Formula, prover: Prover | None = None) -> bool:
    return (prover or DEFAULT_PROVER).valid(f)


def countermodel_i(premises: Iterable[Formula], goal: Formula,
                   prover: Prover | None = None) -> KripkeModel | None:
    """A rooted model forcing every premise and not the goal at its root, or ``None``."""
    return (prover or DEFAULT_PROVER).countermodel(premises, goal)


def equivalent_i(a: Formula, b: Formula, prover: Prover | None = None) -> bool:
    return (prover or DEFAULT_PROVER).equivalent(a, b)


def implies_i(a: Formula, b: Formula, prover: Prover | None = None) -> bool:
    return (prover or DEFAULT_PROVER).implies(a, b)
