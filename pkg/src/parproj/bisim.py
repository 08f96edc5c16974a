"""Bounded bisimulation over a finite atom set.

For ``n >= 1`` two rooted models are ``n``-bisimilar exactly when the sets of
``(n-1)``-classes of their nodes coincide, and ``K <=n K'`` exactly when the
set for ``K`` is contained in the one for ``K'``. A :class:`Bank` enumerates
one representative model per ``n``-class and synthesises, for each
representative ``g``, a formula of implication depth ``<= n`` whose models are
exactly those ``<=n``-below ``g``.
"""
from __future__ import annotations

import functools
import logging
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .errors import InternalInvariantBroken, LimitExceeded
from .formula import BOTTOM, TOP, Atom, Formula, atom, big_and, big_or, complexity, imp
from .kripke import KripkeModel, generated, point, sum_with_fresh_root

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Limits:
    max_atoms: int = 3
    max_depth: int = 2
    max_reps: int = 20000
    max_unions: int = 500000
    max_steps: int = 4_000_000


DEFAULT_LIMITS = Limits()


# ---------------------------------------------------------------- raw relations

def node_keys(k: KripkeModel, n: int, atoms: Iterable[Atom] | None = None) -> list:
    """Hashable ``n``-class of the submodel generated by each node."""
    if atoms is None:
        atoms = k.atoms()
    keep = frozenset(atoms)
    keys = [k.vals[i] & keep for i in range(len(k))]
    for _ in range(n):
        keys = [frozenset(keys[j] for j in range(len(k)) if k.up[i] >> j & 1)
                for i in range(len(k))]
    return keys


def _common_atoms(k1: KripkeModel, k2: KripkeModel, atoms) -> frozenset:
    if atoms is not None:
        return frozenset(atoms)
    return k1.atoms() | k2.atoms()


def bisim_n(k1: KripkeModel, k2: KripkeModel, n: int, atoms: Iterable[Atom] | None = None) -> bool:
    a = _common_atoms(k1, k2, atoms)
    return node_keys(k1, n, a)[k1.root] == node_keys(k2, n, a)[k2.root]


def leq_n(k1: KripkeModel, k2: KripkeModel, n: int, atoms: Iterable[Atom] | None = None) -> bool:
    """``k1 <=n k2``; at level 0 the root valuation of ``k1`` must contain that of ``k2``."""
    a = _common_atoms(k1, k2, atoms)
    if n == 0:
        return k1.vals[k1.root] & a >= k2.vals[k2.root] & a
    return node_keys(k1, n, a)[k1.root] <= node_keys(k2, n, a)[k2.root]


def bisim_n_by_definition(k1: KripkeModel, k2: KripkeModel, n: int, atoms=None) -> bool:
    """Literal back-and-forth recursion over generated submodels (slow; for testing)."""
    a = _common_atoms(k1, k2, atoms)

    @functools.lru_cache(maxsize=None)
    def rel(i: int, j: int, m: int) -> bool:
        if m == 0:
            return k1.vals[i] & a == k2.vals[j] & a
        above1 = [u for u in range(len(k1)) if k1.up[i] >> u & 1]
        above2 = [u for u in range(len(k2)) if k2.up[j] >> u & 1]
        forth = all(any(rel(u, v, m - 1) for v in above2) for u in above1)
        back = all(any(rel(u, v, m - 1) for u in above1) for v in above2)
        return forth and back

    return rel(k1.root, k2.root, n)


def leq_n_by_definition(k1: KripkeModel, k2: KripkeModel, n: int, atoms=None) -> bool:
    a = _common_atoms(k1, k2, atoms)
    if n == 0:
        return k1.vals[k1.root] & a >= k2.vals[k2.root] & a
    above2 = [u for u in range(len(k2)) if k2.up[k2.root] >> u & 1]
    return all(any(bisim_n_by_definition(generated(k1, u), generated(k2, v), n - 1, a)
                   for v in above2)
               for u in range(len(k1)) if k1.up[k1.root] >> u & 1)


# ---------------------------------------------------------------- bank

@dataclass
class Bank:
    """Representatives of all ``n``-classes of rooted models over ``atoms``.

    ``keys[i]`` is the class of representative ``i``: a frozenset of atoms at
    level 0, otherwise the frozenset of level ``n-1`` class indices of its nodes.
    """

    atoms: tuple
    level: int
    keys: list
    recipes: list               # (root valuation, child rep indices)
    lower: "Bank | None"
    index: dict = field(default_factory=dict)
    below: list = field(default_factory=list)   # below[i]: mask of reps <=n rep i
    build_seconds: float = 0.0
    _models: dict = field(default_factory=dict, repr=False)
    _chi: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.keys)

    @property
    def all_mask(self) -> int:
        return (1 << len(self.keys)) - 1

    # ------------------------------------------------------------ structure

    def root_val(self, i: int) -> frozenset:
        return self.recipes[i][0]

    def model(self, i: int) -> KripkeModel:
        """Concrete representative model of class ``i``."""
        m = self._models.get(i)
        if m is None:
            val, children = self.recipes[i]
            if not children:
                m = point(val)
            else:
                m = sum_with_fresh_root([self.model(c) for c in children], val).relabel()
            self._models[i] = m
        return m

    @property
    def reps(self) -> list[KripkeModel]:
        return [self.model(i) for i in range(len(self))]

    def leq(self, i: int, j: int) -> bool:
        return bool(self.below[j] >> i & 1)

    def classify_nodes(self, k: KripkeModel) -> list[int]:
        """Class index at this level for every node of ``k``."""
        keep = frozenset(self.atoms)
        if self.lower is None:
            return [self.index[k.vals[i] & keep] for i in range(len(k))]
        low = self.lower.classify_nodes(k)
        out = []
        for i in range(len(k)):
            key = frozenset(low[j] for j in range(len(k)) if k.up[i] >> j & 1)
            out.append(self.index[key])
        return out

    def classify(self, k: KripkeModel) -> int:
        return self.classify_nodes(k)[k.root]

    def truth_mask(self, f: Formula) -> int:
        """Reps forcing ``f`` at the root (meaningful when ``complexity(f) <= level``)."""
        m = 0
        for i in range(len(self)):
            if self.model(i).forces_root(f):
                m |= 1 << i
        return m

    # ------------------------------------------------------------ downsets

    def downset_closure(self, mask: int) -> int:
        out = 0
        for i in _bits(mask):
            out |= self.below[i]
        return out

    def is_downset(self, mask: int) -> bool:
        return self.downset_closure(mask) == mask

    def maximal(self, mask: int) -> list[int]:
        items = list(_bits(mask))
        return [i for i in items
                if not any(j != i and self.leq(i, j) and not self.leq(j, i) for j in items)]

    def characteristic(self, i: int) -> Formula:
        """Formula forced exactly by the models ``<=n``-below rep ``i``."""
        f = self._chi.get(i)
        if f is not None:
            return f
        if self.lower is None:
            f = big_and(atom(a) for a in sorted(self.root_val(i)))
        else:
            low = self.lower
            parts = []
            for d in range(len(low)):
                if d in self.keys[i]:
                    continue
                guard, escape = low.characteristic(d), low.strictly_below_formula(d)
                parts.append(escape if guard is TOP else imp(guard, escape))
            f = big_and(parts)
        self._chi[i] = f
        return f

    def strictly_below_formula(self, d: int) -> Formula:
        """Forced exactly at models strictly ``<=``-below class ``d`` at this level."""
        if self.lower is None:
            return big_or(atom(a) for a in self.atoms if a not in self.root_val(d))
        strict = self.below[d] & ~(1 << d)
        return big_or(self.characteristic(j) for j in self.maximal(strict))

    def formula_for_downset(self, mask: int) -> Formula:
        if not self.is_downset(mask):
            raise ValueError("class set is not downward closed")
        if mask == 0:
            f = BOTTOM
        elif mask == self.all_mask:
            f = TOP
        else:
            f = big_or(self.characteristic(i) for i in self.maximal(mask))
        if self.truth_mask(f) != mask:
            raise InternalInvariantBroken(f"witness {f} does not define the requested class set")
        return f

    def definables(self, limit: int = 100000) -> dict[int, Formula]:
        """Every downward closed set of reps with its witness formula."""
        out = {}
        for mask in self.downsets(limit):
            out[mask] = self.formula_for_downset(mask)
        return out

    def downsets(self, limit: int = 100000) -> list[int]:
        """All downward closed rep sets (antichain enumeration)."""
        found = []
        order = list(range(len(self)))

        def extend(pos: int, mask: int, chosen: list):
            if len(found) > limit:
                raise LimitExceeded("downsets", len(found), limit)
            if pos == len(order):
                found.append(mask)
                return
            i = order[pos]
            extend(pos + 1, mask, chosen)
            if not mask >> i & 1 and all(not self.leq(i, j) and not self.leq(j, i) for j in chosen):
                extend(pos + 1, mask | self.below[i], chosen + [i])

        extend(0, 0, [])
        return sorted(set(found))


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


# ---------------------------------------------------------------- construction

@functools.lru_cache(maxsize=64)
def _cached_bank(atoms: tuple, n: int, limits: Limits) -> Bank:
    return _build(atoms, n, limits)


def build_bank(atoms: Iterable[Atom], n: int, limits: Limits = DEFAULT_LIMITS) -> Bank:
    atoms = tuple(sorted(set(atoms)))
    if len(atoms) > limits.max_atoms:
        raise LimitExceeded("atoms", len(atoms), limits.max_atoms)
    # one-atom banks stay tiny at every depth
    if n > limits.max_depth and len(atoms) > 1:
        raise LimitExceeded("depth", n, limits.max_depth)
    return _cached_bank(atoms, n, limits)


def _build(atoms: tuple, n: int, limits: Limits) -> Bank:
    start = time.perf_counter()
    vals = [frozenset(c) for r in range(len(atoms) + 1) for c in combinations(atoms, r)]
    if n == 0:
        bank = Bank(atoms, 0, vals, [(v, ()) for v in vals], None)
        bank.index = {k: i for i, k in enumerate(bank.keys)}
        bank.below = [sum(1 << j for j, w in enumerate(vals) if w >= v) for v in vals]
        bank.build_seconds = time.perf_counter() - start
        return bank

    chain = [_cached_bank(atoms, j, limits) for j in range(n)]
    low = chain[-1]

    def root_key(v: frozenset, union: frozenset) -> frozenset:
        # S_j: level-j classes of the non-root nodes
        levels = [None] * n
        levels[n - 1] = union
        for j in range(n - 1, 0, -1):
            s = set()
            for k in levels[j]:
                s |= chain[j].keys[k]
            levels[j - 1] = frozenset(s)
        r = chain[0].index[v]
        for j in range(1, n):
            r = chain[j].index[frozenset(levels[j - 1] | {r})]
        return frozenset(union | {r})

    def ceiling(union: frozenset) -> frozenset:
        s = set(union)
        for j in range(n - 1, 0, -1):
            s = set().union(*(chain[j].keys[k] for k in s))
        out = frozenset(atoms)
        for k in s:
            out &= chain[0].keys[k]
        return out

    keys: list = []
    recipes: list = []
    index: dict = {}

    def add(key, recipe):
        if key in index:
            return False
        index[key] = len(keys)
        keys.append(key)
        recipes.append(recipe)
        if len(keys) > limits.max_reps:
            raise LimitExceeded("representatives", len(keys), limits.max_reps)
        return True

    # one-node models first, so representatives have minimal height
    for v in vals:
        add(root_key(v, frozenset()), (v, ()))

    unions: dict = {}
    steps = 0
    pending_reps = list(range(len(keys)))
    while pending_reps:
        new_unions = []
        for i in pending_reps:
            ki = keys[i]
            if ki not in unions:
                unions[ki] = (i,)
                new_unions.append(ki)
            steps += len(unions)
            if steps > limits.max_steps:
                raise LimitExceeded("union closure steps", steps, limits.max_steps)
            for u, kids in list(unions.items()):
                w = u | ki
                if w not in unions:
                    unions[w] = kids + (i,)
                    new_unions.append(w)
                    if len(unions) > limits.max_unions:
                        raise LimitExceeded("child class unions", len(unions), limits.max_unions)
        # close the new unions among themselves
        frontier = new_unions
        while frontier:
            nxt = []
            for u in frontier:
                steps += len(unions)
                if steps > limits.max_steps:
                    raise LimitExceeded("union closure steps", steps, limits.max_steps)
                for w0, kids0 in list(unions.items()):
                    w = u | w0
                    if w not in unions:
                        unions[w] = unions[u] + kids0
                        nxt.append(w)
                        if len(unions) > limits.max_unions:
                            raise LimitExceeded("child class unions", len(unions), limits.max_unions)
            new_unions += nxt
            frontier = nxt
        pending_reps = []
        for u in new_unions:
            top = ceiling(u)
            for v in vals:
                if v <= top and add(root_key(v, u), (v, _prune(unions[u]))):
                    pending_reps.append(len(keys) - 1)

    bank = Bank(atoms, n, keys, recipes, low, index)
    bank.below = [0] * len(keys)
    for i, ki in enumerate(keys):
        m = 0
        for j, kj in enumerate(keys):
            if kj <= ki:
                m |= 1 << j
        bank.below[i] = m
    bank.build_seconds = time.perf_counter() - start
    log.debug("bank atoms=%s n=%d reps=%d unions=%d %.2fs", [a.name for a in atoms], n,
              len(keys), len(unions), bank.build_seconds)
    return bank


def _prune(kids: tuple) -> tuple:
    return tuple(dict.fromkeys(kids))


def check_characteristic(bank: Bank) -> None:
    """Raise unless every characteristic formula defines its downset on the bank."""
    for i in range(len(bank)):
        f = bank.characteristic(i)
        if bank.level > 0 and complexity(f) > bank.level:
            raise InternalInvariantBroken(f"characteristic formula of rep {i} too deep")
        if bank.truth_mask(f) != bank.below[i]:
            raise InternalInvariantBroken(f"characteristic formula of rep {i} is wrong")
