"""Finite rooted intuitionistic Kripke models.

Nodes are indexed ``0..n-1``; ``up[i]`` is the bitmask of nodes ``>= i``
(reflexive). Forcing a formula yields the bitmask of nodes forcing it.
"""
from __future__ import annotations

import json
import random
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .errors import ClusterError, NotRooted, PersistenceViolation, XDisagreement
from .formula import (
    AND, ATOM, BOT, OR, Atom, Formula, Signature, Substitution, DEFAULT_SIGNATURE,
    fold,
)


class KripkeModel:
    """Immutable after construction. Use :func:`validate` for untrusted input."""

    __slots__ = ("names", "up", "vals", "root", "_cache", "_index")

    def __init__(self, names: Sequence[str], up: Sequence[int],
                 vals: Sequence[frozenset], root: int = 0):
        self.names = tuple(names)
        self.up = tuple(up)
        self.vals = tuple(frozenset(v) for v in vals)
        self.root = root
        self._cache = {}
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        parts = []
        for i, n in enumerate(self.names):
            val = ",".join(sorted(a.name for a in self.vals[i]))
            parts.append(f"{n}{{{val}}}")
        return f"KripkeModel(root={self.names[self.root]}, nodes=[{' '.join(parts)}], order={self.covering_pairs()})"

    @property
    def full(self) -> int:
        return (1 << len(self.names)) - 1

    def index(self, node) -> int:
        if isinstance(node, int):
            return node
        return self._index[node]

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    def successors(self, i: int) -> list[int]:
        """Strict successors of node ``i``."""
        m = self.up[i] & ~(1 << i)
        return [j for j in range(len(self.names)) if m >> j & 1]

    def covering_pairs(self) -> list[tuple[str, str]]:
        pairs = []
        for i in range(len(self.names)):
            succ = self.successors(i)
            for j in succ:
                if not any(k != j and self.leq(k, j) for k in succ):
                    pairs.append((self.names[i], self.names[j]))
        return pairs

    def atoms(self) -> frozenset:
        out = set()
        for v in self.vals:
            out |= v
        return frozenset(out)

    def truth_set(self, f: Formula) -> int:
        """Bitmask of the nodes forcing ``f``."""
        cache = self._cache
        hit = cache.get(id(f))
        if hit is not None:
            return hit
        up, full, n = self.up, self.full, len(self.names)

        def leaf(g):
            if g.kind == BOT:
                return 0
            a = g.atom
            m = 0
            for i in range(n):
                if a in self.vals[i]:
                    m |= 1 << i
            return m

        def node(kind, a, b):
            if kind == AND:
                return a & b
            if kind == OR:
                return a | b
            bad = a & ~b & full
            m = 0
            for i in range(n):
                if not up[i] & bad:
                    m |= 1 << i
            return m

        # formulas are interned and never freed, so ids are stable keys
        return fold(f, leaf, node, cache)

    def forces(self, node, f: Formula) -> bool:
        return bool(self.truth_set(f) >> self.index(node) & 1)

    def forces_root(self, f: Formula) -> bool:
        return self.forces(self.root, f)

    def height(self) -> int:
        """Length of the longest strict chain (a single node has height 0)."""
        memo = {}
        order = sorted(range(len(self.names)), key=lambda i: bin(self.up[i]).count("1"))
        for i in order:
            memo[i] = max((1 + memo[j] for j in self.successors(i)), default=0)
        return memo[self.root]

    def canonical_key(self):
        """Isomorphism-invariant key (exact for the small models used here)."""
        n = len(self.names)
        order = _bfs_order(self)
        pos = {old: new for new, old in enumerate(order)}
        rel = tuple(sorted((pos[i], pos[j]) for i in range(n) for j in range(n)
                           if i != j and self.leq(i, j)))
        vals = tuple(tuple(sorted(self.vals[i])) for i in order)
        return rel, vals

    def to_dict(self) -> dict:
        return {
            "root": self.names[self.root],
            "nodes": [{"id": n, "val": sorted(a.name for a in self.vals[i])}
                      for i, n in enumerate(self.names)],
            "order": [list(p) for p in self.covering_pairs()],
        }

    def relabel(self) -> "KripkeModel":
        """Copy with nodes renamed ``w0, w1, ...`` in BFS order from the root."""
        order = _bfs_order(self)
        pos = {old: new for new, old in enumerate(order)}
        up = []
        for old in order:
            m = 0
            for j in range(len(self.names)):
                if self.up[old] >> j & 1:
                    m |= 1 << pos[j]
            up.append(m)
        return KripkeModel([f"w{i}" for i in range(len(order))], up,
                           [self.vals[i] for i in order], 0)


def _bfs_order(k: KripkeModel) -> list[int]:
    seen = [k.root]
    frontier = [k.root]
    while frontier:
        nxt = []
        for i in frontier:
            succ = sorted(k.successors(i), key=lambda j: (tuple(sorted(k.vals[j])), k.names[j]))
            for j in succ:
                if j not in seen:
                    seen.append(j)
                    nxt.append(j)
        frontier = nxt
    return seen


# ---------------------------------------------------------------- construction

def validate(names: Sequence[str], pairs: Iterable[tuple[str, str]],
             valuation: Mapping[str, Iterable[Atom]], root: str | None = None) -> KripkeModel:
    """Build a model from covering pairs, closing reflexively and transitively."""
    names = list(names)
    if not names:
        raise NotRooted("model has no nodes")
    if len(set(names)) != len(names):
        raise ValueError("duplicate node ids")
    idx = {n: i for i, n in enumerate(names)}
    n = len(names)
    up = [1 << i for i in range(n)]
    for a, b in pairs:
        if a not in idx or b not in idx:
            raise ValueError(f"order mentions unknown node in {(a, b)}")
        up[idx[a]] |= 1 << idx[b]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            m = up[i]
            for j in range(n):
                if m >> j & 1:
                    m |= up[j]
            if m != up[i]:
                up[i] = m
                changed = True
    for i in range(n):
        for j in range(n):
            if i != j and up[i] >> j & 1 and up[j] >> i & 1:
                raise ClusterError(f"nodes {names[i]} and {names[j]} form a cluster")
    minima = [i for i in range(n) if up[i] == (1 << n) - 1]
    if not minima:
        raise NotRooted("no node lies below every other node")
    r = minima[0]
    if root is not None and idx.get(root) != r:
        raise NotRooted(f"declared root {root} is not the minimum")
    vals = [frozenset(valuation.get(nm, ())) for nm in names]
    for i in range(n):
        for j in range(n):
            if up[i] >> j & 1:
                missing = vals[i] - vals[j]
                if missing:
                    raise PersistenceViolation(names[i], names[j], sorted(missing)[0])
    return KripkeModel(names, up, vals, r)


def from_dict(data: dict, signature: Signature | None = None) -> KripkeModel:
    sig = signature or DEFAULT_SIGNATURE
    nodes = data["nodes"]
    names = [str(nd["id"]) for nd in nodes]
    valuation = {str(nd["id"]): [sig.atom(a) for a in nd.get("val", [])] for nd in nodes}
    pairs = [(str(a), str(b)) for a, b in data.get("order", [])]
    return validate(names, pairs, valuation, data.get("root"))


def load(path, signature: Signature | None = None) -> KripkeModel:
    with open(path, encoding="utf-8") as fh:
        return from_dict(json.load(fh), signature)


def dump(model: KripkeModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=1)


def point(val: Iterable[Atom] = ()) -> KripkeModel:
    return KripkeModel(["w0"], [1], [frozenset(val)], 0)


def chain(*vals: Iterable[Atom]) -> KripkeModel:
    """Linear model, root first."""
    n = len(vals)
    up = [((1 << n) - 1) & ~((1 << i) - 1) for i in range(n)]
    return KripkeModel([f"w{i}" for i in range(n)], up, [frozenset(v) for v in vals], 0)


# ---------------------------------------------------------------- operations

def weakly_forces(k: KripkeModel, f: Formula) -> bool:
    """``f`` holds at every node except the root."""
    others = k.full & ~(1 << k.root)
    return k.truth_set(f) & others == others


def forces_everywhere(k: KripkeModel, f: Formula) -> bool:
    return k.truth_set(f) == k.full


def generated(k: KripkeModel, node) -> KripkeModel:
    """Submodel of everything at or above ``node``."""
    w = k.index(node)
    keep = [j for j in range(len(k)) if k.up[w] >> j & 1]
    pos = {old: new for new, old in enumerate(keep)}
    up = []
    for old in keep:
        m = 0
        for j in keep:
            if k.up[old] >> j & 1:
                m |= 1 << pos[j]
        up.append(m)
    return KripkeModel([k.names[i] for i in keep], up, [k.vals[i] for i in keep], pos[w])


def variant(k: KripkeModel, new_root_val: Iterable[Atom], fixed: Iterable[Atom]) -> KripkeModel:
    """Same model with the root revalued; atoms in ``fixed`` must keep their root value."""
    new = frozenset(new_root_val)
    old = k.vals[k.root]
    for a in fixed:
        if (a in new) != (a in old):
            raise XDisagreement(f"root value of {a} must not change")
    for j in k.successors(k.root):
        missing = new - k.vals[j]
        if missing:
            raise PersistenceViolation(k.names[k.root], k.names[j], sorted(missing)[0])
    vals = list(k.vals)
    vals[k.root] = new
    return KripkeModel(k.names, k.up, vals, k.root)


def root_ceiling(k: KripkeModel) -> frozenset | None:
    """Largest root valuation allowed by persistence; ``None`` means unbounded."""
    succ = k.successors(k.root)
    if not succ:
        return None
    out = k.vals[succ[0]]
    for j in succ[1:]:
        out &= k.vals[j]
    return out


def variants(k: KripkeModel, free: Iterable[Atom]):
    """All persistent variants that may change only the atoms in ``free`` at the root."""
    free = sorted(set(free))
    ceiling = root_ceiling(k)
    base = k.vals[k.root] - set(free)
    choices = [a for a in free if ceiling is None or a in ceiling]
    for r in range(len(choices) + 1):
        for chosen in combinations(choices, r):
            vals = list(k.vals)
            vals[k.root] = base | frozenset(chosen)
            yield KripkeModel(k.names, k.up, vals, k.root)


def par_variants(k: KripkeModel, atoms: Iterable[Atom]):
    """Variants fixing every parameter: only variables in ``atoms`` move at the root."""
    return variants(k, [a for a in atoms if a.is_variable])


def subst_image(theta: Substitution, k: KripkeModel, atoms: Iterable[Atom] | None = None) -> KripkeModel:
    """Same frame; an atom holds at a node iff its image under ``theta`` is forced there.

    ``atoms`` selects which atoms appear in the new valuation (default: the
    model's atoms together with the substitution's domain).
    """
    if atoms is None:
        atoms = k.atoms() | set(theta)
    atoms = sorted(set(atoms))
    masks = {a: k.truth_set(theta.image(a)) for a in atoms}
    vals = [frozenset(a for a in atoms if masks[a] >> i & 1) for i in range(len(k))]
    return KripkeModel(k.names, k.up, vals, k.root)


def restrict_atoms(k: KripkeModel, atoms: Iterable[Atom]) -> KripkeModel:
    keep = frozenset(atoms)
    return KripkeModel(k.names, k.up, [v & keep for v in k.vals], k.root)


def sum_with_fresh_root(models: Sequence[KripkeModel], root_val: Iterable[Atom] = ()) -> KripkeModel:
    """Disjoint union under a new root (empty valuation unless ``root_val`` given)."""
    names = ["r"]
    up = [0]
    vals = [frozenset(root_val)]
    offset = 1
    for mi, m in enumerate(models):
        for i in range(len(m)):
            names.append(f"m{mi}.{m.names[i]}")
            up.append(m.up[i] << offset)
            vals.append(m.vals[i])
        offset += len(m)
    up[0] = (1 << offset) - 1
    root_set = vals[0]
    for v in vals[1:]:
        if not root_set <= v:
            raise PersistenceViolation("r", "child", sorted(root_set - v)[0])
    return KripkeModel(names, up, vals, 0)


# ---------------------------------------------------------------- enumeration

_FRAME_CACHE: dict = {}


def rooted_frames(n: int) -> list[tuple[int, ...]]:
    """All rooted partial orders on ``n`` nodes up to isomorphism, as ``up`` masks.

    Node 0 is the root.
    """
    if n in _FRAME_CACHE:
        return _FRAME_CACHE[n]
    full = (1 << n) - 1
    others = list(range(1, n))
    pairs = [(i, j) for i in others for j in others if i != j]
    seen = set()
    out = []
    for bits in product((False, True), repeat=len(pairs)):
        up = [full] + [1 << i for i in others]
        for (i, j), b in zip(pairs, bits):
            if b:
                up[i] |= 1 << j
        if not _transitive_antisymmetric(up, n):
            continue
        key = _frame_key(up, n)
        if key in seen:
            continue
        seen.add(key)
        out.append(tuple(up))
    _FRAME_CACHE[n] = out
    return out


def _transitive_antisymmetric(up, n) -> bool:
    for i in range(n):
        for j in range(n):
            if i != j and up[i] >> j & 1:
                if up[j] >> i & 1:
                    return False
                if up[j] & ~up[i]:
                    return False
    return True


def _frame_key(up, n):
    from itertools import permutations
    best = None
    for perm in permutations(range(1, n)):
        p = (0,) + perm
        rel = tuple(sorted((p[i], p[j]) for i in range(n) for j in range(n)
                           if i != j and up[i] >> j & 1))
        if best is None or rel < best:
            best = rel
    return best


def upsets(up: Sequence[int]) -> list[int]:
    """All upward closed node sets of the frame."""
    n = len(up)
    out = []
    for m in range(1 << n):
        if all(not (m >> i & 1) or (up[i] & ~m) == 0 for i in range(n)):
            out.append(m)
    return out


def all_models(max_nodes: int, atoms: Sequence[Atom]):
    """Every rooted model with at most ``max_nodes`` nodes over ``atoms``."""
    atoms = sorted(atoms)
    for n in range(1, max_nodes + 1):
        for up in rooted_frames(n):
            ups = upsets(up)
            for choice in product(ups, repeat=len(atoms)):
                vals = [frozenset(a for a, m in zip(atoms, choice) if m >> i & 1)
                        for i in range(n)]
                yield KripkeModel([f"w{i}" for i in range(n)], up, vals, 0)


def random_model(rng: random.Random, atoms: Sequence[Atom], max_nodes: int = 5) -> KripkeModel:
    """Random rooted model: a random DAG closed transitively, with a random persistent valuation."""
    n = rng.randint(1, max_nodes)
    up = [1 << i for i in range(n)]
    up[0] = (1 << n) - 1
    # edges only go from lower to higher index, so no cycles
    for i in range(1, n):
        for j in range(i + 1, n):
            if rng.random() < 0.3:
                up[i] |= 1 << j
    for i in reversed(range(n)):
        m = up[i]
        for j in range(i + 1, n):
            if m >> j & 1:
                m |= up[j]
        up[i] = m
    vals = [set() for _ in range(n)]
    for a in atoms:
        seeds = [i for i in range(n) if rng.random() < 0.35]
        for s in seeds:
            for j in range(n):
                if up[s] >> j & 1:
                    vals[j].add(a)
    return KripkeModel([f"w{i}" for i in range(n)], up, [frozenset(v) for v in vals], 0)
