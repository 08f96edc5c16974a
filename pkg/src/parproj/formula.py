"""Two-sorted propositional formulas: atoms are either variables or parameters.

Formulas are hash-consed: building the same tree twice yields the same object,
so equality is identity and substituted formulas share structure as a DAG.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

VARIABLE = "variable"
PARAMETER = "parameter"

#: identifiers starting with one of these letters default to variables
VARIABLE_PREFIXES = ("x", "y", "z", "u", "v", "w")


@dataclass(frozen=True, order=True)
class Atom:
    name: str
    sort: str = PARAMETER

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be nonempty")
        if self.sort not in (VARIABLE, PARAMETER):
            raise ValueError(f"unknown sort {self.sort!r}")

    @property
    def is_variable(self) -> bool:
        return self.sort == VARIABLE

    def __str__(self):
        return self.name


def default_sort(name: str) -> str:
    return VARIABLE if name.startswith(VARIABLE_PREFIXES) else PARAMETER


BOT, ATOM, AND, OR, IMP = "bot", "atom", "and", "or", "imp"

_table: dict = {}
_table_lock = threading.Lock()


class Formula:
    """Immutable, interned formula node. Build via the module constructors."""

    __slots__ = ("kind", "left", "right", "atom", "_complexity", "__weakref__")

    def __new__(cls, kind, left=None, right=None, atom=None):
        key = (kind, id(left), id(right), atom)
        node = _table.get(key)
        if node is not None:
            return node
        with _table_lock:
            node = _table.get(key)
            if node is None:
                node = object.__new__(cls)
                node.kind = kind
                node.left = left
                node.right = right
                node.atom = atom
                node._complexity = None
                _table[key] = node
        return node

    def __reduce__(self):
        return (Formula, (self.kind, self.left, self.right, self.atom))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __repr__(self):
        return f"Formula({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    # operator sugar keeps tests readable
    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)

    def __rshift__(self, other: "Formula") -> "Formula":
        return imp(self, other)

    def __invert__(self) -> "Formula":
        return neg(self)

    @property
    def is_bot(self) -> bool:
        return self.kind == BOT

    @property
    def is_atom(self) -> bool:
        return self.kind == ATOM

    @property
    def is_top(self) -> bool:
        return self is TOP

    def children(self) -> tuple:
        if self.kind in (AND, OR, IMP):
            return (self.left, self.right)
        return ()


def bot() -> Formula:
    return BOTTOM


def atom(a: Atom) -> Formula:
    return Formula(ATOM, atom=a)


def var(name: str) -> Formula:
    return atom(Atom(name, VARIABLE))


def par(name: str) -> Formula:
    return atom(Atom(name, PARAMETER))


def conj(a: Formula, b: Formula) -> Formula:
    return Formula(AND, a, b)


def disj(a: Formula, b: Formula) -> Formula:
    return Formula(OR, a, b)


def imp(a: Formula, b: Formula) -> Formula:
    return Formula(IMP, a, b)


def neg(a: Formula) -> Formula:
    return imp(a, BOTTOM)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(imp(a, b), imp(b, a))


def top() -> Formula:
    return TOP


BOTTOM = Formula(BOT)
TOP = Formula(IMP, BOTTOM, BOTTOM)


def big_and(fs: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is top."""
    result = None
    for f in fs:
        result = f if result is None else conj(result, f)
    return TOP if result is None else result


def big_or(fs: Iterable[Formula]) -> Formula:
    result = None
    for f in fs:
        result = f if result is None else disj(result, f)
    return BOTTOM if result is None else result


def is_neg(f: Formula) -> bool:
    return f.kind == IMP and f.right is BOTTOM and f is not TOP


def is_iff(f: Formula) -> bool:
    return (f.kind == AND and f.left.kind == IMP and f.right.kind == IMP
            and f.left.left is f.right.right and f.left.right is f.right.left)


# ---------------------------------------------------------------- traversal

def postorder(f: Formula) -> Iterator[Formula]:
    """Distinct subformulas, children before parents (DAG aware, iterative)."""
    seen = set()
    stack = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded or node.kind in (BOT, ATOM):
            seen.add(id(node))
            yield node
            continue
        stack.append((node, True))
        stack.append((node.right, False))
        stack.append((node.left, False))


def fold(f: Formula, leaf: Callable[[Formula], object],
         node: Callable[[str, object, object], object], memo: dict | None = None):
    """Bottom-up evaluation over the DAG; ``memo`` maps ``id`` to results."""
    if memo is None:
        memo = {}
    for g in postorder(f):
        if id(g) in memo:
            continue
        if g.kind in (BOT, ATOM):
            memo[id(g)] = leaf(g)
        else:
            memo[id(g)] = node(g.kind, memo[id(g.left)], memo[id(g.right)])
    return memo[id(f)]


def complexity(f: Formula) -> int:
    """Maximal nesting depth of implications."""
    if f._complexity is not None:
        return f._complexity
    for g in postorder(f):
        if g._complexity is not None:
            continue
        if g.kind in (BOT, ATOM):
            g._complexity = 0
        elif g.kind == IMP:
            g._complexity = 1 + max(g.left._complexity, g.right._complexity)
        else:
            g._complexity = max(g.left._complexity, g.right._complexity)
    return f._complexity


def atoms_of(f: Formula) -> tuple[frozenset, frozenset]:
    """Return ``(variables, parameters)`` occurring in ``f``."""
    vs, ps = set(), set()
    for g in postorder(f):
        if g.kind == ATOM:
            (vs if g.atom.is_variable else ps).add(g.atom)
    return frozenset(vs), frozenset(ps)


def all_atoms(*fs: Formula) -> frozenset:
    out = set()
    for f in fs:
        vs, ps = atoms_of(f)
        out |= vs | ps
    return frozenset(out)


def variables(f: Formula) -> frozenset:
    return atoms_of(f)[0]


def parameters(f: Formula) -> frozenset:
    return atoms_of(f)[1]


def is_parameter_only(f: Formula) -> bool:
    return not atoms_of(f)[0]


def size(f: Formula) -> int:
    """Number of distinct DAG nodes."""
    return sum(1 for _ in postorder(f))


# ---------------------------------------------------------------- substitutions

class Substitution(Mapping):
    """Finite map from variables to formulas; everything else is fixed."""

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Mapping[Atom, Formula] | None = None):
        items = {}
        for k, v in (bindings or {}).items():
            if not isinstance(k, Atom):
                raise TypeError(f"substitution keys must be atoms, got {k!r}")
            if not k.is_variable:
                raise ValueError(f"cannot substitute parameter {k.name}")
            if not isinstance(v, Formula):
                raise TypeError(f"binding for {k.name} is not a formula")
            items[k] = v
        self._bindings = dict(sorted(items.items()))

    def __getitem__(self, key):
        return self._bindings[key]

    def __iter__(self):
        return iter(self._bindings)

    def __len__(self):
        return len(self._bindings)

    def __eq__(self, other):
        if not isinstance(other, Substitution):
            return NotImplemented
        return self._bindings == other._bindings

    def __hash__(self):
        return hash(tuple((k, id(v)) for k, v in self._bindings.items()))

    def __repr__(self):
        inner = ", ".join(f"{k.name} := {to_text(v)}" for k, v in self.items())
        return "{" + inner + "}"

    def image(self, a: Atom) -> Formula:
        return self._bindings.get(a) or atom(a)

    def __call__(self, f: Formula) -> Formula:
        return apply(self, f)

    def restrict(self, atoms: Iterable[Atom]) -> "Substitution":
        keep = set(atoms)
        return Substitution({k: v for k, v in self.items() if k in keep})

    @classmethod
    def from_names(cls, bindings: Mapping[str, Formula]) -> "Substitution":
        return cls({Atom(k, VARIABLE): v for k, v in bindings.items()})


IDENTITY = Substitution()


def apply(theta: Substitution, f: Formula, memo: dict | None = None) -> Formula:
    """Homomorphic image of ``f`` under ``theta``."""
    if not theta:
        return f

    def leaf(g):
        if g.kind == ATOM:
            return theta.image(g.atom)
        return g

    return fold(f, leaf, lambda k, a, b: Formula(k, a, b), memo)


def compose(theta: Substitution, gamma: Substitution) -> Substitution:
    """``theta ∘ gamma``: first ``gamma``, then ``theta``."""
    memo: dict = {}
    out = {}
    for a in set(theta) | set(gamma):
        out[a] = apply(theta, gamma.image(a), memo)
    return Substitution(out)


def compose_all(thetas: Iterable[Substitution]) -> Substitution:
    """``θ0 ∘ θ1 ∘ ... ∘ θk`` for the given sequence."""
    result = IDENTITY
    for t in thetas:
        result = compose(result, t)
    return result


def replace_atom(f: Formula, a: Atom, g: Formula) -> Formula:
    """``f[a := g]`` for any atom, parameters included."""
    return fold(f, lambda h: g if h.kind == ATOM and h.atom == a else h,
                lambda k, l, r: Formula(k, l, r))


# ---------------------------------------------------------------- printing

_PREC = {"iff": 1, IMP: 2, OR: 3, AND: 4, "neg": 5, "leaf": 6}


def _view(f: Formula):
    if f is TOP:
        return "leaf", None
    if f.kind in (BOT, ATOM):
        return "leaf", None
    if is_neg(f):
        return "neg", (f.left,)
    if is_iff(f):
        return "iff", (f.left.left, f.left.right)
    return f.kind, (f.left, f.right)


def to_text(f: Formula) -> str:
    """ASCII rendering that parses back to the identical node."""
    memo: dict = {}

    def render(g: Formula) -> tuple[str, int]:
        key = id(g)
        if key in memo:
            return memo[key]
        kind, args = _view(g)
        if kind == "leaf":
            text = "true" if g is TOP else "false" if g.kind == BOT else g.atom.name
            out = (text, _PREC["leaf"])
        elif kind == "neg":
            s, p = render(args[0])
            out = ("~" + (s if p >= _PREC["neg"] else f"({s})"), _PREC["neg"])
        else:
            prec = _PREC[kind]
            (ls, lp), (rs, rp) = render(args[0]), render(args[1])
            if kind in (IMP, "iff"):
                # right associative
                lwrap, rwrap = lp <= prec, rp < prec
            else:
                lwrap, rwrap = lp < prec, rp <= prec
            ls = f"({ls})" if lwrap else ls
            rs = f"({rs})" if rwrap else rs
            op = {AND: "&", OR: "|", IMP: "->", "iff": "<->"}[kind]
            out = (f"{ls} {op} {rs}", prec)
        memo[key] = out
        return out

    import sys
    limit = sys.getrecursionlimit()
    depth = _depth(f)
    if depth + 100 > limit:
        sys.setrecursionlimit(depth + 1000)
    return render(f)[0]


def _depth(f: Formula) -> int:
    return fold(f, lambda g: 1, lambda k, a, b: 1 + max(a, b))


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownAtomError(ValueError):
    pass


_TOKENS = ("<->", "->", "~", "&", "|", "(", ")")


def _tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        for t in _TOKENS:
            if text.startswith(t, i):
                yield t, i
                i += len(t)
                break
        else:
            if c.isalpha() or c == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] in "_'"):
                    j += 1
                yield text[i:j], i
                i = j
            else:
                raise ParseError(f"unexpected character {c!r}", i)
    yield None, n


class Signature:
    """Sort assignment for identifiers; falls back to the naming convention."""

    def __init__(self, variables: Iterable[str] = (), parameters: Iterable[str] = (),
                 strict: bool = False):
        self.sorts = {}
        for v in variables:
            self.sorts[v] = VARIABLE
        for p in parameters:
            if self.sorts.get(p) == VARIABLE:
                raise ValueError(f"{p} declared both variable and parameter")
            self.sorts[p] = PARAMETER
        self.strict = strict

    def atom(self, name: str) -> Atom:
        sort = self.sorts.get(name)
        if sort is None:
            if self.strict:
                raise UnknownAtomError(f"identifier {name!r} has no declared sort")
            sort = default_sort(name)
        return Atom(name, sort)


DEFAULT_SIGNATURE = Signature()


class _Parser:
    def __init__(self, text: str, signature: Signature):
        self.tokens = list(_tokenize(text))
        self.i = 0
        self.sig = signature

    def peek(self):
        return self.tokens[self.i][0]

    def take(self, expected=None):
        tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            shown = "end of input" if tok is None else repr(tok)
            raise ParseError(f"expected {expected!r}, found {shown}", pos)
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.iff()
        tok, pos = self.tokens[self.i]
        if tok is not None:
            raise ParseError(f"unexpected token {tok!r}", pos)
        return f

    def iff(self):
        left = self.imp()
        if self.peek() == "<->":
            self.take()
            return iff(left, self.iff())
        return left

    def imp(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return imp(left, self.imp())
        return left

    def disj(self):
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = disj(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = conj(f, self.unary())
        return f

    def unary(self):
        tok, pos = self.tokens[self.i]
        if tok == "~":
            self.take()
            return neg(self.unary())
        if tok == "(":
            self.take()
            f = self.iff()
            self.take(")")
            return f
        if tok is None or tok in _TOKENS:
            shown = "end of input" if tok is None else repr(tok)
            raise ParseError(f"expected a formula, found {shown}", pos)
        self.take()
        if tok == "true":
            return TOP
        if tok == "false":
            return BOTTOM
        return atom(self.sig.atom(tok))


def parse(text: str, signature: Signature | None = None) -> Formula:
    """Parse the ASCII syntax (``~ & | -> <-> true false``)."""
    return _Parser(text, signature or DEFAULT_SIGNATURE).parse()


def parse_substitution(lines: Iterable[str], signature: Signature | None = None) -> Substitution:
    """Parse ``x := formula`` lines."""
    out = {}
    for line in lines:
        line = line.strip()
        if not line:
            continue
        name, sep, rhs = line.partition(":=")
        if not sep:
            raise ParseError("expected ':='", len(line))
        a = (signature or DEFAULT_SIGNATURE).atom(name.strip())
        out[a] = parse(rhs, signature)
    return Substitution(out)


# ---------------------------------------------------------------- simplification

def simplify(f: Formula) -> Formula:
    """Cheap bottom-up rewriting: constant absorption and idempotence.

    The result is intuitionistically equivalent to the input.
    """
    def node(kind, a, b):
        if kind == AND:
            if a is BOTTOM or b is BOTTOM:
                return BOTTOM
            if a is TOP:
                return b
            if b is TOP or a is b:
                return a
        elif kind == OR:
            if a is TOP or b is TOP:
                return TOP
            if a is BOTTOM:
                return b
            if b is BOTTOM or a is b:
                return a
        else:
            if a is BOTTOM or b is TOP or a is b:
                return TOP
            if a is TOP:
                return b
        return Formula(kind, a, b)

    return fold(f, lambda g: g, node)
