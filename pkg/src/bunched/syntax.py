"""Formulas, bunches and sequents of BI.

Bunches are stored with variadic, flattened context-formers: an ``Add`` node
never has an ``Add`` child and a ``Mul`` node never has a ``Mul`` child, so a
chain ``a ; b ; c`` is one node with three children.  Under that
representation permutation equivalence is recursive multiset equality, which
``canonicalize`` decides by sorting children under a fixed total order.

Every node carries a precomputed ``key`` tuple.  Keys give structural
equality, hashing and the total order used for canonical forms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterator, Sequence, Union


# ---------------------------------------------------------------------------
# formulas

class Formula:
    __slots__ = ()
    key: tuple

    def __eq__(self, other):
        return isinstance(other, Formula) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return render(self)


def _seal(obj, key):
    object.__setattr__(obj, "key", key)
    object.__setattr__(obj, "_hash", hash(key))


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    name: str
    key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be nonempty")
        _seal(self, (0, self.name))

    def __repr__(self):
        return f"Atom({self.name!r})"


@dataclass(frozen=True, eq=False, repr=False)
class _Constant(Formula):
    key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)
    tag = -1
    text = ""

    def __post_init__(self):
        _seal(self, (self.tag,))

    def __repr__(self):
        return type(self).__name__ + "()"


class Top(_Constant):
    tag, text = 1, "top"


class Bot(_Constant):
    tag, text = 2, "bot"


class One(_Constant):
    tag, text = 3, "I"


@dataclass(frozen=True, eq=False, repr=False)
class Binary(Formula):
    l: Formula
    r: Formula
    key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)
    tag = -1
    op = ""
    level = 0           # 3 binds tightest
    additive = True

    def __post_init__(self):
        if not isinstance(self.l, Formula) or not isinstance(self.r, Formula):
            raise TypeError("binary connectives take two formulas")
        _seal(self, (self.tag, self.l.key, self.r.key))

    def __repr__(self):
        return f"{type(self).__name__}({self.l!r}, {self.r!r})"


class And(Binary):
    tag, op, level = 4, "/\\", 3


class Star(Binary):
    tag, op, level, additive = 5, "*", 3, False


class Or(Binary):
    tag, op, level = 6, "\\/", 2


class Imp(Binary):
    tag, op, level = 7, "->", 1


class Wand(Binary):
    tag, op, level, additive = 8, "-*", 1, False


TOP, BOT, ONE = Top(), Bot(), One()
BINARY_BY_OP = {c.op: c for c in (And, Star, Or, Imp, Wand)}


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Binary):
        yield from subformulas(f.l)
        yield from subformulas(f.r)


# ---------------------------------------------------------------------------
# bunches

class Bunch:
    __slots__ = ()
    key: tuple

    def __eq__(self, other):
        return isinstance(other, Bunch) and self.key == other.key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __str__(self):
        return render(self)

    @property
    def is_basic(self) -> bool:
        return not isinstance(self, (Add, Mul))


@dataclass(frozen=True, eq=False, repr=False)
class UnitPlus(Bunch):
    key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _seal(self, (0,))

    def __repr__(self):
        return "UnitPlus()"


@dataclass(frozen=True, eq=False, repr=False)
class UnitTimes(Bunch):
    key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _seal(self, (1,))

    def __repr__(self):
        return "UnitTimes()"


@dataclass(frozen=True, eq=False, repr=False)
class Leaf(Bunch):
    f: Formula
    key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.f, Formula):
            raise TypeError("Leaf wraps a formula")
        _seal(self, (2, self.f.key))

    def __repr__(self):
        return f"Leaf({self.f!r})"


@dataclass(frozen=True, eq=False, repr=False)
class _Node(Bunch):
    children: tuple
    key: tuple = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)
    tag = -1

    def __post_init__(self):
        kids = tuple(self.children)
        object.__setattr__(self, "children", kids)
        if len(kids) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two children")
        for c in kids:
            if type(c) is type(self):
                raise ValueError(f"{type(self).__name__} chains must be flattened")
            if not isinstance(c, Bunch):
                raise TypeError("children must be bunches")
        _seal(self, (self.tag, tuple(c.key for c in kids)))

    def __repr__(self):
        return f"{type(self).__name__}[{', '.join(map(repr, self.children))}]"


class Add(_Node):
    tag = 3


class Mul(_Node):
    tag = 4


UNIT_PLUS, UNIT_TIMES = UnitPlus(), UnitTimes()


def leaf(f: Formula | str) -> Leaf:
    return Leaf(Atom(f) if isinstance(f, str) else f)


def _build(kind, parts: Sequence[Bunch]) -> Bunch:
    kids = []
    for p in parts:
        if type(p) is kind:
            kids.extend(p.children)
        else:
            kids.append(p)
    if not kids:
        raise ValueError("cannot combine an empty sequence of bunches")
    if len(kids) == 1:
        return kids[0]
    return kind(tuple(kids))


def add(*parts: Bunch) -> Bunch:
    """Combine with ``;``, flattening nested ``Add`` nodes."""
    return _build(Add, parts)


def mul(*parts: Bunch) -> Bunch:
    """Combine with ``,``, flattening nested ``Mul`` nodes."""
    return _build(Mul, parts)


def rebuild(node: Bunch, children: Sequence[Bunch]) -> Bunch:
    """A node of the same former as ``node`` over ``children``."""
    return _build(type(node), children)


@dataclass(frozen=True)
class Sequent:
    context: Bunch
    goal: Formula

    def __str__(self):
        return render(self)


# ---------------------------------------------------------------------------
# paths and sub-bunches

Path = tuple
Group = tuple  # (Path, tuple of child indices), at least two indices
Location = Union[Path, Group]


def is_group(loc) -> bool:
    return len(loc) == 2 and isinstance(loc[1], tuple) and isinstance(loc[0], tuple) \
        and (len(loc[0]) == 0 or isinstance(loc[0][0], int))


def sub_at(g: Bunch, loc) -> Bunch:
    """The sub-bunch at a path, or the bunch formed by a child group."""
    if is_group(loc):
        path, idxs = loc
        node = sub_at(g, path)
        if not isinstance(node, (Add, Mul)):
            raise IndexError(f"no children at {list(path)}")
        if len(set(idxs)) != len(idxs) or any(not 0 <= i < len(node.children) for i in idxs):
            raise IndexError(f"bad child group {sorted(idxs)} at {list(path)}")
        return rebuild(node, [node.children[i] for i in sorted(idxs)])
    for i in loc:
        if not isinstance(g, (Add, Mul)) or not 0 <= i < len(g.children):
            raise IndexError(f"invalid path {list(loc)}")
        g = g.children[i]
    return g


def subbunches(g: Bunch, _path: Path = ()) -> list[tuple[Path, Bunch]]:
    """Every node occurrence in ``g`` with its path, in preorder."""
    out = [(_path, g)]
    if isinstance(g, (Add, Mul)):
        for i, c in enumerate(g.children):
            out.extend(subbunches(c, _path + (i,)))
    return out


def subbunch_groups(g: Bunch) -> list[tuple[Path, tuple]]:
    """Child groups of size 2..k-1 of every k-ary node.

    A group of all k children is the node itself and is reported by
    ``subbunches`` instead.
    """
    out = []
    for path, node in subbunches(g):
        if isinstance(node, (Add, Mul)):
            k = len(node.children)
            for size in range(2, k):
                for idxs in combinations(range(k), size):
                    out.append((path, idxs))
    return out


def locations(g: Bunch) -> list:
    """All sub-bunch occurrences: node paths followed by child groups."""
    return [p for p, _ in subbunches(g)] + subbunch_groups(g)


def replace(g: Bunch, loc, new: Bunch) -> Bunch:
    """Put ``new`` at ``loc``, re-flattening and collapsing as needed.

    A group location replaces the listed children of one node by ``new``,
    which takes the position of the first listed child.
    """
    if is_group(loc):
        path, idxs = loc
        node = sub_at(g, path)
        if not isinstance(node, (Add, Mul)):
            raise IndexError(f"no children at {list(path)}")
        sub_at(g, loc)  # validates the group
        first = min(idxs)
        kids = []
        for i, c in enumerate(node.children):
            if i == first:
                kids.append(new)
            elif i not in idxs:
                kids.append(c)
        return replace(g, path, rebuild(node, kids))
    return _replace_path(g, tuple(loc), new)


def _replace_path(g: Bunch, path: Path, new: Bunch) -> Bunch:
    if not path:
        return new
    if not isinstance(g, (Add, Mul)) or not 0 <= path[0] < len(g.children):
        raise IndexError(f"invalid path {list(path)}")
    i = path[0]
    kids = list(g.children)
    kids[i] = _replace_path(kids[i], path[1:], new)
    return rebuild(g, kids)


def remove(g: Bunch, path: Path, idxs: Sequence[int]) -> Bunch:
    """Delete some children of the node at ``path`` (at least one must stay)."""
    node = sub_at(g, path)
    keep = [c for i, c in enumerate(node.children) if i not in set(idxs)]
    if not keep:
        raise ValueError("cannot remove every child of a node")
    return replace(g, path, rebuild(node, keep))


def insert(g: Bunch, path: Path, extra: Sequence[Bunch]) -> Bunch:
    """Append children to the node at ``path``."""
    node = sub_at(g, path)
    return replace(g, path, rebuild(node, list(node.children) + list(extra)))


# ---------------------------------------------------------------------------
# permutation and coherent equivalence

@lru_cache(maxsize=1 << 18)
def canonicalize(g: Bunch) -> Bunch:
    """Representative of the permutation class of ``g`` (children sorted)."""
    if isinstance(g, (Add, Mul)):
        kids = sorted((canonicalize(c) for c in g.children), key=lambda c: c.key)
        return type(g)(tuple(kids))
    return g


def permutes(g1: Bunch, g2: Bunch) -> bool:
    return canonicalize(g1) == canonicalize(g2)


@lru_cache(maxsize=1 << 16)
def erase_units(g: Bunch) -> Bunch:
    """Delete every ∅₊ under ``;`` and every ∅ₓ under ``,`` (to fixpoint)."""
    if not isinstance(g, (Add, Mul)):
        return g
    unit = UNIT_PLUS if isinstance(g, Add) else UNIT_TIMES
    kids = [erase_units(c) for c in g.children]
    flat = []
    for c in kids:
        flat.extend(c.children if type(c) is type(g) else [c])
    kept = [c for c in flat if c != unit]
    if not kept:
        return unit
    return rebuild(g, kept)


def coherent_equal(g1: Bunch, g2: Bunch) -> bool:
    return canonicalize(erase_units(g1)) == canonicalize(erase_units(g2))


def canonical_sequent(s: Sequent) -> Sequent:
    return Sequent(canonicalize(s.context), s.goal)


def formulas_of(g: Bunch) -> Iterator[Formula]:
    for _, b in subbunches(g):
        if isinstance(b, Leaf):
            yield b.f


# ---------------------------------------------------------------------------
# text syntax

class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text[:pos]}<HERE>{text[pos:]}")
        self.pos = pos
        self.reason = message


_TOKEN = re.compile(r"\s*(\|-|->|-\*|/\\|\\/|o\+|[A-Za-z][A-Za-z0-9_]*|[();,*]|\S)")
_ATOM = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
_CONSTANTS = {"top": TOP, "bot": BOT, "I": ONE}


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            break
        toks.append((m.group(1), m.start(1)))
        pos = m.end()
    toks.append(("", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.toks[self.i][0]

    def pos(self) -> int:
        return self.toks[self.i][1]

    def fail(self, message: str):
        raise ParseError(message, self.text, self.pos())

    def expect(self, tok: str):
        if self.peek() != tok:
            self.fail(f"expected {tok!r}" + (f", found {self.peek()!r}" if self.peek() else ""))
        self.i += 1

    def end(self):
        if self.peek():
            self.fail(f"unexpected {self.peek()!r}")

    # formula := level1 (('->' | '-*') formula)?
    def formula(self, level: int = 1) -> Formula:
        if level > 3:
            return self.primary()
        left = self.formula(level + 1)
        op = self.peek()
        cls = BINARY_BY_OP.get(op)
        if cls is not None and cls.level == level:
            self.i += 1
            return cls(left, self.formula(level))
        return left

    def primary(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        if tok in _CONSTANTS:
            self.i += 1
            return _CONSTANTS[tok]
        if tok in ("o+", "ox"):
            self.fail(f"unit {tok!r} is not a formula")
        if _ATOM.match(tok):
            self.i += 1
            return Atom(tok)
        self.fail("expected a formula" + (f", found {tok!r}" if tok else ""))

    def bunch(self) -> Bunch:
        parts = [self.bterm()]
        former = None
        while self.peek() in (";", ","):
            sep = self.peek()
            if former is None:
                former = sep
            elif sep != former:
                self.fail("mixing ';' and ',' needs parentheses")
            self.i += 1
            parts.append(self.bterm())
        if former is None:
            return parts[0]
        return add(*parts) if former == ";" else mul(*parts)

    def bterm(self) -> Bunch:
        tok = self.peek()
        if tok == "o+":
            self.i += 1
            return UNIT_PLUS
        if tok == "ox":
            self.i += 1
            return UNIT_TIMES
        if tok == "(":
            start = self.i
            try:
                f = self.formula()
            except ParseError as formula_error:
                self.i = start + 1
                try:
                    inner = self.bunch()
                    self.expect(")")
                except ParseError as bunch_error:
                    raise max(formula_error, bunch_error, key=lambda e: e.pos)
                return inner
            return Leaf(f)
        return Leaf(self.formula())


def parse(text: str, kind: str = "sequent"):
    """Parse a formula, bunch or sequent (``kind`` selects which)."""
    p = _Parser(text)
    if kind == "formula":
        out = p.formula()
    elif kind == "bunch":
        out = p.bunch()
    elif kind == "sequent":
        ctx = p.bunch()
        p.expect("|-")
        out = Sequent(ctx, p.formula())
    else:
        raise ValueError(f"unknown kind {kind!r}")
    p.end()
    return out


def parse_formula(text: str) -> Formula:
    return parse(text, "formula")


def parse_bunch(text: str) -> Bunch:
    return parse(text, "bunch")


def parse_sequent(text: str) -> Sequent:
    return parse(text, "sequent")


def _render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, _Constant):
        return f.text
    left = _render_formula(f.l)
    right = _render_formula(f.r)
    # right-associative: a left child at the same level needs parentheses
    if isinstance(f.l, Binary) and f.l.level <= f.level:
        left = f"({left})"
    if isinstance(f.r, Binary) and (f.r.level < f.level
                                    or (f.r.level == f.level and type(f.r) is not type(f))):
        right = f"({right})"
    return f"{left} {f.op} {right}"


def _render_bunch(g: Bunch) -> str:
    if isinstance(g, UnitPlus):
        return "o+"
    if isinstance(g, UnitTimes):
        return "ox"
    if isinstance(g, Leaf):
        return _render_formula(g.f)
    sep = " ; " if isinstance(g, Add) else " , "
    return sep.join(f"({_render_bunch(c)})" if isinstance(c, (Add, Mul)) else _render_bunch(c)
                    for c in g.children)


def render(x) -> str:
    if isinstance(x, Formula):
        return _render_formula(x)
    if isinstance(x, Bunch):
        return _render_bunch(x)
    if isinstance(x, Sequent):
        return f"{_render_bunch(x.context)} |- {_render_formula(x.goal)}"
    raise TypeError(f"cannot render {type(x).__name__}")


def render_path(path: Path) -> str:
    return "[" + ",".join(map(str, path)) + "]"
