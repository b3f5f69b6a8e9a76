"""Independent reference procedures used by the tests.

``lbi_provable`` is an iterative-deepening prover for LBI working modulo
coherent equivalence, written without the package's rule tables.
Weakening is folded into the axioms and into the multiplicative split, and
contraction is folded into the left rules by keeping the principal formula
and the side context, so plain depth-bounded search is enough.

``countermodel`` looks for a refuting finite preordered commutative monoid
in the resource semantics, which makes unprovability definitive.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product

from bunched.syntax import (
    Add, And, Atom, Bot, Imp, Leaf, Mul, One, Or, Star, Top, UNIT_PLUS, UNIT_TIMES,
    UnitPlus, UnitTimes, Wand, add, canonicalize, erase_units, mul, replace, subbunches,
)


def _norm(g):
    return canonicalize(erase_units(g))


def _kids(node):
    return list(node.children) if isinstance(node, (Add, Mul)) else [node]


@lru_cache(maxsize=None)
def weakenings(g):
    """Everything reachable from ``g`` by weakening, modulo coherent equivalence."""
    out = {g, UNIT_PLUS}
    for path, _ in subbunches(g):
        if path:
            out.add(_norm(replace(g, path, UNIT_PLUS)))
    # nested weakenings: close under repetition
    todo = list(out)
    while todo:
        h = todo.pop()
        for path, _ in subbunches(h):
            if path:
                r = _norm(replace(h, path, UNIT_PLUS))
                if r not in out:
                    out.add(r)
                    todo.append(r)
    return frozenset(out)


def _axiom(g, goal):
    if isinstance(goal, Top):
        return True
    if any(isinstance(b, Leaf) and isinstance(b.f, Bot) for _, b in subbunches(g)):
        return True
    w = weakenings(g)
    if isinstance(goal, One) and UNIT_TIMES in w:
        return True
    return Leaf(goal) in w


def _splits(g):
    for h in weakenings(g):
        parts = _kids(h) if isinstance(h, Mul) else [h]
        idx = range(len(parts))
        for n in range(len(parts) + 1):
            for left in combinations(idx, n):
                a = [parts[i] for i in left]
                b = [parts[i] for i in idx if i not in left]
                yield (mul(*a) if a else UNIT_TIMES), (mul(*b) if b else UNIT_TIMES)


def _premise_sets(g, goal):
    """Alternative premise lists; the sequent holds if all of one list hold."""
    if isinstance(goal, And):
        yield [(g, goal.l), (g, goal.r)]
    if isinstance(goal, Or):
        yield [(g, goal.l)]
        yield [(g, goal.r)]
    if isinstance(goal, Imp):
        yield [(_norm(add(g, Leaf(goal.l))), goal.r)]
    if isinstance(goal, Wand):
        yield [(_norm(mul(g, Leaf(goal.l))), goal.r)]
    if isinstance(goal, Star):
        seen = set()
        for a, b in _splits(g):
            key = (_norm(a), _norm(b))
            if key not in seen:
                seen.add(key)
                yield [(key[0], goal.l), (key[1], goal.r)]
    for path, b in subbunches(g):
        if not isinstance(b, Leaf):
            continue
        f = b.f
        if isinstance(f, And):
            yield [(_norm(replace(g, path, add(Leaf(f.l), Leaf(f.r)))), goal)]
        elif isinstance(f, Star):
            yield [(_norm(replace(g, path, mul(Leaf(f.l), Leaf(f.r)))), goal)]
        elif isinstance(f, Or):
            yield [(_norm(replace(g, path, Leaf(f.l))), goal),
                   (_norm(replace(g, path, Leaf(f.r))), goal)]
        elif isinstance(f, Top):
            yield [(_norm(replace(g, path, UNIT_PLUS)), goal)]
        elif isinstance(f, One):
            yield [(_norm(replace(g, path, UNIT_TIMES)), goal)]
        elif isinstance(f, Imp):
            parent = _parent(g, path)
            if isinstance(parent, Add):
                # the principal formula may be needed again on the left
                delta = parent
                right = replace(g, path[:-1], add(*parent.children, Leaf(f.r)))
            else:
                delta = b
                right = replace(g, path, add(b, Leaf(f.r)))
            yield [(_norm(delta), f.l), (_norm(right), goal)]
        elif isinstance(f, Wand):
            parent = _parent(g, path)
            if isinstance(parent, Mul):
                sibs = [i for i in range(len(parent.children)) if i != path[-1]]
                for n in range(len(sibs) + 1):
                    for used in combinations(sibs, n):
                        a = [parent.children[i] for i in used]
                        rest = [parent.children[i] for i in sibs if i not in used]
                        right = replace(g, path[:-1], mul(*rest, Leaf(f.r)) if rest else Leaf(f.r))
                        yield [(_norm(mul(*a) if a else UNIT_TIMES), f.l), (_norm(right), goal)]
            else:
                yield [(UNIT_TIMES, f.l), (_norm(replace(g, path, Leaf(f.r))), goal)]


def _parent(g, path):
    if not path:
        return None
    node = g
    for i in path[:-1]:
        node = node.children[i]
    return node


def lbi_provable(s, max_height: int = 8) -> bool:
    """Search with growing height caps; True once some cap admits a proof."""
    g, goal = _norm(s.context), s.goal
    memo: dict = {}

    def prove(g, goal, h):
        if _axiom(g, goal):
            return True
        if h == 0:
            return False
        key = (g, goal)
        if memo.get(key, -1) >= h:
            return False
        for prems in _premise_sets(g, goal):
            if all(prove(pg, pf, h - 1) for pg, pf in prems):
                return True
        memo[key] = max(memo.get(key, -1), h)
        return False

    return any(prove(g, goal, h) for h in range(1, max_height + 1))


# ---------------------------------------------------------------------------
# countermodels

def _monoids(n):
    """Commutative monoids on {0..n-1} with identity 0, paired with compatible partial orders."""
    elems = range(n)
    pairs = [(i, j) for i in range(1, n) for j in range(i, n)]
    for values in product(elems, repeat=len(pairs)):
        table = {}
        for i in elems:
            table[(0, i)] = table[(i, 0)] = i
        for (i, j), v in zip(pairs, values):
            table[(i, j)] = table[(j, i)] = v
        if all(table[(table[(a, b)], c)] == table[(a, table[(b, c)])]
               for a in elems for b in elems for c in elems):
            for order in _orders(n):
                if all((table[(a, c)], table[(b, c)]) in order
                       for (a, b) in order for c in elems):
                    yield table, order


def _orders(n):
    elems = range(n)
    strict = [(i, j) for i in elems for j in elems if i != j]
    for bits in product((0, 1), repeat=len(strict)):
        rel = {(i, i) for i in elems} | {p for p, b in zip(strict, bits) if b}
        if any((j, i) in rel for (i, j) in rel if i != j):
            continue
        if all((a, c) in rel for (a, b) in rel for (b2, c) in rel if b == b2):
            yield frozenset(rel)


def _upsets(n, order):
    out = []
    for bits in product((0, 1), repeat=n):
        s = frozenset(i for i in range(n) if bits[i])
        if all(b in s for (a, b) in order if a in s):
            out.append(s)
    return out


def _atoms(s):
    names = set()
    for _, b in subbunches(s.context):
        if isinstance(b, Leaf):
            names |= _atom_names(b.f)
    return sorted(names | _atom_names(s.goal))


def _atom_names(f):
    if isinstance(f, Atom):
        return {f.name}
    if hasattr(f, "l"):
        return _atom_names(f.l) | _atom_names(f.r)
    return set()


def countermodel(s, max_size: int = 3):
    """A (size, table, order, valuation) refuting ``s``, or None."""
    names = _atoms(s)
    for n in range(1, max_size + 1):
        for table, order in _monoids(n):
            ups = _upsets(n, order)
            for vals in product(ups, repeat=len(names)):
                val = dict(zip(names, vals))
                sem = _Semantics(n, table, order, val)
                if not sem.bunch(s.context) <= sem.formula(s.goal):
                    return n, table, order, val
    return None


class _Semantics:
    def __init__(self, n, table, order, val):
        self.n, self.t, self.le, self.val = n, table, order, val
        self.all = frozenset(range(n))

    def up(self, xs):
        return frozenset(b for (a, b) in self.le if a in xs)

    def star(self, x, y):
        return self.up({self.t[(a, b)] for a in x for b in y})

    def formula(self, f):
        if isinstance(f, Atom):
            return self.val[f.name]
        if isinstance(f, Top):
            return self.all
        if isinstance(f, Bot):
            return frozenset()
        if isinstance(f, One):
            return self.up({0})
        l, r = self.formula(f.l), self.formula(f.r)
        if isinstance(f, And):
            return l & r
        if isinstance(f, Or):
            return l | r
        if isinstance(f, Imp):
            return frozenset(m for m in range(self.n)
                             if all(b in r for (a, b) in self.le if a == m and b in l))
        if isinstance(f, Star):
            return self.star(l, r)
        if isinstance(f, Wand):
            return frozenset(m for m in range(self.n) if all(self.t[(m, k)] in r for k in l))
        raise TypeError(f)

    def bunch(self, g):
        if isinstance(g, Leaf):
            return self.formula(g.f)
        if isinstance(g, UnitPlus):
            return self.all
        if isinstance(g, UnitTimes):
            return self.up({0})
        parts = [self.bunch(c) for c in g.children]
        out = parts[0]
        for p in parts[1:]:
            out = out & p if isinstance(g, Add) else self.star(out, p)
        return out
