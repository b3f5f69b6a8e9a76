"""Multiplicity, multiplicative width and depth of bunches and sequents.

In a flattened bunch the additive sets are easy to read off: the children of
one ``;`` node form a set (its component is that node), and every other
additive datum sits alone.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .syntax import (
    Add, Binary, Bunch, Formula, Leaf, Mul, Sequent, canonicalize, sub_at, subbunches,
)


@dataclass(frozen=True)
class AdditiveSet:
    members: tuple          # paths to additive data
    component: tuple        # path of the least sub-bunch holding them all


def is_additive_data(g: Bunch) -> bool:
    return not isinstance(g, Add)


def additive_sets(g: Bunch) -> list[AdditiveSet]:
    out = []
    for path, node in subbunches(g):
        if isinstance(node, Add):
            out.append(AdditiveSet(tuple(path + (i,) for i in range(len(node.children))), path))
        elif not path or not isinstance(sub_at(g, path[:-1]), Add):
            out.append(AdditiveSet((path,), path))
    return out


def duplicity(g: Bunch, member: tuple) -> int:
    """Number of further permutation-copies of ``member`` in its additive set."""
    target = sub_at(g, member)
    if not is_additive_data(target):
        raise ValueError(f"{list(member)} does not point at additive data")
    if not member or not isinstance(sub_at(g, member[:-1]), Add):
        return 0
    parent = sub_at(g, member[:-1])
    key = canonicalize(target)
    return sum(1 for c in parent.children if canonicalize(c) == key) - 1


def multiplicity(x) -> int:
    """Sum over additive sets of the largest duplicity in the set."""
    if isinstance(x, Sequent):
        return multiplicity(x.context)
    if isinstance(x, Formula):
        return 0
    total = 0
    for _, node in subbunches(x):
        if isinstance(node, Add):
            counts = Counter(canonicalize(c) for c in node.children)
            total += max(counts.values()) - 1
    return total


def mult_width(x) -> int:
    if isinstance(x, Sequent):
        return mult_width(x.context) + mult_width(x.goal)
    if isinstance(x, Formula):
        if isinstance(x, Binary):
            l, r = mult_width(x.l), mult_width(x.r)
            return max(l, r) if x.additive else l + r + 1
        return 0
    if isinstance(x, Leaf):
        return mult_width(x.f)
    if isinstance(x, Add):
        return max(mult_width(c) for c in x.children)
    if isinstance(x, Mul):
        return sum(mult_width(c) for c in x.children) + len(x.children) - 1
    return 0


def topset(g: Bunch) -> list[Bunch]:
    if not isinstance(g, (Add, Mul)):
        raise ValueError("a basic bunch has no topset")
    return list(g.children)


def depth(x) -> int:
    if isinstance(x, Sequent):
        return depth(x.context) + depth(x.goal)
    if isinstance(x, Add):
        return max(depth(c) for c in x.children)
    if isinstance(x, Mul):
        return max(depth(c) for c in x.children) + 1
    return mult_width(x)


MEASURES = {"mu": multiplicity, "omega": mult_width, "delta": depth}


def measure_sequent(s: Sequent, f: str) -> int:
    return MEASURES[f](s)


def measure_derivation(sequents: Iterable[Sequent], f: str) -> int:
    """Largest value of measure ``f`` over the sequents of a derivation."""
    if hasattr(sequents, "sequents"):
        sequents = sequents.sequents()
    return max(MEASURES[f](s) for s in sequents)


def measure_all(x) -> dict:
    return {name: fn(x) for name, fn in MEASURES.items()}
