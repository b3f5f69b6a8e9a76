"""Reduction of bunches: unit removal and additive contraction.

All functions work on permutation classes.  Reducts are returned as
canonical representatives, so permutation steps never need to be logged or
searched over.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

from .syntax import (
    Add, Bunch, Mul, UNIT_PLUS, UNIT_TIMES, UnitPlus, UnitTimes,
    add, canonicalize, leaf, mul, rebuild, remove, render_path, sub_at, subbunches,
)

DROP_PLUS = "drop-o+"
DROP_TIMES = "drop-ox"
CONTRACT = "contract"


@dataclass(frozen=True)
class ReductionStep:
    """One proper reduction.

    For drops ``at`` is the path of the removed unit.  For a contraction
    ``at`` is the path of the ``;`` node and ``kept``/``removed`` are the two
    disjoint child-index groups forming the copies of the contracted bunch.
    """
    kind: str
    at: tuple
    kept: tuple = ()
    removed: tuple = ()

    def __str__(self):
        if self.kind == CONTRACT:
            k = "+".join(map(str, self.kept))
            r = "+".join(map(str, self.removed))
            return f"contract@{render_path(self.at)} {{{k},{r}}}"
        return f"{self.kind}@{render_path(self.at)}"

    def apply(self, g: Bunch) -> Bunch:
        if self.kind == CONTRACT:
            return remove(g, self.at, self.removed)
        return remove(g, self.at[:-1], (self.at[-1],))


def contracted(g: Bunch, step: ReductionStep) -> Bunch:
    """The bunch that a contraction step removes one copy of."""
    node = sub_at(g, step.at)
    return rebuild(node, [node.children[i] for i in step.removed]) if len(step.removed) > 1 \
        else node.children[step.removed[0]]


def _node_steps(node: Bunch, path: tuple, small: bool, units: bool) -> Iterator[ReductionStep]:
    if isinstance(node, Mul) and units:
        for i, c in enumerate(node.children):
            if isinstance(c, UnitTimes):
                yield ReductionStep(DROP_TIMES, path + (i,))
    if not isinstance(node, Add):
        return
    if units:
        for i, c in enumerate(node.children):
            if isinstance(c, UnitPlus):
                yield ReductionStep(DROP_PLUS, path + (i,))
    classes: dict = {}
    for i, c in enumerate(node.children):
        classes.setdefault(canonicalize(c), []).append(i)
    dup = [(k, idxs) for k, idxs in classes.items() if len(idxs) > 1]
    # a copy pair takes m members of a class for each copy, 2m <= size
    for counts in product(*[range(len(idxs) // 2 + 1) for _, idxs in dup]):
        if not any(counts):
            continue
        kept, removed, members = [], [], []
        for (k, idxs), m in zip(dup, counts):
            kept.extend(idxs[:m])
            removed.extend(idxs[m:2 * m])
            members.extend([k] * m)
        if small and not is_normal(add(*members)):
            continue
        yield ReductionStep(CONTRACT, path, tuple(sorted(kept)), tuple(sorted(removed)))


def steps(g: Bunch, mode: str = "small", units: bool = True) -> Iterator[ReductionStep]:
    """Every proper one-step reduction available in ``g`` (paths into ``g``)."""
    small = _small(mode)
    for path, node in subbunches(g):
        yield from _node_steps(node, path, small, units)


def _small(mode: str) -> bool:
    if mode not in ("small", "big"):
        raise ValueError(f"mode must be 'small' or 'big', not {mode!r}")
    return mode == "small"


def reducts(g: Bunch, mode: str = "small", units: bool = True) -> list[tuple[ReductionStep, Bunch]]:
    """One-step reducts of ``g`` as canonical bunches, one entry per distinct result."""
    seen = set()
    out = []
    for st in steps(g, mode, units):
        r = canonicalize(st.apply(g))
        if r not in seen:
            seen.add(r)
            out.append((st, r))
    return out


@lru_cache(maxsize=1 << 16)
def is_normal(g: Bunch) -> bool:
    """No unit is removable and no ``;`` node holds two permutation-equal children."""
    for _, node in subbunches(g):
        if isinstance(node, Mul) and UNIT_TIMES in node.children:
            return False
        if isinstance(node, Add):
            if UNIT_PLUS in node.children:
                return False
            kids = [canonicalize(c) for c in node.children]
            if len(set(kids)) < len(kids):
                return False
    return True


def _first_step(g: Bunch, units: bool, path=()) -> ReductionStep | None:
    # leftmost-innermost: children first, then this node scanning left to right
    if isinstance(g, (Add, Mul)):
        for i, c in enumerate(g.children):
            st = _first_step(c, units, path + (i,))
            if st is not None:
                return st
        seen = {}
        for j, c in enumerate(g.children):
            if units and isinstance(g, Add) and isinstance(c, UnitPlus):
                return ReductionStep(DROP_PLUS, path + (j,))
            if units and isinstance(g, Mul) and isinstance(c, UnitTimes):
                return ReductionStep(DROP_TIMES, path + (j,))
            if isinstance(g, Add):
                k = canonicalize(c)
                if k in seen:
                    return ReductionStep(CONTRACT, path, (seen[k],), (j,))
                seen[k] = j
    return None


def normalize(g: Bunch, units: bool = True) -> tuple[Bunch, list[ReductionStep]]:
    """Reduce to normal form, leftmost-innermost, returning the witness steps.

    Each step's paths refer to the bunch produced by the previous steps
    (the first step refers to ``g`` as given).  With ``units=False`` only
    contractions are applied, which yields the contraction-normal form.
    """
    log = []
    while True:
        st = _first_step(g, units)
        if st is None:
            return canonicalize(g), log
        log.append(st)
        g = st.apply(g)


def normal_form(g: Bunch) -> Bunch:
    return _normal_form(canonicalize(g))


@lru_cache(maxsize=1 << 16)
def _normal_form(g: Bunch) -> Bunch:
    return normalize(g)[0]


def replay(g: Bunch, log: Iterable[ReductionStep]) -> list[Bunch]:
    """Apply a step log, returning every intermediate bunch including ``g``."""
    out = [g]
    for st in log:
        g = st.apply(g)
        out.append(g)
    return out


def closure(g: Bunch, mode: str = "small", units: bool = True) -> set[Bunch]:
    """All canonical bunches reachable from ``g`` (including ``g``)."""
    start = canonicalize(g)
    seen = {start}
    todo = [start]
    while todo:
        cur = todo.pop()
        for _, r in reducts(cur, mode, units):
            if r not in seen:
                seen.add(r)
                todo.append(r)
    return seen


def _size(g: Bunch) -> int:
    return len(subbunches(g))


def join(g: Bunch, g1: Bunch, g2: Bunch, mode: str = "small") -> Bunch | None:
    """A common reduct of ``g1`` and ``g2``, or None.

    ``g`` is the common ancestor; it is accepted for symmetry with the
    confluence statement and is not needed by the search itself.
    """
    common = closure(g1, mode) & closure(g2, mode)
    if not common:
        return None
    return min(common, key=lambda b: (_size(b), b.key))


def class_reduce(g: Bunch) -> list[Bunch]:
    """Canonical representatives of the classes one proper small step below ``g``."""
    return sorted({r for _, r in reducts(g, "small")}, key=lambda b: b.key)


def quasi_metric(g1: Bunch, g2: Bunch, mode: str = "small") -> float:
    """Fewest proper reduction steps from the class of ``g1`` to that of ``g2``."""
    start, goal = canonicalize(g1), canonicalize(g2)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            return dist[cur]
        for _, r in reducts(cur, mode):
            if r not in dist:
                dist[r] = dist[cur] + 1
                queue.append(r)
    return float("inf")


# ---------------------------------------------------------------------------
# exhaustive confluence checking

def enumerate_bunches(alphabet: Iterable[Bunch], max_leaves: int) -> list[Bunch]:
    """Canonical bunches over ``alphabet`` with between 1 and ``max_leaves`` leaves."""
    base = sorted({canonicalize(b) for b in alphabet}, key=lambda b: b.key)
    by_size: dict[int, set] = {1: set(base)}
    for n in range(2, max_leaves + 1):
        found = set()
        for parts in _partitions_any(n, n - 1):
            pools = [sorted(by_size[k], key=lambda b: b.key) for k in parts]
            for combo in _multichoose(pools, parts):
                for former in (add, mul):
                    found.add(canonicalize(former(*combo)))
        by_size[n] = found
    everything = set().union(*by_size.values())
    return sorted(everything, key=lambda b: (_size(b), b.key))


def _partitions_any(n: int, largest: int) -> Iterator[tuple]:
    if n == 0:
        yield ()
        return
    for first in range(min(largest, n), 0, -1):
        for tail in _partitions_any(n - first, first):
            yield (first,) + tail


def _multichoose(pools, parts) -> Iterator[tuple]:
    # choices with non-decreasing index inside runs of equal part sizes
    def rec(i, prev_part, prev_idx, acc):
        if i == len(parts):
            yield tuple(acc)
            return
        pool = pools[i]
        start = prev_idx if parts[i] == prev_part else 0
        for j in range(start, len(pool)):
            acc.append(pool[j])
            yield from rec(i + 1, parts[i], j, acc)
            acc.pop()
    yield from rec(0, None, 0, [])


@dataclass
class ConfluenceReport:
    checked: int
    pairs: int
    counterexamples: list

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def _normal_forms(g: Bunch, memo: dict) -> frozenset:
    if g in memo:
        return memo[g]
    rs = reducts(g, "small")
    if not rs:
        out = frozenset([g])
    else:
        out = frozenset().union(*(_normal_forms(r, memo) for _, r in rs))
    memo[g] = out
    return out


def check_bunch_confluence(g: Bunch, memo: dict | None = None) -> list:
    """Counterexamples at ``g``: unjoinable reduct pairs or several normal forms."""
    memo = {} if memo is None else memo
    g = canonicalize(g)
    bad = []
    rs = [r for _, r in reducts(g, "small")]
    closures = {r: closure(r) for r in rs}
    for i in range(len(rs)):
        for j in range(i + 1, len(rs)):
            if not closures[rs[i]] & closures[rs[j]]:
                bad.append(("unjoinable", g, rs[i], rs[j]))
    nfs = _normal_forms(g, memo)
    if len(nfs) != 1:
        bad.append(("normal-forms", g, tuple(sorted(nfs, key=lambda b: b.key))))
    return bad


def check_local_confluence(universe: Iterable[Bunch], workers: int = 1) -> ConfluenceReport:
    """Check every bunch of ``universe``; the report does not depend on ``workers``."""
    items = sorted({canonicalize(g) for g in universe}, key=lambda b: (_size(b), b.key))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(check_bunch_confluence, items, chunksize=64))
    else:
        memo: dict = {}
        results = [check_bunch_confluence(g, memo) for g in items]
    pairs = sum(len(reducts(g)) * (len(reducts(g)) - 1) // 2 for g in items)
    bad = [b for r in results for b in r]
    return ConfluenceReport(len(items), pairs, bad)


def small_alphabet(atoms: Iterable[str] = ("p", "q"), units: bool = True) -> list[Bunch]:
    out = [leaf(a) for a in atoms]
    if units:
        out += [UNIT_PLUS, UNIT_TIMES]
    return out
