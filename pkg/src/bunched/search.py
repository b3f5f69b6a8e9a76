"""Bounded proof search for BI.

Provability is unchanged by normalizing a sequent, so the search runs over
normal sequents only.  The goal is normalized and the bounds are fixed
from it.  A macro step from a normal state contracts copies (read upward),
applies one regimented action and normalizes the action's premises; the
normalized premises are the successor states.  The finite set of states
reachable within the bounds is explored breadth first, and provability is
propagated upward like Horn clauses, cheapest proofs first.

Reading a proof back expands each macro step into contractions, the action
and the loading steps above it, so the proof is regimented by construction.
The exhaustive strategy instead explores every single-rule step and is kept
for cross-checking.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from itertools import chain as concat, combinations_with_replacement
from typing import Iterable, Iterator

from .calculus import (
    AXIOM, EXCHANGE_RULES, LOGICAL, NORMALIZING_RULES, RULES, Derivation, SearchBounds,
    check_report, expand, instance_is_action, instance_is_regimented, instances, is_regimented,
    node_from_instance, system_rules,
)
from .measures import depth, mult_width, multiplicity
from .rewriting import normal_form, normalize
from .transform import regiment, weakening_strategy
from .syntax import (
    Add, Bunch, Formula, Imp, Leaf, Mul, Sequent, UNIT_PLUS, UNIT_TIMES, add, canonical_sequent,
    canonicalize, formulas_of, mul, render, replace, sub_at, subbunches, subformulas,
)

PROVABLE, UNPROVABLE, ABORT = "provable", "unprovable", "abort"

# ---------------------------------------------------------------------------
# the sequent space


def subformula_closure(s: Sequent) -> frozenset:
    out = set()
    for f in list(formulas_of(s.context)) + [s.goal]:
        out.update(subformulas(f))
    return frozenset(out)


def _sorted(bs: Iterable[Bunch]) -> list[Bunch]:
    return sorted(bs, key=lambda b: b.key)


def _combine(n: int, bs: Iterable[Bunch], former) -> set[Bunch]:
    pool = _sorted({canonicalize(b) for b in bs})
    out = set()
    for k in range(1, n + 1):
        for combo in combinations_with_replacement(pool, k):
            out.add(canonicalize(former(*combo)))
    return out


def oplus(n: int, bs: Iterable[Bunch]) -> set[Bunch]:
    """Additive combinations of at most ``n`` elements (with repetition)."""
    return _combine(n, bs, add)


def otimes(n: int, bs: Iterable[Bunch]) -> set[Bunch]:
    """Multiplicative combinations of at most ``n`` elements (with repetition)."""
    return _combine(n, bs, mul)


def default_bounds(s: Sequent) -> SearchBounds:
    return SearchBounds(3, mult_width(s), max(2 * depth(s), 1))


@dataclass
class SequentSpace:
    """Sequents over a formula vocabulary whose measures respect ``bounds``.

    Membership is decided directly.  Enumeration builds bunches bottom up,
    alternating additive and multiplicative combination and pruning by the
    bounds, so it is only practical for small vocabularies.
    """
    vocabulary: frozenset
    bounds: SearchBounds
    _bunches: frozenset | None = field(default=None, repr=False)

    def admits_bunch(self, g: Bunch) -> bool:
        if not all(f in self.vocabulary for f in formulas_of(g)):
            return False
        b = self.bounds
        return multiplicity(g) <= b.a and mult_width(g) <= b.m and depth(g) <= b.d

    def __contains__(self, s: Sequent) -> bool:
        return s.goal in self.vocabulary and self.bounds.admits(s) and \
            all(f in self.vocabulary for f in formulas_of(s.context))

    def bunches(self, limit: int | None = None) -> frozenset:
        if self._bunches is None:
            self._bunches = frozenset(self._generate(limit))
        return self._bunches

    def _generate(self, limit):
        b = self.bounds
        base = {Leaf(f) for f in self.vocabulary} | {UNIT_PLUS, UNIT_TIMES}
        found = {canonicalize(x) for x in base if self.admits_bunch(x)}
        changed = True
        while changed:
            changed = False
            # additive nodes: children are non-additive, each class at most a+1 times
            kids = _sorted(x for x in found if not isinstance(x, Add))
            adds = ((add, c) for c in _bounded_multisets(kids, b.a + 1))
            kids = _sorted(x for x in found if not isinstance(x, Mul))
            muls = ((mul, c) for k in range(2, b.m + 2)
                    for c in combinations_with_replacement(kids, k))
            combos = concat(adds, muls)
            for former, combo in combos:
                g = canonicalize(former(*combo))
                if g not in found and self.admits_bunch(g):
                    found.add(g)
                    changed = True
                    if limit is not None and len(found) > limit:
                        raise OverflowError(f"space exceeds {limit} bunches")
        return found

    def sequents(self, limit: int | None = None) -> Iterator[Sequent]:
        goals = _sorted_formulas(self.vocabulary)
        for g in _sorted(self.bunches(limit)):
            for f in goals:
                s = Sequent(g, f)
                if self.bounds.admits(s):
                    yield s

    def count(self, limit: int | None = None) -> int:
        return sum(1 for _ in self.sequents(limit))


def _sorted_formulas(fs) -> list[Formula]:
    return sorted(fs, key=lambda f: f.key)


def _bounded_multisets(pool: list, cap: int) -> Iterator[tuple]:
    # multisets of size >= 2 with every element used at most ``cap`` times
    def rec(i, acc):
        if i == len(pool):
            if len(acc) >= 2:
                yield tuple(acc)
            return
        for n in range(cap + 1):
            yield from rec(i + 1, acc + [pool[i]] * n)
    yield from rec(0, [])


def generate_space(s: Sequent, bounds: SearchBounds | None = None) -> SequentSpace:
    goal = normalize_sequent(s)
    return SequentSpace(subformula_closure(goal), bounds or default_bounds(goal))


def normalize_sequent(s: Sequent) -> Sequent:
    return Sequent(normal_form(s.context), s.goal)


# ---------------------------------------------------------------------------
# moves

@dataclass(frozen=True)
class Move:
    """One backward step, stripped down to what the exhaustive search needs."""
    rule: str
    premises: tuple
    kind: str           # action | loading | normalizing
    regimented: bool


def moves(system: str, goal: Sequent, bounds: SearchBounds) -> list[Move]:
    """Every single-rule backward step at ``goal`` within ``bounds``."""
    out: dict = {}
    for inst in expand(system, goal, bounds):
        if inst.rule in EXCHANGE_RULES:
            continue
        prem = inst.canonical_premises
        if goal in prem:
            continue
        if instance_is_action(inst):
            kind = "action"
            reg = instance_is_regimented(inst)
        elif inst.rule in NORMALIZING_RULES:
            kind, reg = "normalizing", True
        else:
            kind, reg = "loading", True
        key = (inst.rule, prem, kind)
        out[key] = out.get(key, False) or reg
    return [Move(r, p, k, reg) for (r, p, k), reg in out.items()]


@dataclass(frozen=True)
class Step:
    """Contractions read upward, one regimented action, then loading steps.

    ``chain`` runs from the (normal) state up to the action's conclusion,
    ``raw`` are the action's canonical premises and ``premises`` their
    normal forms, which are the successor states.
    """
    rule: str
    chain: tuple
    raw: tuple
    premises: tuple
    sigma: Bunch | None = None
    active: tuple = ()
    weight: int = 1


def _dup(g: Bunch, path: tuple) -> Bunch:
    d = sub_at(g, path)
    return canonicalize(replace(g, path, add(d, d)))


def _conclusions(goal: Sequent, bounds: SearchBounds) -> dict:
    """The goal and the contraction expansions an action may start from.

    A single copy of any sub-bunch covers the additive right rules (copy
    the whole context) and keeping a copy of whatever holds the principal
    formula.  The left implication rule also keeps its principal formula
    next to the side bunch, which takes a second copy.
    """
    g = goal.context
    out = {goal: (goal,)}

    def push(chain, ctx):
        s = Sequent(ctx, goal.goal)
        if s not in out and bounds.admits(s):
            out[s] = chain + (s,)

    for path, _ in subbunches(g):
        push((goal,), _dup(g, path))
    for path, node in subbunches(g):
        if not (isinstance(node, Leaf) and isinstance(node.f, Imp)):
            continue
        anchor = path[:-1] if path and isinstance(sub_at(g, path[:-1]), Add) else path
        s1 = Sequent(_dup(g, anchor), goal.goal)
        if not bounds.admits(s1):
            continue
        for p2, n2 in subbunches(s1.context):
            if n2 == node:
                push((goal, s1), _dup(s1.context, p2))
    return out


def _action_rules(system: str) -> list[str]:
    return sorted(r for r in system_rules(system) if RULES[r][1] in (AXIOM, LOGICAL))


def regimented_moves(system: str, goal: Sequent, bounds: SearchBounds) -> list[Step]:
    """Macro steps from a normal sequent to the normal forms of action premises."""
    out: dict = {}

    def consider(inst, chain):
        raw = inst.canonical_premises
        if not all(bounds.admits(p) for p in raw) or not instance_is_regimented(inst):
            return
        prems = tuple(normalize_sequent(p) for p in raw)
        if goal in prems:
            return
        key = (inst.rule, prems)
        if key in out and len(out[key].chain) <= len(chain):
            return
        sigma = inst.sigma if inst.rule in ("W'", "W", "Inst") else None
        loads = sum(len(normalize(p.context)[1]) for p in raw)
        out[key] = Step(inst.rule, chain, raw, prems, sigma, tuple(inst.active), len(chain) + loads)

    acts = _action_rules(system)
    for concl, chain in _conclusions(goal, bounds).items():
        for inst in instances(system, concl, acts):
            consider(inst, chain)
    extra = [r for r in ("W'", "Inst", "Rad") if r in system_rules(system)]
    for inst in instances(system, goal, extra):
        if instance_is_action(inst):
            consider(inst, (goal,))
    return list(out.values())


def _moves_job(args):
    kind, system, goal, bounds = args
    fn = regimented_moves if kind == REGIMENTED else moves
    return fn(system, goal, bounds)


# ---------------------------------------------------------------------------
# exploration

REGIMENTED, EXHAUSTIVE = "regimented", "exhaustive"
LOAD, NORM = "L", "N"


@dataclass
class _Record:
    node: object
    move: object
    prems: tuple
    waiting: int


class _Explorer:
    """Breadth-first expansion with cheapest-first Horn propagation.

    ``kind`` is REGIMENTED (normal states, macro steps), EXHAUSTIVE (every
    single rule) or "phased" (single rules over (sequent, phase) states so
    that only regimented shapes are built).
    """

    def __init__(self, kind, system, bounds, max_nodes, workers, cache):
        self.kind = kind
        self.system = system
        self.bounds = bounds
        self.max_nodes = max_nodes
        self.workers = workers
        self.cache = cache
        self.proved: dict = {}
        self.watchers: dict = {}
        self.seen: set = set()
        self.expanded = 0
        self.frontier_size = 0
        self.cost: dict = {}
        self._tick = itertools.count()

    @property
    def phased(self) -> bool:
        return self.kind == "phased"

    def _moves_for(self, seqs: list[Sequent]) -> None:
        kind = REGIMENTED if self.kind == REGIMENTED else EXHAUSTIVE
        todo = [s for s in dict.fromkeys(seqs) if s not in self.cache]
        if not todo:
            return
        jobs = [(kind, self.system, s, self.bounds) for s in todo]
        if self.workers > 1 and len(todo) > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(self.workers) as ex:
                results = list(ex.map(_moves_job, jobs, chunksize=max(1, len(jobs) // (4 * self.workers))))
        else:
            results = [_moves_job(j) for j in jobs]
        for s, r in zip(todo, results):
            self.cache[s] = r

    def _transitions(self, node):
        seq, state = node if self.phased else (node, None)
        for mv in self.cache[seq]:
            if not self.phased:
                yield mv, tuple(mv.premises)
                continue
            if mv.kind == "action":
                if mv.regimented:
                    yield mv, tuple((p, LOAD) for p in mv.premises)
            elif mv.kind == "normalizing":
                yield mv, tuple((p, NORM) for p in mv.premises)
            elif state == LOAD:
                yield mv, tuple((p, LOAD) for p in mv.premises)

    def _prove(self, node, rec):
        # settle cheapest proofs first so that short proofs win
        heap = [(self._cost(rec), next(self._tick), node, rec)]
        while heap:
            cost, _, n, r = heapq.heappop(heap)
            if n in self.proved:
                continue
            self.proved[n] = r
            self.cost[n] = cost
            for w in self.watchers.pop(n, []):
                w.waiting -= 1
                if w.waiting == 0 and w.node not in self.proved:
                    heapq.heappush(heap, (self._cost(w), next(self._tick), w.node, w))

    def _cost(self, rec) -> int:
        own = rec.move.weight if isinstance(rec.move, Step) else 1
        return own + sum(self.cost[p] for p in dict.fromkeys(rec.prems))

    def run(self, root) -> str:
        frontier = [root]
        self.seen.add(root)
        while frontier and root not in self.proved:
            seqs = [n[0] if self.phased else n for n in frontier]
            self._moves_for(seqs)
            nxt = []
            for node in frontier:
                if root in self.proved:
                    break
                if self.max_nodes is not None and self.expanded >= self.max_nodes:
                    self.frontier_size = len(frontier) + len(nxt)
                    return ABORT
                self.expanded += 1
                if node in self.proved:
                    continue
                for mv, prems in self._transitions(node):
                    distinct = tuple(dict.fromkeys(prems))
                    rec = _Record(node, mv, prems, 0)
                    for p in distinct:
                        if p not in self.proved:
                            rec.waiting += 1
                            self.watchers.setdefault(p, []).append(rec)
                        if p not in self.seen:
                            self.seen.add(p)
                            nxt.append(p)
                    if rec.waiting == 0:
                        self._prove(node, rec)
                        break
            frontier = nxt
        return PROVABLE if root in self.proved else UNPROVABLE

    def proof(self, node) -> Derivation:
        rec = self.proved[node]
        children = [self.proof(p) for p in rec.prems]
        if self.kind == REGIMENTED:
            return _step_proof(rec.move, children)
        seq = node[0] if self.phased else node
        inst = _pick_instance(self.system, seq, rec.move, self.bounds, self.phased)
        return node_from_instance(inst, children)


def _step_proof(step: Step, children: list) -> Derivation:
    kids = tuple(weakening_strategy(raw, ch) for raw, ch in zip(step.raw, children))
    d = Derivation(step.chain[-1], step.rule, kids, step.sigma, step.active)
    for s in reversed(step.chain[:-1]):
        d = Derivation(s, "C'", (d,))
    return d


def _pick_instance(system, seq, mv: Move, bounds, want_regimented):
    best = None
    for inst in expand(system, seq, bounds):
        if inst.rule == mv.rule and inst.canonical_premises == mv.premises:
            if not want_regimented or mv.kind != "action" or instance_is_regimented(inst):
                return inst
            best = best or inst
    if best is None:
        raise RuntimeError(f"lost instance {mv.rule} at {render(seq)}")
    return best


# ---------------------------------------------------------------------------
# decision procedure

@dataclass
class SearchResult:
    verdict: str
    goal: Sequent
    normal_goal: Sequent
    bounds: SearchBounds
    proof: Derivation | None = None
    regimented: bool = False
    expanded: int = 0
    explored: int = 0
    frontier: int = 0
    notes: list = field(default_factory=list)

    @property
    def provable(self) -> bool:
        return self.verdict == PROVABLE

    def stats(self) -> dict:
        out = {"verdict": self.verdict, "goal": render(self.normal_goal),
               "bounds": [self.bounds.a, self.bounds.m, self.bounds.d],
               "explored": self.explored, "expanded": self.expanded}
        if self.verdict == ABORT:
            out["frontier"] = self.frontier
        if self.proof is not None:
            seqs = list(self.proof.sequents())
            out.update(proof_size=self.proof.size(),
                       max_mu=max(map(multiplicity, seqs)),
                       max_omega=max(map(mult_width, seqs)),
                       max_delta=max(map(depth, seqs)),
                       regimented=self.regimented)
        return out


def make_concise(d: Derivation) -> Derivation:
    """Cut out sections of branches between two occurrences of one sequent."""
    def shortcut(node):
        # deepest repeated occurrence of the node's own sequent, if any
        key = canonical_sequent(node.sequent)
        best = None
        stack = [(c, 1) for c in node.children]
        while stack:
            n, dist = stack.pop()
            if canonical_sequent(n.sequent) == key:
                if best is None or dist > best[1]:
                    best = (n, dist)
            stack.extend((c, dist + 1) for c in n.children)
        return best[0] if best else node

    def rec(node):
        node = shortcut(node)
        return Derivation(node.sequent, node.rule, tuple(rec(c) for c in node.children),
                          node.sigma, node.active)

    return rec(d)


SEARCH_SYSTEMS = ("slbi", "dlbi", "dlbi-rad")


def decide(s: Sequent, bounds: SearchBounds | None = None, system: str = "dlbi",
           max_nodes: int | None = None, workers: int = 1,
           strategy: str = REGIMENTED) -> SearchResult:
    """Decide provability of ``s`` and return a checked proof when there is one.

    The default strategy explores normal sequents only, moving between them
    by regimented macro steps, so the proof it returns is regimented by
    construction.  ``strategy="exhaustive"`` explores every sequent reachable
    by single rules instead; it is far slower and is kept for cross-checking.
    """
    if system not in SEARCH_SYSTEMS:
        raise ValueError(f"search supports {', '.join(SEARCH_SYSTEMS)}, not {system!r}")
    if strategy not in (REGIMENTED, EXHAUSTIVE):
        raise ValueError(f"unknown strategy {strategy!r}")
    goal = normalize_sequent(canonical_sequent(s))
    bounds = bounds or default_bounds(goal)
    cache: dict = {}
    first = _Explorer(strategy, system, bounds, max_nodes, workers, cache)
    verdict = first.run(goal)
    res = SearchResult(verdict, s, goal, bounds, expanded=first.expanded,
                       explored=len(first.seen), frontier=first.frontier_size)
    if verdict != PROVABLE:
        return res
    if strategy == REGIMENTED:
        proof = first.proof(goal)
    else:
        phased = _Explorer("phased", system, bounds, max_nodes, workers, cache)
        root = (goal, LOAD)
        if phased.run(root) == PROVABLE:
            proof = phased.proof(root)
            res.expanded += phased.expanded
        else:
            res.notes.append("no regimented proof inside the bounds; regimenting the raw proof")
            proof = regiment(first.proof(goal), system)
    concise = make_concise(proof)
    if concise is not proof and is_regimented(system, concise):
        proof = concise
    rep = check_report(system, proof)
    if not rep:
        raise AssertionError(f"search produced an invalid proof: {rep.message}")
    res.proof = proof
    res.regimented = is_regimented(system, proof)
    return res
