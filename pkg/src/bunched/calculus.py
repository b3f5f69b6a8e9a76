"""Sequent calculi for BI as backward rule relations, plus proof checking.

Every rule is given by a function that, for a canonical conclusion, yields
all the ways the conclusion can be inferred.  Checking an inference then
amounts to finding an enumerated instance whose premises are permutations
of the given ones, and proof search uses the same enumeration.

Premises are built with freshly allocated copies of whatever the rule
creates or keeps active (principal subformulas, introduced units, the side
bunches of the left implication rules, ...).  Object identity then tells
which positions of a premise are active without any path bookkeeping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Iterator, Sequence

from .measures import depth, mult_width, multiplicity
from .rewriting import is_normal, normalize
from .syntax import (
    Add, And, Atom, Bot, Bunch, Formula, Imp, Leaf, Mul, One, Or, Sequent, Star, Top,
    UnitPlus, UnitTimes, Wand, add, canonical_sequent, canonicalize, coherent_equal,
    is_group, mul, parse_bunch, parse_sequent, rebuild, render, replace,
    sub_at, subbunch_groups, subbunches,
)

# ---------------------------------------------------------------------------
# catalogue

AXIOM, LOGICAL, STRUCTURAL = "axiom", "logical", "structural"

RULES: dict[str, tuple[int, str]] = {
    "Id": (0, AXIOM), "BotL": (0, AXIOM), "BotL'": (0, AXIOM),
    "TopR": (0, AXIOM), "OneR": (0, AXIOM),
    "OneL": (1, LOGICAL), "TopL": (1, LOGICAL), "AndL": (1, LOGICAL),
    "OrL": (2, LOGICAL), "OrR1": (1, LOGICAL), "OrR2": (1, LOGICAL),
    "AndR": (2, LOGICAL), "AndR1": (2, LOGICAL), "AndR2": (2, LOGICAL),
    "ImpR": (1, LOGICAL), "ImpL": (2, LOGICAL),
    "ImpL1": (2, LOGICAL), "ImpL2": (2, LOGICAL), "ImpL3": (2, LOGICAL),
    "StarL": (1, LOGICAL), "StarR": (2, LOGICAL), "StarR1": (2, LOGICAL), "StarR2": (2, LOGICAL),
    "WandR": (1, LOGICAL), "WandL": (2, LOGICAL),
    "WandL1": (2, LOGICAL), "WandL2": (2, LOGICAL), "WandL3": (2, LOGICAL),
    "E": (1, STRUCTURAL), "W": (1, STRUCTURAL), "C": (1, STRUCTURAL),
    "E'": (1, STRUCTURAL), "W'": (1, STRUCTURAL), "C'": (1, STRUCTURAL),
    "Wo+": (1, STRUCTURAL), "Wox": (1, STRUCTURAL),
    "Co+": (1, STRUCTURAL), "Cox": (1, STRUCTURAL),
    "Inst": (1, STRUCTURAL), "Rad": (1, STRUCTURAL),
}

_OPERATIONAL = ["Id", "TopR", "OneR", "OneL", "TopL", "AndL", "AndR", "OrL", "OrR1", "OrR2",
                "ImpL", "ImpR", "StarL", "StarR", "WandL", "WandR"]
_VARIANTS = ["WandL1", "WandL2", "WandL3", "StarR1", "StarR2",
             "ImpL1", "ImpL2", "ImpL3", "AndR1", "AndR2", "Inst"]

SYSTEMS: dict[str, frozenset] = {}
SYSTEMS["lbi"] = frozenset(_OPERATIONAL + ["BotL", "E", "W", "C"])
SYSTEMS["slbi"] = frozenset(_OPERATIONAL + ["BotL'", "W'", "Wo+", "Wox", "C'", "E'", "Co+", "Cox"])
# the unit weakenings stay: without them p , (p -* q) |- q has no proof
SYSTEMS["dlbi"] = (SYSTEMS["slbi"] - {"Co+", "Cox"}) | frozenset(_VARIANTS)
SYSTEMS["dlbi-rad"] = SYSTEMS["dlbi"] | {"Rad"}

LOADING_RULES = frozenset({"W", "Wo+", "Wox"})
NORMALIZING_RULES = frozenset({"C", "C'", "Co+", "Cox"})
EXCHANGE_RULES = frozenset({"E", "E'"})


def arity(rule: str) -> int:
    return RULES[rule][0]


def system_rules(system: str) -> frozenset:
    try:
        return SYSTEMS[system]
    except KeyError:
        raise ValueError(f"unknown system {system!r}") from None


# ---------------------------------------------------------------------------
# instances

def fresh(b: Bunch) -> Bunch:
    """A structurally equal copy made of newly allocated objects."""
    if isinstance(b, Leaf):
        return Leaf(b.f)
    if isinstance(b, UnitPlus):
        return UnitPlus()
    if isinstance(b, UnitTimes):
        return UnitTimes()
    return type(b)(tuple(fresh(c) for c in b.children))


def _objects(b: Bunch) -> Iterator[Bunch]:
    yield b
    if isinstance(b, (Add, Mul)):
        for c in b.children:
            yield from _objects(c)


@dataclass
class Instance:
    """One backward reading of a rule at a given conclusion.

    ``premises`` are raw (not canonicalized).  ``marked`` holds the fresh
    objects placed into the premises as active material; ``active`` lists
    conclusion paths of the principal formula and side bunches; ``sigma``
    and ``sigma_loc`` describe the bunch a W'/W/Inst step introduces.
    """
    rule: str
    conclusion: Sequent
    premises: tuple
    marked: tuple = ()
    active: tuple = ()
    sigma: Bunch | None = None
    sigma_loc: object = None
    _canon: tuple | None = field(default=None, repr=False)

    @property
    def canonical_premises(self) -> tuple:
        if self._canon is None:
            self._canon = tuple(canonical_sequent(p) for p in self.premises)
        return self._canon

    def premise_active(self, i: int) -> list[tuple]:
        """Paths into raw premise ``i`` that hold active material."""
        ids = {id(o) for m in self.marked for o in _objects(m)}
        return [p for p, node in subbunches(self.premises[i].context) if id(node) in ids]


def _seq(ctx: Bunch, goal: Formula) -> Sequent:
    return Sequent(ctx, goal)


def _leaves(g: Bunch, kind) -> Iterator[tuple[tuple, Formula]]:
    for path, node in subbunches(g):
        if isinstance(node, Leaf) and isinstance(node.f, kind):
            yield path, node.f


def _parent(g: Bunch, path: tuple):
    if not path:
        return None
    return sub_at(g, path[:-1])


def _nonempty_subsets(idxs: Sequence[int], proper: bool = False) -> Iterator[tuple]:
    top = len(idxs) - 1 if proper else len(idxs)
    for n in range(1, top + 1):
        yield from combinations(idxs, n)


def _locations(g: Bunch) -> Iterator:
    for path, _ in subbunches(g):
        yield path
    yield from subbunch_groups(g)


def _loc_paths(loc) -> list[tuple]:
    if is_group(loc):
        path, idxs = loc
        return [path + (i,) for i in idxs]
    return [loc]


Backward = Callable[[Sequent], Iterator[Instance]]
_BACKWARD: dict[str, Backward] = {}


def _rule(name: str):
    def deco(fn):
        _BACKWARD[name] = fn
        return fn
    return deco


# --- axioms

@_rule("Id")
def _id(c: Sequent):
    if isinstance(c.context, Leaf) and c.context.f == c.goal:
        yield Instance("Id", c, (), active=((),))


@_rule("BotL")
def _botl(c: Sequent):
    for path, _ in _leaves(c.context, Bot):
        yield Instance("BotL", c, (), active=(path,))
        return


@_rule("BotL'")
def _botl_normal(c: Sequent):
    if is_normal(c.context):
        for inst in _botl(c):
            inst.rule = "BotL'"
            yield inst


@_rule("TopR")
def _topr(c: Sequent):
    if isinstance(c.context, UnitPlus) and isinstance(c.goal, Top):
        yield Instance("TopR", c, (), active=((),))


@_rule("OneR")
def _oner(c: Sequent):
    if isinstance(c.context, UnitTimes) and isinstance(c.goal, One):
        yield Instance("OneR", c, (), active=((),))


# --- left rules replacing a leaf in place

def _left_in_place(name, kind, build):
    @_rule(name)
    def gen(c: Sequent):
        for path, f in _leaves(c.context, kind):
            new = build(f)
            yield Instance(name, c, (_seq(replace(c.context, path, new), c.goal),),
                           marked=(new,), active=(path,))
    return gen


_left_in_place("OneL", One, lambda f: UnitTimes())
_left_in_place("TopL", Top, lambda f: UnitPlus())
_left_in_place("AndL", And, lambda f: add(Leaf(f.l), Leaf(f.r)))
_left_in_place("StarL", Star, lambda f: mul(Leaf(f.l), Leaf(f.r)))


@_rule("OrL")
def _orl(c: Sequent):
    for path, f in _leaves(c.context, Or):
        a, b = Leaf(f.l), Leaf(f.r)
        yield Instance("OrL", c, (_seq(replace(c.context, path, a), c.goal),
                                  _seq(replace(c.context, path, b), c.goal)),
                       marked=(a, b), active=(path,))


# --- right rules

@_rule("OrR1")
def _orr1(c: Sequent):
    if isinstance(c.goal, Or):
        yield Instance("OrR1", c, (_seq(c.context, c.goal.l),))


@_rule("OrR2")
def _orr2(c: Sequent):
    if isinstance(c.goal, Or):
        yield Instance("OrR2", c, (_seq(c.context, c.goal.r),))


@_rule("ImpR")
def _impr(c: Sequent):
    if isinstance(c.goal, Imp):
        a = Leaf(c.goal.l)
        yield Instance("ImpR", c, (_seq(add(c.context, a), c.goal.r),), marked=(a,))


@_rule("WandR")
def _wandr(c: Sequent):
    if isinstance(c.goal, Wand):
        a = Leaf(c.goal.l)
        yield Instance("WandR", c, (_seq(mul(c.context, a), c.goal.r),), marked=(a,))


def _split_right(name, goal_kind, node_kind):
    @_rule(name)
    def gen(c: Sequent):
        g = c.context
        if not isinstance(c.goal, goal_kind) or not isinstance(g, node_kind):
            return
        k = range(len(g.children))
        for left in _nonempty_subsets(list(k), proper=True):
            right = [i for i in k if i not in left]
            yield Instance(name, c, (
                _seq(rebuild(g, [g.children[i] for i in left]), c.goal.l),
                _seq(rebuild(g, [g.children[i] for i in right]), c.goal.r)),
                active=tuple((i,) for i in k))
    return gen


_split_right("AndR", And, Add)
_split_right("StarR", Star, Mul)


def _unit_right(name, goal_kind, unit, side):
    @_rule(name)
    def gen(c: Sequent):
        if not isinstance(c.goal, goal_kind):
            return
        u = unit()
        if side == 0:
            prem = (_seq(u, c.goal.l), _seq(c.context, c.goal.r))
        else:
            prem = (_seq(c.context, c.goal.l), _seq(u, c.goal.r))
        yield Instance(name, c, prem, marked=(u,), active=((),))
    return gen


_unit_right("AndR1", And, UnitPlus, 0)
_unit_right("AndR2", And, UnitPlus, 1)
_unit_right("StarR1", Star, UnitTimes, 0)
_unit_right("StarR2", Star, UnitTimes, 1)


# --- left implication rules

def _resolution(name, kind, node_kind, unit, variant):
    """ImpL/WandL and their unit variants.

    ``variant`` 0 is the plain rule, 1 replaces the side bunch by a unit,
    2 replaces the left premise context by a unit, 3 does both.
    """
    former = add if node_kind is Add else mul

    @_rule(name)
    def gen(c: Sequent):
        g = c.context
        for path, f in _leaves(g, kind):
            parent = _parent(g, path)
            in_node = isinstance(parent, node_kind)
            if variant == 3:
                u1, u2, psi = unit(), unit(), Leaf(f.r)
                new = former(u2, psi)
                yield Instance(name, c, (_seq(u1, f.l), _seq(replace(g, path, new), c.goal)),
                               marked=(u1, u2, psi), active=(path,))
                continue
            if not in_node:
                continue
            node_path, me = path[:-1], path[-1]
            sibs = [i for i in range(len(parent.children)) if i != me]
            if variant == 2:
                u, psi = unit(), Leaf(f.r)
                side = [fresh(parent.children[i]) for i in sibs]
                new = former(*side, psi)
                yield Instance(name, c, (_seq(u, f.l), _seq(replace(g, node_path, new), c.goal)),
                               marked=(u, psi, *side),
                               active=(path,) + tuple(node_path + (i,) for i in sibs))
                continue
            for delta in _nonempty_subsets(sibs, proper=(variant == 0)):
                rest = [i for i in sibs if i not in delta]
                left = _seq(former(*[parent.children[i] for i in delta]), f.l)
                psi = Leaf(f.r)
                if variant == 0:
                    side = [fresh(parent.children[i]) for i in rest]
                    new = former(*side, psi)
                    marked = (psi, *side)
                else:
                    u = unit()
                    new = former(*[parent.children[i] for i in rest], u, psi)
                    marked = (u, psi)
                yield Instance(name, c, (left, _seq(replace(g, node_path, new), c.goal)),
                               marked=marked,
                               active=(path,) + tuple(node_path + (i,) for i in sibs))
    return gen


for _n, _v in (("", 0), ("1", 1), ("2", 2), ("3", 3)):
    _resolution("ImpL" + _n, Imp, Add, UnitPlus, _v)
    _resolution("WandL" + _n, Wand, Mul, UnitTimes, _v)


# --- structural rules

def _weakenings(name, need_normal):
    @_rule(name)
    def gen(c: Sequent):
        g = c.context
        for path, node in subbunches(g):
            if not isinstance(node, Add):
                continue
            k = list(range(len(node.children)))
            for sig in _nonempty_subsets(k, proper=True):
                sigma = rebuild(node, [node.children[i] for i in sig])
                if need_normal and not is_normal(sigma):
                    continue
                keep = [fresh(node.children[i]) for i in k if i not in sig]
                prem = replace(g, path, add(*keep)) if len(keep) > 1 else replace(g, path, keep[0])
                loc = (path, tuple(sig)) if len(sig) > 1 else path + (sig[0],)
                yield Instance(name, c, (_seq(prem, c.goal),), marked=tuple(keep),
                               active=tuple(_loc_paths(loc)), sigma=sigma, sigma_loc=loc)
    return gen


_weakenings("W", False)
_weakenings("W'", True)


def _unit_weakening(name, node_kind, unit_kind):
    @_rule(name)
    def gen(c: Sequent):
        g = c.context
        for path, node in subbunches(g):
            if not isinstance(node, node_kind):
                continue
            for i, ch in enumerate(node.children):
                if isinstance(ch, unit_kind):
                    keep = [fresh(x) for j, x in enumerate(node.children) if j != i]
                    yield Instance(name, c, (_seq(replace(g, path, rebuild(node, keep)), c.goal),),
                                   marked=tuple(keep), active=(path + (i,),),
                                   sigma=ch, sigma_loc=path + (i,))
                    break
    return gen


_unit_weakening("Wo+", Add, UnitPlus)
_unit_weakening("Wox", Mul, UnitTimes)


def _wrapping(name, build, need_normal=False):
    @_rule(name)
    def gen(c: Sequent):
        g = c.context
        for loc in _locations(g):
            d = sub_at(g, loc)
            if need_normal and not is_normal(d):
                continue
            new, marked = build(d)
            yield Instance(name, c, (_seq(replace(g, loc, new), c.goal),), marked=marked,
                           active=tuple(_loc_paths(loc)))
    return gen


def _dup(d):
    a, b = fresh(d), fresh(d)
    return add(a, b), (a, b)


def _with_unit(former, unit):
    def build(d):
        a, u = fresh(d), unit()
        return former(a, u), (a, u)
    return build


_wrapping("C", _dup)
_wrapping("C'", _dup, need_normal=True)
_wrapping("Co+", _with_unit(add, UnitPlus))
_wrapping("Cox", _with_unit(mul, UnitTimes))
_wrapping("Rad", _with_unit(mul, UnitPlus))


@_rule("Inst")
def _inst(c: Sequent):
    g = c.context
    for loc in _locations(g):
        sigma = sub_at(g, loc)
        if isinstance(sigma, UnitPlus) or not is_normal(sigma):
            continue
        u = UnitPlus()
        yield Instance("Inst", c, (_seq(replace(g, loc, u), c.goal),), marked=(u,),
                       active=tuple(_loc_paths(loc)), sigma=sigma, sigma_loc=loc)


@_rule("E'")
def _exchange(c: Sequent):
    yield Instance("E'", c, (c,), marked=(c.context,), active=((),))


# ---------------------------------------------------------------------------
# enumeration and checking

def instances(system: str, conclusion: Sequent, rules: Iterable[str] | None = None) -> Iterator[Instance]:
    """Backward instances of the system's rules at ``conclusion`` (canonicalized first).

    E is not enumerable (it relates infinitely many contexts) and is
    handled by ``check_inference`` directly.
    """
    allowed = system_rules(system)
    c = canonical_sequent(conclusion)
    for name in sorted(allowed if rules is None else set(rules) & allowed):
        if name == "E":
            continue
        yield from _BACKWARD[name](c)


def matching_instances(system: str, rule: str, premises: Sequence[Sequent],
                       conclusion: Sequent) -> list[Instance]:
    """Instances of ``rule`` concluding ``conclusion`` from the given premises."""
    if rule not in system_rules(system):
        raise ValueError(f"rule {rule!r} is not part of {system}")
    if len(premises) != arity(rule):
        return []
    c = canonical_sequent(conclusion)
    if rule == "E":
        p = premises[0]
        if p.goal == c.goal and coherent_equal(p.context, c.context):
            return [Instance("E", c, (p,), marked=(p.context,))]
        return []
    want = tuple(canonical_sequent(p) for p in premises)
    return [inst for inst in _BACKWARD[rule](c) if inst.canonical_premises == want]


def check_inference(system: str, rule: str, premises: Sequence[Sequent], conclusion: Sequent) -> bool:
    return bool(matching_instances(system, rule, premises, conclusion))


# ---------------------------------------------------------------------------
# derivations

HYP = "Hyp"


@dataclass
class Derivation:
    sequent: Sequent
    rule: str
    children: tuple = ()
    sigma: Bunch | None = None
    active: tuple | None = None

    def __post_init__(self):
        self.children = tuple(self.children)

    def sequents(self) -> Iterator[Sequent]:
        yield self.sequent
        for ch in self.children:
            yield from ch.sequents()

    def nodes(self) -> Iterator["Derivation"]:
        yield self
        for ch in self.children:
            yield from ch.nodes()

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def height(self) -> int:
        return 1 + max((ch.height() for ch in self.children), default=0)

    def rules(self) -> list[str]:
        return [n.rule for n in self.nodes()]

    @property
    def premises(self) -> tuple:
        return tuple(ch.sequent for ch in self.children)

    def to_json(self) -> dict:
        params: dict = {}
        if self.sigma is not None:
            params["sigma"] = render(self.sigma)
        params["active"] = [list(p) for p in (self.active or ())]
        return {"sequent": render(self.sequent), "rule": self.rule, "params": params,
                "children": [ch.to_json() for ch in self.children]}

    @classmethod
    def from_json(cls, data: dict) -> "Derivation":
        params = data.get("params", {}) or {}
        sigma = params.get("sigma")
        return cls(parse_sequent(data["sequent"]), data["rule"],
                   tuple(cls.from_json(ch) for ch in data.get("children", [])),
                   parse_bunch(sigma) if sigma is not None else None,
                   tuple(tuple(p) for p in params.get("active", [])))

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_json(), **kw)

    @classmethod
    def loads(cls, text: str) -> "Derivation":
        return cls.from_json(json.loads(text))

    def pretty(self, indent: int = 0) -> str:
        extra = f" [{render(self.sigma)}]" if self.sigma is not None else ""
        lines = ["  " * indent + f"{render(self.sequent)}    ({self.rule}{extra})"]
        for ch in self.children:
            lines.append(ch.pretty(indent + 1))
        return "\n".join(lines)


def node_instances(system: str, node: Derivation) -> list[Instance]:
    out = matching_instances(system, node.rule, node.premises, node.sequent)
    if node.sigma is not None:
        out = [i for i in out if i.sigma is None or canonicalize(i.sigma) == canonicalize(node.sigma)]
    return out


@dataclass
class CheckResult:
    ok: bool
    message: str = ""
    node: Derivation | None = None

    def __bool__(self):
        return self.ok


def check_report(system: str, d: Derivation, hyps: Iterable[Sequent] = (),
                 root: Sequent | None = None) -> CheckResult:
    """Check every inference; the first failing node (preorder) is reported."""
    system_rules(system)
    hyp_set = {canonical_sequent(h) for h in hyps}
    if root is not None and canonical_sequent(root) != canonical_sequent(d.sequent):
        return CheckResult(False, f"root is {render(d.sequent)}, expected {render(root)}", d)
    for node in d.nodes():
        if node.rule == HYP:
            if node.children or canonical_sequent(node.sequent) not in hyp_set:
                return CheckResult(False, f"unjustified leaf {render(node.sequent)}", node)
            continue
        if node.rule not in RULES or node.rule not in SYSTEMS[system]:
            return CheckResult(False, f"rule {node.rule!r} is not part of {system}", node)
        if not node_instances(system, node):
            return CheckResult(False, f"bad {node.rule} inference at {render(node.sequent)}", node)
    return CheckResult(True)


def check_derivation(system: str, d: Derivation, hyps: Iterable[Sequent] = ()) -> bool:
    return check_report(system, d, hyps).ok


# ---------------------------------------------------------------------------
# actions and regimentation

def _group_duplicit(g: Bunch, loc) -> bool:
    """Whether the bunch at ``loc`` sits beside a disjoint copy of itself under ``;``."""
    if is_group(loc):
        path, idxs = loc
        node = sub_at(g, path)
        if not isinstance(node, Add):
            return False
        mine = [canonicalize(node.children[i]) for i in idxs]
        others = [canonicalize(c) for i, c in enumerate(node.children) if i not in idxs]
        for k in set(mine):
            if others.count(k) < mine.count(k):
                return False
        return True
    if not loc:
        return False
    parent = sub_at(g, loc[:-1])
    if not isinstance(parent, Add):
        return False
    me = canonicalize(sub_at(g, loc))
    return sum(1 for c in parent.children if canonicalize(c) == me) > 1


def instance_is_action(inst: Instance) -> bool:
    kind = RULES[inst.rule][1]
    if kind in (AXIOM, LOGICAL) or inst.rule == "Rad":
        return True
    if inst.rule in ("W'", "W", "Inst"):
        return not _group_duplicit(inst.conclusion.context, inst.sigma_loc)
    return False


def duplicit_classes(g: Bunch) -> list[list[tuple]]:
    """Groups of paths to permutation-equal siblings under one ``;`` node."""
    out = []
    for path, node in subbunches(g):
        if isinstance(node, Add):
            classes: dict = {}
            for i, c in enumerate(node.children):
                classes.setdefault(canonicalize(c), []).append(path + (i,))
            out.extend(v for v in classes.values() if len(v) > 1)
    return out


def _touches(member: tuple, active: list[tuple]) -> bool:
    n = len(member)
    return any(a[:n] == member or member[:len(a)] == a for a in active)


def instance_is_regimented(inst: Instance) -> bool:
    """Every duplicit class of every premise reaches active material.

    Permutation-equal copies are interchangeable, so a class counts as
    active once one of its members contains or lies inside an active
    position.
    """
    for i, p in enumerate(inst.premises):
        active = inst.premise_active(i)
        for cls in duplicit_classes(p.context):
            if not any(_touches(m, active) for m in cls):
                return False
    return True


def is_action(system: str, rule: str, premises: Sequence[Sequent], conclusion: Sequent) -> bool:
    return any(instance_is_action(i) for i in matching_instances(system, rule, premises, conclusion))


def is_regimented_action(system: str, rule: str, premises: Sequence[Sequent],
                         conclusion: Sequent) -> bool:
    return any(instance_is_action(i) and instance_is_regimented(i)
               for i in matching_instances(system, rule, premises, conclusion))


ACTION, LOADING, NORMALIZING, EXCHANGE, HYPOTHESIS = "action", "loading", "normalizing", "exchange", "hypothesis"


def node_phase(system: str, node: Derivation) -> str:
    if node.rule == HYP:
        return HYPOTHESIS
    if node.rule in EXCHANGE_RULES:
        return EXCHANGE
    insts = node_instances(system, node)
    if any(instance_is_action(i) for i in insts):
        return ACTION
    if node.rule in NORMALIZING_RULES:
        return NORMALIZING
    return LOADING


@dataclass
class PhaseNode:
    node: Derivation
    phase: str
    regimented: bool
    children: tuple = ()


def classify_phases(system: str, d: Derivation) -> PhaseNode:
    phase = node_phase(system, d)
    reg = True
    if phase == ACTION:
        reg = any(instance_is_action(i) and instance_is_regimented(i)
                  for i in node_instances(system, d))
    return PhaseNode(d, phase, reg, tuple(classify_phases(system, c) for c in d.children))


def regimentation_faults(system: str, d: Derivation) -> list[str]:
    """Reasons ``d`` is not regimented (empty when it is)."""
    faults: list[str] = []

    def walk(pn: PhaseNode, below: list[str]):
        # ``below`` is the list of non-action phases met on the way up since
        # the last action (nearest first)
        if pn.phase in (ACTION, HYPOTHESIS):
            if pn.phase == ACTION and not pn.regimented:
                faults.append(f"unregimented {pn.node.rule} at {render(pn.node.sequent)}")
            _check_segment(below, pn, faults)
            for ch in pn.children:
                walk(ch, [])
            return
        seg = below + ([pn.phase] if pn.phase != EXCHANGE else [])
        for ch in pn.children:
            walk(ch, seg)
        if not pn.children:
            _check_segment(seg, pn, faults)

    walk(classify_phases(system, d), [])
    return faults


def _check_segment(segment: list[str], pn: PhaseNode, faults: list[str]):
    # read downward the segment must be normalizing* loading*; ``segment``
    # was collected upward so it must be loading* normalizing*
    seen_norm = False
    for ph in segment:
        if ph == NORMALIZING:
            seen_norm = True
        elif ph == LOADING and seen_norm:
            faults.append(f"loading step above a normalizing step on the branch to "
                          f"{render(pn.node.sequent)}")
            return


def is_regimented(system: str, d: Derivation) -> bool:
    return not regimentation_faults(system, d)


# ---------------------------------------------------------------------------
# hat forms

_PLACEHOLDER = "\x00active"


def _freeze_active(g: Bunch, active: list[tuple]):
    """Replace maximal active positions by unique placeholder atoms."""
    tops = sorted({a for a in active if not any(b != a and a[:len(b)] == b for b in active)},
                  key=lambda p: (-len(p), p))
    saved = {}
    for n, path in enumerate(tops):
        name = f"{_PLACEHOLDER}{n}"
        saved[name] = sub_at(g, path)
        g = replace(g, path, Leaf(Atom(name)))
    return g, saved


def _thaw(g: Bunch, saved: dict) -> Bunch:
    if isinstance(g, Leaf) and isinstance(g.f, Atom) and g.f.name in saved:
        return saved[g.f.name]
    if isinstance(g, (Add, Mul)):
        return rebuild(g, [_thaw(c, saved) for c in g.children])
    return g


def hat_premise(inst: Instance, i: int, units: bool = True) -> Sequent:
    """Premise ``i`` with inactive duplicates (and, with ``units``, removable units) reduced away."""
    p = inst.premises[i]
    frozen, saved = _freeze_active(p.context, inst.premise_active(i))
    reduced, _ = normalize(frozen, units=units)
    return canonical_sequent(Sequent(_thaw(reduced, saved), p.goal))


def hat_forms(system: str, inst: Instance, units: bool = True, limit: int = 20000):
    """Hatted premises and a conclusion inferring them by the same rule.

    The conclusion is searched for among the reducts of the original
    conclusion; the returned instance witnesses the inference.
    """
    if not (instance_is_action(inst) and instance_is_regimented(inst)):
        raise ValueError("hat forms are defined for regimented actions only")
    hats = tuple(hat_premise(inst, i, units) for i in range(len(inst.premises)))
    from .rewriting import reducts as _reducts
    start = canonicalize(inst.conclusion.context)
    seen = {start}
    frontier = [start]
    while frontier and len(seen) <= limit:
        nxt = []
        for ctx in frontier:
            c = Sequent(ctx, inst.conclusion.goal)
            for cand in matching_instances(system, inst.rule, hats, c):
                if instance_is_action(cand) and instance_is_regimented(cand):
                    return hats, canonical_sequent(c), cand
            for _, r in _reducts(ctx, "small", units):
                if r not in seen:
                    seen.add(r)
                    nxt.append(r)
        frontier = nxt
    raise ValueError(f"no hatted conclusion found for {inst.rule} at {render(inst.conclusion)}")


# ---------------------------------------------------------------------------
# search support

@dataclass(frozen=True)
class SearchBounds:
    a: int
    m: int
    d: int

    def admits(self, s: Sequent) -> bool:
        return multiplicity(s) <= self.a and mult_width(s) <= self.m and depth(s) <= self.d

    def __str__(self):
        return f"{self.a},{self.m},{self.d}"


def expand(system: str, goal: Sequent, bounds: SearchBounds | None = None) -> list[Instance]:
    """Backward instances at ``goal`` whose premises stay within ``bounds``.

    Instances with identical canonical premises are reported once.
    """
    seen = set()
    out = []
    for inst in instances(system, goal):
        key = (inst.rule, inst.canonical_premises)
        if key in seen:
            continue
        seen.add(key)
        if bounds is not None and not all(bounds.admits(p) for p in inst.canonical_premises):
            continue
        out.append(inst)
    return out


def node_from_instance(inst: Instance, children: Sequence[Derivation]) -> Derivation:
    sigma = inst.sigma if inst.rule in ("W'", "W", "Inst") else None
    return Derivation(inst.conclusion, inst.rule, tuple(children), sigma, tuple(inst.active))
