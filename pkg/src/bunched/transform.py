"""Proof transformations and the depth labelling.

The pipeline takes an LBI proof to a regimented dLBI proof:

    lbi_to_slbi -> regiment -> eliminate_unit_contractions -> eliminate_rad

Every stage returns a fresh ``Derivation`` and leaves its input alone.
Structural detours are expressed with two strategies: a contraction
strategy walks a proof of S down to its normal form, and a weakening
strategy walks a proof of a normal sequent down to any S with that normal
form.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations, product

from .calculus import (
    LOGICAL, RULES, SYSTEMS, Derivation, Instance, _objects, check_report,
    hat_premise, instance_is_action, instance_is_regimented, is_regimented,
    matching_instances, node_from_instance, node_instances, system_rules,
)
from .measures import depth
from .rewriting import CONTRACT, DROP_PLUS, DROP_TIMES, contracted, is_normal, normalize, reducts
from .syntax import (
    Add, Binary, Bunch, Formula, Leaf, Mul, Sequent, UNIT_TIMES, UnitPlus, canonical_sequent,
    canonicalize, remove, render, replace, sub_at, subbunches,
)

# sLBI with the unit variants and Rad: the working system between regimentation
# and the two elimination passes
SYSTEMS["slbi+"] = SYSTEMS["slbi"] | SYSTEMS["dlbi-rad"]


class TransformError(ValueError):
    pass


def _nf(s: Sequent) -> Sequent:
    return canonical_sequent(Sequent(normalize(s.context)[0], s.goal))


# ---------------------------------------------------------------------------
# strategies

_CONTRACTION_RULE = {CONTRACT: "C'", DROP_PLUS: "Co+", DROP_TIMES: "Cox"}


def contraction_strategy(d: Derivation, units: bool = True) -> Derivation:
    """Extend a proof of S downward to a proof of its normal form.

    With ``units`` false only copies are contracted.
    """
    ctx, goal = d.sequent.context, d.sequent.goal
    _, log = normalize(ctx, units=units)
    for st in log:
        ctx = st.apply(ctx)
        d = Derivation(canonical_sequent(Sequent(ctx, goal)), _CONTRACTION_RULE[st.kind], (d,))
    return d


def weakening_strategy(s: Sequent, top: Derivation) -> Derivation:
    """Extend ``top`` (a proof of the normal form of ``s``) downward to ``s``.

    Read upward the chain normalizes ``s`` step by step: a removed copy is a
    W' step, a removed unit a Wo+ or Wox step.
    """
    ctx = s.context
    _, log = normalize(ctx)
    chain = []
    for st in log:
        rule = {DROP_PLUS: "Wo+", DROP_TIMES: "Wox", CONTRACT: "W'"}[st.kind]
        sigma = contracted(ctx, st) if st.kind == CONTRACT else None
        chain.append((canonical_sequent(Sequent(ctx, s.goal)), rule, sigma))
        ctx = st.apply(ctx)
    if canonical_sequent(Sequent(ctx, s.goal)) != canonical_sequent(top.sequent):
        raise TransformError(f"{render(top.sequent)} is not the normal form of {render(s)}")
    d = top
    for seq, rule, sigma in reversed(chain):
        d = Derivation(seq, rule, (d,), sigma)
    return d


def bridge(d: Derivation, target: Sequent) -> Derivation:
    """A proof of ``target`` from a proof of any S with the same normal form."""
    return weakening_strategy(target, contraction_strategy(d))


# ---------------------------------------------------------------------------
# LBI to sLBI

def lbi_to_slbi(d: Derivation) -> Derivation:
    rep = check_report("lbi", d)
    if not rep:
        raise TransformError(f"not an LBI proof: {rep.message}")
    return _simulate(d)


def _simulate(node: Derivation) -> Derivation:
    kids = tuple(_simulate(c) for c in node.children)
    r = node.rule
    if r in ("E", "C"):
        return bridge(kids[0], node.sequent)
    if r == "W":
        inst = matching_instances("lbi", "W", node.premises, node.sequent)[0]
        sigma, _ = normalize(inst.sigma)
        mid = canonical_sequent(Sequent(replace(inst.conclusion.context, inst.sigma_loc, sigma),
                                        node.sequent.goal))
        return bridge(Derivation(mid, "W'", kids, sigma), node.sequent)
    if r == "BotL":
        return weakening_strategy(node.sequent, Derivation(_nf(node.sequent), "BotL'"))
    return Derivation(node.sequent, r, kids, node.sigma, node.active)


# ---------------------------------------------------------------------------
# regimentation by action-tree expansion

# a rule together with the variants that can stand in for it once unit
# contractions below it are absorbed
FAMILIES = {
    "WandL": ("WandL", "WandL1", "WandL2", "WandL3"),
    "StarR": ("StarR", "StarR1", "StarR2"),
    "ImpL": ("ImpL", "ImpL1", "ImpL2", "ImpL3"),
    "AndR": ("AndR", "AndR1", "AndR2"),
    "W'": ("W'", "Inst", "Rad"),
}
_BASE = {v: k for k, vs in FAMILIES.items() for v in vs}


def family(rule: str) -> tuple:
    return FAMILIES.get(_BASE.get(rule, rule), (rule,))


def _action_instance(system: str, node: Derivation) -> Instance | None:
    acts = [i for i in node_instances(system, node) if instance_is_action(i)]
    if not acts:
        return None
    return next((i for i in acts if instance_is_regimented(i)), acts[0])


def _reduced_by_copies(ctx: Bunch) -> bool:
    """Whether contracting copies alone reaches the normal form of ``ctx``."""
    return is_normal(normalize(ctx, units=False)[0])


def _hat_conclusion(target: str, inst: Instance, hats: tuple, limit: int = 20000):
    """The nearest reduct of the action's conclusion carrying a regimented action on ``hats``."""
    rules = [r for r in family(inst.rule) if r in system_rules(target)]
    unit_contractions = {"Co+", "Cox"} <= system_rules(target)
    start = canonicalize(inst.conclusion.context)
    goal = inst.conclusion.goal
    seen, frontier = {start}, [start]
    while frontier and len(seen) <= limit:
        nxt = []
        for ctx in frontier:
            if unit_contractions or _reduced_by_copies(ctx):
                c = Sequent(ctx, goal)
                for r in rules:
                    for cand in matching_instances(target, r, hats, c):
                        if instance_is_action(cand) and instance_is_regimented(cand):
                            return cand
            for _, red in reducts(ctx, "small", True):
                if red not in seen:
                    seen.add(red)
                    nxt.append(red)
        frontier = nxt
    raise TransformError(f"no table covers {inst.rule} at {render(inst.conclusion)} in {target}")


def _expand(node: Derivation, source: str, target: str) -> Derivation:
    """A regimented proof of the normal form of ``node``'s end-sequent."""
    a = node
    inst = _action_instance(source, a)
    while inst is None:
        if len(a.children) != 1:
            raise TransformError(f"{a.rule} at {render(a.sequent)} is neither an action nor a strategy step")
        a = a.children[0]
        inst = _action_instance(source, a)
    subs = [_expand(c, source, target) for c in a.children]
    hats = tuple(hat_premise(inst, i, units=True) for i in range(len(a.children)))
    cand = _hat_conclusion(target, inst, hats)
    loaded = [weakening_strategy(h, s) for h, s in zip(hats, subs)]
    act = node_from_instance(cand, loaded)
    units = {"Co+", "Cox"} <= system_rules(target)
    return contraction_strategy(act, units=units)


def regiment(d: Derivation, system: str = "slbi") -> Derivation:
    """A regimented proof of the same normal end-sequent.

    A proof that is already regimented comes back unchanged.
    """
    if not is_normal(d.sequent.context):
        raise TransformError(f"end-sequent {render(d.sequent)} is not normal")
    rep = check_report(system, d)
    if not rep:
        raise TransformError(f"not a {system} proof: {rep.message}")
    if is_regimented(system, d):
        return d
    return _expand(d, system, system)


def eliminate_unit_contractions(d: Derivation, system: str = "slbi+") -> Derivation:
    """Absorb every Co+/Cox step into a variant rule; the result is dLBI+rad."""
    if not any(n.rule in ("Co+", "Cox") for n in d.nodes()):
        return d
    if not is_normal(d.sequent.context):
        raise TransformError(f"end-sequent {render(d.sequent)} is not normal")
    return _expand(d, system, "dlbi-rad")


# ---------------------------------------------------------------------------
# rad elimination

def eliminate_rad(d: Derivation) -> Derivation:
    """Remove Rad steps topmost first, then restore regimentation."""
    if not any(n.rule == "Rad" for n in d.nodes()):
        return d
    out = _drop_rads(d)
    if not is_regimented("dlbi", out):
        out = _expand(out, "dlbi", "dlbi")
    return out


def _drop_rads(node: Derivation) -> Derivation:
    # children first, so the Rad met here has no Rad above it
    kids = tuple(_drop_rads(c) for c in node.children)
    if node.rule == "Rad":
        return strip_radical(kids[0], node.sequent)
    return Derivation(node.sequent, node.rule, kids, node.sigma, node.active)


def _radicals(g: Bunch) -> list[tuple]:
    return [p for p, b in subbunches(g)
            if isinstance(b, UnitPlus) and p and isinstance(sub_at(g, p[:-1]), Mul)]


def _without(s: Sequent, path: tuple) -> Sequent:
    return canonical_sequent(Sequent(remove(s.context, path[:-1], [path[-1]]), s.goal))


def strip_radical(p: Derivation, target: Sequent) -> Derivation:
    """A rad-free proof of ``target``, which is ``p``'s end-sequent less one radical."""
    target = canonical_sequent(target)
    for inst in node_instances("dlbi-rad", p):
        ctx = inst.conclusion.context
        for path in _radicals(ctx):
            if _without(inst.conclusion, path) != target:
                continue
            u = sub_at(ctx, path)
            options = [_premise_options(inst, i, u, ch) for i, ch in enumerate(p.children)]
            for rule in family(p.rule):
                for combo in product(*options):
                    found = matching_instances("dlbi", rule, [seq for seq, _ in combo], target) \
                        if rule in SYSTEMS["dlbi"] else []
                    if found:
                        return node_from_instance(found[0], [build() for _, build in combo])
    raise TransformError(f"no rad table covers {p.rule} at {render(p.sequent)}")


def _premise_options(inst: Instance, i: int, u: Bunch, child: Derivation) -> list:
    """Candidate premises for the rebuilt inference, least change first."""
    raw = inst.premises[i]
    out = [(child.sequent, lambda: child)]
    ids = {id(sub_at(raw.context, q)): q for q in _radicals(raw.context)}
    if id(u) in ids:
        t = _without(raw, ids[id(u)])
        out.append((t, lambda t=t: strip_radical(child, t)))
    if isinstance(child.sequent.context, UnitPlus):
        t = Sequent(UNIT_TIMES, child.sequent.goal)
        out.append((t, lambda t=t: Derivation(t, "Inst", (child,), UNIT_TIMES)))
    # copies made by contraction or side duplication carry their own radicals
    rads = _radicals(child.sequent.context)
    for n in (1, 2):
        for picks in combinations(rads, n):
            t = child.sequent
            for q in sorted(picks, reverse=True):
                t = Sequent(remove(t.context, q[:-1], [q[-1]]), t.goal)
            t = canonical_sequent(t)
            if all(t != s for s, _ in out):
                out.append((t, lambda t=t, picks=picks: _strip_many(child, picks)))
    return out


def _strip_many(child: Derivation, picks) -> Derivation:
    d = child
    s = child.sequent
    for q in sorted(picks, reverse=True):
        s = Sequent(remove(s.context, q[:-1], [q[-1]]), s.goal)
        d = strip_radical(d, canonical_sequent(s))
    return d


def full_pipeline(d: Derivation) -> Derivation:
    """LBI proof of S to a regimented, rad-free dLBI proof of the normal form of S."""
    s = lbi_to_slbi(d)
    s = contraction_strategy(s)
    r = regiment(s, "slbi")
    r = eliminate_unit_contractions(r, "slbi+")
    return eliminate_rad(r)


# ---------------------------------------------------------------------------
# labelling

@dataclass
class FLabel:
    """Labels of a formula: ``label`` on a multiplicative main connective."""
    label: int | None = None
    l: "FLabel | None" = None
    r: "FLabel | None" = None


@dataclass
class BLabel:
    """Labels of a bunch: ``slots`` on a ``,`` node (one per former), ``f`` on a leaf."""
    slots: tuple = ()
    f: FLabel | None = None
    children: tuple = ()


@dataclass
class LabelledSequent:
    sequent: Sequent
    context: BLabel
    goal: FLabel


@dataclass
class LabelledDerivation:
    derivation: Derivation
    labelled: LabelledSequent
    children: tuple = ()

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()

    def to_json(self) -> dict:
        """The proof interchange JSON with a ``labels`` field on every node."""
        out = self.derivation.to_json()
        out["labels"] = {"context": _blabel_json(self.labelled.context),
                         "goal": _flabel_json(self.labelled.goal)}
        out["children"] = [c.to_json() for c in self.children]
        return out


def _flabel_json(lab: FLabel | None):
    if lab is None or (lab.label is None and lab.l is None):
        return None
    return {"label": lab.label, "l": _flabel_json(lab.l), "r": _flabel_json(lab.r)}


def _blabel_json(lab: BLabel):
    if lab.children:
        out = {"children": [_blabel_json(c) for c in lab.children]}
        if lab.slots:
            out["formers"] = list(lab.slots)
        return out
    return {"formula": _flabel_json(lab.f)} if lab.f is not None else {}


class _Counter:
    def __init__(self):
        self.n = 0

    def __call__(self):
        self.n += 1
        return self.n - 1


def _label_formula(f: Formula, fresh) -> FLabel:
    if not isinstance(f, Binary):
        return FLabel()
    lab = None if f.additive else fresh()
    return FLabel(lab, _label_formula(f.l, fresh), _label_formula(f.r, fresh))


def _label_bunch(g: Bunch, fresh) -> BLabel:
    if isinstance(g, Leaf):
        return BLabel(f=_label_formula(g.f, fresh))
    if isinstance(g, (Add, Mul)):
        kids = tuple(_label_bunch(c, fresh) for c in g.children)
        slots = tuple(fresh() for _ in g.children[1:]) if isinstance(g, Mul) else ()
        return BLabel(slots, None, kids)
    return BLabel()


def _zip_objects(g: Bunch, lab: BLabel, out: dict):
    out[id(g)] = (g, lab)
    for c, cl in zip(getattr(g, "children", ()), lab.children):
        _zip_objects(c, cl, out)


def _formula_index(f: Formula, lab: FLabel, out: dict):
    out.setdefault(f, lab)
    if isinstance(f, Binary):
        _formula_index(f.l, lab.l, out)
        _formula_index(f.r, lab.r, out)


_RIGHT_RULES = {"ImpR", "WandR", "StarR", "StarR1", "StarR2", "AndR", "AndR1", "AndR2", "OrR1", "OrR2"}


class _Propagator:
    """Labels of one premise from the labelled conclusion of an instance."""

    def __init__(self, inst: Instance, lab: LabelledSequent, fresh):
        self.inst, self.fresh = inst, fresh
        self.objs: dict = {}
        _zip_objects(inst.conclusion.context, lab.context, self.objs)
        self.canon: dict = {}
        for g, bl in self.objs.values():
            self.canon.setdefault(canonicalize(g), bl)
        # subformulas of the principal formula are looked up first
        self.formulas: dict = {}
        principal = self._principal(lab)
        if principal is not None:
            _formula_index(*principal, self.formulas)
        _formula_index(inst.conclusion.goal, lab.goal, self.formulas)
        for g, bl in self.objs.values():
            if isinstance(g, Leaf):
                _formula_index(g.f, bl.f, self.formulas)
        self.justifying = principal[1].label if principal is not None else None

    def _principal(self, lab):
        inst = self.inst
        if inst.rule in _RIGHT_RULES:
            return inst.conclusion.goal, lab.goal
        if RULES[inst.rule][1] == LOGICAL and inst.active:
            g, bl = self.objs[id(sub_at(inst.conclusion.context, inst.active[0]))]
            if isinstance(g, Leaf):
                return g.f, bl.f
        return None

    def formula(self, f: Formula) -> FLabel:
        if f in self.formulas:
            return self.formulas[f]
        return _label_formula(f, self.fresh)

    def _shared(self, g: Bunch) -> bool:
        return any(id(o) in self.objs for o in _objects(g))

    def bunch(self, g: Bunch) -> BLabel:
        if id(g) in self.objs:
            return self.objs[id(g)][1]
        if isinstance(g, Leaf):
            return BLabel(f=self.formula(g.f))
        if not isinstance(g, (Add, Mul)):
            return BLabel()
        if not self._shared(g):
            key = canonicalize(g)
            if key in self.canon:
                return self.canon[key]
        kids = tuple(self.bunch(c) for c in g.children)
        slots = ()
        if isinstance(g, Mul):
            slots = self._slots(g, len(g.children) - 1)
        return BLabel(slots, None, kids)

    def _slots(self, g: Mul, k: int) -> tuple:
        origin = self._origin(g)
        have = list(origin.slots) if origin is not None else []
        extra = self.justifying
        while len(have) < k:
            have.append(extra if extra is not None else self.fresh())
        return tuple(have[:k])

    def _origin(self, g: Mul):
        """The conclusion ``,`` node most of ``g``'s children came from."""
        best, score = None, 0
        for h, bl in self.objs.values():
            if not isinstance(h, Mul):
                continue
            ids = {id(c) for c in h.children}
            keys = Counter(canonicalize(c) for c in h.children)
            n = 0
            for c in g.children:
                if id(c) in ids:
                    n += 2
                elif keys[canonicalize(c)]:
                    n += 1
            if n > score:
                best, score = bl, n
        return best


def _canon_labels(g: Bunch, lab: BLabel) -> BLabel:
    if not isinstance(g, (Add, Mul)):
        return lab
    pairs = []
    for c, cl in zip(g.children, lab.children):
        cc = canonicalize(c)
        inner = _canon_labels(c, cl)
        # flattening merges a child node of the same kind into this one
        if type(cc) is type(g):
            pairs.extend(zip(cc.children, inner.children))
            lab = BLabel(lab.slots + inner.slots, None, lab.children)
        else:
            pairs.append((cc, inner))
    pairs.sort(key=lambda p: p[0].key)
    return BLabel(lab.slots, None, tuple(cl for _, cl in pairs))


def well_label(d: Derivation, system: str | None = None) -> LabelledDerivation:
    """Label ``d`` from the end-sequent upward.

    Labels at the root are distinct; a premise keeps the labels of material
    it shares with the conclusion, copies keep the labels of their originals
    and new ``,`` formers take the label of the principal connective.
    Formers produced by unit laws alone have no justifying connective and
    get fresh labels.
    """
    fresh = _Counter()
    root = canonical_sequent(d.sequent)
    lab = LabelledSequent(root, _label_bunch(root.context, fresh), _label_formula(root.goal, fresh))
    return _label_node(d, lab, fresh, system)


def _systems_for(node: Derivation) -> list[str]:
    return [s for s in ("slbi+", "lbi") if node.rule in SYSTEMS[s]]


def _label_node(node: Derivation, lab: LabelledSequent, fresh, system) -> LabelledDerivation:
    if not node.children:
        return LabelledDerivation(node, lab)
    inst = None
    for s in ([system] if system else _systems_for(node)):
        found = node_instances(s, node)
        if found:
            inst = found[0]
            break
    if inst is None:
        raise TransformError(f"bad {node.rule} inference at {render(node.sequent)}")
    prop = _Propagator(inst, lab, fresh)
    kids = []
    for raw, child in zip(inst.premises, node.children):
        bl = _canon_labels(raw.context, prop.bunch(raw.context))
        gl = prop.formula(raw.goal) if raw.goal != inst.conclusion.goal else lab.goal
        kids.append(_label_node(child, LabelledSequent(canonical_sequent(raw), bl, gl), fresh, system))
    return LabelledDerivation(node, lab, tuple(kids))


def _formula_critical(f: Formula, lab: FLabel) -> list[int]:
    if not isinstance(f, Binary):
        return []
    l, r = _formula_critical(f.l, lab.l), _formula_critical(f.r, lab.r)
    if f.additive:
        return l if len(l) >= len(r) else r
    return l + r + [lab.label]


def _formula_labels(f: Formula, lab: FLabel) -> list[int]:
    if not isinstance(f, Binary):
        return []
    own = [] if lab.label is None else [lab.label]
    return own + _formula_labels(f.l, lab.l) + _formula_labels(f.r, lab.r)


def _lines(g: Bunch, lab: BLabel) -> list[list[int]]:
    """Label multisets of every line from ``g`` down to a leaf."""
    if isinstance(g, Leaf):
        return [_formula_labels(g.f, lab.f)]
    if not isinstance(g, (Add, Mul)):
        return [[]]
    head = [min(lab.slots)] if isinstance(g, Mul) else []
    return [head + rest for c, cl in zip(g.children, lab.children) for rest in _lines(c, cl)]


def label_sets(ls: LabelledSequent) -> list[Counter]:
    return [Counter(x) for x in _lines(ls.sequent.context, ls.context)]


def _critical(g: Bunch, lab: BLabel) -> list[int]:
    if isinstance(g, Leaf):
        return _formula_critical(g.f, lab.f)
    if not isinstance(g, (Add, Mul)):
        return []
    best = max(range(len(g.children)), key=lambda i: depth(g.children[i]))
    rest = _critical(g.children[best], lab.children[best])
    return ([min(lab.slots)] if isinstance(g, Mul) else []) + rest


def critical_label_set(ls: LabelledSequent) -> Counter:
    """Labels along a critical line of the context; its size is the depth."""
    out = Counter(_critical(ls.sequent.context, ls.context))
    assert sum(out.values()) == depth(ls.sequent.context)
    return out


def label_count_faults(ls: LabelledSequent) -> list[str]:
    """Labels seen more than twice across paired label sets of one sequent."""
    faults = []
    g = ls.sequent.context
    goal_set = Counter(_formula_labels(ls.sequent.goal, ls.goal))
    pairs = [(Counter(x), goal_set) for x in _lines(g, ls.context)]
    nodes = {}
    _zip_objects(g, ls.context, nodes)
    for h, bl in nodes.values():
        if not isinstance(h, (Add, Mul)):
            continue
        for i, (c, cl) in enumerate(zip(h.children, bl.children)):
            for j, (c2, cl2) in enumerate(zip(h.children, bl.children)):
                if i != j and isinstance(c2, Leaf):
                    f2 = Counter(_formula_labels(c2.f, cl2.f))
                    pairs.extend((Counter(x), f2) for x in _lines(c, cl))
    for a, b in pairs:
        over = [k for k, v in (a + b).items() if v > 2]
        if over:
            faults.append(f"label {over[0]} occurs {(a + b)[over[0]]} times in {render(ls.sequent)}")
    return faults
