import random

from hypothesis import given, strategies as st

from bunched.measures import (
    additive_sets, depth, duplicity, measure_all, mult_width, multiplicity, topset,
)
from bunched.syntax import (
    Add, Binary, Leaf, Mul, UnitPlus, add, leaf, mul, parse_bunch, parse_formula,
    parse_sequent,
)

from strategies import bunches

FIGURE_1 = "(p , (q ; o+)) ; (r ; (r ; ox))"


def test_figure_1_measures():
    g = parse_bunch(FIGURE_1)
    assert multiplicity(g) == 1
    assert depth(g) == 1
    assert mult_width(g) == 1


def test_figure_1_topset():
    g = parse_bunch(FIGURE_1)
    top = sorted(topset(g), key=lambda b: b.key)
    want = sorted([parse_bunch("p , (q ; o+)"), leaf("r"), leaf("r"), parse_bunch("ox")],
                  key=lambda b: b.key)
    assert top == want
    assert parse_bunch("r ; ox") not in topset(g)


def test_figure_1_additive_sets():
    g = parse_bunch(FIGURE_1)
    sets = sorted(sorted(parse_bunch_at(g, m) for m in s.members) for s in additive_sets(g))
    assert sets == sorted([
        sorted(["p , (q ; o+)", "r", "r", "ox"]), sorted(["q", "o+"]), ["p"],
    ])


def parse_bunch_at(g, path):
    from bunched.syntax import render, sub_at
    return render(sub_at(g, path))


def test_duplicity():
    g = parse_bunch(FIGURE_1)
    r_paths = [p for s in additive_sets(g) for p in s.members if parse_bunch_at(g, p) == "r"]
    assert [duplicity(g, p) for p in r_paths] == [1, 1]
    assert duplicity(parse_bunch("p ; q"), (0,)) == 0
    assert duplicity(parse_bunch("p ; p ; p"), (0,)) == 2


def test_small_values():
    assert multiplicity(parse_bunch("p ; p ; q ; q")) == 1
    assert multiplicity(parse_bunch("p , q")) == 0
    assert mult_width(parse_bunch("p , q , r")) == 2
    assert depth(parse_bunch("p , (q ; (r , s))")) == 2
    assert depth(leaf("p")) == 0
    assert mult_width(parse_formula("(p * q) -* (r /\\ s)")) == 2
    assert measure_all(parse_sequent("p , q |- p * q")) == {"mu": 0, "omega": 2, "delta": 2}


# -- independent oracle over binary trees ------------------------------------
# Bunches are rebuilt as binary trees with a random association and order,
# then measured straight from the recursive definitions.

def to_binary(g, rng):
    if isinstance(g, (Add, Mul)):
        kids = [to_binary(c, rng) for c in g.children]
        rng.shuffle(kids)
        tag = ";" if isinstance(g, Add) else ","
        while len(kids) > 1:
            i = rng.randrange(len(kids) - 1)
            kids[i:i + 2] = [(tag, kids[i], kids[i + 1])]
        return kids[0]
    if isinstance(g, Leaf):
        return ("f", g.f)
    return ("o+",) if isinstance(g, UnitPlus) else ("ox",)


def f_width(f):
    if isinstance(f, Binary):
        l, r = f_width(f.l), f_width(f.r)
        return max(l, r) if f.additive else l + r + 1
    return 0


def b_width(t):
    if t[0] == ";":
        return max(b_width(t[1]), b_width(t[2]))
    if t[0] == ",":
        return b_width(t[1]) + b_width(t[2]) + 1
    return f_width(t[1]) if t[0] == "f" else 0


def region(t, tag):
    # maximal sub-trees reachable from t through nodes tagged ``tag``
    if t[0] == tag:
        return region(t[1], tag) + region(t[2], tag)
    return [t]


def b_depth(t):
    if t[0] in (";", ","):
        inner = max(b_depth(x) for x in region(t, t[0]))
        return inner + (1 if t[0] == "," else 0)
    return f_width(t[1]) if t[0] == "f" else 0


def perm_key(t):
    if t[0] in (";", ","):
        return (t[0],) + tuple(sorted((perm_key(x) for x in region(t, t[0])), key=repr))
    return t if t[0] != "f" else ("f", repr(t[1]))


def b_mult(t, top=True):
    if t[0] == ";":
        data = region(t, ";")
        keys = [perm_key(x) for x in data]
        here = max(keys.count(k) for k in keys) - 1
        return here + sum(b_mult(x, False) for x in data)
    if t[0] == ",":
        return sum(b_mult(x, False) for x in region(t, ","))
    return 0


@given(bunches(), st.integers(0, 1000))
def test_measures_agree_with_binary_oracle(g, seed):
    t = to_binary(g, random.Random(seed))
    assert multiplicity(g) == b_mult(t)
    assert mult_width(g) == b_width(t)
    assert depth(g) == b_depth(t)


@given(bunches())
def test_measure_relations(g):
    assert multiplicity(add(g, g)) >= 1
    assert mult_width(add(g, g)) == mult_width(g)
    assert mult_width(mul(g, g)) == 2 * mult_width(g) + 1
    assert depth(add(g, g)) == depth(g)
