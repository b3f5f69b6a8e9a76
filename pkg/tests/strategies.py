"""Hypothesis strategies for formulas, bunches and sequents."""

from hypothesis import strategies as st

from bunched.syntax import (
    BOT, ONE, TOP, UNIT_PLUS, UNIT_TIMES, And, Atom, Imp, Leaf, Or, Sequent, Star, Wand, add, mul,
)

CONNECTIVES = (And, Or, Imp, Star, Wand)


def formulas(atoms=("p", "q", "r"), constants=True, max_leaves=6):
    base = [Atom(a) for a in atoms] + ([TOP, BOT, ONE] if constants else [])
    return st.recursive(
        st.sampled_from(base),
        lambda inner: st.builds(lambda c, l, r: c(l, r), st.sampled_from(CONNECTIVES), inner, inner),
        max_leaves=max_leaves,
    )


def bunches(leaf_formulas=None, units=True, max_leaves=6):
    if leaf_formulas is None:
        leaf_formulas = formulas(max_leaves=3)
    base = st.builds(Leaf, leaf_formulas)
    if units:
        base = st.one_of(base, st.sampled_from([UNIT_PLUS, UNIT_TIMES]))
    return st.recursive(
        base,
        lambda inner: st.builds(lambda former, kids: former(*kids), st.sampled_from([add, mul]),
                                st.lists(inner, min_size=2, max_size=3)),
        max_leaves=max_leaves,
    )


def sequents(**kw):
    return st.builds(Sequent, bunches(**kw), formulas(max_leaves=3))
