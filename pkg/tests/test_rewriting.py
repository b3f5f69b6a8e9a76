import pytest
from hypothesis import given

from bunched.rewriting import (
    CONTRACT, DROP_PLUS, DROP_TIMES, check_bunch_confluence, check_local_confluence, closure,
    contracted, enumerate_bunches, is_normal, join, normal_form, normalize, quasi_metric,
    reducts, replay, small_alphabet, steps,
)
from bunched.syntax import Add, Mul, canonicalize, leaf, parse_bunch, permutes, subbunches

from strategies import bunches

EXAMPLE_1 = "(p , (q ; o+)) ; (r ; (ox ; r))"


def canon(text):
    return canonicalize(parse_bunch(text))


def test_example_1_trace():
    g = parse_bunch(EXAMPLE_1)
    # first step of the trace is a permutation, invisible on classes
    permuted = parse_bunch("(p , (q ; o+)) ; (ox ; (r ; r))")
    assert permutes(g, permuted)
    # second step removes one copy of r
    after = canon("(p , (q ; o+)) ; (ox ; r)")
    found = {r: st for st, r in reducts(g)}
    assert after in found
    st = found[after]
    assert st.kind == CONTRACT and contracted(g, st) == leaf("r")
    assert canon("(p , q) ; (r ; (ox ; r))") in found


def test_example_1_normal_form():
    g = parse_bunch(EXAMPLE_1)
    nf, log = normalize(g)
    assert nf == canon("(p , q) ; (ox ; r)")
    assert is_normal(nf)
    assert canonicalize(replay(g, log)[-1]) == nf
    assert len(log) == 2
    assert quasi_metric(g, nf) == 2


def test_step_kinds():
    kinds = {st.kind for st in steps(parse_bunch("(p , ox) ; o+ ; q ; q"))}
    assert kinds == {DROP_PLUS, DROP_TIMES, CONTRACT}
    # an additive unit under "," is not removable, nor is ox under ";"
    assert list(steps(parse_bunch("p , o+"))) == []
    assert list(steps(parse_bunch("p ; ox"))) == []


def test_small_steps_need_a_normal_copy():
    g = parse_bunch("(p , (q ; q)) ; (p , (q ; q))")
    big = {r for _, r in reducts(g, "big")}
    small = {r for _, r in reducts(g, "small")}
    assert canon("p , (q ; q)") in big
    assert canon("p , (q ; q)") not in small
    with pytest.raises(ValueError):
        list(steps(g, "medium"))


def test_join_and_metric():
    g = parse_bunch(EXAMPLE_1)
    a, b = canon("(p , (q ; o+)) ; (r ; ox)"), canon("(p , q) ; (r ; (ox ; r))")
    assert join(g, a, b) == canon("(p , q) ; (ox ; r)")
    assert quasi_metric(a, g) == float("inf")
    assert quasi_metric(g, g) == 0


@given(bunches(max_leaves=5))
def test_normalize_is_normal_and_unique(g):
    nf, log = normalize(g)
    assert is_normal(nf)
    assert nf == normal_form(g)
    normals = {r for r in closure(g) if is_normal(r)}
    assert normals == {nf}


def leaves(g):
    return sum(1 for _, b in subbunches(g) if not isinstance(b, (Add, Mul)))


@given(bunches(max_leaves=5))
def test_reducts_are_proper(g):
    for st, r in reducts(g):
        assert r != canonicalize(g)
        assert leaves(r) < leaves(g)


@given(bunches(max_leaves=4))
def test_local_confluence_property(g):
    assert check_bunch_confluence(g) == []


def test_universe_size_and_confluence_sample():
    universe = enumerate_bunches(small_alphabet(), 3)
    assert len(universe) == len(set(universe))
    assert all(canonicalize(g) == g for g in universe)
    rep = check_local_confluence(universe)
    assert rep.ok and rep.checked == len(universe)
