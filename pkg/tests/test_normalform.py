from functools import reduce
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfgamb.grammar import ParikhVector
from cfgamb.normalform import (
    LinearTerm,
    Trace,
    WeightedSemilinearSet,
    i2_exponent,
    kernel_vector,
    linear_set_contains,
    semilinear_coefficient,
    star_height_reduce,
    terms_as_series,
    to_semilinear,
)
from cfgamb.oracle import Budget, camb_table
from cfgamb.rational import add, camb_at_most, const, evaluate, letter, letters, mul, star, star_count
from cfgamb.semiring import identity_valuation, semiring_from_name

from grammar_suite import ACYCLIC, SOURCES, bounded_counts, expressions, grammar, vectors

a, b = letter("a"), letter("b")
A_PLUS_2B = star(add(a, mul(const(2), b)))


def pv(**kw):
    return ParikhVector(kw)


def series_of(e, k, degree=8, alphabet="ab"):
    S = semiring_from_name(f"series-k:{k}:{degree}")
    return S, evaluate(e, identity_valuation(S, alphabet), S)


def assert_terms_denote(terms, e, k, degree=8):
    S, want = series_of(e, k, degree)
    assert terms_as_series(terms, S) == want


# ------------------------------------------------------------ star height


def test_reduce_a_plus_2b():
    terms = star_height_reduce(A_PLUS_2B, 2)
    assert all(not t.support_flag for t in terms)
    assert_terms_denote(terms, A_PLUS_2B, 2, 10)
    # the intermediate line of the worked chain
    a2, b2 = mul(a, a), mul(b, b)
    chain = add(const(1), a, mul(const(2), b), mul(a2, star(a)), mul(const(2), b2, star(b)),
                mul(const(2), a, b, star(a), star(b)))
    S, lhs = series_of(A_PLUS_2B, 2, 10)
    assert series_of(chain, 2, 10)[1] == lhs


def test_reduce_nested_star():
    e = star(star(a))
    terms = star_height_reduce(e, 3)
    assert [(t.weight, t.offset, t.periods) for t in terms] == [(3, pv(), (pv(a=1),))]


def test_reduce_scaled_letter():
    e = star(mul(const(2), a))
    terms = star_height_reduce(e, 3)
    got = sorted((t.weight, t.offset.norm(), len(t.periods)) for t in terms)
    assert got == [(1, 0, 0), (2, 1, 0), (3, 2, 1)]
    assert i2_exponent(2, 3) == 2
    with pytest.raises(ValueError):
        i2_exponent(1, 3)


def test_reduce_trace_records_rules():
    tr = Trace()
    star_height_reduce(star(add(a, mul(b, star(a)))), 2, tr)
    rules = {r for r, _, _ in tr.steps}
    assert rules & {"I4", "I5"}
    assert tr.to_json()[0].keys() == {"rule", "depth", "detail"}


# ------------------------------------------------------------ semilinear sets


def test_semilinear_a_plus_2b():
    s = to_semilinear(A_PLUS_2B, 2)
    assert semilinear_coefficient(s, {"a": 2}) == 1
    assert semilinear_coefficient(s, {"a": 1, "b": 1}) == 2
    assert semilinear_coefficient(s, {}) == 1
    assert s.coefficient({"b": 3}) == 2


def test_semilinear_even_letters():
    s = to_semilinear(star(mul(a, a)), 1)
    assert [(t.weight, t.offset, t.periods) for t in s.terms] == [(1, pv(), (pv(a=2),))]


def test_semilinear_product_of_plus():
    e = mul(a, star(a), a, star(a))
    s = to_semilinear(e, 2)
    for n in range(12):
        assert semilinear_coefficient(s, {"a": n}) == max(0, min(n - 1, 2))


def test_empty_set():
    s = WeightedSemilinearSet(3, [])
    assert semilinear_coefficient(s, {"a": 4}) == 0
    assert to_semilinear(const(0), 2).terms == []


def test_epsilon_star_is_k():
    s = to_semilinear(star(const(1)), 3)
    assert semilinear_coefficient(s, {}) == 3
    assert semilinear_coefficient(s, {"a": 1}) == 0


def test_json_round_trip():
    s = to_semilinear(A_PLUS_2B, 2)
    back = WeightedSemilinearSet.from_json(s.to_json())
    assert back == s
    assert s.to_json()["k"] == 2


def test_linear_set_membership():
    assert linear_set_contains(pv(a=1, b=1), (pv(a=2),), pv(a=5, b=1))
    assert not linear_set_contains(pv(a=1, b=1), (pv(a=2),), pv(a=4, b=1))
    assert linear_set_contains(pv(), (pv(a=2), pv(a=3)), pv(a=7))
    assert not linear_set_contains(pv(), (pv(a=2), pv(a=3)), pv(a=1))


# ------------------------------------------------------------ kernel vectors


def _up_to_sign(n, want):
    return tuple(n) == tuple(want) or tuple(-x for x in n) == tuple(want)


def test_kernel_examples():
    assert _up_to_sign(kernel_vector([pv(a=1), pv(b=1), pv(a=1, b=1)]), (1, 1, -1))
    assert kernel_vector([pv(a=1), pv(b=1)]) is None
    assert _up_to_sign(kernel_vector([pv(a=2), pv(a=3)]), (3, -2))
    # a zero period is its own dependency
    assert kernel_vector([pv(a=1), pv()]) == (0, 1)
    assert kernel_vector([]) is None


rows = st.lists(
    st.dictionaries(st.sampled_from("abc"), st.integers(0, 4)).filter(any).map(ParikhVector),
    min_size=1, max_size=5,
)


@given(rows)
def test_kernel_property(vs):
    n = kernel_vector(vs)
    alphabet = sorted({x for v in vs for x in v})
    if n is None:
        assert len(vs) <= len(alphabet)
        return
    assert any(n)
    if not any(v.is_zero() for v in vs):
        assert any(x > 0 for x in n) and any(x < 0 for x in n)
    for x in alphabet:
        assert sum(c * v[x] for c, v in zip(n, vs)) == 0
    assert reduce(gcd, (abs(x) for x in n)) == 1


# ------------------------------------------------------------ semantics


def _check_against_oracle(name, d, k):
    g, x = grammar(name)
    e = camb_at_most(g, x, d)
    budget = Budget(max_norm=7)
    want = camb_table(g, x, budget, dim_max=d) if name in ACYCLIC else bounded_counts(g, x, d, budget)
    tr = Trace()
    s = to_semilinear(e, k, tr)
    for v in vectors(g.alphabet, 7):
        assert semilinear_coefficient(s, v) == min(want.get(v, 0), k), (name, d, k, v)
    for t in s.terms:
        assert t.support_flag
        if t.weight < k:
            assert kernel_vector(t.periods) is None
    assert tr.max_depth <= star_count(e)


@pytest.mark.parametrize("name", sorted(SOURCES))
@pytest.mark.parametrize("d", [0, 1, 2])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_semantics_preserved(name, d, k):
    _check_against_oracle(name, d, k)


@pytest.mark.parametrize("name", ["cat", "dyck", "mix", "yay", "loop", "right"])
def test_semantics_preserved_level_three(name):
    for k in (1, 2, 3):
        _check_against_oracle(name, 3, k)


@settings(max_examples=150, deadline=None)
@given(expressions(max_leaves=10), st.sampled_from([1, 2, 3]))
def test_normal_form_denotes_the_expression(e, k):
    S, want = series_of(e, k, 6)
    terms = star_height_reduce(e, k)
    assert terms_as_series(terms, S) == want
    tr = Trace()
    s = to_semilinear(e, k, tr)
    for v in vectors("ab", 6):
        assert semilinear_coefficient(s, v) == S.coefficient(want, v)
    for t in s.terms:
        assert 0 < t.weight <= k
        if t.weight < k:
            assert kernel_vector(t.periods) is None
    assert tr.max_depth <= star_count(e)
