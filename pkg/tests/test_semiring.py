import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfgamb.grammar import ParikhVector
from cfgamb.semiring import (
    INF,
    BooleanSemiring,
    CollapsedNatural,
    ExtendedNatural,
    RationalSemiring,
    SemiringError,
    SeriesSemiring,
    TropicalSemiring,
    WhyProvenance,
    identity_valuation,
    parse_valuation,
    semiring_from_name,
)

LAW_CASES = settings(max_examples=200, deadline=None)

inf_or = lambda s: st.one_of(s, st.just(INF))  # noqa: E731
witness = st.frozensets(st.sampled_from("abc"), max_size=3)


def series_values(S, coeffs):
    vec = st.dictionaries(st.sampled_from("ab"), st.integers(0, 2)).map(ParikhVector)
    return st.dictionaries(vec, coeffs, max_size=3).map(lambda d: S.add(S.zero(), S._clean(d)))


INSTANCES = {
    "bool": (BooleanSemiring(), st.booleans()),
    "nat-inf": (ExtendedNatural(), inf_or(st.integers(0, 20))),
    "nat-k:1": (CollapsedNatural(1), st.integers(0, 1)),
    "nat-k:2": (CollapsedNatural(2), st.integers(0, 2)),
    "nat-k:5": (CollapsedNatural(5), st.integers(0, 5)),
    "tropical": (TropicalSemiring(), inf_or(st.integers(0, 30))),
    "whyprov": (WhyProvenance(), st.frozensets(witness, max_size=3)),
    "rational": (RationalSemiring(), inf_or(st.fractions(min_value=0, max_value=5, max_denominator=7))),
}
_s2 = SeriesSemiring(CollapsedNatural(2), 4)
_sinf = SeriesSemiring(ExtendedNatural(), 4)
INSTANCES["series-k:2:4"] = (_s2, series_values(_s2, st.integers(1, 2)))
INSTANCES["series-inf:4"] = (_sinf, series_values(_sinf, inf_or(st.integers(1, 4))))

# instances where the partial sums of a* reach the star after finitely many steps
FINITE_STAR = ["bool", "nat-k:1", "nat-k:2", "nat-k:5", "tropical", "whyprov", "series-k:2:4"]


def law_test(name):
    S, values = INSTANCES[name]

    @LAW_CASES
    @given(values, values, values)
    def check(a, b, c):
        eq = S.eq
        assert eq(S.add(a, b), S.add(b, a))
        assert eq(S.mul(a, b), S.mul(b, a))
        assert eq(S.add(S.add(a, b), c), S.add(a, S.add(b, c)))
        assert eq(S.mul(S.mul(a, b), c), S.mul(a, S.mul(b, c)))
        assert eq(S.add(a, S.zero()), a)
        assert eq(S.mul(a, S.one()), a)
        assert eq(S.mul(a, S.zero()), S.zero())
        assert eq(S.mul(a, S.add(b, c)), S.add(S.mul(a, b), S.mul(a, c)))
        assert eq(S.star(a), S.add(S.one(), S.mul(a, S.star(a))))

    return check


@pytest.mark.parametrize("name", sorted(INSTANCES))
def test_semiring_laws(name):
    law_test(name)()


@pytest.mark.parametrize("name", FINITE_STAR)
def test_star_is_limit_of_partial_sums(name):
    S, values = INSTANCES[name]

    @settings(max_examples=100, deadline=None)
    @given(values)
    def check(a):
        partial, power = S.zero(), S.one()
        for _ in range(40):
            partial = S.add(partial, power)
            power = S.mul(power, a)
        assert S.eq(partial, S.star(a))

    check()


@pytest.mark.parametrize("name", sorted(INSTANCES))
def test_from_natural_infinity_is_star_of_one(name):
    S, _ = INSTANCES[name]
    assert S.eq(S.from_natural(math.inf), S.star(S.one()))
    assert S.eq(S.from_natural(0), S.zero())
    assert S.eq(S.from_natural(1), S.one())
    assert S.eq(S.from_natural(3), S.add(S.one(), S.add(S.one(), S.one())))


def test_collapsed_star_examples():
    N2 = CollapsedNatural(2)
    assert [N2.star(a) for a in range(3)] == [1, 2, 2]
    assert N2.from_natural(math.inf) == 2
    with pytest.raises(SemiringError):
        CollapsedNatural(0)


def test_tropical_examples():
    T = TropicalSemiring()
    assert T.star(5) == 0
    assert T.from_natural(3) == 0
    assert T.zero() == INF and T.one() == 0
    assert T.add(3, 5) == 3 and T.mul(3, 5) == 8


def test_whyprov_examples():
    W = WhyProvenance()
    assert W.from_natural(2) == frozenset([frozenset()])
    e, f = W.fact("e"), W.fact("f")
    assert W.mul(W.add(e, f), e) == frozenset([frozenset("e"), frozenset("ef")])
    # no absorption: {e} + {e,f} keeps both witnesses
    assert len(W.add(e, W.mul(e, f))) == 2
    assert W.star(e) == frozenset([frozenset(), frozenset("e")])


def test_rational_star():
    Q = RationalSemiring()
    assert Q.star(Fraction(1, 3)) == Fraction(3, 2)
    assert Q.star(Fraction(1)) == INF
    assert Q.mul(0, INF) == 0


def test_extended_natural():
    N = ExtendedNatural()
    assert N.mul(0, INF) == 0 and N.mul(2, INF) == INF and N.add(3, INF) == INF
    assert N.star(0) == 1 and N.star(2) == INF


def test_series_star_example():
    S = semiring_from_name("series-inf:3")
    x = S.letter("x")
    got = S.star(S.mul(S.from_natural(2), x))
    assert got == S.sum([S.one(), S.scale(2, x), S.scale(4, S.power(x, 2)), S.scale(8, S.power(x, 3))])


def test_series_truncation():
    S = semiring_from_name("series-k:3:2")
    x = S.letter("x")
    assert S.power(x, 3) == S.zero()
    assert S.coefficient(S.star(x), {"x": 2}) == 1


@pytest.mark.parametrize("k", [1, 2, 4])
def test_series_collapsed_at_k(k):
    S = semiring_from_name(f"series-k:{k}:4")
    assert S.from_natural(k) == S.from_natural(k + 1)
    assert S.from_natural(k - 1) != S.from_natural(k)


def test_series_star_with_constant_term():
    S = semiring_from_name("series-inf:3")
    x = S.letter("x")
    got = S.star(S.add(S.one(), x))
    assert all(c == INF for c in got.terms.values())
    assert len(got.terms) == 4


@pytest.mark.parametrize(
    "name, cls",
    [
        ("bool", BooleanSemiring),
        ("nat-inf", ExtendedNatural),
        ("nat-k:3", CollapsedNatural),
        ("tropical", TropicalSemiring),
        ("whyprov", WhyProvenance),
        ("rational", RationalSemiring),
        ("series-k:2:5", SeriesSemiring),
        ("series-inf:5", SeriesSemiring),
    ],
)
def test_semiring_from_name(name, cls):
    S = semiring_from_name(name)
    assert isinstance(S, cls)


@pytest.mark.parametrize("name", ["nat-k", "nat-k:x", "series-k:2", "floats", "nat-k:0"])
def test_semiring_from_bad_name(name):
    with pytest.raises(SemiringError):
        semiring_from_name(name)


def test_parse_and_format():
    Q = RationalSemiring()
    assert Q.parse("2/6") == Fraction(1, 3) and Q.format(Fraction(1, 3)) == "1/3"
    assert Q.parse("inf") == INF and Q.format(INF) == "inf"
    with pytest.raises(SemiringError):
        Q.parse("-1")
    W = WhyProvenance()
    assert W.parse([["e", "f"], []]) == frozenset([frozenset("ef"), frozenset()])
    assert W.format(W.parse([["f", "e"]])) == [["e", "f"]]
    assert CollapsedNatural(2).parse(7) == 2
    with pytest.raises(SemiringError):
        BooleanSemiring().parse("maybe")


def test_parse_valuation():
    S = RationalSemiring()
    val = parse_valuation({"a": "1/2", "b": 1}, S, alphabet=["a", "b"])
    assert val == {"a": Fraction(1, 2), "b": Fraction(1)}
    with pytest.raises(SemiringError):
        parse_valuation({"a": "1/2"}, S, alphabet=["a", "b"])


def test_identity_valuation():
    S = semiring_from_name("series-inf:2")
    val = identity_valuation(S, ["a"])
    assert val["a"] == S.monomial({"a": 1})
