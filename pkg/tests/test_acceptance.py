"""Acceptance checks, one group per criterion.

Run with ``pytest tests/test_acceptance.py`` (or execute this file); the
terminal summary prints one PASS/FAIL line per criterion.
"""
import math
import random
import time
from collections import deque
from fractions import Fraction
from math import comb

import pytest

from cfgamb.datalog import TRANSITIVE_CLOSURE, Atom, FactDatabase, ground, parse_program, provenance_table
from cfgamb.grammar import parse_grammar
from cfgamb.normalform import (
    i1_rhs,
    i2_rhs,
    i3_rhs,
    i4_rhs,
    i5_rhs,
    i5_rhs_merged,
    semilinear_coefficient,
    to_semilinear,
)
from cfgamb.oracle import Budget, camb_table, check_convergence_bound, check_index_bounds
from cfgamb.presburger import eval_formula, level_set_formula
from cfgamb.rational import add, camb_at_most, const, evaluate, fixpoint_limit, letter, mul, star
from cfgamb.semiring import (
    BooleanSemiring,
    RationalSemiring,
    TropicalSemiring,
    WhyProvenance,
    parse_valuation,
    semiring_from_name,
)
from cfgamb.unfold import at_most, exact, unfold

from grammar_suite import (
    ACYCLIC,
    NEWTON_H,
    NEWTON_SOURCE,
    NONEXPANSIVE,
    SOURCES,
    grammar,
    random_polynomial,
    vectors,
)

BUDGET = Budget(max_norm=7)


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


# ---------------------------------------------------------------- 1


def newton_iterates(h, count):
    """Newton's method on f(X) - X for f(X) = a X^6 + b X^5 + c, started at f(0)."""
    a, b, c = (Fraction(h[s]) for s in "abc")

    def f(x):
        return a * x**6 + b * x**5 + c

    def df(x):
        return 6 * a * x**5 + 5 * b * x**4

    x, out = c, [c]
    for _ in range(count - 1):
        x = x + (f(x) - x) / (1 - df(x))
        out.append(x)
    return out


NEWTON_VALUES = [
    Fraction(1, 3),
    Fraction(1417, 4221),
    Fraction(10981709605561545700033, 32712506178044757018129),
]


@pytest.mark.criterion(1)
def test_newton_iterates_exact():
    g = parse_grammar(NEWTON_SOURCE)
    S = RationalSemiring()
    h = parse_valuation(NEWTON_H, S)
    with Clock(10):
        got = [evaluate(camb_at_most(g, "X", k), h, S) for k in range(3)]
    assert got == NEWTON_VALUES


@pytest.mark.criterion(1)
def test_newton_values_match_independent_iteration():
    assert newton_iterates(NEWTON_H, 3) == NEWTON_VALUES


# ---------------------------------------------------------------- 2


def direct_coefficient(v, k):
    # coefficient of a^i b^j in sum_n (a + 2b)^n is C(i+j, i) 2^j
    i, j = v.get("a", 0), v.get("b", 0)
    return min(comb(i + j, i) * 2**j, k)


@pytest.mark.criterion(2)
def test_a_plus_2b_star_modulo_2():
    e = star(add(letter("a"), mul(const(2), letter("b"))))
    with Clock(1):
        s = to_semilinear(e, 2)
        for v in vectors("ab", 10):
            expected = 1 if v.get("b", 0) == 0 else 2  # 1 supp(a*) + 2 supp(b b* a*)
            assert direct_coefficient(v, 2) == expected
            assert semilinear_coefficient(s, v) == expected, v


@pytest.mark.criterion(2)
def test_a_plus_2b_star_terms():
    s = to_semilinear(star(add(letter("a"), mul(const(2), letter("b")))), 2)
    got = sorted((t.weight, t.offset.to_json(), sorted(tuple(sorted(p.to_json().items())) for p in t.periods))
                 for t in s.terms)
    assert got == [(1, {}, [(("a", 1),)]), (2, {"b": 1}, [(("a", 1),), (("b", 1),)])]


# ---------------------------------------------------------------- 3


@pytest.mark.criterion(3)
def test_unfolding_bijection():
    assert len(ACYCLIC) >= 5
    with Clock(60):
        for name in ACYCLIC:
            g, x = grammar(name)
            for k in range(4):
                u = unfold(g, k, start=x)
                le = camb_table(g, x, BUDGET, dim_max=k)
                eq = camb_table(g, x, BUDGET, dim_max=k, dim_exact=True)
                le_u = camb_table(u, at_most(x, k), BUDGET) if at_most(x, k) in u.variables else {}
                eq_u = camb_table(u, exact(x, k), BUDGET) if exact(x, k) in u.variables else {}
                for v in le.vectors():
                    assert le[v] == le_u.get(v, 0), (name, k, v)
                    assert eq[v] == eq_u.get(v, 0), (name, k, v)


# ---------------------------------------------------------------- 4


@pytest.mark.criterion(4)
def test_convergence_bound():
    with Clock(60):
        for name in ACYCLIC:
            g, x = grammar(name)
            for k in (0, 1):
                rep = check_convergence_bound(g, x, k, BUDGET)
                assert rep.checked > 0 and rep.skipped == 0
                assert rep.ok, (name, k, rep.to_json())


# ---------------------------------------------------------------- 5

IDENTITY_KS = (1, 2, 3, 5)
INSTANCES = 100


def _series(k):
    return semiring_from_name(f"series-k:{k}:8")


def _identity_cases(k, seed):
    S = _series(k)
    rng = random.Random(seed * 1000 + k)
    for _ in range(INSTANCES):
        yield S, random_polynomial(S, rng, k), random_polynomial(S, rng, k), rng.randint(2, max(k, 2))


@pytest.mark.criterion(5)
@pytest.mark.parametrize("k", IDENTITY_KS)
def test_identity_suite(k):
    with Clock(30 / len(IDENTITY_KS)):
        for S, x, y, gamma in _identity_cases(k, 1):
            xs, ys = S.star(x), S.star(y)
            kk = S.from_natural(k)
            assert S.mul(kk, x) == i1_rhs(S, x, k)
            gx = S.mul(S.from_natural(gamma), x)
            assert S.star(gx) == i2_rhs(S, x, gamma, xs, k)
            assert S.star(xs) == i3_rhs(S, xs, k)
            assert S.star(S.add(x, y)) == i4_rhs(S, x, y, xs, ys, k)
            lhs5 = S.star(S.mul(x, ys))
            assert lhs5 == i5_rhs(S, x, y, xs, ys, k)
            assert lhs5 == i5_rhs_merged(S, x, y, xs, ys, k)


@pytest.mark.criterion(5)
def test_identity_chain_a_plus_2b():
    # (a + 2b)* modulo 2, one rewrite at a time
    S = semiring_from_name("series-k:2:10")
    a, b = S.letter("a"), S.letter("b")
    two = S.from_natural(2)
    y = S.mul(two, b)
    lhs = S.star(S.add(a, y))
    step1 = i4_rhs(S, a, y, S.star(a), S.star(y), 2)
    a2as = S.mul(S.power(a, 2), S.star(a))
    b2bs = S.mul(S.power(b, 2), S.star(b))
    step2 = S.sum([S.one(), a, y, a2as, S.mul(two, b2bs), S.prod([two, a, b, S.star(a), S.star(b)])])
    final = S.add(S.support(S.star(a)), S.mul(two, S.support(S.prod([b, S.star(b), S.star(a)]))))
    assert lhs == step1 == step2 == final


@pytest.mark.criterion(5)
def test_identity_i1_to_i3_directed():
    for k in IDENTITY_KS:
        S = _series(k)
        a = S.letter("a")
        # (2a)* with gamma^c >= k
        assert S.star(S.mul(S.from_natural(2), a)) == i2_rhs(S, a, 2, S.star(a), k)
        # (a*)* = k a*
        assert S.star(S.star(a)) == S.mul(S.from_natural(k), S.star(a))
        # k (a + a^2) = k supp(a + a^2)
        p = S.add(a, S.power(a, 2))
        assert S.mul(S.from_natural(k), p) == S.mul(S.from_natural(k), S.support(p))


# ---------------------------------------------------------------- 6

PRESBURGER_GRAMMARS = ["cat", "dyck", "mix", "two", "loop", "amb", "eps", "cyc"]


@pytest.mark.criterion(6)
def test_presburger_level_sets():
    infinite_seen = 0
    with Clock(60):
        for name in PRESBURGER_GRAMMARS:
            g, x = grammar(name)
            tab = camb_table(g, x, BUDGET)
            assert tab.exact
            for k in (0, 1, 2, math.inf):
                f = level_set_formula(g, x, k)
                for v in tab.vectors():
                    assert eval_formula(f, v) == (tab[v] == k), (name, k, v)
            infinite_seen += any(tab[v] == math.inf for v in tab.vectors())
    assert infinite_seen >= 3


# ---------------------------------------------------------------- 7


def random_graphs(count=20, seed=2024):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(2, 15)
        nodes = [f"n{i}" for i in range(n)]
        edges = {(u, v): rng.randint(1, 9) for u in nodes for v in nodes if rng.random() < 1.2 / n}
        out.append((nodes, edges))
    return out


def bellman_ford_paths(nodes, edges):
    """Least weight of a nonempty path, for every pair."""
    dist = {}
    for s in nodes:
        d = {v: math.inf for v in nodes}
        for (u, v), w in edges.items():
            if u == s:
                d[v] = min(d[v], w)
        for _ in range(len(nodes)):
            for (u, v), w in edges.items():
                if d[u] + w < d[v]:
                    d[v] = d[u] + w
        dist.update({(s, v): d[v] for v in nodes})
    return dist


def bfs_reach(nodes, edges):
    succ = {u: [v for (a, v) in edges if a == u] for u in nodes}
    out = set()
    for s in nodes:
        seen, queue = set(succ[s]), deque(succ[s])
        while queue:
            u = queue.popleft()
            for v in succ[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        out.update((s, v) for v in seen)
    return out


@pytest.mark.criterion(7)
def test_datalog_provenance():
    prog = parse_program(TRANSITIVE_CLOSURE)
    with Clock(60):
        for nodes, edges in random_graphs():
            weighted = FactDatabase({Atom("edge", e): str(w) for e, w in edges.items()})
            plain = FactDatabase({Atom("edge", e): None for e in edges})
            trop = provenance_table(ground(prog, weighted), TropicalSemiring())
            gp = ground(prog, plain)
            reach = provenance_table(gp, BooleanSemiring())
            dist, bfs = bellman_ford_paths(nodes, edges), bfs_reach(nodes, edges)
            assert trop.exact and reach.exact
            for u in nodes:
                for v in nodes:
                    atom = f"trans({u},{v})"
                    assert trop.values.get(atom, math.inf) == dist[u, v]
                    assert reach.values.get(atom, False) == ((u, v) in bfs)
            W = WhyProvenance()
            why = provenance_table(gp, W)
            kleene = fixpoint_limit(gp.grammar, gp.valuation(W), W)
            for atom in gp.grammar.variables:
                assert why.values[atom] == kleene[atom], atom


# ---------------------------------------------------------------- 8


@pytest.mark.criterion(8)
def test_nonexpansive_exactness():
    with Clock(30):
        for name in NONEXPANSIVE:
            g, x = grammar(name)
            k = len(g.variables) - 1
            full = camb_table(g, x, BUDGET)
            bounded = camb_table(unfold(g, k, start=x), at_most(x, k), BUDGET)
            assert full.exact and bounded.exact
            for v in full.vectors():
                assert bounded[v] == full[v], (name, v)


@pytest.mark.criterion(8)
def test_expansive_never_converges():
    g = parse_grammar(SOURCES["cat"])
    budget = Budget(max_norm=16)
    full = camb_table(g, "X", budget)
    with Clock(30):
        for k in range(4):
            bounded = camb_table(unfold(g, k), at_most("X", k), budget)
            assert all(bounded[v] <= full[v] for v in full.vectors())
            assert any(bounded[v] < full[v] for v in full.vectors()), k


# ---------------------------------------------------------------- 9


@pytest.mark.criterion(9)
def test_index_dimension_bounds():
    checked = 0
    with Clock(30):
        for name in SOURCES:
            g, x = grammar(name)
            rep = check_index_bounds(g, x, Budget(max_nodes=12, max_norm=7), brute_force=True)
            assert rep.ok, (name, [t.pretty() for t in rep.failures[:2]])
            checked += rep.checked
    assert checked > 1000


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
