"""Shared test grammars and small helpers."""
import itertools
import random

from cfgamb.grammar import ParikhVector, parse_grammar

# name -> source; the first variable is the start variable
SOURCES = {
    "cat": "X -> X X | a ;",
    "dyck": "X -> a X b | ;",
    "tern": "X -> a X X | b ;",
    "mix": "X -> a X | X a | b ;",
    "two": "S -> A B | S S ; A -> a A | a ; B -> b ;",
    "yay": "X -> Y a Y a Y | b ; Y -> X | b ;",
    "cat2": "X -> X X | a | b ;",
    "loop": "X -> X | a ;",
    "amb": "S -> A | B ; A -> a A | ; B -> a B | ;",
    "eps": "X -> X X | | a ;",
    "cyc": "S -> a S | T ; T -> S | b ;",
    "right": "X -> a X | b Y ; Y -> b Y | ;",
}

# no variable X with X =>+ X: oracle counts are exact for every filter
ACYCLIC = ["cat", "dyck", "tern", "mix", "two", "yay", "cat2", "right"]
EXPANSIVE = ["cat", "tern", "two", "yay", "cat2", "eps"]
NONEXPANSIVE = ["dyck", "mix", "loop", "amb", "cyc", "right"]

NEWTON_SOURCE = "X -> a X X X X X X | b X X X X X | c ;"
NEWTON_H = {"a": "1/6", "b": "1/2", "c": "1/3"}


def grammar(name):
    g = parse_grammar(SOURCES[name])
    return g, g.variables[0]


def vectors(alphabet, max_norm):
    """All Parikh vectors over ``alphabet`` with norm at most ``max_norm``."""
    alphabet = sorted(alphabet)
    out = []
    for counts in itertools.product(range(max_norm + 1), repeat=len(alphabet)):
        if sum(counts) <= max_norm:
            out.append(ParikhVector(dict(zip(alphabet, counts))))
    return out


def random_polynomial(S, rng: random.Random, k: int, letters=("a", "b"), max_terms=3, max_degree=2):
    """A random polynomial in the series semiring S with coefficients in 1..k."""
    out = S.zero()
    for _ in range(rng.randint(1, max_terms)):
        v = {a: 0 for a in letters}
        for _ in range(rng.randint(0, max_degree)):
            v[rng.choice(letters)] += 1
        out = S.add(out, S.monomial(ParikhVector(v), S.coeff.from_natural(rng.randint(1, k))))
    return out


def small_grammars(variables=("X", "Y"), letters=("a", "b"), max_rhs=3, max_alts=3):
    """Hypothesis strategy for small grammars given as text; the start is X."""
    from hypothesis import strategies as st

    symbol = st.sampled_from(list(variables) + list(letters))
    alt = st.lists(symbol, max_size=max_rhs)
    alts = st.lists(alt, min_size=1, max_size=max_alts)

    @st.composite
    def build(draw):
        lines = []
        for x in variables:
            rules = draw(alts)
            lines.append(f"{x} -> " + " | ".join(" ".join(r) for r in rules) + " ;")
        decl = "%var " + " ".join(variables) + "\n%term " + " ".join(letters) + "\n"
        return decl + "\n".join(lines) + "\n"

    return build()


def bounded_counts(g, x, k, budget):
    """Tree counts of ``X@<=k`` in the pruned unfolding; a pruned start
    variable has no trees at all."""
    from cfgamb.oracle import camb_table
    from cfgamb.unfold import at_most, unfold

    u = unfold(g, k, start=x)
    if at_most(x, k) not in u.variables:
        return {}
    return camb_table(u, at_most(x, k), budget)


def expressions(letters=("a", "b"), max_leaves=8):
    """Hypothesis strategy for rational expressions."""
    from hypothesis import strategies as st

    from cfgamb import rational as r
    from cfgamb.semiring import INF

    leaf = st.one_of(
        st.integers(0, 3).map(r.const),
        st.just(r.const(INF)),
        st.sampled_from(letters).map(r.letter),
        st.dictionaries(st.sampled_from(letters), st.integers(0, 2)).map(r.mono),
    )

    def extend(inner):
        return st.one_of(
            st.tuples(inner, inner).map(lambda t: r.add(*t)),
            st.tuples(inner, inner).map(lambda t: r.mul(*t)),
            inner.map(r.star),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)
