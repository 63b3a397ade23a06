"""
Normal forms modulo k and Presburger level sets
===============================================

Over N_k = {0, ..., k} with k + 1 = k, every rational expression equals a
sum of weighted linear sets.  Terms of weight below k have linearly
independent periods, which makes the weights of different terms add up
without overlap.
"""
from cfgamb import level_set_formula, parse_grammar, semilinear_coefficient, to_semilinear
from cfgamb.rational import add, const, letter, mul, star

a, b = letter("a"), letter("b")
e = star(add(a, mul(const(2), b)))
s = to_semilinear(e, 2)
for t in s.terms:
    print(t.weight, dict(t.offset), [dict(p) for p in t.periods])

# a^i b^j has binomial(i+j, j) * 2^j derivations, capped at 2
for v in ({"a": 3}, {"b": 1}, {"a": 1, "b": 1}):
    print(v, semilinear_coefficient(s, v))

###############################################################################
# The level set {v : camb(v) = 2} of X -> X X | a is the single word aaa.
# The formula is plain linear arithmetic; it can be checked by bounded
# evaluation or handed to an SMT solver.

g = parse_grammar("X -> X X | a ;")
f = level_set_formula(g, "X", 2)
print(f)
print([n for n in range(10) if f({"a": n})])
print(f.to_smt2())

###############################################################################
# Infinite ambiguity is semilinear as well.

loop = parse_grammar("X -> X | a | a a ; ")
print([n for n in range(5) if level_set_formula(loop, "X", "inf")({"a": n})])
