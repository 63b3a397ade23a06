"""
Newton iterates as rational expressions
=======================================

The least solution of X = h_a X^6 + h_b X^5 + h_c, with h_a = 1/6,
h_b = 1/2 and h_c = 1/3, is approximated from below by evaluating the
dimension-bounded expressions camb_{X<=k}.  The k-th expression gives the
k-th Newton iterate.
"""
from fractions import Fraction

from cfgamb import camb_expr, evaluate, fixpoint_solve, parse_grammar, semiring_from_name
from cfgamb.rational import to_string
from cfgamb.unfold import at_most

g = parse_grammar("X -> a X X X X X X | b X X X X X | c ;")
Q = semiring_from_name("rational")
h = {"a": Fraction(1, 6), "b": Fraction(1, 2), "c": Fraction(1, 3)}

exprs = camb_expr(g, 2)
for k in range(3):
    e = exprs[at_most("X", k)]
    value = evaluate(e, h, Q)
    print(f"k={k}  {float(value):.10f}  {value if k < 2 else '...'}")

print(to_string(exprs[at_most("X", 1)]))

###############################################################################
# The same expressions evaluate in any semiring.  Over the tropical semiring
# with unit weights they give the least number of letters in a word, here 1
# for the word c.

T = semiring_from_name("tropical")
print(evaluate(exprs[at_most("X", 2)], {a: 1 for a in "abc"}, T))

###############################################################################
# Plain Kleene iteration approaches the same limit from below.  Exact
# denominators grow about sixfold in length each round, so stop early.

for r in range(1, 6):
    print(r, f"{float(fixpoint_solve(g, h, Q, r)['X']):.10f}")
