"""
Counting trees by dimension
===========================

A grammar with two rules, X -> X X and X -> a, has a Catalan number of
derivation trees for every word a^n.  Grouping the trees by their
dimension (the Horton-Strahler number) shows how slowly the bounded
counts approach the full ones.
"""
from cfgamb import Budget, camb_table, parse_grammar, unfold
from cfgamb.oracle import dimension_profile

g = parse_grammar("X -> X X | a ;")
print(g)

# Full counts up to norm 9.  Every count is exact: no variable derives itself.
full = camb_table(g, "X", Budget(max_norm=9))
print([full[{"a": n}] for n in range(1, 10)])

###############################################################################
# The profile splits each count by dimension 0, 1, 2 and "3 or more".

prof = dimension_profile(g, "X", 9, 3)
for v, per in sorted(prof.items(), key=lambda t: t[0].norm()):
    print(f"a^{v.norm():<2d}", per)

###############################################################################
# The unfolding G^{<=1} is an ordinary grammar whose trees are exactly the
# trees of dimension at most one, relabelled.  Its counts match column 0
# plus column 1 above.

u = unfold(g, 1, start="X")
print(u)
bounded = camb_table(u, "X@<=1", Budget(max_norm=9))
print([bounded[{"a": n}] for n in range(1, 10)])
