"""
Provenance of transitive closure
================================

Grounding a Datalog program yields a grammar whose variables are ground
atoms and whose letters are facts.  Evaluating its least solution in a
semiring gives shortest paths (tropical), reachability (Boolean) or the
sets of facts that witness a conclusion (why-provenance).
"""
from cfgamb import ground, parse_facts, parse_program, provenance_table, semiring_from_name
from cfgamb.datalog import TRANSITIVE_CLOSURE

program = parse_program(TRANSITIVE_CLOSURE)
facts = parse_facts(
    "edge\tu\tv\t3\n"
    "edge\tv\tw\t4\n"
    "edge\tu\tw\t9\n"
    "edge\tw\tu\t1\n",
    program.arities(),
)
gp = ground(program, facts)
print(len(gp.grammar.variables), "atoms,", len(gp.grammar.productions), "rule instances")

trop = provenance_table(gp, semiring_from_name("tropical"))
for atom in ("trans(u,w)", "trans(w,v)", "trans(u,u)"):
    print(atom, trop.values[atom])

###############################################################################
# Why-provenance ignores the weights, so ground the facts again without them.

plain = parse_facts("edge\tu\tv\nedge\tv\tw\nedge\tu\tw\nedge\tw\tu\n", program.arities())
gp = ground(program, plain)
W = semiring_from_name("whyprov")
why = provenance_table(gp, W)
print(W.format(why.values["trans(u,w)"]))

###############################################################################
# Dropping the edge w -> u breaks the cycle, and the Boolean semiring reports
# which atoms are no longer derivable.

acyclic = parse_facts("edge\tu\tv\nedge\tv\tw\nedge\tu\tw\n", program.arities())
B = semiring_from_name("bool")
reach = provenance_table(ground(program, acyclic), B)
print(sorted(a for a, v in reach.values.items() if v))
