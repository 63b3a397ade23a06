"""Commutative ambiguity of context-free grammars.

The package counts derivation trees per Parikh vector (``camb``), restricts
the count to trees of bounded dimension through the unfolding ``G^{<=k}``,
writes the result as a rational expression that can be evaluated in any
commutative omega-continuous semiring, and normalizes it modulo ``k = k+1``
into weighted semilinear sets and Presburger formulas.

Submodules
----------
grammar      grammars, Parikh vectors, derivation trees, tree dimension
unfold       the dimension unfolding ``G^{<=k}``
semiring     semiring instances (Boolean, tropical, why-provenance, ...)
rational     rational expressions, ``camb_expr``, evaluation, Kleene iteration
normalform   star-height reduction and weighted semilinear sets
presburger   level-set formulas, bounded evaluation, SMT-LIB output
datalog      grounding of Datalog programs and provenance queries
oracle       brute-force tree enumeration and counting
cli          the ``cfgamb`` command
"""
__version__ = "0.1.0"

from .grammar import (
    DerivationTree,
    Grammar,
    GrammarSyntaxError,
    ParikhVector,
    Production,
    cyclic_variables,
    dimension,
    infinite_support_grammar,
    is_nonexpansive,
    min_index,
    parse_grammar,
    render_grammar,
)
from .unfold import at_most, exact, prune_grammar, unfold
from .semiring import SemiringError, semiring_from_name
from .rational import (
    RationalExpr,
    camb_at_most,
    camb_expr,
    evaluate,
    fixpoint_limit,
    fixpoint_solve,
    solve_linear,
)
from .normalform import (
    LinearTerm,
    WeightedSemilinearSet,
    kernel_vector,
    semilinear_coefficient,
    star_height_reduce,
    to_semilinear,
)
from .presburger import PresburgerFormula, eval_formula, level_set_formula, linear_set_formula
from .datalog import ground, parse_facts, parse_program, provenance_query, provenance_table
from .oracle import Budget, camb_table, check_convergence_bound, enumerate_trees

__all__ = sorted(
    name for name, obj in list(globals().items())
    if not name.startswith("_") and getattr(obj, "__module__", "").startswith("cfgamb.")
)
