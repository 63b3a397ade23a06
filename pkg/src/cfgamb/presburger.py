"""Presburger formulas for the level sets of the commutative ambiguity.

For a grammar G, a variable X and ``k`` in {0, 1, 2, ..., inf} the formula
returned by :func:`level_set_formula` holds at ``v`` exactly when
``camb_{G,X}(v) = k``.  Its free variables are ``x_a`` for the letters ``a``
of G.  Three constructions are used:

* ``k = 0``: the negation of the Parikh image of ``L(G, X)``, obtained as a
  semilinear set at modulus 1;
* ``1 <= k < inf``: a weighted semilinear set ``sum_i g_i supp(C_i)`` modulo
  ``K = k + 1`` and ``exists y: sum_i g_i y_i = k`` with ``y_i`` the
  indicator of ``C_i``;
* ``k = inf``: the Parikh image of ``L(G', X)`` where ``G'`` is
  :func:`~cfgamb.grammar.infinite_support_grammar`.

Formulas are small immutable ASTs.  ``eval_formula`` is a bounded checker
(every quantifier must be bounded by the conjuncts of its body), meant for
testing; ``to_smt2`` writes SMT-LIB 2 in the LIA logic.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

from .grammar import Grammar, ParikhVector, infinite_support_grammar
from .normalform import LinearTerm, WeightedSemilinearSet, to_semilinear
from .rational import camb_expr
from .semiring import is_inf
from .unfold import at_most, prune_grammar


class UnboundedQuantifierError(ValueError):
    """``eval_formula`` could not derive a finite range for a quantified variable."""


# ------------------------------------------------------------------ the AST


@dataclass(frozen=True)
class LinExpr:
    """``sum coeffs[v] * v + const`` with integer coefficients."""

    coeffs: tuple = ()
    const: int = 0

    @classmethod
    def of(cls, coeffs: Mapping[str, int] | None = None, const: int = 0) -> "LinExpr":
        items = tuple(sorted((v, c) for v, c in (coeffs or {}).items() if c))
        return cls(items, const)

    @classmethod
    def var(cls, name: str) -> "LinExpr":
        return cls(((name, 1),), 0)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        acc = dict(self.coeffs)
        for v, c in other.coeffs:
            acc[v] = acc.get(v, 0) + c
        return LinExpr.of(acc, self.const + other.const)

    def __neg__(self) -> "LinExpr":
        return LinExpr(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def variables(self) -> set:
        return {v for v, _ in self.coeffs}

    def value(self, env: Mapping[str, int]) -> int:
        return self.const + sum(c * env[v] for v, c in self.coeffs)

    def to_json(self) -> dict:
        return {"coeffs": dict(self.coeffs), "const": self.const}

    def __str__(self):
        parts = []
        for v, c in self.coeffs:
            parts.append(v if c == 1 else f"{c}·{v}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)


def _lin(x) -> LinExpr:
    if isinstance(x, LinExpr):
        return x
    if isinstance(x, int):
        return LinExpr((), x)
    if isinstance(x, str):
        return LinExpr.var(x)
    raise TypeError(f"not a linear expression: {x!r}")


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Bool(Formula):
    value: bool


@dataclass(frozen=True)
class Eq(Formula):
    lhs: LinExpr
    rhs: LinExpr


@dataclass(frozen=True)
class Le(Formula):
    lhs: LinExpr
    rhs: LinExpr


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Exists(Formula):
    """Quantification over the naturals."""

    vars: tuple
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple
    body: Formula


@dataclass(frozen=True)
class Ref(Formula):
    """Use of a named definition; definitions only mention the free variables."""

    name: str


TRUE, FALSE = Bool(True), Bool(False)


def eq(a, b) -> Eq:
    return Eq(_lin(a), _lin(b))


def le(a, b) -> Le:
    return Le(_lin(a), _lin(b))


def conj(*args) -> Formula:
    flat = []
    for a in args:
        if a == TRUE:
            continue
        if a == FALSE:
            return FALSE
        flat.extend(a.args if isinstance(a, And) else (a,))
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*args) -> Formula:
    flat = []
    for a in args:
        if a == FALSE:
            continue
        if a == TRUE:
            return TRUE
        flat.extend(a.args if isinstance(a, Or) else (a,))
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def exists(names, body: Formula) -> Formula:
    names = tuple(names)
    return Exists(names, body) if names else body


@dataclass(frozen=True)
class PresburgerFormula:
    """A formula with free variables ``free`` and named subformulas ``defs``.

    ``defs`` is a tuple of ``(name, formula)``; a definition may only use the
    free variables and earlier definitions.
    """

    free: tuple
    body: Formula
    defs: tuple = ()

    def definition(self, name: str) -> Formula:
        for n, f in self.defs:
            if n == name:
                return f
        raise KeyError(name)

    def __call__(self, v) -> bool:
        return eval_formula(self, v)

    def to_json(self) -> dict:
        return formula_to_json(self)

    def to_smt2(self) -> str:
        return to_smt2(self)

    def __str__(self):
        lines = [f"{n}({', '.join(self.free)}) := {_show(f)}" for n, f in self.defs]
        lines.append(_show(self.body))
        return "\n".join(lines)


def letter_var(a: str) -> str:
    return f"x_{a}"


# ------------------------------------------------------------------ constructions


def linear_set_formula(t: LinearTerm, alphabet, *, prefix: str = "l") -> Formula:
    """``exists l_1..l_m >= 0: x = offset + sum_i l_i * periods[i]`` componentwise."""
    lams = [f"{prefix}{i + 1}" for i in range(len(t.periods))]
    letters = sorted(set(alphabet) | set(t.offset) | {a for p in t.periods for a in p})
    atoms = []
    for a in letters:
        rhs = LinExpr.of({lam: p.get(a, 0) for lam, p in zip(lams, t.periods)}, t.offset.get(a, 0))
        atoms.append(Eq(LinExpr.var(letter_var(a)), rhs))
    return exists(lams, conj(*atoms))


def _free_vars(alphabet) -> tuple:
    return tuple(letter_var(a) for a in sorted(alphabet))


def _log_log_ceiling(K: int) -> int:
    """Least e >= 0 with 2^(2^e) >= K."""
    e = 0
    while 2 ** (2**e) < K:
        e += 1
    return e


def unfolding_depth(g: Grammar, x: str, k) -> int:
    """Unfolding depth used for level k: ``n + ceil(log2 log2 (k+1))`` where n
    counts the variables of G that matter for X (0 for the log-log term when
    k + 1 <= 2).  For k = 0 and k = inf the support suffices and the depth is n."""
    n = len(prune_grammar(g, start=x).variables)
    if k == 0 or is_inf(k):
        return n
    return n + _log_log_ceiling(k + 1)


def semilinear_for(g: Grammar, x: str, k, modulus: int) -> WeightedSemilinearSet:
    """Weighted semilinear set equal to ``camb_{G,X}`` modulo ``modulus``,
    computed from the unfolding of depth ``unfolding_depth(g, x, k)``."""
    if x not in g.variables:
        raise ValueError(f"unknown variable {x!r}")
    pg = prune_grammar(g, start=x)
    if x not in pg.variables:
        return WeightedSemilinearSet(modulus, [])
    d = unfolding_depth(g, x, k)
    e = camb_expr(pg, d)[at_most(x, d)]
    return to_semilinear(e, modulus)


def _support_formula(s: WeightedSemilinearSet, alphabet, name_prefix: str) -> tuple:
    defs = []
    for i, t in enumerate(s.terms, 1):
        defs.append((f"{name_prefix}{i}", linear_set_formula(t, alphabet)))
    return tuple(defs), disj(*(Ref(n) for n, _ in defs))


def level_set_formula(g: Grammar, x: str, k) -> PresburgerFormula:
    """Formula over ``x_a`` (a in the alphabet) true exactly where ``camb_{G,X} = k``.

    ``k`` is a natural number or ``inf`` (``math.inf`` or the string "inf").
    """
    if isinstance(k, str):
        if k.strip().lower() not in ("inf", "infinity", "∞"):
            raise ValueError(f"bad level {k!r}")
        k = math.inf
    if not is_inf(k) and (int(k) != k or k < 0):
        raise ValueError(f"level must be a natural number or inf, got {k!r}")
    free = _free_vars(g.alphabet)
    if is_inf(k):
        gp = infinite_support_grammar(g, x)
        s = semilinear_for(gp, x, k, 1)
        defs, body = _support_formula(s, g.alphabet, "F")
        return PresburgerFormula(free, body, defs)
    k = int(k)
    if k == 0:
        s = semilinear_for(g, x, 0, 1)
        defs, body = _support_formula(s, g.alphabet, "F")
        return PresburgerFormula(free, Not(body), defs)
    s = semilinear_for(g, x, k, k + 1)
    defs = []
    ys = []
    parts = []
    weights = {}
    for i, t in enumerate(s.terms, 1):
        name, y = f"F{i}", f"y{i}"
        defs.append((name, linear_set_formula(t, g.alphabet)))
        ys.append(y)
        weights[y] = t.weight
        parts.append(Implies(Ref(name), eq(y, 1)))
        parts.append(Implies(Not(Ref(name)), eq(y, 0)))
        parts.append(le(y, 1))
    body = exists(ys, conj(Eq(LinExpr.of(weights), _lin(k)), *parts))
    return PresburgerFormula(free, body, tuple(defs))


# ------------------------------------------------------------------ evaluation


def _conjuncts(f: Formula):
    if isinstance(f, And):
        for a in f.args:
            yield from _conjuncts(a)
    else:
        yield f


def _atom_parts(f: Formula):
    """Yield ``(expr, is_equality)`` meaning ``expr = 0`` or ``expr <= 0``."""
    if isinstance(f, Eq):
        yield f.lhs - f.rhs, True
    elif isinstance(f, Le):
        yield f.lhs - f.rhs, False


def _derive_bounds(names, body: Formula, env: Mapping[str, int]) -> dict:
    """Upper bounds for the naturals ``names`` implied by the atoms of ``body``."""
    atoms = [a for c in _conjuncts(body) for a in _atom_parts(c)]
    bound: dict[str, int] = {}
    todo = set(names)
    changed = True
    while changed and todo:
        changed = False
        for expr, is_eq in atoms:
            forms = [expr, -expr] if is_eq else [expr]
            for e in forms:
                # e <= 0: sum c_v v <= -known; bound v with c_v > 0
                known, ok, low = e.const, True, 0
                pos = []
                for v, c in e.coeffs:
                    if v in env:
                        known += c * env[v]
                    elif v in names:
                        if c > 0:
                            pos.append((v, c))
                        elif v in bound:
                            low += c * bound[v]
                        else:
                            ok = False
                    else:
                        ok = False
                if not ok:
                    continue
                # other positive terms are >= 0, bounded negative ones >= c * ub
                for v, c in pos:
                    ub = max((-known - low) // c, -1)
                    if v not in bound or ub < bound[v]:
                        bound[v] = ub
                        changed = True
                        todo.discard(v)
    missing = [v for v in names if v not in bound]
    if missing:
        raise UnboundedQuantifierError(f"cannot bound quantified variable(s) {', '.join(missing)}")
    return bound


class _Evaluator:
    def __init__(self, pf: PresburgerFormula, env: dict):
        self.defs = dict(pf.defs)
        self.env = env
        self.cache: dict[str, bool] = {}

    def ref(self, name: str) -> bool:
        got = self.cache.get(name)
        if got is None:
            got = self.eval(self.defs[name], dict(self.env))
            self.cache[name] = got
        return got

    def eval(self, f: Formula, env: dict) -> bool:
        if isinstance(f, Bool):
            return f.value
        if isinstance(f, Eq):
            return f.lhs.value(env) == f.rhs.value(env)
        if isinstance(f, Le):
            return f.lhs.value(env) <= f.rhs.value(env)
        if isinstance(f, And):
            return all(self.eval(a, env) for a in f.args)
        if isinstance(f, Or):
            return any(self.eval(a, env) for a in f.args)
        if isinstance(f, Not):
            return not self.eval(f.arg, env)
        if isinstance(f, Implies):
            return (not self.eval(f.lhs, env)) or self.eval(f.rhs, env)
        if isinstance(f, Ref):
            return self.ref(f.name)
        if isinstance(f, Exists):
            return self._search(f.vars, f.body, env)
        if isinstance(f, Forall):
            # forall v: phi  ==  not exists v: not phi; bounds come from an
            # implication's antecedent
            if not isinstance(f.body, Implies):
                raise UnboundedQuantifierError("universal quantifier without a bounding antecedent")
            return not self._search(f.vars, conj(f.body.lhs, Not(f.body.rhs)), env)
        raise TypeError(f"unknown formula node {f!r}")

    def _search(self, names, body, env) -> bool:
        bounds = _derive_bounds(set(names), body, env)
        order = sorted(names, key=lambda v: bounds[v])
        checks = list(_conjuncts(body))
        scope = [_mentions(c, set(names)) for c in checks]

        def go(i, local):
            if i == len(order):
                # conjuncts without quantified variables were not checked yet
                return all(self.eval(c, local) for c, s in zip(checks, scope) if not s)
            v = order[i]
            assigned = set(order[: i + 1])
            ready = [c for c, s in zip(checks, scope) if v in s and s <= assigned]
            for val in range(bounds[v] + 1):
                local[v] = val
                if all(self.eval(c, local) for c in ready):
                    if go(i + 1, local):
                        return True
            local.pop(v, None)
            return False

        return go(0, dict(env))


def _mentions(f: Formula, names: set) -> set:
    """Quantified variables (from ``names``) occurring free in ``f``."""
    if isinstance(f, (Eq, Le)):
        return (f.lhs.variables() | f.rhs.variables()) & names
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= _mentions(a, names)
        return out
    if isinstance(f, Not):
        return _mentions(f.arg, names)
    if isinstance(f, Implies):
        return _mentions(f.lhs, names) | _mentions(f.rhs, names)
    if isinstance(f, (Exists, Forall)):
        return _mentions(f.body, names - set(f.vars))
    return set()


def eval_formula(f, assignment) -> bool:
    """Truth value of ``f`` at the Parikh vector ``assignment``.

    Quantified variables range over the naturals and must be bounded by the
    atoms of their body, otherwise :class:`UnboundedQuantifierError` is raised.
    """
    if isinstance(f, Formula):
        f = PresburgerFormula(tuple(sorted(_free_of(f))), f)
    v = assignment if isinstance(assignment, ParikhVector) else ParikhVector(assignment)
    env = {}
    for name in f.free:
        if not name.startswith("x_"):
            raise ValueError(f"free variable {name!r} is not a letter variable")
        env[name] = v.get(name[2:], 0)
    for a in v:
        if letter_var(a) not in env:
            raise ValueError(f"letter {a!r} is not a variable of the formula")
    return _Evaluator(f, env).eval(f.body, env)


def _free_of(f: Formula, bound=frozenset()) -> set:
    if isinstance(f, (Eq, Le)):
        return (f.lhs.variables() | f.rhs.variables()) - bound
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= _free_of(a, bound)
        return out
    if isinstance(f, Not):
        return _free_of(f.arg, bound)
    if isinstance(f, Implies):
        return _free_of(f.lhs, bound) | _free_of(f.rhs, bound)
    if isinstance(f, (Exists, Forall)):
        return _free_of(f.body, bound | set(f.vars))
    return set()


# ------------------------------------------------------------------ output

_SIMPLE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.$-]*$")


def _sym(name: str) -> str:
    return name if _SIMPLE.match(name) else "|" + name.replace("|", "").replace("\\", "") + "|"


def _smt_int(n: int) -> str:
    return str(n) if n >= 0 else f"(- {-n})"


def _smt_lin(e: LinExpr) -> str:
    parts = [(_sym(v) if c == 1 else f"(* {_smt_int(c)} {_sym(v)})") for v, c in e.coeffs]
    if e.const or not parts:
        parts.append(_smt_int(e.const))
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


def _smt(f: Formula, free: tuple) -> str:
    if isinstance(f, Bool):
        return "true" if f.value else "false"
    if isinstance(f, Eq):
        return f"(= {_smt_lin(f.lhs)} {_smt_lin(f.rhs)})"
    if isinstance(f, Le):
        return f"(<= {_smt_lin(f.lhs)} {_smt_lin(f.rhs)})"
    if isinstance(f, And):
        return f"(and {' '.join(_smt(a, free) for a in f.args)})"
    if isinstance(f, Or):
        return f"(or {' '.join(_smt(a, free) for a in f.args)})"
    if isinstance(f, Not):
        return f"(not {_smt(f.arg, free)})"
    if isinstance(f, Implies):
        return f"(=> {_smt(f.lhs, free)} {_smt(f.rhs, free)})"
    if isinstance(f, Ref):
        return f"({_sym(f.name)} {' '.join(_sym(v) for v in free)})" if free else _sym(f.name)
    if isinstance(f, (Exists, Forall)):
        decls = " ".join(f"({_sym(v)} Int)" for v in f.vars)
        nonneg = " ".join(f"(>= {_sym(v)} 0)" for v in f.vars)
        if isinstance(f, Exists):
            return f"(exists ({decls}) (and {nonneg} {_smt(f.body, free)}))"
        return f"(forall ({decls}) (=> (and {nonneg}) {_smt(f.body, free)}))"
    raise TypeError(f"unknown formula node {f!r}")


def to_smt2(pf: PresburgerFormula) -> str:
    """SMT-LIB 2 script (logic LIA) asserting the formula over ``x_a >= 0``."""
    lines = ["(set-logic LIA)"]
    for v in pf.free:
        lines.append(f"(declare-const {_sym(v)} Int)")
    for v in pf.free:
        lines.append(f"(assert (>= {_sym(v)} 0))")
    params = " ".join(f"({_sym(v)} Int)" for v in pf.free)
    for name, f in pf.defs:
        lines.append(f"(define-fun {_sym(name)} ({params}) Bool {_smt(f, pf.free)})")
    lines.append(f"(assert {_smt(pf.body, pf.free)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _node_json(f: Formula) -> dict:
    if isinstance(f, Bool):
        return {"op": "true" if f.value else "false"}
    if isinstance(f, Eq):
        return {"op": "eq", "lhs": f.lhs.to_json(), "rhs": f.rhs.to_json()}
    if isinstance(f, Le):
        return {"op": "le", "lhs": f.lhs.to_json(), "rhs": f.rhs.to_json()}
    if isinstance(f, (And, Or)):
        return {"op": "and" if isinstance(f, And) else "or", "args": [_node_json(a) for a in f.args]}
    if isinstance(f, Not):
        return {"op": "not", "arg": _node_json(f.arg)}
    if isinstance(f, Implies):
        return {"op": "implies", "lhs": _node_json(f.lhs), "rhs": _node_json(f.rhs)}
    if isinstance(f, (Exists, Forall)):
        return {"op": "exists" if isinstance(f, Exists) else "forall", "vars": list(f.vars), "body": _node_json(f.body)}
    if isinstance(f, Ref):
        return {"op": "ref", "name": f.name}
    raise TypeError(f"unknown formula node {f!r}")


def formula_to_json(pf: PresburgerFormula) -> dict:
    return {
        "free": list(pf.free),
        "defs": [{"name": n, "formula": _node_json(f)} for n, f in pf.defs],
        "formula": _node_json(pf.body),
    }


def _lin_from_json(obj) -> LinExpr:
    return LinExpr.of({k: int(v) for k, v in obj.get("coeffs", {}).items()}, int(obj.get("const", 0)))


def _node_from_json(obj) -> Formula:
    op = obj["op"]
    if op in ("true", "false"):
        return Bool(op == "true")
    if op in ("eq", "le"):
        cls = Eq if op == "eq" else Le
        return cls(_lin_from_json(obj["lhs"]), _lin_from_json(obj["rhs"]))
    if op in ("and", "or"):
        args = tuple(_node_from_json(a) for a in obj["args"])
        return And(args) if op == "and" else Or(args)
    if op == "not":
        return Not(_node_from_json(obj["arg"]))
    if op == "implies":
        return Implies(_node_from_json(obj["lhs"]), _node_from_json(obj["rhs"]))
    if op in ("exists", "forall"):
        cls = Exists if op == "exists" else Forall
        return cls(tuple(obj["vars"]), _node_from_json(obj["body"]))
    if op == "ref":
        return Ref(obj["name"])
    raise ValueError(f"unknown formula op {op!r}")


def formula_from_json(obj) -> PresburgerFormula:
    return PresburgerFormula(
        tuple(obj["free"]),
        _node_from_json(obj["formula"]),
        tuple((d["name"], _node_from_json(d["formula"])) for d in obj.get("defs", ())),
    )


# ------------------------------------------------------------------ display


def _show(f: Formula) -> str:
    if isinstance(f, Bool):
        return "⊤" if f.value else "⊥"
    if isinstance(f, Eq):
        return f"{f.lhs} = {f.rhs}"
    if isinstance(f, Le):
        return f"{f.lhs} ≤ {f.rhs}"
    if isinstance(f, And):
        return "(" + " ∧ ".join(_show(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(" + " ∨ ".join(_show(a) for a in f.args) + ")"
    if isinstance(f, Not):
        return f"¬{_show(f.arg)}"
    if isinstance(f, Implies):
        return f"({_show(f.lhs)} → {_show(f.rhs)})"
    if isinstance(f, Exists):
        return f"∃{','.join(f.vars)}. {_show(f.body)}"
    if isinstance(f, Forall):
        return f"∀{','.join(f.vars)}. {_show(f.body)}"
    if isinstance(f, Ref):
        return f.name
    raise TypeError(f)


__all__ = [
    "LinExpr",
    "Formula",
    "Bool",
    "Eq",
    "Le",
    "And",
    "Or",
    "Not",
    "Implies",
    "Exists",
    "Forall",
    "Ref",
    "TRUE",
    "FALSE",
    "eq",
    "le",
    "conj",
    "disj",
    "exists",
    "PresburgerFormula",
    "UnboundedQuantifierError",
    "letter_var",
    "linear_set_formula",
    "unfolding_depth",
    "semilinear_for",
    "level_set_formula",
    "eval_formula",
    "to_smt2",
    "formula_to_json",
    "formula_from_json",
]
