"""Rational expressions over commutative words and the level-wise solver.

Expressions are built from constants in N or infinity, monomials (Parikh
vectors), sums, products and Kleene stars.  Nodes are hash-consed, so two
structurally identical expressions built in one process are the same object
and shared subterms are stored once.  Smart constructors perform only sound
simplifications (units, zero, flattening, folding constants and monomials,
merging identical summands).

``camb_expr`` computes, level by level, an expression for every variable of
the dimension unfolding: level d is a linear system in the ``X@=d``
unknowns, solved through the star of its coefficient matrix.
"""
from __future__ import annotations

import threading
import weakref
from collections.abc import Mapping
from dataclasses import dataclass

from .grammar import Grammar, ParikhVector, ZERO_VECTOR
from .semiring import INF, Semiring, format_number, is_inf, parse_number
from .unfold import AT_MOST, EXACT, at_most, exact, level_rule_shapes, unfold

CONST, MONO, SUM, PROD, STAR = "const", "mono", "sum", "prod", "star"


class RationalExpr:
    __slots__ = ("tag", "payload", "children", "__weakref__")

    def __add__(self, other):
        return add(self, _coerce(other))

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, _coerce(other))

    __rmul__ = __mul__

    def star(self):
        return star(self)

    def __repr__(self):
        return f"RationalExpr({to_string(self)})"

    def __str__(self):
        return to_string(self)


_table: "weakref.WeakValueDictionary[tuple, RationalExpr]" = weakref.WeakValueDictionary()
_lock = threading.Lock()


def _make(tag: str, payload, children: tuple = ()) -> RationalExpr:
    key = (tag, payload, children)
    with _lock:
        node = _table.get(key)
        if node is None:
            node = RationalExpr()
            node.tag, node.payload, node.children = tag, payload, children
            _table[key] = node
        return node


def _coerce(x) -> RationalExpr:
    if isinstance(x, RationalExpr):
        return x
    if isinstance(x, ParikhVector):
        return mono(x)
    return const(x)


def const(c) -> RationalExpr:
    if is_inf(c):
        return _make(CONST, INF)
    if not isinstance(c, int) or c < 0:
        raise ValueError(f"constants are natural numbers or infinity, got {c!r}")
    return _make(CONST, int(c))


ZERO = const(0)
ONE = const(1)
_KEEP = (ZERO, ONE)  # the interning table is weak; keep the units alive


def mono(v) -> RationalExpr:
    v = v if isinstance(v, ParikhVector) else ParikhVector(v)
    if v.is_zero():
        return ONE
    return _make(MONO, v)


def letter(a: str) -> RationalExpr:
    return mono(ParikhVector({a: 1}))


def _cmul(a, b):
    if a == 0 or b == 0:
        return 0
    if is_inf(a) or is_inf(b):
        return INF
    return a * b


def _split_coeff(e: RationalExpr):
    if e.tag == CONST:
        return e.payload, ONE
    if e.tag == PROD and e.children[0].tag == CONST:
        rest = e.children[1:]
        return e.children[0].payload, rest[0] if len(rest) == 1 else _make(PROD, None, rest)
    return 1, e


def add(*xs: RationalExpr) -> RationalExpr:
    flat: list[RationalExpr] = []
    stack = list(reversed(xs))
    while stack:
        x = stack.pop()
        if x.tag == SUM:
            stack.extend(reversed(x.children))
        elif x is not ZERO:
            flat.append(x)
    coeffs: dict[int, list] = {}
    order: list[RationalExpr] = []
    for x in flat:
        c, rest = _split_coeff(x)
        if id(rest) in coeffs:
            entry = coeffs[id(rest)]
            entry[0] = INF if is_inf(entry[0]) or is_inf(c) else entry[0] + c
        else:
            coeffs[id(rest)] = [c, rest]
            order.append(rest)
    terms = []
    for rest in order:
        c = coeffs[id(rest)][0]
        terms.append(mul(const(c), rest))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return _make(SUM, None, tuple(terms))


def mul(*xs: RationalExpr) -> RationalExpr:
    c, v, others = 1, ZERO_VECTOR, []
    stack = list(reversed(xs))
    while stack:
        x = stack.pop()
        if x.tag == PROD:
            stack.extend(reversed(x.children))
        elif x.tag == CONST:
            if x.payload == 0:
                return ZERO
            c = _cmul(c, x.payload)
        elif x.tag == MONO:
            v = v + x.payload
        else:
            others.append(x)
    factors = []
    if c != 1:
        factors.append(const(c))
    if not v.is_zero():
        factors.append(mono(v))
    factors.extend(others)
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return _make(PROD, None, tuple(factors))


def star(x: RationalExpr) -> RationalExpr:
    if x is ZERO:
        return ONE
    if x.tag == CONST:
        return const(INF)
    return _make(STAR, None, (x,))


def power(x: RationalExpr, n: int) -> RationalExpr:
    return mul(*([x] * n)) if n else ONE


# ------------------------------------------------------------------ traversal


def _postorder(e: RationalExpr):
    """Distinct nodes of the DAG, children before parents."""
    seen, out, stack = set(), [], [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        stack.extend((c, False) for c in reversed(node.children) if id(c) not in seen)
    return out


def size(e: RationalExpr) -> int:
    """Number of distinct nodes."""
    return len(_postorder(e))


def star_count(e: RationalExpr) -> int:
    return sum(1 for n in _postorder(e) if n.tag == STAR)


def star_height(e: RationalExpr) -> int:
    h: dict[int, int] = {}
    for n in _postorder(e):
        inner = max((h[id(c)] for c in n.children), default=0)
        h[id(n)] = inner + 1 if n.tag == STAR else inner
    return h[id(e)]


def letters(e: RationalExpr) -> set[str]:
    out = set()
    for n in _postorder(e):
        if n.tag == MONO:
            out.update(n.payload)
    return out


def evaluate(e: RationalExpr, valuation: Mapping[str, object], S: Semiring):
    """Homomorphic image of ``e`` in ``S`` with letters mapped by ``valuation``."""
    memo: dict[int, object] = {}
    for n in _postorder(e):
        if n.tag == CONST:
            val = S.from_natural(n.payload)
        elif n.tag == MONO:
            val = S.one()
            for a, k in n.payload.items():
                if a not in valuation:
                    raise KeyError(f"valuation misses letter {a!r}")
                val = S.mul(val, S.power(valuation[a], k))
        else:
            vals = [memo[id(c)] for c in n.children]
            if n.tag == SUM:
                val = S.sum(vals)
            elif n.tag == PROD:
                val = S.prod(vals)
            else:
                val = S.star(vals[0])
        memo[id(n)] = val
    return memo[id(e)]


def to_string(e: RationalExpr) -> str:
    memo: dict[int, str] = {}
    for n in _postorder(e):
        if n.tag == CONST:
            s = "∞" if is_inf(n.payload) else str(n.payload)
        elif n.tag == MONO:
            s = str(n.payload)
        elif n.tag == SUM:
            s = " + ".join(memo[id(c)] for c in n.children)
        elif n.tag == PROD:
            s = "·".join(f"({memo[id(c)]})" if c.tag == SUM else memo[id(c)] for c in n.children)
        else:
            (c,) = n.children
            inner = memo[id(c)]
            s = f"{inner}*" if c.tag == MONO and len(c.payload) == 1 and c.payload.norm() == 1 else f"({inner})*"
        memo[id(n)] = s
    return memo[id(e)]


# ----------------------------------------------------------------------- JSON


def _node_json(n: RationalExpr, ref) -> dict:
    if n.tag == CONST:
        return {"const": format_number(n.payload)}
    if n.tag == MONO:
        return {"mono": n.payload.to_json()}
    if n.tag == STAR:
        return {"star": ref(n.children[0])}
    return {n.tag: [ref(c) for c in n.children]}


def expr_to_json(e: RationalExpr) -> dict:
    """``{"defs": [...], "root": node}``; nodes used more than once (other than
    constants and monomials) are stored once in ``defs`` and referenced as
    ``{"ref": i}``."""
    order = _postorder(e)
    uses: dict[int, int] = {}
    for n in order:
        for c in n.children:
            uses[id(c)] = uses.get(id(c), 0) + 1
    defs, index = [], {}

    def ref(c):
        if id(c) in index:
            return {"ref": index[id(c)]}
        return built[id(c)]

    built: dict[int, dict] = {}
    for n in order:
        node = _node_json(n, ref)
        if uses.get(id(n), 0) > 1 and n.tag in (SUM, PROD, STAR) and n is not e:
            index[id(n)] = len(defs)
            defs.append(node)
        else:
            built[id(n)] = node
    return {"defs": defs, "root": built[id(e)]}


def expr_from_json(obj) -> RationalExpr:
    if isinstance(obj, Mapping) and "root" in obj:
        defs: list[RationalExpr] = []
        for d in obj.get("defs", []):
            defs.append(_node_from_json(d, defs))
        return _node_from_json(obj["root"], defs)
    return _node_from_json(obj, [])


def _node_from_json(obj, defs) -> RationalExpr:
    if not isinstance(obj, Mapping) or len(obj) != 1:
        raise ValueError(f"malformed expression node: {obj!r}")
    ((tag, body),) = obj.items()
    if tag == "ref":
        return defs[body]
    if tag == CONST:
        return const(parse_number(body))
    if tag == MONO:
        return mono(ParikhVector(body))
    if tag == "letter":
        return letter(body)
    if tag == STAR:
        return star(_node_from_json(body, defs))
    if tag in (SUM, PROD):
        kids = [_node_from_json(c, defs) for c in body]
        return add(*kids) if tag == SUM else mul(*kids)
    raise ValueError(f"unknown expression node {tag!r}")


# ------------------------------------------------------------- linear systems


@dataclass
class LinearSystem:
    """``x = A x + b`` over rational expressions."""

    variables: list
    matrix: list[list[RationalExpr]]
    vector: list[RationalExpr]


def _mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    return [[add(*(mul(a[i][t], b[t][j]) for t in range(m))) for j in range(p)] for i in range(n)]


def _mat_add(a, b):
    return [[add(x, y) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matrix_star(m: list[list[RationalExpr]]) -> list[list[RationalExpr]]:
    """Star of a square matrix by the 2x2 block identity (first row/column
    against the rest)."""
    n = len(m)
    if n == 0:
        return []
    if n == 1:
        return [[star(m[0][0])]]
    a = [[m[0][0]]]
    b = [m[0][1:]]
    c = [[row[0]] for row in m[1:]]
    d = [row[1:] for row in m[1:]]
    ds = matrix_star(d)
    dsc = _mat_mul(ds, c)
    bds = _mat_mul(b, ds)
    s = [[star(add(a[0][0], _mat_mul(b, dsc)[0][0]))]]
    top_right = _mat_mul(s, bds)
    bottom_left = _mat_mul(dsc, s)
    bottom_right = _mat_add(ds, _mat_mul(bottom_left, bds))
    out = [[s[0][0]] + top_right[0]]
    for i in range(n - 1):
        out.append([bottom_left[i][0]] + bottom_right[i])
    return out


def solve_linear(system: LinearSystem) -> dict:
    """Least solution ``A* b`` of ``x = A x + b``."""
    if not system.variables:
        return {}
    st = matrix_star(system.matrix)
    sol = _mat_mul(st, [[b] for b in system.vector])
    return {x: sol[i][0] for i, x in enumerate(system.variables)}


# ------------------------------------------------------ unfolding expressions


def camb_expr(g: Grammar, k: int) -> dict[str, RationalExpr]:
    """Rational expression for every variable ``X@=d`` / ``X@<=d`` (d <= k) of
    the unfolding; the value of ``X@<=k`` is the commutative ambiguity of X
    restricted to trees of dimension at most k."""
    ug = unfold(g, k, prune=True)
    present = set(ug.variables)
    by_lhs: dict[str, list] = {}
    for p in ug.productions:
        by_lhs.setdefault(p.lhs, []).append(p)
    out: dict[str, RationalExpr] = {}
    for d in range(k + 1):
        unknowns = [exact(x, d) for x in g.variables if exact(x, d) in present]
        pos = {x: i for i, x in enumerate(unknowns)}
        matrix = [[ZERO] * len(unknowns) for _ in unknowns]
        vector = [ZERO] * len(unknowns)
        for x in unknowns:
            i = pos[x]
            row_terms: dict[int, list] = {}
            const_terms = []
            for p in by_lhs.get(x, ()):
                factors = [mono(p.terminals)]
                target = None
                for y in p.variables:
                    if y in pos:
                        target = pos[y]
                    else:
                        factors.append(out[y])
                term = mul(*factors)
                if target is None:
                    const_terms.append(term)
                else:
                    row_terms.setdefault(target, []).append(term)
            for j, ts in row_terms.items():
                matrix[i][j] = add(*ts)
            vector[i] = add(*const_terms)
        out.update(solve_linear(LinearSystem(unknowns, matrix, vector)))
        for x in g.variables:
            name = at_most(x, d)
            if name in present:
                out[name] = add(*(out[p.variables[0]] for p in by_lhs.get(name, ())))
    for x in g.variables:
        for d in range(k + 1):
            out.setdefault(exact(x, d), ZERO)
            out.setdefault(at_most(x, d), ZERO)
    return out


def camb_at_most(g: Grammar, x: str, k: int) -> RationalExpr:
    return camb_expr(g, k)[at_most(x, k)]


# ---------------------------------------------------------- numeric solving


def _terminal_value(p, valuation, S):
    val = S.one()
    for a, n in p.terminals.items():
        val = S.mul(val, S.power(valuation[a], n))
    return val


def fixpoint_solve(g: Grammar, valuation, S: Semiring, rounds: int) -> dict:
    """``rounds`` steps of Kleene iteration from zero on the grammar's system."""
    tv = [_terminal_value(p, valuation, S) for p in g.productions]
    x = {v: S.zero() for v in g.variables}
    for _ in range(rounds):
        x = _apply_system(g, tv, x, S)
    return x


def _apply_system(g, tv, x, S):
    nxt = {v: S.zero() for v in g.variables}
    for p, t in zip(g.productions, tv):
        val = t
        for y in p.variables:
            val = S.mul(val, x[y])
        nxt[p.lhs] = S.add(nxt[p.lhs], val)
    return nxt


def fixpoint_limit(g: Grammar, valuation, S: Semiring, max_rounds: int = 100_000) -> dict:
    """Kleene iteration until the values stop changing."""
    tv = [_terminal_value(p, valuation, S) for p in g.productions]
    x = {v: S.zero() for v in g.variables}
    for _ in range(max_rounds):
        nxt = _apply_system(g, tv, x, S)
        if all(S.eq(nxt[v], x[v]) for v in g.variables):
            return x
        x = nxt
    raise RuntimeError(f"Kleene iteration did not stabilise within {max_rounds} rounds")


def _solve_numeric(rows: dict, b: dict, S: Semiring, kleene: bool) -> dict:
    """Least solution of ``x = A x + b`` with sparse ``rows[x][y] = A_xy``."""
    xs = list(b)
    if kleene:
        x = {v: S.zero() for v in xs}
        while True:
            nxt = {}
            for v in xs:
                acc = b[v]
                for y, c in rows[v].items():
                    acc = S.add(acc, S.mul(c, x[y]))
                nxt[v] = acc
            if all(S.eq(nxt[v], x[v]) for v in xs):
                return x
            x = nxt
    rows = {v: dict(r) for v, r in rows.items()}
    b = dict(b)
    users: dict = {v: set() for v in xs}
    for v, r in rows.items():
        for y in r:
            users[y].add(v)
    for p in xs:
        s = S.star(rows[p].pop(p, S.zero()))
        users[p].discard(p)
        rows[p] = {q: S.mul(s, c) for q, c in rows[p].items()}
        b[p] = S.mul(s, b[p])
        for r in list(users[p]):
            c = rows[r].pop(p, None)
            if c is None:
                continue
            for q, cq in rows[p].items():
                add_c = S.mul(c, cq)
                rows[r][q] = S.add(rows[r][q], add_c) if q in rows[r] else add_c
                users[q].add(r)
            b[r] = S.add(b[r], S.mul(c, b[p]))
        users[p] = set()
    return b


@dataclass
class LevelValues:
    """Values of ``X@<=level`` for every base variable X."""

    values: dict
    level: int
    converged: bool


def unfolding_values(
    g: Grammar, valuation, S: Semiring, k: int, *, stop_at_fixpoint: bool = False
) -> LevelValues:
    """Numeric counterpart of :func:`camb_expr`: the image in ``S`` of every
    ``X@<=k``, computed level by level.

    With ``stop_at_fixpoint`` the computation ends at the first level whose
    values already solve the grammar's own equation system; those values are
    then the least solution, so all later levels agree with them.
    """
    zero = S.zero()

    def nz(v):
        return not S.eq(v, zero)

    tv = [_terminal_value(p, valuation, S) for p in g.productions]
    kleene = S.collapse is not None
    exact_prev: dict = {x: zero for x in g.variables}
    at_most_hist: list[dict] = []
    for d in range(k + 1):
        rows = {x: {} for x in g.variables}
        b = {x: zero for x in g.variables}
        lower = at_most_hist[d - 1] if d >= 1 else None
        lower2 = at_most_hist[d - 2] if d >= 2 else None
        for p, t in zip(g.productions, tv):
            if not nz(t):
                continue
            for _key, shape in level_rule_shapes(p.arity, d):
                coeff, target = t, None
                for y, (tag, lv) in zip(p.variables, shape):
                    if tag == EXACT and lv == d:
                        target = y
                        continue
                    if tag == EXACT:
                        val = exact_prev[y]
                    else:
                        val = lower[y] if lv == d - 1 else lower2[y]
                    if not nz(val):
                        coeff = None
                        break
                    coeff = S.mul(coeff, val)
                if coeff is None:
                    continue
                if target is None:
                    b[p.lhs] = S.add(b[p.lhs], coeff)
                else:
                    r = rows[p.lhs]
                    r[target] = S.add(r[target], coeff) if target in r else coeff
        exact_now = _solve_numeric(rows, b, S, kleene)
        prev = at_most_hist[-1] if at_most_hist else {x: zero for x in g.variables}
        now = {x: S.add(prev[x], exact_now[x]) for x in g.variables}
        at_most_hist.append(now)
        exact_prev = exact_now
        if stop_at_fixpoint:
            step = _apply_system(g, tv, now, S)
            if all(S.eq(step[x], now[x]) for x in g.variables):
                return LevelValues(now, d, True)
    return LevelValues(at_most_hist[-1], k, False)
