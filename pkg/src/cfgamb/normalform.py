"""Weighted semilinear normal forms over N_k<<N^Sigma>>.

Modulo ``k = k + 1`` every rational series is a finite sum of weighted
linear sets ``sum_i gamma_i * supp(w_i0 w_i1* ... w_il*)``.  The computation
has two stages:

1. ``star_height_reduce`` rewrites an expression into a sum of linear
   terms ``gamma * w0 * w1* ... wl*`` using the identities

   - (I1) ``k x = k supp(x)``
   - (I2) ``(g x)* = (g x)^{<c} + k x^c x*`` with c least such that g^c >= k
   - (I3) ``(x*)* = k x*``
   - (I4) ``(x+y)* = (x+y)^{<k} + x^k x* + y^k y* + k x y (x+y)^{max(k-2,0)} x* y*``
   - (I5) ``(x y*)* = 1 + x y* + x^2 x* + x^2 y sum_{m,j<k-2} C(2+m+j,1+j) x^m y^j
     + k x^2 y x^{max(k-2,0)} x* y* + k x^2 y x* y^{max(k-2,0)} y*``

2. ``to_semilinear`` splits every term whose periods are linearly
   dependent along an integer kernel vector until each term of weight
   below k has independent periods; such a term equals its weight times
   the indicator of its support.

The identities are written once against a small algebra interface
(``add``, ``mul``, ``power``, ``from_natural``...) so they can be checked
directly on truncated power series.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

from .grammar import ParikhVector, ZERO_VECTOR
from .rational import CONST, MONO, PROD, STAR, SUM, RationalExpr, _postorder
from .semiring import is_inf

# ------------------------------------------------------------ the identities


def below(A, x, n: int):
    """x^{<n} = 1 + x + ... + x^(n-1)."""
    out, p = A.zero(), A.one()
    for _ in range(n):
        out = A.add(out, p)
        p = A.mul(p, x)
    return out


def i1_rhs(A, x, k: int):
    return A.mul(A.from_natural(k), A.support(x))


def i2_exponent(gamma: int, k: int) -> int:
    """Least c with gamma^c >= k (that is, ceil(log_gamma k))."""
    if gamma < 2 and k > 1:
        raise ValueError(f"no power of {gamma} reaches {k}")
    c = 0
    while gamma**c < k:
        c += 1
    return c


def i2_rhs(A, x, gamma: int, x_star, k: int):
    c = i2_exponent(gamma, k)
    gx = A.mul(A.from_natural(gamma), x)
    return A.add(below(A, gx, c), A.prod([A.from_natural(k), A.power(x, c), x_star]))


def i3_rhs(A, x_star, k: int):
    return A.mul(A.from_natural(k), x_star)


def i4_rhs(A, x, y, x_star, y_star, k: int):
    s = A.add(x, y)
    return A.sum(
        [
            below(A, s, k),
            A.mul(A.power(x, k), x_star),
            A.mul(A.power(y, k), y_star),
            A.prod([A.from_natural(k), x, y, A.power(s, max(k - 2, 0)), x_star, y_star]),
        ]
    )


def _i5_head(A, x, y, x_star, y_star, k: int) -> list:
    x2 = A.power(x, 2)
    parts = [A.one(), A.mul(x, y_star), A.mul(x2, x_star)]
    inner = [
        A.prod([A.from_natural(comb(2 + m + j, 1 + j)), A.power(x, m), A.power(y, j)])
        for m in range(max(k - 2, 0))
        for j in range(max(k - 2, 0))
    ]
    if inner:
        parts.append(A.prod([x2, y, A.sum(inner)]))
    return parts


def i5_rhs(A, x, y, x_star, y_star, k: int):
    """Right-hand side of (I5) with the two k-weighted tails kept apart."""
    kk, x2y, e = A.from_natural(k), A.mul(A.power(x, 2), y), max(k - 2, 0)
    parts = _i5_head(A, x, y, x_star, y_star, k)
    parts.append(A.prod([kk, x2y, A.power(x, e), x_star, y_star]))
    parts.append(A.prod([kk, x2y, x_star, A.power(y, e), y_star]))
    return A.sum(parts)


def i5_rhs_merged(A, x, y, x_star, y_star, k: int):
    """(I5) with the tails merged: ``k x^2 y (x^e + y^e) x* y*``."""
    e = max(k - 2, 0)
    parts = _i5_head(A, x, y, x_star, y_star, k)
    tail = A.add(A.power(x, e), A.power(y, e))
    parts.append(A.prod([A.from_natural(k), A.power(x, 2), y, tail, x_star, y_star]))
    return A.sum(parts)


# ------------------------------------------------------------ linear terms


@dataclass(frozen=True)
class LinearTerm:
    """``weight * offset * periods[0]* ... periods[-1]*``; with ``support_flag``
    the term denotes ``weight`` times the indicator of its support."""

    weight: int
    offset: ParikhVector
    periods: tuple[ParikhVector, ...] = ()
    support_flag: bool = False

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "offset": self.offset.to_json(),
            "periods": [p.to_json() for p in self.periods],
        }

    @classmethod
    def from_json(cls, obj, support_flag=True) -> "LinearTerm":
        return cls(
            int(obj["weight"]),
            ParikhVector(obj["offset"]),
            tuple(ParikhVector(p) for p in obj["periods"]),
            support_flag,
        )

    def __str__(self):
        body = str(self.offset) + "".join(f"({p})*" for p in self.periods)
        return f"{self.weight}·supp({body})" if self.support_flag else f"{self.weight}·{body}"


def _pkey(v: ParikhVector):
    return v.sort_key()


def _term_key(offset: ParikhVector, periods: tuple) -> tuple:
    return (_pkey(offset), tuple(_pkey(p) for p in periods))


@lru_cache(maxsize=1 << 16)
def in_span(d: ParikhVector, periods: tuple) -> bool:
    """Is ``d`` a nonnegative integer combination of ``periods``?"""
    if d.is_zero():
        return True
    usable = tuple(p for p in periods if not p.is_zero() and p <= d)
    if not usable:
        return False
    letters = sorted(d)
    target = tuple(d[a] for a in letters)
    dense = [tuple(p.get(a, 0) for a in letters) for p in usable]
    seen = {(0,) * len(letters)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for v in frontier:
            for p in dense:
                w = tuple(x + y for x, y in zip(v, p))
                if w == target:
                    return True
                if w not in seen and all(x <= t for x, t in zip(w, target)):
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return False


def linear_set_contains(offset: ParikhVector, periods, v: ParikhVector) -> bool:
    if not offset <= v:
        return False
    return in_span(v - offset, tuple(periods))


def _reduce_periods(periods) -> tuple:
    """Drop duplicates and periods generated by the others (support level)."""
    ps = sorted(set(periods), key=_pkey)
    out = list(ps)
    for p in sorted(ps, key=lambda q: (-q.norm(), _pkey(q))):
        rest = tuple(q for q in out if q != p)
        if rest and in_span(p, rest):
            out = list(rest)
    return tuple(sorted(out, key=_pkey))


def _subsumes(big: tuple, small: tuple) -> bool:
    """Support of the linear set ``small`` inside that of ``big`` (sufficient test)."""
    (o1, p1), (o2, p2) = big, small
    if not o1 <= o2:
        return False
    return in_span(o2 - o1, p1) and all(in_span(p, p1) for p in p2)


@lru_cache(maxsize=1 << 16)
def _periods_cover(big: tuple, small: tuple) -> bool:
    return all(in_span(p, big) for p in small)


def _merge_linear_sets(keys: set) -> set:
    """Merge ``(o, P)`` with ``(o + p, P + {p})`` into ``(o, P + {p})`` until stable."""
    keys = set(keys)
    changed = True
    while changed:
        changed = False
        for o, ps in sorted(keys, key=lambda kp: _term_key(*kp)):
            if (o, ps) not in keys:
                continue
            for i, p in enumerate(ps):
                if not p <= o:
                    continue
                rest = ps[:i] + ps[i + 1:]
                low = (o - p, rest)
                if low in keys:
                    keys.discard(low)
                    keys.discard((o, ps))
                    keys.add((o - p, ps))
                    changed = True
                    break
    return keys


# ------------------------------------------------------------ polynomial algebra


class TermAlgebra:
    """Sums of linear terms modulo ``k = k + 1``.

    Elements are dicts ``(offset, periods) -> weight`` with weights in 1..k.
    A term of weight k only matters through its support, so its periods are
    reduced; everything else is kept verbatim.
    """

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k

    def term(self, weight, offset=ZERO_VECTOR, periods=()) -> dict:
        out: dict = {}
        self._put(out, weight, offset, tuple(periods))
        return out

    def _put(self, acc: dict, weight, offset, periods):
        k = self.k
        if is_inf(weight) or weight > k:
            weight = k
        if weight == 0:
            return
        if any(p.is_zero() for p in periods):
            weight = k
            periods = tuple(p for p in periods if not p.is_zero())
        if weight == k:
            periods = _reduce_periods(periods)
        else:
            periods = tuple(sorted(periods, key=_pkey))
        key = (offset, periods)
        total = min(acc.get(key, 0) + weight, k)
        if total == k and weight < k:
            reduced = (offset, _reduce_periods(periods))
            if reduced != key:
                acc.pop(key, None)
                key = reduced
        acc[key] = total

    def zero(self):
        return {}

    def one(self):
        return self.term(1)

    def from_natural(self, n):
        return self.term(n)

    def add(self, a: dict, b: dict) -> dict:
        out = dict(a)
        for (o, ps), w in b.items():
            self._put(out, w, o, ps)
        return out

    def mul(self, a: dict, b: dict) -> dict:
        out: dict = {}
        for (o1, p1), w1 in a.items():
            for (o2, p2), w2 in b.items():
                self._put(out, w1 * w2, o1 + o2, p1 + p2)
        return out

    def sum(self, xs):
        out: dict = {}
        for x in xs:
            for (o, ps), w in x.items():
                self._put(out, w, o, ps)
        return out

    def prod(self, xs):
        out = self.one()
        for x in xs:
            out = self.mul(out, x)
            if not out:
                break
        return out

    def power(self, a, n: int):
        out = self.one()
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def support(self, a):
        return {key: 1 for key in a}

    def compact(self, a: dict) -> dict:
        """Drop terms whose support lies inside the support of a weight-k term.

        Weight-k terms ``(o, P)`` and ``(o + p, P + {p})`` are first merged
        into ``(o, P + {p})``, which has the same support as their union.
        """
        k = self.k
        full = {key for key, w in a.items() if w == k}
        if not full:
            return a
        full = _merge_linear_sets(full)
        by_periods: dict[tuple, list] = {}
        for o, ps in sorted(full, key=lambda kp: (-len(kp[1]), _term_key(*kp))):
            by_periods.setdefault(ps, []).append(o)
        kept: dict[tuple, list] = {}

        def covered(o2, p2) -> bool:
            for p1, offs in kept.items():
                if not _periods_cover(p1, p2):
                    continue
                for o1 in offs:
                    if o1 <= o2 and in_span(o2 - o1, p1):
                        return True
            return False

        for ps, offs in sorted(by_periods.items(), key=lambda kv: (-len(kv[0]), _term_key(ZERO_VECTOR, kv[0]))):
            for o in offs:
                if not covered(o, ps):
                    kept.setdefault(ps, []).append(o)
        out = {(o, ps): k for ps, offs in kept.items() for o in offs}
        for key, w in a.items():
            if w < k and not covered(*key):
                out[key] = w
        return out

    def canonical(self, a: dict) -> list:
        return sorted(a.items(), key=lambda kv: (_term_key(*kv[0]), kv[1]))


# ------------------------------------------------------------ star elimination


@dataclass
class Trace:
    """Rewrite log: ``(rule, depth, detail)`` entries."""

    steps: list = field(default_factory=list)

    def add(self, rule: str, depth: int, detail: str):
        self.steps.append((rule, depth, detail))

    @property
    def max_depth(self) -> int:
        return max((d for _, d, _ in self.steps), default=0)

    def to_json(self) -> list:
        return [{"rule": r, "depth": d, "detail": s} for r, d, s in self.steps]


def _fmt_poly(A: TermAlgebra, p: dict) -> str:
    if not p:
        return "0"
    parts = []
    for (o, ps), w in A.canonical(p):
        parts.append(f"{w}·{o}" + "".join(f"({q})*" for q in ps))
    return " + ".join(parts)


class _Reducer:
    def __init__(self, k: int, trace: Trace | None):
        self.A = TermAlgebra(k)
        self.k = k
        self.trace = trace
        self.depth = 0
        self._star_memo: dict = {}

    def log(self, rule, detail):
        if self.trace is not None:
            self.trace.add(rule, self.depth, detail)

    def star(self, p: dict) -> dict:
        key = tuple(self.A.canonical(p))
        got = self._star_memo.get(key)
        if got is None:
            got = self.A.compact(self._star(p))
            self._star_memo[key] = got
        return got

    def _star(self, p: dict) -> dict:
        A, k = self.A, self.k
        items = A.canonical(p)
        if not items:
            return A.one()
        full = [kv for kv in items if kv[1] == k]
        if full and len(items) > 1:
            # k y is absorbing up to support, so (x + k y)* = x* (k y)*, and
            # a sum of k-weighted terms factors the same way
            self.log("I4", f"({_fmt_poly(A, p)})* split off {len(full)} k-weighted terms")
            rest = dict(kv for kv in items if kv[1] < k)
            out = self.star(rest)
            for kv in full:
                out = A.compact(A.mul(out, self.star(dict([kv]))))
            return out
        if len(items) == 1:
            (offset, periods), w = items[0]
            return self._star_term(w, offset, periods)
        x = dict(items[:-1])
        y = dict(items[-1:])
        self.log("I4", f"({_fmt_poly(A, x)} + {_fmt_poly(A, y)})*")
        return i4_rhs(A, x, y, self.star(x), self.star(y), k)

    def _star_term(self, w, offset, periods) -> dict:
        A, k = self.A, self.k
        if w == k and not offset.is_zero():
            # (k x)* = 1 + k x x*, and supp(x x*) = supp(w0 w0* w1* ... wl*)
            self.log("I1", f"({w}·{offset}{''.join(f'({q})*' for q in periods)})*")
            return A.add(A.one(), A.term(k, offset, (offset,) + tuple(periods)))
        if offset.is_zero():
            # a constant w >= 1, or w * (a product of stars) which contains 1:
            # every power has a nonzero coefficient on the support, so the
            # star is k times that support (I3 and its product form)
            self.log("I3", f"({w}·{''.join(f'({q})*' for q in periods) or '1'})*")
            return A.term(k, ZERO_VECTOR, periods)
        if not periods:
            if w == 1:
                return A.term(1, ZERO_VECTOR, (offset,))
            self.log("I2", f"({w}·{offset})*")
            x = A.term(1, offset)
            return i2_rhs(A, x, w, A.term(1, ZERO_VECTOR, (offset,)), k)
        # (I5) with y = first period and x the rest of the term
        y_vec, rest = periods[0], periods[1:]
        x = A.term(w, offset, rest)
        y = A.term(1, y_vec)
        self.log("I5", f"({w}·{offset}{''.join(f'({q})*' for q in rest)}·({y_vec})*)*")
        return i5_rhs(A, x, y, self.star(x), A.term(1, ZERO_VECTOR, (y_vec,)), k)


def _reduce_expr(e: RationalExpr, k: int, trace: Trace | None) -> tuple[TermAlgebra, dict]:
    red = _Reducer(k, trace)
    A = red.A
    memo: dict[int, dict] = {}
    depth_of: dict[int, int] = {}
    for n in _postorder(e):
        depth_of[id(n)] = max((depth_of[id(c)] for c in n.children), default=0) + (n.tag == STAR)
    for n in _postorder(e):
        if n.tag == CONST:
            val = A.term(n.payload)
        elif n.tag == MONO:
            val = A.term(1, n.payload)
        elif n.tag == SUM:
            val = A.sum(memo[id(c)] for c in n.children)
        elif n.tag == PROD:
            val = A.compact(A.prod(memo[id(c)] for c in n.children))
        else:
            red.depth = depth_of[id(n)]
            val = red.star(memo[id(n.children[0])])
        memo[id(n)] = val
    return A, memo[id(e)]


def star_height_reduce(e: RationalExpr, k: int, trace: Trace | None = None) -> list[LinearTerm]:
    """Terms ``gamma w0 w1* ... wl*`` whose sum equals ``e`` modulo k = k+1."""
    A, p = _reduce_expr(e, k, trace)
    return [LinearTerm(w, o, ps, False) for (o, ps), w in A.canonical(p)]


# ------------------------------------------------------------ kernel vectors


def kernel_vector(rows) -> tuple[int, ...] | None:
    """Nonzero integer n with ``sum_i n_i * rows[i] = 0``, or None if the rows
    are linearly independent.

    Fraction-free elimination on the transposed matrix; the free variable is
    the first non-pivot column, the result is scaled to coprime entries with
    its first nonzero entry positive.
    """
    rows = [r if isinstance(r, ParikhVector) else ParikhVector(r) for r in rows]
    if not rows:
        return None
    if any(r.is_zero() for r in rows):
        i = next(i for i, r in enumerate(rows) if r.is_zero())
        return tuple(1 if j == i else 0 for j in range(len(rows)))
    letters = sorted(set().union(*rows))
    m = [[r.get(a, 0) for r in rows] for a in letters]  # |letters| x l
    ncols = len(rows)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f, g = m[r][c], m[i][c]
                m[i] = [f * a - g * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = next((c for c in range(ncols) if c not in pivots), None)
    if free is None:
        return None
    # reduced form: m[i][pivots[i]] * x_p + m[i][free] * x_free = 0 (others free -> 0)
    denom = 1
    for i, p in enumerate(pivots):
        denom = denom * m[i][p] // math.gcd(denom, m[i][p])
    n = [0] * ncols
    n[free] = denom
    for i, p in enumerate(pivots):
        n[p] = -m[i][free] * denom // m[i][p]
    g = 0
    for x in n:
        g = math.gcd(g, x)
    n = [x // g for x in n]
    first = next(x for x in n if x)
    if first < 0:
        n = [-x for x in n]
    return tuple(n)


# ------------------------------------------------------------ semilinear sets


@dataclass
class WeightedSemilinearSet:
    k: int
    terms: list

    def coefficient(self, v) -> int:
        return semilinear_coefficient(self, v)

    def to_json(self) -> dict:
        return {"k": self.k, "terms": [t.to_json() for t in self.terms]}

    @classmethod
    def from_json(cls, obj) -> "WeightedSemilinearSet":
        return cls(int(obj["k"]), [LinearTerm.from_json(t) for t in obj["terms"]])

    def __str__(self):
        return " + ".join(str(t) for t in self.terms) or "0"


def semilinear_coefficient(s: WeightedSemilinearSet, v) -> int:
    v = v if isinstance(v, ParikhVector) else ParikhVector(v)
    total = 0
    for t in s.terms:
        if linear_set_contains(t.offset, t.periods, v):
            total += t.weight
            if total >= s.k:
                return s.k
    return total


def _split(term: LinearTerm, k: int, out: list, trace: Trace | None, depth: int, level: int = 0):
    w, o, ps = term.weight, term.offset, term.periods
    n = kernel_vector(ps) if ps and w < k else None
    if n is None:
        out.append(LinearTerm(w, o, _reduce_periods(ps) if w == k else ps, True))
        return
    if trace is not None:
        trace.add("split", depth, f"{term} along {n} (level {level})")
    C = max(abs(x) for x in n) * (k - 1)
    plus = [i for i, x in enumerate(n) if x > 0]
    minus = [i for i, x in enumerate(n) if x < 0]
    # k (prod_{I+} w^C + prod_{I-} w^C) prod_all w*
    for side in (plus, minus):
        shift = sum((ps[i] * C for i in side), ZERO_VECTOR)
        out.append(LinearTerm(k, o + shift, _reduce_periods(ps), True))
    # sum over nonempty J+ in I+, J- in I-: prod_J w^{<C} prod_{I+-J+, I--J-} w^C prod_rest w*
    for jp in _nonempty_subsets(plus):
        for jm in _nonempty_subsets(minus):
            js = set(jp) | set(jm)
            fixed = sum((ps[i] * C for i in plus + minus if i not in js), ZERO_VECTOR)
            rest = tuple(ps[i] for i in range(len(ps)) if i not in js)
            ranges = [range(C) for _ in js]
            order = sorted(js)
            for exps in itertools.product(*ranges):
                shift = sum((ps[i] * e for i, e in zip(order, exps)), ZERO_VECTOR)
                _split(LinearTerm(w, o + fixed + shift, rest, False), k, out, trace, depth, level + 1)


def _nonempty_subsets(xs):
    for r in range(1, len(xs) + 1):
        yield from itertools.combinations(xs, r)


def to_semilinear(e: RationalExpr, k: int, trace: Trace | None = None) -> WeightedSemilinearSet:
    """Weighted semilinear set equal to ``e`` modulo ``k = k + 1``."""
    terms = star_height_reduce(e, k, trace)
    base = trace.max_depth if trace is not None else 0
    raw: list[LinearTerm] = []
    for t in terms:
        _split(t, k, raw, trace, base)
    return _merge_support_terms(raw, k)


def _merge_support_terms(raw: list, k: int) -> WeightedSemilinearSet:
    acc: dict = {}
    for t in raw:
        ps = _reduce_periods(t.periods) if t.weight == k else t.periods
        key = (t.offset, ps)
        acc[key] = min(acc.get(key, 0) + t.weight, k)
    A = TermAlgebra(k)
    acc = A.compact(acc)
    terms = [LinearTerm(w, o, ps, True) for (o, ps), w in A.canonical(acc)]
    return WeightedSemilinearSet(k, terms)


def terms_as_series(terms, S):
    """Evaluate a list of linear terms in a truncated series semiring."""
    out = S.zero()
    for t in terms:
        if t.support_flag:
            base = S.monomial(t.offset)
            for p in t.periods:
                base = S.mul(base, S.star(S.monomial(p)))
            val = S.scale(S.coeff.from_natural(t.weight), S.support(base))
        else:
            val = S.scale(S.coeff.from_natural(t.weight), S.monomial(t.offset))
            for p in t.periods:
                val = S.mul(val, S.star(S.monomial(p)))
        out = S.add(out, val)
    return out
