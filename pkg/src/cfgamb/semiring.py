"""Commutative omega-continuous semirings.

Every instance exposes ``zero``, ``one``, ``add``, ``mul``, ``star`` and
``eq`` plus ``parse``/``format`` for JSON values.  ``collapse`` is the
smallest k with ``k = k + 1`` in the semiring (``None`` when no such k
exists); it bounds how many unfolding levels a value can depend on.

Instances are created from names: ``bool``, ``nat-inf``, ``nat-k:<k>``,
``tropical``, ``whyprov``, ``rational``, ``series-k:<k>:<D>`` and
``series-inf:<D>``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

from .grammar import ParikhVector, ZERO_VECTOR

INF = math.inf


class SemiringError(ValueError):
    pass


def is_inf(x) -> bool:
    return isinstance(x, float) and x == INF


def format_number(x):
    """JSON form of an element of N, Q or their extension by infinity."""
    if is_inf(x):
        return "inf"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def parse_number(obj, *, rational: bool = False):
    if isinstance(obj, str):
        s = obj.strip()
        if s in ("inf", "∞", "Infinity"):
            return INF
        if rational:
            return Fraction(s)
        return int(s)
    if isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, int):
        return Fraction(obj) if rational else obj
    if isinstance(obj, float):
        if obj == INF:
            return INF
        if rational:
            return Fraction(obj)
        if obj.is_integer():
            return int(obj)
    if isinstance(obj, Fraction) and rational:
        return obj
    raise SemiringError(f"cannot read {obj!r} as a number")


class Semiring:
    name = "semiring"
    collapse: int | None = None

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def star(self, a):
        raise NotImplementedError

    def eq(self, a, b) -> bool:
        return a == b

    @property
    def idempotent(self) -> bool:
        return self.collapse == 1

    def sum(self, xs):
        return reduce(self.add, xs, self.zero())

    def prod(self, xs):
        return reduce(self.mul, xs, self.one())

    def power(self, a, n: int):
        out, base = self.one(), a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def from_natural(self, n):
        """Image of ``n`` (possibly infinite) under the unique homomorphism from N^inf."""
        if is_inf(n):
            return self.star(self.one())
        out, base = self.zero(), self.one()
        while n:
            if n & 1:
                out = self.add(out, base)
            base = self.add(base, base)
            n >>= 1
        return out

    def parse(self, obj):
        raise NotImplementedError

    def format(self, a):
        raise NotImplementedError

    def __repr__(self):
        return f"<semiring {self.name}>"


class BooleanSemiring(Semiring):
    name = "bool"
    collapse = 1

    def zero(self):
        return False

    def one(self):
        return True

    def add(self, a, b):
        return a or b

    def mul(self, a, b):
        return a and b

    def star(self, a):
        return True

    def parse(self, obj):
        if isinstance(obj, bool):
            return obj
        if obj in (0, 1, "0", "1", "true", "false"):
            return obj in (1, "1", "true")
        raise SemiringError(f"not a Boolean: {obj!r}")

    def format(self, a):
        return bool(a)


class ExtendedNatural(Semiring):
    """N with infinity; ``0 * inf = 0``."""

    name = "nat-inf"
    collapse = None

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return a * b

    def star(self, a):
        return 1 if a == 0 else INF

    def parse(self, obj):
        x = parse_number(obj)
        if not is_inf(x) and x < 0:
            raise SemiringError("natural numbers are nonnegative")
        return x

    def format(self, a):
        return format_number(a)


class CollapsedNatural(Semiring):
    """N_k = {0..k} with every result capped at k."""

    def __init__(self, k: int):
        if k < 1:
            raise SemiringError("collapse constant must be at least 1")
        self.k = k
        self.name = f"nat-k:{k}"
        self.collapse = k

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, a, b):
        return min(a + b, self.k)

    def mul(self, a, b):
        return min(a * b, self.k)

    def star(self, a):
        return 1 if a == 0 else self.k

    def from_natural(self, n):
        return self.k if is_inf(n) else min(n, self.k)

    def parse(self, obj):
        x = parse_number(obj)
        if not is_inf(x) and x < 0:
            raise SemiringError("natural numbers are nonnegative")
        return self.k if is_inf(x) else min(x, self.k)

    def format(self, a):
        return a


class TropicalSemiring(Semiring):
    """(Q>=0 with infinity, min, +): zero is infinity and one is 0."""

    name = "tropical"
    collapse = 1

    def zero(self):
        return INF

    def one(self):
        return 0

    def add(self, a, b):
        return min(a, b)

    def mul(self, a, b):
        return a + b

    def star(self, a):
        return 0

    def from_natural(self, n):
        return INF if n == 0 else 0

    def parse(self, obj):
        x = parse_number(obj, rational=True)
        if not is_inf(x):
            if x < 0:
                raise SemiringError("tropical weights must be nonnegative")
            if x.denominator == 1:
                x = int(x)
        return x

    def format(self, a):
        return format_number(a)


class WhyProvenance(Semiring):
    """Sets of witness sets: sum is union, product joins witnesses pairwise."""

    name = "whyprov"
    collapse = 1

    def zero(self):
        return frozenset()

    def one(self):
        return frozenset([frozenset()])

    def add(self, a, b):
        return a | b

    def mul(self, a, b):
        return frozenset(x | y for x in a for y in b)

    def star(self, a):
        out = self.one()
        while True:
            nxt = out | self.mul(out, a)
            if nxt == out:
                return out
            out = nxt

    def from_natural(self, n):
        return self.zero() if n == 0 else self.one()

    def parse(self, obj):
        if isinstance(obj, str):
            return frozenset([frozenset([obj])])
        return frozenset(frozenset(w) for w in obj)

    def format(self, a):
        return sorted(sorted(w) for w in a)

    @staticmethod
    def fact(name: str):
        return frozenset([frozenset([name])])


class RationalSemiring(Semiring):
    """Nonnegative rationals with infinity; ``star(a) = 1/(1-a)`` for a < 1."""

    name = "rational"
    collapse = None

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def add(self, a, b):
        if is_inf(a) or is_inf(b):
            return INF
        return a + b

    def mul(self, a, b):
        if a == 0 or b == 0:
            return Fraction(0)
        if is_inf(a) or is_inf(b):
            return INF
        return a * b

    def star(self, a):
        if is_inf(a) or a >= 1:
            return INF
        return 1 / (1 - Fraction(a))

    def parse(self, obj):
        x = parse_number(obj, rational=True)
        if not is_inf(x) and x < 0:
            raise SemiringError("rational weights must be nonnegative")
        return x

    def format(self, a):
        return format_number(a)


class Series:
    """Truncated commutative power series: ParikhVector -> coefficient."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=()):
        self.terms = dict(terms)
        self._hash = None

    def __eq__(self, other):
        return isinstance(other, Series) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def coefficient(self, v: ParikhVector, zero=0):
        return self.terms.get(v, zero)

    def __repr__(self):
        parts = [f"{format_number(c)}·{v}" for v, c in sorted(self.terms.items(), key=lambda t: t[0].sort_key())]
        return "Series(" + " + ".join(parts) + ")"


class SeriesSemiring(Semiring):
    """Power series over ``coeff`` truncated above total degree ``degree``."""

    def __init__(self, coeff: Semiring, degree: int, name: str | None = None):
        if degree < 0:
            raise SemiringError("truncation degree must be nonnegative")
        self.coeff = coeff
        self.degree = degree
        self.collapse = coeff.collapse
        self.name = name or f"series({coeff.name}):{degree}"

    def _clean(self, terms):
        z = self.coeff.zero()
        return Series({v: c for v, c in terms.items() if not self.coeff.eq(c, z) and v.norm() <= self.degree})

    def zero(self):
        return Series()

    def one(self):
        return Series({ZERO_VECTOR: self.coeff.one()})

    def monomial(self, v, c=None) -> Series:
        v = v if isinstance(v, ParikhVector) else ParikhVector(v)
        return self._clean({v: self.coeff.one() if c is None else c})

    def letter(self, a: str) -> Series:
        return self.monomial(ParikhVector({a: 1}))

    def constant(self, c) -> Series:
        return self._clean({ZERO_VECTOR: c})

    def add(self, a: Series, b: Series) -> Series:
        out = dict(a.terms)
        for v, c in b.terms.items():
            out[v] = self.coeff.add(out[v], c) if v in out else c
        return self._clean(out)

    def mul(self, a: Series, b: Series) -> Series:
        out: dict = {}
        cz = self.coeff
        for v, c in a.terms.items():
            nv = v.norm()
            for w, d in b.terms.items():
                if nv + w.norm() > self.degree:
                    continue
                u = v + w
                p = cz.mul(c, d)
                out[u] = cz.add(out[u], p) if u in out else p
        return self._clean(out)

    def scale(self, c, a: Series) -> Series:
        return self._clean({v: self.coeff.mul(c, x) for v, x in a.terms.items()})

    def star(self, a: Series) -> Series:
        # a = a0 + a+ with a+ free of constants: a* = a0* (a0* a+)*, and the
        # inner star is a polynomial after truncation.
        c0 = a.terms.get(ZERO_VECTOR, self.coeff.zero())
        s0 = self.coeff.star(c0)
        rest = self.scale(s0, Series({v: c for v, c in a.terms.items() if not v.is_zero()}))
        out, term = self.one(), self.one()
        for _ in range(self.degree):
            term = self.mul(term, rest)
            if not term.terms:
                break
            out = self.add(out, term)
        return self.scale(s0, out)

    def support(self, a: Series) -> Series:
        return Series({v: self.coeff.one() for v in a.terms})

    def coefficient(self, a: Series, v):
        v = v if isinstance(v, ParikhVector) else ParikhVector(v)
        return a.terms.get(v, self.coeff.zero())

    def from_natural(self, n):
        return self.constant(self.coeff.from_natural(n))

    def parse(self, obj):
        if isinstance(obj, str):
            return self.letter(obj)
        if isinstance(obj, dict) and "terms" in obj:
            obj = obj["terms"]
        terms = {}
        for item in obj:
            v = ParikhVector(item["vector"])
            terms[v] = self.coeff.parse(item["coeff"])
        return self._clean(terms)

    def format(self, a: Series):
        items = sorted(a.terms.items(), key=lambda t: t[0].sort_key())
        return {"terms": [{"vector": v.to_json(), "coeff": self.coeff.format(c)} for v, c in items]}


def semiring_from_name(name: str) -> Semiring:
    """Parse a semiring name such as ``nat-k:3`` or ``series-inf:6``."""
    parts = name.strip().split(":")
    head = parts[0]
    try:
        if head == "bool" and len(parts) == 1:
            return BooleanSemiring()
        if head == "nat-inf" and len(parts) == 1:
            return ExtendedNatural()
        if head == "nat-k" and len(parts) == 2:
            return CollapsedNatural(int(parts[1]))
        if head == "tropical" and len(parts) == 1:
            return TropicalSemiring()
        if head == "whyprov" and len(parts) == 1:
            return WhyProvenance()
        if head == "rational" and len(parts) == 1:
            return RationalSemiring()
        if head == "series-k" and len(parts) == 3:
            return SeriesSemiring(CollapsedNatural(int(parts[1])), int(parts[2]), name=name)
        if head == "series-inf" and len(parts) == 2:
            return SeriesSemiring(ExtendedNatural(), int(parts[1]), name=name)
    except ValueError as exc:
        raise SemiringError(f"bad semiring name {name!r}: {exc}") from None
    raise SemiringError(f"unknown semiring {name!r}")


def identity_valuation(S: SeriesSemiring, alphabet) -> dict:
    """Map every letter to its own monomial: evaluation then yields the
    commutative series itself (truncated)."""
    return {a: S.letter(a) for a in alphabet}


def parse_valuation(obj, S: Semiring, alphabet=None) -> dict:
    """Read a ``{terminal: value}`` mapping; missing letters are an error."""
    val = {a: S.parse(v) for a, v in obj.items()}
    if alphabet is not None:
        missing = [a for a in alphabet if a not in val]
        if missing:
            raise SemiringError(f"valuation misses terminals {missing}")
    return val
