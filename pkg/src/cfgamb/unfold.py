"""Unfolding a grammar by tree dimension.

``unfold(G, k)`` builds a grammar with variables ``X@=d`` (X-trees of
dimension exactly d) and ``X@<=d`` (dimension at most d) for ``d <= k``.
The ``X@<=k``-trees are in bijection with the X-trees of ``G`` of dimension
at most k: contracting the ``X@<=d -> X@=e`` nodes and dropping the
annotations gives the corresponding tree of ``G``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .grammar import DerivationTree, Grammar, Production, Symbol, productive_variables

EXACT, AT_MOST = "exact", "at_most"


@dataclass(frozen=True, order=True)
class AnnotatedVariable:
    base: str
    tag: str
    level: int

    def __post_init__(self):
        if self.tag not in (EXACT, AT_MOST):
            raise ValueError(f"unknown annotation tag {self.tag!r}")
        if self.level < 0:
            raise ValueError("level must be nonnegative")

    @property
    def name(self) -> str:
        return annotated_name(self.base, self.tag, self.level)

    def __str__(self):
        return f"{self.base}{'=' if self.tag == EXACT else '≤'}{self.level}"

    def to_json(self) -> dict:
        return {"base": self.base, "tag": self.tag, "level": self.level}

    @classmethod
    def from_json(cls, obj) -> "AnnotatedVariable":
        return cls(obj["base"], obj["tag"], int(obj["level"]))


def annotated_name(base: str, tag: str, level: int) -> str:
    return f"{base}@{'=' if tag == EXACT else '<='}{level}"


def exact(x: str, d: int) -> str:
    return annotated_name(x, EXACT, d)


def at_most(x: str, d: int) -> str:
    return annotated_name(x, AT_MOST, d)


def _substitute(p: Production, lhs: str, names: list[str]) -> Production:
    it = iter(names)
    return Production(lhs, tuple(Symbol(next(it), True) if s.is_var else s for s in p.rhs))


def _subset_admissible(mask: int, r: int, d: int) -> bool:
    # Children outside J get level d-2, which exists only for d >= 2.
    return d >= 2 or mask == (1 << r) - 1


def level_rule_shapes(r: int, d: int):
    """Child annotations of the ``X@=d`` rules built from an arity-r production.

    Yields ``(key, shape)`` where ``shape`` lists ``(tag, level)`` per child.
    Rules of arity r > 1 come in two families: a unique child of dimension d
    (the others at most d-1), or a set J of at least two children of
    dimension d-1 (the others at most d-2).
    """
    if r == 0:
        if d == 0:
            yield ("b", 0), ()
    elif r == 1:
        yield ("c", 0), ((EXACT, d),)
    elif d >= 1:
        for j in range(r):
            yield ("d", j), tuple((EXACT, d) if i == j else (AT_MOST, d - 1) for i in range(r))
        for mask in range(1, 1 << r):
            if bin(mask).count("1") < 2 or not _subset_admissible(mask, r, d):
                continue
            yield ("d", r + mask), tuple((EXACT, d - 1) if mask >> i & 1 else (AT_MOST, d - 2) for i in range(r))


def exact_level_rules(g: Grammar, d: int):
    """Yield ``(production, key)`` for every rule of the unfolding with lhs ``X@=d``."""
    for p in g.productions:
        for key, shape in level_rule_shapes(p.arity, d):
            names = [annotated_name(x, tag, lv) for x, (tag, lv) in zip(p.variables, shape)]
            yield _substitute(p, exact(p.lhs, d), names), key


def unfold(g: Grammar, k: int, *, prune: bool = True, start: str | None = None) -> Grammar:
    """The dimension unfolding ``G^{<=k}``.

    Productions are ordered by clause (level selection, terminal rules,
    unary rules, branching rules), then by base variable, level and child
    choice.  With ``prune`` (the default) unproductive variables are removed,
    and unreachable ones too when ``start`` (a variable of ``g``) is given.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if start is not None and start not in g.variables:
        raise ValueError(f"unknown start variable {start!r}")
    var_pos = {x: i for i, x in enumerate(g.variables)}
    variables, annotations = [], {}
    for x in g.variables:
        for d in range(k + 1):
            for tag in (AT_MOST, EXACT):
                a = AnnotatedVariable(x, tag, d)
                variables.append(a.name)
                annotations[a.name] = a
    clauses: dict[str, list] = {"a": [], "b": [], "c": [], "d": []}
    for x in g.variables:
        for d in range(k + 1):
            for e in range(d + 1):
                clauses["a"].append(((var_pos[x], d, e), Production(at_most(x, d), (Symbol(exact(x, e), True),))))
    for d in range(k + 1):
        for prod, (clause, sub) in exact_level_rules(g, d):
            base = annotations[prod.lhs].base
            clauses[clause].append(((var_pos[base], d, sub), prod))
    prods = []
    for c in "abcd":
        prods.extend(p for _, p in sorted(clauses[c], key=lambda t: t[0]))
    out = Grammar(tuple(variables), g.alphabet, tuple(prods), annotations)
    if prune:
        out = prune_grammar(out, start=at_most(start, k) if start is not None else None)
    return out


def prune_grammar(g: Grammar, start: str | None = None) -> Grammar:
    """Remove unproductive variables (and unreachable ones from ``start``)."""
    keep = productive_variables(g)
    prods = [p for p in g.productions if p.lhs in keep and all(y in keep for y in p.variables)]
    if start is not None:
        reach, stack = set(), [start] if start in keep else []
        succ: dict[str, set[str]] = {}
        for p in prods:
            succ.setdefault(p.lhs, set()).update(p.variables)
        while stack:
            x = stack.pop()
            if x in reach:
                continue
            reach.add(x)
            stack.extend(succ.get(x, ()))
        keep &= reach
        prods = [p for p in prods if p.lhs in keep]
    variables = tuple(v for v in g.variables if v in keep)
    ann = {v: g.annotations[v] for v in variables} if g.annotations else {}
    return Grammar(variables, g.alphabet, tuple(prods), ann)


prune = prune_grammar


def forget_annotations(t: DerivationTree, base: Grammar) -> DerivationTree:
    """Map a tree of an unfolding back to the corresponding tree of ``base``:
    level-selection nodes are contracted and annotations dropped."""
    # productions of the unfolding keep the terminals and rhs shape of their origin
    index = {}
    for p in base.productions:
        index.setdefault((p.lhs, _shape(p)), []).append(p)

    def go(node: DerivationTree) -> DerivationTree:
        while level_of(node.production.lhs)[1] == AT_MOST:
            node = node.children[0]
        p = node.production
        lhs = level_of(p.lhs)[0]
        bases = [q for q in index.get((lhs, _shape(p)), []) if _same_vars(q, p)]
        if len(bases) != 1:
            raise ValueError(f"cannot map {p} back to the base grammar")
        return DerivationTree(bases[0], tuple(go(c) for c in node.children))

    return go(t)


def _shape(p: Production) -> tuple:
    return tuple(None if s.is_var else s.name for s in p.rhs)


def _same_vars(q: Production, p: Production) -> bool:
    return all(level_of(y)[0] == x for x, y in zip(q.variables, p.variables))


def level_of(name: str) -> tuple[str, str, int]:
    base, _, rest = name.rpartition("@")
    if rest.startswith("<="):
        return base, AT_MOST, int(rest[2:])
    return base, EXACT, int(rest[1:])


__all__ = [
    "AnnotatedVariable",
    "EXACT",
    "AT_MOST",
    "annotated_name",
    "exact",
    "at_most",
    "exact_level_rules",
    "level_rule_shapes",
    "unfold",
    "prune",
    "prune_grammar",
    "forget_annotations",
    "level_of",
]
