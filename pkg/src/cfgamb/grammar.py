"""Context-free grammars, Parikh vectors and derivation trees.

A grammar keeps its variables, alphabet and productions in insertion order so
that every downstream artifact (unfoldings, expressions, formulas) is
reproducible.  Text format::

    %var X Y
    %term a b
    X -> 'a' X 'b' | Y ;     # an empty alternative is the empty word
    Y -> ;

Quoted tokens are terminals.  Unquoted tokens declared with ``%var`` or used
as a left-hand side are variables; other unquoted tokens are classified by
the capitalisation of their first character unless inference is disabled.
"""
from __future__ import annotations

import itertools
import json
import re
import warnings
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any, NamedTuple


class GrammarSyntaxError(ValueError):
    """Malformed grammar text.  Carries the 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f" at line {line}, column {col}" if line else ""
        super().__init__(f"{message}{where}")


class UndeclaredSymbolError(GrammarSyntaxError):
    pass


class GrammarWarning(UserWarning):
    pass


class ParikhVector(Mapping):
    """Sparse vector of nonnegative letter counts.  Zero entries are dropped."""

    __slots__ = ("_items", "_hash", "_d")

    def __init__(self, counts: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        if isinstance(counts, Mapping):
            counts = counts.items()
        acc: dict[str, int] = {}
        for a, n in counts:
            if not isinstance(n, int) or n < 0:
                raise ValueError(f"Parikh entries must be nonnegative integers, got {a}={n!r}")
            if n:
                acc[a] = acc.get(a, 0) + n
        self._items = tuple(sorted(acc.items()))
        self._hash = hash(self._items)
        self._d = dict(self._items)

    @classmethod
    def _trusted(cls, acc: dict) -> "ParikhVector":
        # acc has positive int entries only
        v = object.__new__(cls)
        v._items = tuple(sorted(acc.items()))
        v._hash = hash(v._items)
        v._d = dict(v._items)
        return v

    @classmethod
    def of_word(cls, letters: Iterable[str]) -> "ParikhVector":
        acc: dict[str, int] = {}
        for a in letters:
            acc[a] = acc.get(a, 0) + 1
        return cls(acc)

    def __getitem__(self, a: str) -> int:
        return self._d.get(a, 0)

    def get(self, a, default=0):
        return self._d.get(a, default)

    def __contains__(self, a):
        return a in self._d

    def __iter__(self):
        return (a for a, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, ParikhVector):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self == ParikhVector(other)
        return NotImplemented

    def __add__(self, other: "ParikhVector") -> "ParikhVector":
        if not other._items:
            return self
        if not self._items:
            return other
        acc = dict(self._d)
        for a, n in other._items:
            acc[a] = acc.get(a, 0) + n
        return ParikhVector._trusted(acc)

    def __sub__(self, other: "ParikhVector") -> "ParikhVector":
        acc = dict(self._d)
        for a, n in other._items:
            m = acc.get(a, 0) - n
            if m < 0:
                raise ValueError("Parikh difference would be negative")
            if m:
                acc[a] = m
            else:
                del acc[a]
        return ParikhVector._trusted(acc)

    def __mul__(self, c: int) -> "ParikhVector":
        return ParikhVector({a: n * c for a, n in self._items})

    __rmul__ = __mul__

    def __le__(self, other: "ParikhVector") -> bool:
        d = other._d
        for a, n in self._items:
            if n > d.get(a, 0):
                return False
        return True

    def sort_key(self) -> tuple:
        """Key for a canonical total order (the componentwise order is partial)."""
        return (self.norm(), self._items)

    def norm(self) -> int:
        return sum(n for _, n in self._items)

    def is_zero(self) -> bool:
        return not self._items

    def to_json(self) -> dict[str, int]:
        return dict(self._items)

    def __repr__(self):
        inner = ", ".join(f"{a}: {n}" for a, n in self._items)
        return f"ParikhVector({{{inner}}})"

    def __str__(self):
        if not self._items:
            return "1"
        return "".join(a if n == 1 else f"{a}^{n}" for a, n in self._items)


ZERO_VECTOR = ParikhVector()


class Symbol(NamedTuple):
    name: str
    is_var: bool

    def __str__(self):
        return self.name


def V(name: str) -> Symbol:
    return Symbol(name, True)


def T(name: str) -> Symbol:
    return Symbol(name, False)


@dataclass(frozen=True)
class Production:
    """``lhs -> rhs``; ``rhs`` is a tuple of :class:`Symbol`."""

    lhs: str
    rhs: tuple[Symbol, ...] = ()
    variables: tuple[str, ...] = field(init=False, repr=False, compare=False)
    terminals: ParikhVector = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rhs = tuple(s if isinstance(s, Symbol) else Symbol(*s) for s in self.rhs)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "variables", tuple(s.name for s in rhs if s.is_var))
        object.__setattr__(self, "terminals", ParikhVector.of_word(s.name for s in rhs if not s.is_var))

    @property
    def arity(self) -> int:
        return len(self.variables)

    def __str__(self):
        body = " ".join(_render_symbol(s) for s in self.rhs)
        return f"{self.lhs} -> {body}".rstrip()


@dataclass(frozen=True)
class Grammar:
    """A context-free grammar with ordered, duplicate-free components.

    ``annotations`` optionally maps every variable name to an annotation
    object (used by unfoldings); it is either empty or total.
    """

    variables: tuple[str, ...]
    alphabet: tuple[str, ...]
    productions: tuple[Production, ...]
    annotations: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vs, al = tuple(self.variables), tuple(self.alphabet)
        if len(set(vs)) != len(vs) or len(set(al)) != len(al):
            raise ValueError("variables and alphabet must be duplicate-free")
        if set(vs) & set(al):
            raise ValueError(f"symbols used both as variable and terminal: {sorted(set(vs) & set(al))}")
        seen, prods = set(), []
        for p in self.productions:
            if p in seen:
                warnings.warn(f"duplicate production dropped: {p}", GrammarWarning, stacklevel=3)
                continue
            seen.add(p)
            prods.append(p)
        vset, aset = set(vs), set(al)
        for p in prods:
            if p.lhs not in vset:
                raise ValueError(f"production lhs {p.lhs!r} is not a variable")
            for s in p.rhs:
                if s.is_var and s.name not in vset:
                    raise ValueError(f"undeclared variable {s.name!r} in {p}")
                if not s.is_var and s.name not in aset:
                    raise ValueError(f"undeclared terminal {s.name!r} in {p}")
        ann = dict(self.annotations or {})
        if ann and set(ann) != vset:
            raise ValueError("annotations must be total over variables")
        object.__setattr__(self, "variables", vs)
        object.__setattr__(self, "alphabet", al)
        object.__setattr__(self, "productions", tuple(prods))
        object.__setattr__(self, "annotations", ann)
        by_lhs: dict[str, list[int]] = {v: [] for v in vs}
        for i, p in enumerate(prods):
            by_lhs[p.lhs].append(i)
        object.__setattr__(self, "_by_lhs", {v: tuple(ix) for v, ix in by_lhs.items()})
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(prods)})

    @classmethod
    def from_rules(cls, rules: Mapping[str, Iterable[Iterable[str]]], *, alphabet=None) -> "Grammar":
        """Build from ``{lhs: [rhs_tokens, ...]}``; rhs tokens naming a key are variables."""
        vs = list(rules)
        terms: list[str] = list(alphabet or [])
        prods = []
        for x, alts in rules.items():
            for alt in alts:
                rhs = []
                for tok in alt:
                    if tok in rules:
                        rhs.append(V(tok))
                    else:
                        if tok not in terms:
                            terms.append(tok)
                        rhs.append(T(tok))
                prods.append(Production(x, tuple(rhs)))
        return cls(tuple(vs), tuple(terms), tuple(prods))

    def productions_of(self, x: str) -> tuple[Production, ...]:
        return tuple(self.productions[i] for i in self._by_lhs[x])

    def production_indices(self, x: str) -> tuple[int, ...]:
        return self._by_lhs[x]

    def index(self, p: Production) -> int:
        return self._index[p]

    @property
    def max_arity(self) -> int:
        return max((p.arity for p in self.productions), default=0)

    def with_productions(self, productions, variables=None, annotations=None) -> "Grammar":
        vs = self.variables if variables is None else tuple(variables)
        ann = annotations
        if ann is None:
            ann = {v: self.annotations[v] for v in vs} if self.annotations else {}
        return Grammar(vs, self.alphabet, tuple(productions), ann)

    def to_json(self) -> dict:
        return grammar_to_json(self)

    def __str__(self):
        return render_grammar(self)


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<nl>\n)
      | (?P<comment>\#[^\n]*)
      | (?P<arrow>->)
      | (?P<bar>\|)
      | (?P<semi>;)
      | (?P<quoted>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
      | (?P<word>(?:(?!->)[^\s|;\#'"])(?:(?!->)[^\s|;\#])*)
    """,
    re.VERBOSE,
)


class _Tok(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def _unquote(text: str) -> str:
    body = text[1:-1]
    return re.sub(r"\\(.)", r"\1", body)


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise GrammarSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            toks.append(_Tok("nl", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "quoted":
            toks.append(_Tok("quoted", _unquote(m.group()), line, col))
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("nl", "\n", line, pos - line_start + 1))
    return toks


_ANNOTATED_RE = re.compile(r"^(?P<base>.+)@(?P<tag><=|=)(?P<level>\d+)$")


def parse_grammar(text: str, *, infer: bool = True) -> Grammar:
    """Parse grammar text; see the module docstring for the format."""
    toks = _tokenize(text)
    declared_vars: list[str] = []
    declared_terms: list[str] = []
    rules: list[tuple[_Tok, list[list[_Tok]]]] = []
    i = 0
    while i < len(toks):
        t = toks[i]
        if t.kind == "nl":
            i += 1
            continue
        if t.kind == "word" and t.text in ("%var", "%term") and t.col == 1:
            target = declared_vars if t.text == "%var" else declared_terms
            i += 1
            while toks[i].kind != "nl":
                if toks[i].kind not in ("word", "quoted"):
                    raise GrammarSyntaxError(f"unexpected {toks[i].text!r} in {t.text} header", toks[i].line, toks[i].col)
                target.append(toks[i].text)
                i += 1
            continue
        if t.kind != "word" or t.text.startswith("%"):
            raise GrammarSyntaxError(f"expected a variable name, got {t.text!r}", t.line, t.col)
        j = i + 1
        while toks[j].kind == "nl":
            j += 1
        if toks[j].kind != "arrow":
            raise GrammarSyntaxError(f"expected '->' after {t.text!r}", toks[j].line, toks[j].col)
        j += 1
        alts: list[list[_Tok]] = [[]]
        while True:
            u = toks[j] if j < len(toks) else None
            if u is None or (u.kind == "nl" and j == len(toks) - 1):
                raise GrammarSyntaxError(f"rule for {t.text!r} is not terminated by ';'", t.line, t.col)
            if u.kind == "semi":
                break
            if u.kind == "bar":
                alts.append([])
            elif u.kind in ("word", "quoted"):
                alts[-1].append(u)
            elif u.kind == "arrow":
                raise GrammarSyntaxError("unexpected '->' inside a rule (missing ';'?)", u.line, u.col)
            j += 1
        rules.append((t, alts))
        i = j + 1

    for name in declared_vars:
        if name in declared_terms:
            raise GrammarSyntaxError(f"{name!r} declared both %var and %term")
    lhs_names = [t.text for t, _ in rules]
    var_set = set(declared_vars) | set(lhs_names)
    term_set = set(declared_terms)
    for t, _ in rules:
        if t.text in term_set:
            raise GrammarSyntaxError(f"terminal {t.text!r} used as left-hand side", t.line, t.col)

    variables = list(dict.fromkeys(declared_vars))
    alphabet = list(dict.fromkeys(declared_terms))

    def classify(tok: _Tok) -> Symbol:
        if tok.kind == "quoted":
            if tok.text in var_set:
                raise GrammarSyntaxError(f"quoted terminal {tok.text!r} clashes with a variable", tok.line, tok.col)
            name, is_var = tok.text, False
        elif tok.text in var_set:
            name, is_var = tok.text, True
        elif tok.text in term_set:
            name, is_var = tok.text, False
        elif infer:
            name, is_var = tok.text, tok.text[0].isupper()
        else:
            raise UndeclaredSymbolError(f"undeclared symbol {tok.text!r}", tok.line, tok.col)
        if is_var and name not in variables:
            variables.append(name)
        if not is_var and name not in alphabet:
            alphabet.append(name)
        return Symbol(name, is_var)

    prods = []
    for t, alts in rules:
        if t.text not in variables:
            variables.append(t.text)
        for alt in alts:
            prods.append(Production(t.text, tuple(classify(tok) for tok in alt)))
    if set(variables) & set(alphabet):
        clash = sorted(set(variables) & set(alphabet))
        raise GrammarSyntaxError(f"symbols used both as variable and terminal: {clash}")

    annotations = {}
    if variables and all(_ANNOTATED_RE.match(v) for v in variables):
        from .unfold import AnnotatedVariable

        for v in variables:
            m = _ANNOTATED_RE.match(v)
            tag = "at_most" if m["tag"] == "<=" else "exact"
            annotations[v] = AnnotatedVariable(m["base"], tag, int(m["level"]))
    return Grammar(tuple(variables), tuple(alphabet), tuple(prods), annotations)


def _needs_quotes(name: str, quote_anyway: bool) -> bool:
    return quote_anyway or not re.fullmatch(r"(?:(?!->)[^\s|;#'\"])(?:(?!->)[^\s|;#])*", name)


def _quote(name: str) -> str:
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _render_symbol(s: Symbol) -> str:
    if s.is_var:
        return s.name
    return _quote(s.name)


def render_grammar(g: Grammar) -> str:
    """Text form that :func:`parse_grammar` maps back to an equal grammar."""
    for v in g.variables:
        if _needs_quotes(v, False) or v.startswith("%"):
            raise ValueError(f"variable name {v!r} cannot be written in the text format")
    lines = ["%var " + " ".join(g.variables)]
    lines.append("%term " + " ".join(_quote(a) for a in g.alphabet) if g.alphabet else "%term")
    for lhs, group in itertools.groupby(g.productions, key=lambda p: p.lhs):
        alts = [" ".join(_render_symbol(s) for s in p.rhs) for p in group]
        lines.append(f"{lhs} -> " + " | ".join(alts) + " ;")
    return "\n".join(lines) + "\n"


def grammar_to_json(g: Grammar) -> dict:
    out = {
        "variables": list(g.variables),
        "alphabet": list(g.alphabet),
        "productions": [
            {"lhs": p.lhs, "rhs": [["v" if s.is_var else "t", s.name] for s in p.rhs]} for p in g.productions
        ],
    }
    if g.annotations:
        out["annotations"] = {v: a.to_json() if hasattr(a, "to_json") else a for v, a in g.annotations.items()}
    return out


def grammar_from_json(obj: Mapping) -> Grammar:
    prods = tuple(
        Production(p["lhs"], tuple(Symbol(name, kind == "v") for kind, name in p["rhs"])) for p in obj["productions"]
    )
    ann = {}
    if obj.get("annotations"):
        from .unfold import AnnotatedVariable

        ann = {v: AnnotatedVariable.from_json(a) for v, a in obj["annotations"].items()}
    return Grammar(tuple(obj["variables"]), tuple(obj["alphabet"]), prods, ann)


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ------------------------------------------------------------ derivation trees


@dataclass(frozen=True)
class DerivationTree:
    """A derivation tree: the production used at the root and one subtree per
    variable occurrence of its right-hand side, left to right."""

    production: Production
    children: tuple["DerivationTree", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) != self.production.arity:
            raise ValueError(f"{self.production} needs {self.production.arity} children, got {len(self.children)}")
        for c, x in zip(self.children, self.production.variables):
            if c.production.lhs != x:
                raise ValueError(f"child rooted at {c.production.lhs!r} where {x!r} is expected")

    @property
    def root(self) -> str:
        return self.production.lhs

    def nodes(self) -> int:
        return _fold(self, lambda t, cs: 1 + sum(cs))

    def height(self) -> int:
        return _fold(self, lambda t, cs: 1 + max(cs, default=0))

    def word(self) -> tuple[str, ...]:
        def go(t, cs):
            out, it = [], iter(cs)
            for s in t.production.rhs:
                out.extend(next(it) if s.is_var else (s.name,))
            return tuple(out)

        return _fold(self, go)

    def parikh(self) -> ParikhVector:
        return _fold(self, lambda t, cs: sum(cs, t.production.terminals))

    def preorder(self):
        stack = [self]
        while stack:
            t = stack.pop()
            yield t
            stack.extend(reversed(t.children))

    def to_json(self, g: Grammar) -> dict:
        return _fold(self, lambda t, cs: {"rule": g.index(t.production), "children": list(cs)})

    @classmethod
    def from_json(cls, obj, g: Grammar) -> "DerivationTree":
        return cls(g.productions[obj["rule"]], tuple(cls.from_json(c, g) for c in obj.get("children", ())))

    def pretty(self, indent: int = 0) -> str:
        pad = "  " * indent
        return "\n".join([pad + str(self.production)] + [c.pretty(indent + 1) for c in self.children])


def _fold(t: DerivationTree, fn):
    """Bottom-up fold without recursion (trees can be deep chains)."""
    results: dict[int, Any] = {}
    stack = [(t, False)]
    while stack:
        node, done = stack.pop()
        if done:
            results[id(node)] = fn(node, [results[id(c)] for c in node.children])
        else:
            stack.append((node, True))
            stack.extend((c, False) for c in node.children)
    return results[id(t)]


def dimension(t: DerivationTree) -> int:
    """Horton-Strahler number: leaves have dimension 0; an inner node takes the
    largest child dimension, plus one when that maximum is attained twice."""

    def go(_t, cs):
        if not cs:
            return 0
        d = max(cs)
        return d + 1 if cs.count(d) > 1 else d

    return _fold(t, go)


# Above this many children the permutation search is replaced by the sorted
# order, which attains the minimum (an exchange argument).
_PERMUTATION_LIMIT = 6


def _best_order_value(child_indices: list[int]) -> int:
    r = len(child_indices)
    if r <= _PERMUTATION_LIMIT:
        return min(
            max(ix + (r - j) for j, ix in enumerate(perm, start=1)) for perm in itertools.permutations(child_indices)
        )
    return max(ix + (r - j) for j, ix in enumerate(sorted(child_indices), start=1))


def min_index(t: DerivationTree) -> int:
    """Least index over all derivations of ``t``: the largest number of
    pending variable occurrences in a sentential form, minimised over the
    order in which subtrees are expanded."""
    return _fold(t, lambda _t, cs: 1 if not cs else _best_order_value(list(cs)))


# ------------------------------------------------------------ grammar analysis


def _occurs_closure(g: Grammar) -> dict[str, set[str]]:
    """reach[X] = {Y : X =>* alpha Y beta}, reflexive."""
    succ = {x: {y for p in g.productions_of(x) for y in p.variables} for x in g.variables}
    reach = {}
    for x in g.variables:
        seen, stack = {x}, [x]
        while stack:
            for y in succ[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        reach[x] = seen
    return reach


def expansive_variables(g: Grammar) -> set[str]:
    """Variables X admitting X =>* ... X ... X ..."""
    reach = _occurs_closure(g)
    out = set()
    for x in g.variables:
        for y in reach[x]:
            for p in g.productions_of(y):
                hits = sum(1 for z in p.variables if x in reach[z])
                if hits >= 2:
                    out.add(x)
                    break
            if x in out:
                break
    return out


def is_nonexpansive(g: Grammar) -> bool:
    return not expansive_variables(g)


def nullable_variables(g: Grammar) -> set[str]:
    """Variables deriving the empty word."""
    null: set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in null and p.terminals.is_zero() and all(y in null for y in p.variables):
                null.add(p.lhs)
                changed = True
    return null


def productive_variables(g: Grammar) -> set[str]:
    prod: set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in prod and all(y in prod for y in p.variables):
                prod.add(p.lhs)
                changed = True
    return prod


def unit_steps(g: Grammar) -> dict[str, set[str]]:
    """X -> Y whenever some production X -> u0 Y1 .. Yr ur has no terminals,
    all Yj productive, and every Yj other than Y nullable."""
    null, prod = nullable_variables(g), productive_variables(g)
    steps: dict[str, set[str]] = {x: set() for x in g.variables}
    for p in g.productions:
        if not p.terminals.is_zero() or not all(y in prod for y in p.variables):
            continue
        for j, y in enumerate(p.variables):
            if all(z in null for i, z in enumerate(p.variables) if i != j):
                steps[p.lhs].add(y)
    return steps


def cyclic_variables(g: Grammar) -> set[str]:
    """Variables X with a nontrivial derivation X =>+ X, i.e. carrying
    infinitely many derivation trees of a single yield."""
    steps = unit_steps(g)
    out = set()
    for x in g.variables:
        seen, stack = set(), list(steps[x])
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            stack.extend(steps[y])
        if x in seen:
            out.add(x)
    return out


def prime(name: str) -> str:
    return name + "'"


def infinite_support_grammar(g: Grammar, x: str | None = None) -> Grammar:
    """Grammar whose X-trees are exactly the G-trees through a cyclic variable.

    The primed copy X' reproduces G.  The unprimed X keeps exactly one
    unprimed child along the path to a cyclic variable, where it may switch
    to the primed copy via X -> X'.  So ``L(G', X)`` is the set of words with
    infinitely many X-trees.  The construction does not depend on the start
    variable; ``x`` is only checked.
    """
    if x is not None and x not in g.variables:
        raise ValueError(f"unknown variable {x!r}")
    cyc = cyclic_variables(g)
    taken = set(g.variables) | set(g.alphabet)
    pname = {}
    for x in g.variables:
        y = prime(x)
        while y in taken:
            y = prime(y)
        taken.add(y)
        pname[x] = y
    prods = []
    for p in g.productions:
        prods.append(Production(pname[p.lhs], tuple(Symbol(pname[s.name], True) if s.is_var else s for s in p.rhs)))
    for p in g.productions:
        var_positions = [i for i, s in enumerate(p.rhs) if s.is_var]
        for i in var_positions:
            rhs = tuple(
                s if k == i or not s.is_var else Symbol(pname[s.name], True) for k, s in enumerate(p.rhs)
            )
            prods.append(Production(p.lhs, rhs))
    for x in g.variables:
        if x in cyc:
            prods.append(Production(x, (Symbol(pname[x], True),)))
    variables = tuple(g.variables) + tuple(pname[x] for x in g.variables)
    return Grammar(variables, g.alphabet, tuple(prods))
