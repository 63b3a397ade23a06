"""Grounding negation-free Datalog into grammars, and provenance queries.

A program such as transitive closure::

    trans(X, Y) :- edge(X, Y).
    trans(X, Z) :- trans(X, Y), trans(Y, Z).

is grounded against a fact database into a grammar with one variable per
ground IDB atom (``trans(u,v)``) and one terminal per EDB fact
(``edge(u,v)``).  Each ground rule instance becomes a production, so the
derivation trees of ``trans(u,w)`` are exactly the proof trees of that atom
and the least solution over a semiring S is ``h(camb)``.
Over a semiring with ``k = k + 1`` the unfolding of depth
``n + ceil(log2 log2 k)`` already gives the least solution.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .grammar import Grammar, Production, Symbol
from .rational import unfolding_values
from .semiring import Semiring, SeriesSemiring, WhyProvenance, is_inf
from .unfold import prune_grammar

DEFAULT_CAP = 100_000


class DatalogError(ValueError):
    pass


class DatalogSyntaxError(DatalogError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


class UnsafeRuleError(DatalogError):
    """A head variable does not occur in the rule body."""


class GroundingLimitError(DatalogError):
    """Grounding would exceed the configured number of rule instances."""


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple

    def is_ground(self) -> bool:
        return not any(is_variable(a) for a in self.args)

    def variables(self) -> list[str]:
        seen = []
        for a in self.args:
            if is_variable(a) and a not in seen:
                seen.append(a)
        return seen

    def substitute(self, env: dict) -> "Atom":
        return Atom(self.pred, tuple(env.get(a, a) if is_variable(a) else a for a in self.args))

    def __str__(self):
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


def is_variable(term: str) -> bool:
    return term[:1].isupper() or term[:1] == "_"


@dataclass
class DatalogProgram:
    rules: list
    facts: list = field(default_factory=list)  # ground facts written in the program

    @property
    def idb(self) -> set:
        return {r.head.pred for r in self.rules}

    @property
    def edb(self) -> set:
        preds = {a.pred for r in self.rules for a in r.body} | {f.pred for f in self.facts}
        return preds - self.idb

    def arities(self) -> dict:
        out: dict = {}
        for a in [r.head for r in self.rules] + [a for r in self.rules for a in r.body] + list(self.facts):
            if out.setdefault(a.pred, len(a.args)) != len(a.args):
                raise DatalogError(f"predicate {a.pred} used with arities {out[a.pred]} and {len(a.args)}")
        return out

    def constants(self) -> set:
        out = set()
        for a in [r.head for r in self.rules] + [a for r in self.rules for a in r.body]:
            out.update(t for t in a.args if not is_variable(t))
        return out


@dataclass
class FactDatabase:
    """EDB facts with optional annotations (raw strings, parsed per semiring)."""

    facts: dict = field(default_factory=dict)  # Atom -> annotation or None

    def add(self, atom: Atom, annotation=None):
        if not atom.is_ground():
            raise DatalogError(f"fact {atom} is not ground")
        self.facts[atom] = annotation

    def by_predicate(self, pred: str) -> list:
        return [a for a in self.facts if a.pred == pred]

    def constants(self) -> set:
        return {t for a in self.facts for t in a.args}

    def __len__(self):
        return len(self.facts)


# ------------------------------------------------------------------ parsing

_TERM = r"(?:[A-Za-z0-9_]+|'[^']*'|\"[^\"]*\")"
_ATOM = re.compile(rf"\s*([a-z][A-Za-z0-9_]*)\s*\(\s*({_TERM}(?:\s*,\s*{_TERM})*)?\s*\)\s*")


def _term(t: str) -> str:
    t = t.strip()
    if t[:1] in "'\"":
        return t[1:-1]
    return t


def parse_atom(text: str, line: int | None = None) -> Atom:
    m = _ATOM.fullmatch(text)
    if not m:
        raise DatalogSyntaxError(f"bad atom {text.strip()!r}", line)
    args = tuple(_term(t) for t in re.findall(_TERM, m.group(2) or ""))
    return Atom(m.group(1), args)


def _split_atoms(text: str, line: int) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise DatalogSyntaxError("unbalanced parentheses", line)
    parts.append("".join(cur))
    return parts


def parse_program(text: str) -> DatalogProgram:
    """One rule per line: ``head :- b1, b2.``; ``%`` and ``#`` start comments.
    A body-free ground line ``p(c1, c2).`` is a fact."""
    rules, facts = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = re.split(r"[%#]", raw, maxsplit=1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise DatalogSyntaxError("rule must end with '.'", lineno)
        line = line[:-1]
        head_text, sep, body_text = line.partition(":-")
        head = parse_atom(head_text, lineno)
        body = tuple(parse_atom(b, lineno) for b in _split_atoms(body_text, lineno)) if sep else ()
        if sep and not body_text.strip():
            raise DatalogSyntaxError("empty rule body", lineno)
        rule = Rule(head, body)
        body_vars = {v for a in body for v in a.variables()}
        unsafe = [v for v in head.variables() if v not in body_vars]
        if unsafe:
            raise UnsafeRuleError(f"line {lineno}: head variable(s) {', '.join(unsafe)} not in the body of {rule}")
        if body:
            rules.append(rule)
        else:
            facts.append(head)
    prog = DatalogProgram(rules, facts)
    prog.arities()
    clash = {f.pred for f in facts} & prog.idb
    if clash:
        raise DatalogError(f"facts given for intensional predicate(s) {', '.join(sorted(clash))}")
    return prog


def parse_facts(text: str, arities: dict | None = None, db: FactDatabase | None = None) -> FactDatabase:
    """TSV lines ``predicate<TAB>c1<TAB>...<TAB>[annotation]``; ``#`` starts a comment line.

    A field past the predicate's arity (taken from ``arities``) is the
    annotation, as is a last field written ``@value``.
    """
    arities = arities or {}
    db = db if db is not None else FactDatabase()
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in raw.rstrip("\r\n").split("\t")]
        pred, rest = fields[0], fields[1:]
        if not re.fullmatch(r"[a-z][A-Za-z0-9_]*", pred):
            raise DatalogSyntaxError(f"bad predicate name {pred!r}", lineno)
        n = arities.get(pred)
        annotation = None
        if rest and rest[-1].startswith("@"):
            annotation = rest.pop()[1:]
        elif n is not None and len(rest) == n + 1:
            annotation = rest.pop()
        if n is not None and len(rest) != n:
            raise DatalogSyntaxError(f"{pred} expects {n} constants, got {len(rest)}", lineno)
        if any(not c for c in rest):
            raise DatalogSyntaxError("empty constant", lineno)
        db.add(Atom(pred, tuple(rest)), annotation)
    return db


# ------------------------------------------------------------------ grounding


@dataclass
class GroundProgram:
    """The grammar of a grounded program plus the fact annotations.

    Variables are the ground IDB atoms and terminals the EDB facts, both
    named by their text (``trans(u,v)``, ``edge(u,v)``)."""

    grammar: Grammar
    annotations: dict  # terminal name -> raw annotation or None
    atoms: dict  # grammar name -> Atom

    def valuation(self, S: Semiring) -> dict:
        """Terminal valuation: the annotation parsed in S, else the default
        (the fact itself for why-provenance, its letter for series, 1 otherwise)."""
        out = {}
        for name, ann in self.annotations.items():
            if ann is not None:
                out[name] = S.parse(ann)
            elif isinstance(S, WhyProvenance):
                out[name] = S.fact(name)
            elif isinstance(S, SeriesSemiring):
                out[name] = S.letter(name)
            else:
                out[name] = S.parse("1")
        return out


def ground(program: DatalogProgram, db: FactDatabase, *, cap: int = DEFAULT_CAP) -> GroundProgram:
    """Ground rule instances over the active domain.

    Body atoms over extensional predicates must match facts; the remaining
    variables range over all constants.  Raises :class:`GroundingLimitError`
    when more than ``cap`` instances would be produced.
    """
    arity = program.arities()
    idb, edb = program.idb, program.edb
    facts = FactDatabase(dict(db.facts))
    for f in program.facts:
        if f not in facts.facts:
            facts.add(f)
    for a in facts.facts:
        if a.pred in idb:
            raise DatalogError(f"fact {a} is for intensional predicate {a.pred}")
        if a.pred in arity and arity[a.pred] != len(a.args):
            raise DatalogError(f"fact {a} has arity {len(a.args)}, expected {arity[a.pred]}")
    domain = sorted(program.constants() | facts.constants())
    fact_index: dict[str, list] = {}
    for a in facts.facts:
        fact_index.setdefault(a.pred, []).append(a)
    for lst in fact_index.values():
        lst.sort(key=lambda a: a.args)

    instances: list[tuple[Atom, tuple]] = []
    for rule in program.rules:
        edb_atoms = [a for a in rule.body if a.pred in edb]
        for env in _match_edb(edb_atoms, fact_index, {}):
            free = [v for a in rule.body for v in a.variables() if v not in env]
            free = list(dict.fromkeys(free))
            if len(instances) + len(domain) ** len(free) > cap and free:
                raise GroundingLimitError(f"more than {cap} ground rule instances")
            for values in itertools.product(domain, repeat=len(free)):
                full = dict(env)
                full.update(zip(free, values))
                instances.append((rule.head.substitute(full), tuple(a.substitute(full) for a in rule.body)))
                if len(instances) > cap:
                    raise GroundingLimitError(f"more than {cap} ground rule instances")

    atoms: dict[str, Atom] = {}
    for head, body in instances:
        for a in (head,) + body:
            if a.pred in idb:
                atoms.setdefault(str(a), a)
    variables = tuple(sorted(atoms, key=lambda s: (atoms[s].pred, atoms[s].args)))
    used_facts = {str(a): a for a in facts.facts}
    alphabet = tuple(sorted(used_facts, key=lambda s: (used_facts[s].pred, used_facts[s].args)))
    prods, seen = [], set()
    for head, body in instances:
        rhs = tuple(Symbol(str(a), a.pred in idb) for a in body)
        p = Production(str(head), rhs)
        if p not in seen:  # identical instances from different rules coincide
            seen.add(p)
            prods.append(p)
    prods.sort(key=lambda p: (atoms[p.lhs].pred, atoms[p.lhs].args, [s.name for s in p.rhs]))
    g = Grammar(variables, alphabet, tuple(prods))
    return GroundProgram(g, {str(a): facts.facts[a] for a in facts.facts}, atoms)


def _match_edb(edb_atoms, fact_index, env):
    if not edb_atoms:
        yield env
        return
    first, rest = edb_atoms[0], edb_atoms[1:]
    for f in fact_index.get(first.pred, ()):
        new = dict(env)
        ok = True
        for t, c in zip(first.args, f.args):
            if is_variable(t):
                if new.setdefault(t, c) != c:
                    ok = False
                    break
            elif t != c:
                ok = False
                break
        if ok:
            yield from _match_edb(rest, fact_index, new)


# ------------------------------------------------------------------ queries


def collapse_depth(n: int, k) -> int:
    """``n + ceil(log2 log2 k)`` (the log-log term is 0 for k <= 2)."""
    e = 0
    while 2 ** (2**e) < k:
        e += 1
    return n + e


@dataclass
class ProvenanceTable:
    values: dict  # IDB atom text -> semiring value
    depth: int  # unfolding depth requested
    level: int  # level at which the computation stopped
    exact: bool  # least solution (collapsed semiring) rather than an approximation

    def __getitem__(self, atom):
        return self.values[str(atom)]


def provenance_table(gp: GroundProgram, S: Semiring, *, k_hint: int | None = None, start: str | None = None) -> ProvenanceTable:
    """Values of every IDB atom (or just those ``start`` depends on).

    For a semiring collapsed at k the depth is ``n + ceil(log2 log2 k)`` and
    the result is the least solution.  Otherwise ``k_hint`` is the unfolding
    depth and the result an underapproximation.
    """
    g = gp.grammar
    if start is not None and start not in g.variables:
        raise DatalogError(f"query atom {start} does not occur in the grounded program")
    g = prune_grammar(g, start=start)
    val = gp.valuation(S)
    if S.collapse is not None and not is_inf(S.collapse):
        depth = collapse_depth(len(g.variables), S.collapse)
        exact = True
    elif k_hint is not None:
        depth, exact = int(k_hint), False
    else:
        raise DatalogError(f"semiring {S.name} is not collapsed; give an unfolding depth (k_hint)")
    if k_hint is not None and exact:
        depth = max(depth, int(k_hint))
    if not g.variables:
        values = {start: S.zero()} if start is not None else {}
        return ProvenanceTable(values, depth, 0, exact)
    res = unfolding_values(g, val, S, depth, stop_at_fixpoint=True)
    values = dict(res.values)
    if start is not None:
        values = {start: values.get(start, S.zero())}
    else:
        # atoms without any proof were pruned
        values = {x: values.get(x, S.zero()) for x in gp.grammar.variables}
    return ProvenanceTable(values, depth, res.level, exact or res.converged)


def provenance_query(program, db, S: Semiring, start, k_hint: int | None = None, *, cap: int = DEFAULT_CAP):
    """Value in S of the ground atom ``start`` (text or :class:`Atom`).

    An atom absent from the grounding has no proofs and gets ``S.zero()``.
    """
    gp = program if isinstance(program, GroundProgram) else ground(program, db, cap=cap)
    name = str(start if isinstance(start, Atom) else parse_atom(start))
    if name not in gp.grammar.variables:
        return S.zero()
    return provenance_table(gp, S, k_hint=k_hint, start=name).values[name]


TRANSITIVE_CLOSURE = """\
trans(X, Y) :- edge(X, Y).
trans(X, Z) :- trans(X, Y), trans(Y, Z).
"""


__all__ = [
    "Atom",
    "Rule",
    "DatalogProgram",
    "FactDatabase",
    "GroundProgram",
    "ProvenanceTable",
    "DatalogError",
    "DatalogSyntaxError",
    "UnsafeRuleError",
    "GroundingLimitError",
    "parse_atom",
    "parse_program",
    "parse_facts",
    "ground",
    "collapse_depth",
    "provenance_table",
    "provenance_query",
    "TRANSITIVE_CLOSURE",
]
