"""Brute-force ground truth for small grammars.

Nothing here uses the unfolding or the expression machinery: trees are
enumerated directly and counted by dynamic programming over
``(variable, Parikh vector)`` pairs, so the results can serve as an
independent check of everything else.
"""
from __future__ import annotations

import heapq
import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field

from .grammar import (
    DerivationTree,
    Grammar,
    ParikhVector,
    cyclic_variables,
    dimension,
    min_index,
)

INF = float("inf")


@dataclass(frozen=True)
class Budget:
    max_nodes: int = 14
    max_norm: int = 7
    cap: int = 100_000

    def __post_init__(self):
        if min(self.max_nodes, self.max_norm, self.cap) <= 0:
            raise ValueError("budget entries must be positive")


class _Dense:
    """Dense integer vectors over a fixed alphabet with bounded norm."""

    def __init__(self, alphabet, max_norm: int):
        self.alphabet = tuple(alphabet)
        self.max_norm = max_norm
        self.zero = (0,) * len(self.alphabet)
        self._below: dict[tuple, list[tuple]] = {}

    def of(self, v: Mapping) -> tuple:
        return tuple(v.get(a, 0) for a in self.alphabet)

    def parikh(self, v: tuple) -> ParikhVector:
        return ParikhVector({a: n for a, n in zip(self.alphabet, v) if n})

    def all(self) -> list[tuple]:
        out = []
        for v in itertools.product(range(self.max_norm + 1), repeat=len(self.alphabet)):
            if sum(v) <= self.max_norm:
                out.append(v)
        return sorted(out, key=lambda v: (sum(v), v))

    def below(self, v: tuple) -> list[tuple]:
        """All u <= v componentwise."""
        out = self._below.get(v)
        if out is None:
            out = list(itertools.product(*(range(n + 1) for n in v)))
            self._below[v] = out
        return out

    @staticmethod
    def sub(v, u):
        w = tuple(x - y for x, y in zip(v, u))
        return w if min(w, default=0) >= 0 else None

    @staticmethod
    def add(v, u):
        return tuple(x + y for x, y in zip(v, u))


# ------------------------------------------------------------ enumeration


@dataclass
class TreeEnumeration:
    """Trees in canonical order: node count, then production indices in preorder.

    ``truncated`` is set when trees within the norm bound exist beyond the
    node limit, or when the count cap stopped the enumeration.
    """

    trees: list
    truncated: bool
    cap_hit: bool = False

    def __iter__(self):
        return iter(self.trees)

    def __len__(self):
        return len(self.trees)


def _preorder_key(g: Grammar, t: DerivationTree) -> tuple:
    return tuple(g.index(n.production) for n in t.preorder())


class _CapExceeded(Exception):
    pass


def _check_start(g: Grammar, x: str):
    if x not in g.variables:
        raise ValueError(f"unknown variable {x!r}")


def enumerate_trees(g: Grammar, x: str, budget: Budget = Budget()) -> TreeEnumeration:
    """Every X-tree with at most ``max_nodes`` nodes and yield norm at most
    ``max_norm``, each exactly once."""
    _check_start(g, x)
    dense = _Dense(g.alphabet, budget.max_norm)
    memo: dict[tuple[str, int], list] = {}
    total = [0]

    def gen(y: str, n: int) -> list:
        key = (y, n)
        if key in memo:
            return memo[key]
        out = []
        for p in g.productions_of(y):
            base = dense.of(p.terminals)
            if sum(base) > budget.max_norm:
                continue
            r = p.arity
            if r == 0:
                if n == 1:
                    out.append((DerivationTree(p, ()), base))
                continue
            for comp in _compositions(n - 1, r):
                pools = [gen(z, c) for z, c in zip(p.variables, comp)]
                if any(not pool for pool in pools):
                    continue
                for combo in itertools.product(*pools):
                    v = base
                    for _, cv in combo:
                        v = dense.add(v, cv)
                    if sum(v) > budget.max_norm:
                        continue
                    out.append((DerivationTree(p, tuple(t for t, _ in combo)), v))
                    total[0] += 1
                    if total[0] > 4 * budget.cap:
                        raise _CapExceeded
        out.sort(key=lambda tv: _preorder_key(g, tv[0]))
        memo[key] = out
        return out

    trees, cap_hit = [], False
    try:
        for n in range(1, budget.max_nodes + 1):
            level = gen(x, n)
            if len(trees) + len(level) > budget.cap:
                trees.extend(t for t, _ in level[: budget.cap - len(trees)])
                cap_hit = True
                break
            trees.extend(t for t, _ in level)
    except _CapExceeded:
        cap_hit = True
    truncated = cap_hit or max_tree_size(g, x, budget.max_norm) > budget.max_nodes
    return TreeEnumeration(trees, truncated, cap_hit)


def _compositions(n: int, r: int):
    """Ordered ways to write n as a sum of r positive parts."""
    if r == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - r + 2):
        for rest in _compositions(n - first, r - 1):
            yield (first,) + rest


def enumerate_by_height(g: Grammar, x: str, budget: Budget) -> list:
    """Second, independent enumeration (by height) used to cross-check
    :func:`enumerate_trees` for duplicates and completeness."""
    dense = _Dense(g.alphabet, budget.max_norm)
    layer: dict[str, list] = {y: [] for y in g.variables}
    for _h in range(budget.max_nodes):
        nxt: dict[str, list] = {}
        for y in g.variables:
            out = []
            for p in g.productions_of(y):
                base = dense.of(p.terminals)
                pools = [layer[z] for z in p.variables]
                for combo in itertools.product(*pools):
                    nodes = 1 + sum(c[2] for c in combo)
                    if nodes > budget.max_nodes:
                        continue
                    v = base
                    for c in combo:
                        v = dense.add(v, c[1])
                    if sum(v) > budget.max_norm:
                        continue
                    out.append((DerivationTree(p, tuple(c[0] for c in combo)), v, nodes))
            nxt[y] = out
        if all(len(nxt[y]) == len(layer[y]) for y in g.variables):
            break
        layer = nxt
    return [t for t, _, _ in layer[x]]


def max_tree_size(g: Grammar, x: str, max_norm: int) -> float:
    """Largest node count of an X-tree with yield norm <= max_norm (inf if unbounded)."""
    dense = _Dense(g.alphabet, max_norm)
    norms = range(max_norm + 1)
    # best[y][j]: max nodes of a y-tree with yield norm exactly j (None if none)
    best: dict[str, list] = {y: [None] * (max_norm + 1) for y in g.variables}
    items = len(g.variables) * (max_norm + 1)
    changed_late: set[tuple[str, int]] = set()
    rounds = 2 * items + 2
    for rnd in range(rounds):
        changed = False
        for p in g.productions:
            t = sum(dense.of(p.terminals))
            if t > max_norm:
                continue
            # max-plus convolution over the children
            acc = {t: 1}
            for z in p.variables:
                nacc = {}
                for j, s in acc.items():
                    for jj in norms:
                        if j + jj > max_norm or best[z][jj] is None:
                            continue
                        val = s + best[z][jj]
                        if nacc.get(j + jj, -1) < val:
                            nacc[j + jj] = val
                acc = nacc
            for j, s in acc.items():
                cur = best[p.lhs][j]
                if cur is None or (cur != INF and s > cur):
                    best[p.lhs][j] = s
                    changed = True
                    if rnd >= items + 1:
                        changed_late.add((p.lhs, j))
        if not changed:
            break
    for y, j in changed_late:
        best[y][j] = INF
    vals = [v for v in best[x] if v is not None]
    return max(vals, default=0)


# ------------------------------------------------------------ counting


class _Counter:
    """Counts of trees by (variable, dense vector, dimension class) for a
    grammar without cyclic variables.  Dimension classes are 0..cap, with
    ``cap`` standing for "cap or more"."""

    def __init__(self, g: Grammar, dense: _Dense, cap: int):
        self.g, self.dense, self.cap = g, dense, cap
        self.memo: dict[tuple, list] = {}
        self.active: set = set()
        self.prods = {y: [(dense.of(p.terminals), p.variables) for p in g.productions_of(y)] for y in g.variables}
        # Only recurse into vectors the remaining children can actually
        # yield; this keeps the recursion well-founded for nullable variables.
        self.gen = _generates(g, dense)
        self.suffix: dict[tuple, list] = {}
        for plist in self.prods.values():
            for _base, ys in plist:
                if ys not in self.suffix:
                    sets = [{dense.zero}]
                    for z in reversed(ys):
                        sets.append(_combine(dense, dense.zero, [sets[-1], self.gen[z]]))
                    self.suffix[ys] = sets[::-1]

    def counts(self, y: str, v: tuple) -> list:
        key = (y, v)
        got = self.memo.get(key)
        if got is not None:
            return got
        if key in self.active:
            raise RuntimeError("cyclic dependency in tree counting (grammar has a cyclic variable)")
        self.active.add(key)
        cap = self.cap
        out = [0] * (cap + 1)
        for base, ys in self.prods[y]:
            rem = self.dense.sub(v, base)
            if rem is None:
                continue
            if not ys:
                if not any(rem):
                    out[0] += 1
                continue
            states = {(self.dense.zero, -1, False): 1}
            last = len(ys) - 1
            for i, z in enumerate(ys):
                nstates: dict = {}
                for (pv, md, tie), n in states.items():
                    room = self.dense.sub(rem, pv)
                    choices = [room] if i == last else self.dense.below(room)
                    gz, after = self.gen[z], self.suffix[ys][i + 1]
                    for u in choices:
                        if u not in gz or self.dense.sub(room, u) not in after:
                            continue
                        cz = self.counts(z, u)
                        for c, m in enumerate(cz):
                            if not m:
                                continue
                            if c > md:
                                st = (c, False)
                            elif c == md:
                                st = (md, True)
                            else:
                                st = (md, tie)
                            key2 = (self.dense.add(pv, u), st[0], st[1])
                            nstates[key2] = nstates.get(key2, 0) + n * m
                states = nstates
            for (_pv, md, tie), n in states.items():
                out[min(md + (1 if tie else 0), cap)] += n
        self.active.discard(key)
        self.memo[key] = out
        return out


def _reachable(g: Grammar, x: str) -> set[str]:
    seen, stack = set(), [x]
    while stack:
        y = stack.pop()
        if y in seen:
            continue
        seen.add(y)
        for p in g.productions_of(y):
            stack.extend(p.variables)
    return seen


def _generates(g: Grammar, dense: _Dense) -> dict[str, set]:
    """gen[Y] = vectors (norm-bounded) yielded by some Y-tree."""
    gen: dict[str, set] = {y: set() for y in g.variables}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            for v in _combine(dense, dense.of(p.terminals), [gen[z] for z in p.variables]):
                if v not in gen[p.lhs]:
                    gen[p.lhs].add(v)
                    changed = True
    return gen


def _combine(dense: _Dense, base: tuple, pools: list[set]):
    if sum(base) > dense.max_norm:
        return set()
    acc = {base}
    for pool in pools:
        acc = {dense.add(v, u) for v in acc for u in pool if sum(v) + sum(u) <= dense.max_norm}
        if not acc:
            break
    return acc


def _visits_cycle(g: Grammar, dense: _Dense, gen: dict, cyc: set) -> dict[str, set]:
    """vis[Y] = vectors yielded by a Y-tree containing a cyclic variable."""
    vis: dict[str, set] = {y: set(gen[y]) if y in cyc else set() for y in g.variables}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            ys = p.variables
            for i in range(len(ys)):
                pools = [vis[z] if j == i else gen[z] for j, z in enumerate(ys)]
                for v in _combine(dense, dense.of(p.terminals), pools):
                    if v not in vis[p.lhs]:
                        vis[p.lhs].add(v)
                        changed = True
    return vis


@dataclass
class CambTable(Mapping):
    """Parikh vector -> number of trees (``inf`` possible); absent means 0.

    ``exact`` tells whether every count (including absent zeros) is exact
    for all vectors of norm at most ``max_norm``.
    """

    counts: dict
    exact: bool
    max_norm: int
    dim_max: int | None = None
    alphabet: tuple = field(default=())

    def __getitem__(self, v):
        v = v if isinstance(v, ParikhVector) else ParikhVector(v)
        return self.counts.get(v, 0)

    def __iter__(self):
        return iter(sorted(self.counts, key=lambda v: v.sort_key()))

    def __len__(self):
        return len(self.counts)

    def vectors(self) -> list[ParikhVector]:
        dense = _Dense(self.alphabet, self.max_norm)
        return [dense.parikh(v) for v in dense.all()]

    def to_json(self) -> dict:
        return {
            "exact": self.exact,
            "max_norm": self.max_norm,
            "dim_max": self.dim_max,
            "counts": [
                {"vector": v.to_json(), "count": "inf" if c == INF else c} for v, c in
                sorted(self.counts.items(), key=lambda t: t[0].sort_key())
            ],
        }


def dimension_profile(g: Grammar, x: str, max_norm: int, cap: int) -> dict[ParikhVector, list[int]]:
    """Tree counts per Parikh vector split by dimension 0..cap-1 and ">= cap".

    Requires that no cyclic variable is reachable from ``x``.
    """
    reach = _reachable(g, x)
    if cyclic_variables(g) & reach:
        raise ValueError("a cyclic variable is reachable: counts are infinite")
    dense = _Dense(g.alphabet, max_norm)
    ctr = _Counter(g, dense, cap)
    out = {}
    for v in dense.all():
        c = ctr.counts(x, v)
        if any(c):
            out[dense.parikh(v)] = c
    return out


def camb_table(g: Grammar, x: str, budget: Budget = Budget(), dim_max: int | None = None,
               dim_exact: bool = False) -> CambTable:
    """Number of X-trees per Parikh vector of norm <= ``budget.max_norm``.

    With ``dim_max`` only trees of dimension at most ``dim_max`` (exactly
    ``dim_max`` if ``dim_exact``) are counted.  Unfiltered counts are always
    exact: a vector has infinitely many trees iff one of them passes through
    a cyclic variable, and the remaining trees avoid cyclic variables
    altogether.  Filtered counts are exact unless a cyclic variable is
    reachable, in which case they come from bounded enumeration and are
    lower bounds.
    """
    _check_start(g, x)
    dense = _Dense(g.alphabet, budget.max_norm)
    cyc = cyclic_variables(g) & _reachable(g, x)
    if dim_max is None:
        gen = _generates(g, dense)
        vis = _visits_cycle(g, dense, gen, cyc) if cyc else {y: set() for y in g.variables}
        keep = [y for y in g.variables if y not in cyc]
        sub = Grammar(
            tuple(keep), g.alphabet,
            tuple(p for p in g.productions if p.lhs in keep and all(z in keep for z in p.variables)),
        )
        counts = {}
        if x in keep:
            ctr = _Counter(sub, dense, 0)
            for v in dense.all():
                n = ctr.counts(x, v)[0]
                if n:
                    counts[dense.parikh(v)] = n
        for v in vis.get(x, ()):
            counts[dense.parikh(v)] = INF
        return CambTable(counts, True, budget.max_norm, None, g.alphabet)
    if not cyc:
        prof = dimension_profile(g, x, budget.max_norm, dim_max + 1)
        counts = {}
        for v, per in prof.items():
            n = per[dim_max] if dim_exact else sum(per[: dim_max + 1])
            if n:
                counts[v] = n
        return CambTable(counts, True, budget.max_norm, dim_max, g.alphabet)
    enum = enumerate_trees(g, x, budget)
    counts: dict = {}
    for t in enum:
        d = dimension(t)
        if d == dim_max if dim_exact else d <= dim_max:
            v = t.parikh()
            counts[v] = counts.get(v, 0) + 1
    return CambTable(counts, False, budget.max_norm, dim_max, g.alphabet)


# ------------------------------------------------------------ checks


@dataclass
class BoundReport:
    k: int
    n: int
    checked: int
    violations: list = field(default_factory=list)
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "checked": self.checked,
            "skipped_inexact": self.skipped,
            "violations": [
                {"vector": v.to_json(), "bounded": fmt(a), "total": fmt(b)} for v, a, b in self.violations
            ],
            "status": "no violations" if self.ok else f"{len(self.violations)} violations",
        }


def fmt(n):
    return "inf" if n == INF else n


def check_convergence_bound(g: Grammar, x: str, k: int, budget: Budget = Budget()) -> BoundReport:
    """Check camb_{X<=n+k}(v) >= min(camb_X(v), 2^(2^k)) with n = |variables|
    for every exactly counted v within the budget."""
    n = len(g.variables)
    total = camb_table(g, x, budget)
    bounded = camb_table(g, x, budget, dim_max=n + k)
    threshold = 2 ** (2**k)
    report = BoundReport(k, n, 0)
    for v in total.vectors():
        if not (total.exact and bounded.exact):
            report.skipped += 1
            continue
        report.checked += 1
        b, t = bounded[v], total[v]
        if b < min(t, threshold):
            report.violations.append((v, b, t))
    return report


def check_compaction(g: Grammar, x: str, budget: Budget = Budget()) -> list:
    """Trees t lacking a Parikh-equivalent enumerated tree of dimension at
    most the number of distinct variables labelling t (empty list = pass)."""
    enum = enumerate_trees(g, x, budget)
    best: dict = {}
    for t in enum:
        v, d = t.parikh(), dimension(t)
        if v not in best or d < best[v]:
            best[v] = d
    bad = []
    for t in enum:
        labels = {node.production.lhs for node in t.preorder()}
        if best[t.parikh()] > len(labels):
            bad.append(t)
    return bad


def min_index_bruteforce(t: DerivationTree) -> int:
    """Least index over all derivations of ``t`` by exhaustive search over
    expansion orders (a bottleneck shortest path over order ideals)."""
    # subtrees may be shared objects, so number the positions explicitly
    kids: list[list[int]] = []
    stack = [(t, None)]
    while stack:
        node, parent = stack.pop()
        i = len(kids)
        kids.append([])
        if parent is not None:
            kids[parent].append(i)
        stack.extend((c, i) for c in reversed(node.children))
    nodes = kids
    full = (1 << len(nodes)) - 1

    def frontier(mask: int) -> list[int]:
        if mask == 0:
            return [0]
        return [c for i in range(len(nodes)) if mask >> i & 1 for c in kids[i] if not mask >> c & 1]

    best = {0: 1}
    heap = [(1, 0)]
    while heap:
        cost, mask = heapq.heappop(heap)
        if mask == full:
            return cost
        if best.get(mask, INF) < cost:
            continue
        for c in frontier(mask):
            nm = mask | (1 << c)
            size = len(frontier(nm)) if nm != full else 0
            nc = max(cost, size)
            if nc < best.get(nm, INF):
                best[nm] = nc
                heapq.heappush(heap, (nc, nm))
    raise AssertionError("unreachable")


@dataclass
class IndexReport:
    checked: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_index_bounds(g: Grammar, x: str, budget: Budget = Budget(), brute_force: bool = True) -> IndexReport:
    """dim(t) < min_index(t) <= dim(t)*(r_max-1)+1 on every enumerated tree,
    with min_index cross-checked by exhaustive search."""
    rmax = max(g.max_arity, 1)
    report = IndexReport(0)
    for t in enumerate_trees(g, x, budget):
        d, mi = dimension(t), min_index(t)
        report.checked += 1
        ok = d < mi <= d * (rmax - 1) + 1
        if brute_force:
            ok = ok and mi == min_index_bruteforce(t)
        if not ok:
            report.failures.append(t)
    return report
