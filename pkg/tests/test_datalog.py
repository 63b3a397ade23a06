import random
from collections import deque
from functools import lru_cache

import pytest

from cfgamb.datalog import (
    TRANSITIVE_CLOSURE,
    Atom,
    DatalogError,
    DatalogSyntaxError,
    FactDatabase,
    GroundingLimitError,
    UnsafeRuleError,
    collapse_depth,
    ground,
    parse_atom,
    parse_facts,
    parse_program,
    provenance_query,
    provenance_table,
)
from cfgamb.semiring import INF, semiring_from_name

TC = parse_program(TRANSITIVE_CLOSURE)


def edges_db(edges, weights=None):
    db = FactDatabase()
    for i, (u, v) in enumerate(edges):
        db.add(Atom("edge", (u, v)), None if weights is None else str(weights[i]))
    return db


# ------------------------------------------------------------ parsing


def test_parse_transitive_closure():
    assert [str(r) for r in TC.rules] == [
        "trans(X,Y) :- edge(X,Y).",
        "trans(X,Z) :- trans(X,Y), trans(Y,Z).",
    ]
    assert TC.idb == {"trans"} and TC.edb == {"edge"}
    assert TC.arities() == {"trans": 2, "edge": 2}


def test_parse_comments_and_facts():
    p = parse_program("% reach\nr(X) :- s(X).  # base\nr(Y) :- r(X), e(X, Y).\ns(a).\n")
    assert len(p.rules) == 2 and p.facts == [Atom("s", ("a",))]
    assert parse_atom("e('A b', c)") == Atom("e", ("A b", "c"))


@pytest.mark.parametrize(
    "text,err",
    [
        ("p(X) :- q(Y).", UnsafeRuleError),
        ("p(X) :- q(X)", DatalogSyntaxError),
        ("p(X) :- .", DatalogSyntaxError),
        ("P(x).", DatalogSyntaxError),
        ("p(X) :- q(X), q(X, X).", DatalogError),
        ("p(a).\np(X) :- q(X).", DatalogError),
        ("p(X) :- q((X).", DatalogSyntaxError),
    ],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_program(text)


def test_unsafe_rule_message_names_variable():
    with pytest.raises(UnsafeRuleError, match="Y"):
        parse_program("p(X, Y) :- q(X).")


def test_parse_facts_annotations():
    db = parse_facts("# g\nedge\tu\tv\t3\nedge\tv\tw\nedge\tw\tu\t@7\n", {"edge": 2})
    assert db.facts == {
        Atom("edge", ("u", "v")): "3",
        Atom("edge", ("v", "w")): None,
        Atom("edge", ("w", "u")): "7",
    }
    db2 = parse_facts("s\ta\t@x\n", db=FactDatabase())
    assert db2.facts == {Atom("s", ("a",)): "x"}
    with pytest.raises(DatalogSyntaxError):
        parse_facts("edge\tu\n", {"edge": 2})
    with pytest.raises(DatalogSyntaxError):
        parse_facts("Edge\tu\tv\n")


# ------------------------------------------------------------ grounding


def test_two_node_grounding():
    gp = ground(TC, edges_db([("u", "v"), ("v", "u")]))
    g = gp.grammar
    assert g.variables == ("trans(u,u)", "trans(u,v)", "trans(v,u)", "trans(v,v)")
    assert g.alphabet == ("edge(u,v)", "edge(v,u)")
    assert len(g.productions) == 2 + 8
    assert gp.atoms["trans(u,v)"] == Atom("trans", ("u", "v"))


def test_empty_edb():
    gp = ground(TC, FactDatabase())
    assert gp.grammar.variables == () and gp.grammar.productions == ()
    S = semiring_from_name("tropical")
    assert provenance_query(gp, None, S, "trans(u,v)") == S.zero()


def test_grounding_cap():
    edges = [(str(i), str(i + 1)) for i in range(30)]
    with pytest.raises(GroundingLimitError):
        ground(TC, edges_db(edges), cap=1000)
    assert len(ground(TC, edges_db(edges)).grammar.productions) > 1000


def test_ground_rejects_idb_facts():
    db = FactDatabase()
    db.add(Atom("trans", ("a", "b")))
    with pytest.raises(DatalogError):
        ground(TC, db)


def test_ground_is_deterministic():
    edges = [("c", "a"), ("a", "b"), ("b", "c"), ("b", "d")]
    one = ground(TC, edges_db(edges))
    two = ground(TC, edges_db(list(reversed(edges))))
    assert one.grammar == two.grammar


# ------------------------------------------------------------ queries


def test_chain_tropical():
    S = semiring_from_name("tropical")
    db = edges_db([("u", "v"), ("v", "w")])
    assert provenance_query(TC, db, S, "trans(u,w)") == 2
    assert provenance_query(TC, db, S, "trans(w,u)") == INF
    db = edges_db([("u", "v"), ("v", "w")], [3, 4])
    assert provenance_query(TC, db, S, "trans(u,w)") == 7


def test_chain_whyprov():
    S = semiring_from_name("whyprov")
    db = edges_db([("u", "v"), ("v", "w"), ("u", "w")])
    got = provenance_query(TC, db, S, "trans(u,w)")
    assert got == S.parse([["edge(u,v)", "edge(v,w)"], ["edge(u,w)"]])
    assert got == S.add(S.fact("edge(u,w)"), S.mul(S.fact("edge(u,v)"), S.fact("edge(v,w)")))


def test_unknown_atom_is_zero():
    S = semiring_from_name("bool")
    assert provenance_query(TC, edges_db([("u", "v")]), S, "trans(z,z)") is False


def test_collapse_depth():
    assert collapse_depth(4, 1) == 4
    assert collapse_depth(4, 2) == 4
    assert collapse_depth(4, 3) == 5
    assert collapse_depth(4, 16) == 6
    assert collapse_depth(4, 17) == 7


def test_non_collapsed_needs_depth():
    gp = ground(TC, edges_db([("u", "v"), ("v", "u")]))
    S = semiring_from_name("nat-inf")
    with pytest.raises(DatalogError, match="k_hint"):
        provenance_table(gp, S)
    t = provenance_table(gp, S, k_hint=0)
    assert t.depth == 0 and not t.exact
    assert t.values["trans(u,v)"] == 1
    # dimension one already admits paths of every length around the cycle
    assert provenance_table(gp, S, k_hint=1).values["trans(u,v)"] == INF


def test_series_counts_derivations():
    gp = ground(TC, edges_db([("a", "b"), ("b", "c"), ("c", "d")]))
    S = semiring_from_name("series-inf:4")
    t = provenance_table(gp, S, k_hint=3, start="trans(a,d)")
    v = t.values["trans(a,d)"]
    # one edge multiset, two bracketings of a 3-edge path
    assert S.coefficient(v, {"edge(a,b)": 1, "edge(b,c)": 1, "edge(c,d)": 1}) == 2


def random_dag(rng, n, p):
    nodes = [f"n{i}" for i in range(n)]
    return [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def count_derivations(edges):
    es = set(edges)
    nodes = sorted({x for e in edges for x in e})

    @lru_cache(None)
    def cnt(u, v):
        # u < v on a DAG listed in topological order
        total = 1 if (u, v) in es else 0
        for w in nodes:
            if u < w < v:
                total += cnt(u, w) * cnt(w, v)
        return total

    return cnt


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_nat_k_on_dags(seed, k):
    rng = random.Random(seed)
    edges = random_dag(rng, 6, 0.5)
    if not edges:
        return
    cnt = count_derivations(edges)
    gp = ground(TC, edges_db(edges))
    S = semiring_from_name(f"nat-k:{k}")
    t = provenance_table(gp, S)
    assert t.exact
    for name, atom in gp.atoms.items():
        u, v = atom.args
        want = cnt(u, v) if u < v else 0
        assert t.values[name] == min(want, k), name


def shortest(edges, weights, u, v):
    # Bellman-Ford over nonempty paths
    nodes = {x for e in edges for x in e}
    dist = {x: INF for x in nodes}
    for (a, b), w in zip(edges, weights):
        if a == u:
            dist[b] = min(dist[b], w)
    for _ in range(len(nodes)):
        for (a, b), w in zip(edges, weights):
            dist[b] = min(dist[b], dist[a] + w)
    return dist.get(v, INF)


def reachable(edges, u, v):
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
    seen, todo = set(), deque(adj.get(u, []))
    while todo:
        x = todo.popleft()
        if x not in seen:
            seen.add(x)
            todo.extend(adj.get(x, []))
    return v in seen


@pytest.mark.parametrize("seed", range(5))
def test_dense_graphs_tropical_and_bool(seed):
    rng = random.Random(100 + seed)
    n = 7
    nodes = [f"v{i}" for i in range(n)]
    edges = [(a, b) for a in nodes for b in nodes if rng.random() < 0.35]
    weights = [rng.randint(0, 9) for _ in edges]
    gp = ground(TC, edges_db(edges, weights))
    trop = provenance_table(gp, semiring_from_name("tropical"))
    gp_b = ground(TC, edges_db(edges))
    boolean = provenance_table(gp_b, semiring_from_name("bool"))
    for name, atom in gp.atoms.items():
        u, v = atom.args
        assert trop.values[name] == shortest(edges, weights, u, v), name
        assert boolean.values[name] == reachable(edges, u, v), name


def test_table_is_deterministic():
    edges = [("a", "b"), ("b", "a"), ("b", "c")]
    S = semiring_from_name("whyprov")
    gp = ground(TC, edges_db(edges))
    one = provenance_table(gp, S)
    two = provenance_table(ground(TC, edges_db(edges)), S)
    assert list(one.values) == list(two.values)
    assert one.values == two.values
