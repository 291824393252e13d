import pytest
from hypothesis import given, settings, strategies as st
from strategies import dags

from slpfo.dagpaths import (ContractedDag, EmptyPathError, RestoreError, WeightedDag, first_path,
                            prune_contract)
from slpfo.generators import chain, ptree
from slpfo.oracle import naive_initial_paths
from slpfo.slp import OrderedDag, build_dag

S, A, B = 0, 1, 2


@pytest.fixture
def wd6(example6):
    return WeightedDag(build_dag(example6))


def _all_paths(ctx):
    cur = first_path(ctx)
    out = []
    if cur.done:
        return out
    while True:
        cur.check()
        out.append((cur.path(), cur.weight))
        if not cur.next_path():
            return out


def test_example6_weights(wd6):
    assert wd6.number_paths[S] == 6
    assert wd6.number_paths[A] == 2 and wd6.number_paths[B] == 1
    assert [wd6.edge_weight(S, i) for i in range(4)] == [0, 1, 3, 5]
    assert [wd6.edge_weight(A, i) for i in range(2)] == [0, 1]
    assert [wd6.count_paths_to(x) for x in (S, A, B)] == [1, 2, 3]


def test_single_node_dag():
    wd = WeightedDag(OrderedDag(("S",), ((),), 0))
    assert wd.number_paths[0] == 1 and wd.resolve_lex(0) == ()
    ctx = prune_contract(wd, {0})
    cur = first_path(ctx)
    # the lone leaf edge S -> S' is kept as a single stub triple
    assert cur.path() == () and cur.weight == 0 and len(cur.triples) == 1
    assert not cur.next_path()


def test_contracted_to_b(wd6):
    ctx = prune_contract(wd6, {B})
    assert [e.w for e in ctx.edges[S]] == [2, 4, 5]
    assert {e.dst for e in ctx.edges[S]} == {wd6.n + B}
    assert _all_paths(ctx) == [((1, 1), 2), ((2, 1), 4), ((3,), 5)]


def test_empty_useful_set(wd6):
    ctx = prune_contract(wd6, set())
    assert ctx.empty and _all_paths(ctx) == []


def test_full_dag_paths(wd6, example6):
    ctx = prune_contract(wd6, {S, A, B})
    got = _all_paths(ctx)
    assert [p for p, _ in got] == naive_initial_paths(build_dag(example6))
    assert [w for _, w in got] == list(range(6))


def test_shorten_example(wd6):
    cur = first_path(prune_contract(wd6, {S, A, B}))
    for _ in range(4):
        cur.next_path()
    assert cur.path() == (2, 1) and cur.weight == 4
    seen = []
    for _ in range(3):
        cur.shorten()
        seen.append((cur.path(), cur.weight))
    assert seen == [((2, 1), 4), ((2,), 3), ((), 0)]
    with pytest.raises(EmptyPathError):
        cur.shorten()
    for _ in range(3):
        cur.restore()
    assert cur.path() == (2, 1) and cur.weight == 4 and cur.end_leaf == wd6.n + B
    with pytest.raises(RestoreError):
        cur.restore()


def test_cursor_refuses_to_advance_while_shortened(wd6):
    cur = first_path(prune_contract(wd6, {B}))
    cur.shorten()
    with pytest.raises(RestoreError):
        cur.next_path()


def test_resolve_and_local_lex(wd6):
    assert wd6.format_path(wd6.resolve_lex(5)) == "S3B"
    assert wd6.format_path(wd6.resolve_lex(2)) == "S1A1B"
    assert wd6.format_path(wd6.resolve_lex(4)) == "S2A1B"
    assert wd6.resolve_lex(0) == ()
    assert wd6.lex_of_local(A, (1,)) == 1 and wd6.lex_of_local(A, ()) == 0
    assert wd6.lex((2,)) + wd6.lex_of_local(A, (1,)) == 4
    with pytest.raises(ValueError):
        wd6.resolve_lex(6)


def test_path_counts_of_generators():
    assert set(WeightedDag(build_dag(chain(5))).paths_to) == {1}
    wd = WeightedDag(build_dag(ptree(40)))
    leaf = wd.dag.names.index("T0")
    assert wd.count_paths_to(leaf) == 2 ** 40


def _brute_wp_min(ctx, v, u):
    prev = v
    while v != u:
        prev = v
        v = ctx.edges[v][0].dst
    return prev


@settings(max_examples=150, deadline=None)
@given(dags(), st.data())
def test_enumeration_matches_sorted_paths(dag, data):
    wd = WeightedDag(dag)
    every = naive_initial_paths(dag)
    assert wd.number_paths[0] == len(every)
    assert [wd.lex(p) for p in every] == list(range(len(every)))
    assert [wd.resolve_lex(i) for i in range(len(every))] == every
    useful = set(data.draw(st.lists(st.integers(0, wd.n - 1), max_size=wd.n)))
    ctx = prune_contract(wd, useful)
    want = [p for p in every if wd.end(p) in useful]
    got = _all_paths(ctx)
    assert [p for p, _ in got] == want
    assert [w for _, w in got] == [wd.lex(p) for p in want]
    for v, es in ctx.edges.items():
        u = ctx.min_end(v)
        assert ctx.wp_min(v, u) == _brute_wp_min(ctx, v, u)


@settings(max_examples=150, deadline=None)
@given(dags(), st.data())
def test_shorten_ranks_prefixes(dag, data):
    wd = WeightedDag(dag)
    useful = set(data.draw(st.lists(st.integers(0, wd.n - 1), min_size=1, max_size=wd.n)))
    ctx = prune_contract(wd, useful)
    cur = first_path(ctx)
    if cur.done:
        return
    for _ in range(data.draw(st.integers(0, 5))):
        if not cur.next_path():
            return
    full = cur.path()
    before = (list(cur.triples), cur.weight)
    steps = 0
    while cur.path():
        cur.shorten()
        steps += 1
        cur.check()
        assert cur.weight == wd.lex(cur.path())
    for _ in range(steps):
        cur.restore()
    assert (list(cur.triples), cur.weight) == before and cur.path() == full
