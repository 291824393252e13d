import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st
from randquery import random_formula

from slpfo.canon import canonical_type
from slpfo.generators import random_apex
from slpfo.logic import QuerySyntaxError, parse_formula, relativize
from slpfo.oracle import distance_matrix, naive_eval, naive_types
from slpfo.query import (BasicLocalSentence, FOQuery, LocalFormula, QAnd, QNot, candidate_types,
                         check_factorization, dedup_plan, eval_local_on_type, factorizations,
                         parse_query, rho, set_partitions)
from slpfo.slp import decompress
from slpfo.structures import components, neighborhood


def test_rho_examples():
    assert (rho(1, 1), rho(1, 2), rho(2, 3)) == (1, 4, 12)
    with pytest.raises(ValueError):
        rho(0, 1)


def test_parse_local_and_scattered(example6):
    q = parse_query("(local :r 1 :vars (x) (exists y (r1 x y)))", example6.signature)
    (leaf,) = q.leaves()
    assert isinstance(leaf, LocalFormula) and leaf.k == 1 and leaf.r == 1 and q.vars == ("x",)
    q = parse_query("(scattered :q 2 :r 1 (r1 z z))", example6.signature)
    (sent,) = q.sentences()
    assert sent == BasicLocalSentence(2, 1, parse_formula("(r1 z z)"), "z") and q.k == 0


def test_parse_boolean_combination():
    q = parse_query("(and (local :r 2 :vars (x y) (r1 x y)) (not (local :r 1 :vars (y) (r1 y y))))")
    assert isinstance(q.root, QAnd) and isinstance(q.root.items[1], QNot)
    assert q.vars == ("x", "y") and q.radius == 2 and q.quantifier_rank() == 0


@pytest.mark.parametrize("text", [
    "(local :r 1 :vars (x) (r1 x))",
    "(local :r 1 :vars (x) (r1 x y))",
    "(scattered :q 0 :r 1 (r1 z z))",
    "(scattered :q 1 :r 1 (r1 z w))",
    "(local :vars (x) (r1 x x))",
    "(fo (r1 x y))",
    "(frob x)",
])
def test_parse_errors(example6, text):
    with pytest.raises(QuerySyntaxError):
        parse_query(text, example6.signature)


def test_fo_only_for_oracle(example6):
    q = parse_query("(fo (exists y (r1 x y)))", example6.signature, oracle=True)
    assert isinstance(q, FOQuery) and q.vars == ("x",)


def test_partitions_follow_bell_numbers():
    assert [len(set_partitions(range(k))) for k in range(5)] == [1, 1, 2, 5, 15]
    q = parse_query("(local :r 1 :vars (x y z) (and (r1 x y) (r1 y z)))")
    plans = dedup_plan(q)
    assert len(plans) == 5
    merged = [p for p in plans if len(p.classes) == 1][0]
    assert merged.query.vars == ("x",) and merged.expand((7,)) == (7, 7, 7)


def test_eval_on_type_examples(example6):
    s = decompress(example6).structure
    leaf = LocalFormula(parse_formula("(exists y (r1 x y))"), 1, ("x",))
    u_type = canonical_type(neighborhood(s, [s.labels.index("u")], 1))[0]
    assert eval_local_on_type(leaf, u_type)
    never = LocalFormula(parse_formula("(not (= x x))"), 1, ("x",))
    for t in naive_types(s, 1, 1):
        assert not eval_local_on_type(never, t)


def test_eval_on_type_checks_shape(example6):
    s = decompress(example6).structure
    t = canonical_type(neighborhood(s, [0], 1))[0]
    with pytest.raises(ValueError):
        eval_local_on_type(LocalFormula(parse_formula("(r1 x y)"), 1, ("x", "y")), t)
    with pytest.raises(ValueError):
        eval_local_on_type(LocalFormula(parse_formula("(r1 x x)"), 2, ("x",)), t)


def test_candidates_k1_are_realized_types(example6):
    s = decompress(example6).structure
    got = {t for t, _ in candidate_types(example6, 1, 1)}
    assert got == set(naive_types(s, 1, 1))


def _distinct(t):
    return len(set(t.centers)) == len(t.centers)


@pytest.mark.parametrize("seed", [0, 3, 7])
def test_candidates_k2_cover_realized_types(seed):
    slp = random_apex(seed, nonterminals=5)
    s = decompress(slp).structure
    cands = {t for t, _ in candidate_types(slp, 2, 1)}
    realized = {t for t in naive_types(s, 2, 1) if _distinct(t)}
    assert realized <= cands
    connected = {t for t in cands if len(components(t.structure())[0]) == 1}
    assert connected == {t for t in realized if len(components(t.structure())[0]) == 1}


def test_factorizations_pass_independent_check(example6):
    for t, facts in candidate_types(example6, 2, 1):
        assert facts and factorizations(example6, t) == facts
        for f in facts:
            assert check_factorization(f, t)
            assert f.m == len(components(t.structure())[0])


def test_factorizations_reject_repeated_centers(example6):
    s = decompress(example6).structure
    t = canonical_type(neighborhood(s, [0, 0], 1))[0]
    with pytest.raises(ValueError):
        factorizations(example6, t)


@pytest.mark.parametrize("seed", [1, 4])
def test_far_apart_carriers_give_the_type(seed):
    """Placing each component at a node of its carrier type, far apart, yields the type."""
    slp = random_apex(seed, nonterminals=6)
    s = decompress(slp).structure
    k, r = 2, 1
    p = rho(r, k)
    dist = distance_matrix(s)
    pis = {}
    by_type = {}
    for v in range(s.n):
        nb = neighborhood(s, [v], p)
        t, order = canonical_type(nb)
        pis[v] = [nb.origin[i] for i in order]
        by_type.setdefault(t, []).append(v)
    checked = 0
    for t, facts in candidate_types(slp, k, r):
        for f in facts:
            pools = [by_type.get(bt, []) for bt, _ in f.parts]
            for carriers in itertools.product(*pools):
                tup = [None] * k
                for block, (_, sigma), a in zip(f.blocks, f.parts, carriers):
                    for pos, x in zip(block, sigma):
                        tup[pos] = pis[a][x]
                comps = [[tup[pos] for pos in b] for b in f.blocks]
                if all(dist[x][y] > 2 * r + 1 for i, j in itertools.combinations(range(f.m), 2)
                       for x in comps[i] for y in comps[j]):
                    assert canonical_type(neighborhood(s, tup, r))[0] == t
                    checked += 1
    assert checked > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 8), st.integers(1, 2))
def test_eval_on_type_agrees_with_oracle(seed, count, r):
    rng = random.Random(seed)
    slp = random_apex(seed, nonterminals=count)
    s = decompress(slp).structure
    f = random_formula(rng, list(slp.signature), ["x"], 2)
    leaf = LocalFormula(f, r, ("x",))
    want = naive_eval(s, relativize(f, ("x",), r), ("x",))
    for t, members in naive_types(s, 1, r).items():
        truth = eval_local_on_type(leaf, t)
        assert all(((v,) in want) == truth for (v,) in members)
