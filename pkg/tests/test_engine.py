import random

import pytest
from hypothesis import given, settings, strategies as st
from randquery import random_formula

from slpfo.canon import canonical_type
from slpfo.engine import (EOE, Engine, EnumSession, LexRep, QueryRun, assemble_output,
                          enumerate_query, enumerate_type, eval_sentence, extension_budget,
                          materialize)
from slpfo.generators import ptree, random_apex
from slpfo.logic import parse_formula
from slpfo.oracle import distance_matrix, naive_query, naive_type_tuples, naive_types, sentence_holds
from slpfo.query import BasicLocalSentence, candidate_types, parse_query
from slpfo.slp import decompress, load_slp
from slpfo.structures import ArityError, neighborhood
from conftest import fixture_path


def _resolved(eng, dec, tuples):
    return [tuple(dec.index[eng.resolve(x)] for x in t) for t in tuples]


def _items_by_node(eng, dec, rho_):
    out = {}
    for t in eng.types(rho_).types:
        for x in materialize(eng.node_stream(t, rho_)):
            out[dec.index[eng.resolve(eng.lexrep(x, x.entry.node))]] = x
    return out


def test_engine_needs_binary_apex():
    with pytest.raises(Exception):
        Engine(load_slp(fixture_path("nonapex.slp")))
    from slpfo.slp import parse_slp
    ternary = parse_slp("signature t/3\ninitial S\nnonterminal S rank 0\nnode S a\ntuple S t a a a\n")
    with pytest.raises(ArityError):
        Engine(ternary)


def test_sentinel_prints_as_eoe():
    assert repr(EOE) == "EOE" and type(EOE)() is EOE


def test_streams_cover_example6_once(example6):
    eng = Engine(example6)
    dec = decompress(example6)
    s = dec.structure
    seen = []
    for t in eng.types(1).types:
        for x in eng.node_stream(t, 1):
            v = dec.index[eng.resolve(eng.lexrep(x, x.entry.node))]
            assert canonical_type(neighborhood(s, [v], 1))[0] == t
            seen.append(v)
    assert sorted(seen) == list(range(9))


def test_example6_lex_representation(example6):
    eng = Engine(example6)
    dec = decompress(example6)
    items = _items_by_node(eng, dec, 1)
    w2 = dec.structure.labels.index("S2A1B:w")
    x = items[w2]
    rep = eng.lexrep(x, x.entry.node)
    assert rep == LexRep(4, 1) and rep.label == "w" and str(rep) == "4:w"
    assert eng.resolve(rep) == ((2, 1), 1)


def test_assemble_output_single_component(example6):
    eng = Engine(example6)
    dec = decompress(example6)
    s = dec.structure
    w2 = s.labels.index("S2A1B:w")
    t = canonical_type(neighborhood(s, [w2], 1))[0]
    (fact,) = [f for bt, fs in candidate_types(example6, 1, 1) if bt == t for f in fs]
    got = {assemble_output(eng, fact, [x]) for x in materialize(eng.node_stream(fact.parts[0][0], 1))}
    assert (LexRep(4, 1),) in got


def test_distance_examples(example6):
    eng = Engine(example6)
    dec = decompress(example6)
    labels = dec.structure.labels
    items = _items_by_node(eng, dec, 1)
    a = items[labels.index("S1A1B:w")]
    b = items[labels.index("S2A1B:w")]
    budget = extension_budget(1, 1, 3, 0)
    assert eng.distance_leq(a, [a.entry.node], a, [a.entry.node], 3, budget)
    assert not eng.distance_leq(a, [a.entry.node], b, [b.entry.node], 3, budget)
    assert distance_matrix(dec.structure)[labels.index("S1A1B:w")][labels.index("S2A1B:w")] == 5
    # the cursor is left as it was found
    assert a.cursor.records == [] and b.cursor.records == []


def test_example6_queries(example6):
    eng = Engine(example6)
    dec = decompress(example6)
    q = parse_query("(local :r 1 :vars (x) true)")
    assert sorted(_resolved(eng, dec, enumerate_query(eng, q))) == [(v,) for v in range(9)]
    q = parse_query("(local :r 1 :vars (x) (exists y (r1 x y)))", example6.signature)
    got = _resolved(eng, dec, enumerate_query(eng, q))
    assert len(got) == len(set(got)) == 7
    assert set(got) == naive_query(dec.structure, q)


def test_two_component_type_matches_oracle(example6):
    eng = Engine(example6)
    dec = decompress(example6)
    split = [t for t, _ in candidate_types(example6, 2, 1) if t.centers[1] >= 3
             and t.n >= 4][:5]
    assert split
    for t in split:
        got = _resolved(eng, dec, enumerate_type(eng, t))
        assert len(got) == len(set(got))
        assert set(got) == naive_type_tuples(dec.structure, t, 2, 1)


def test_single_level_sessions_stream(example6):
    eng = Engine(example6)
    for t, facts in candidate_types(example6, 1, 1):
        for f in facts:
            assert EnumSession(eng, f).short == [False]


def test_counts_on_small_trees():
    for h in (2, 3, 4):
        slp = ptree(h)
        eng = Engine(slp)
        classes = naive_types(decompress(slp).structure, 1, 1)
        for t in eng.types(1).types:
            assert eng.count_type_nodes(t, 1) == len(classes[t])


def test_unrealized_type_counts_zero(example6):
    other = Engine(ptree(3)).types(1).types
    eng = Engine(example6)
    missing = [t for t in other if t not in eng.types(1).lists]
    assert missing and all(eng.count_type_nodes(t, 1) == 0 for t in missing)


def test_sentences_on_example6(example6):
    eng = Engine(example6)
    s = decompress(example6).structure
    dist = distance_matrix(s)
    for text, q in [("(exists y (r1 z y))", 1), ("(exists y (r1 z y))", 2), ("(exists y (r1 z y))", 4),
                    ("(not (= z z))", 1), ("(r1 z z)", 1)]:
        sent = BasicLocalSentence(q, 1, parse_formula(text), "z")
        assert eval_sentence(eng, sent) == sentence_holds(s, sent, dist)
    assert eval_sentence(eng, BasicLocalSentence(1, 1, parse_formula("(exists y (r1 z y))"), "z"))
    assert not eval_sentence(eng, BasicLocalSentence(1, 1, parse_formula("(not (= z z))"), "z"))


def test_query_caps(example6):
    eng = Engine(example6)
    q = parse_query("(local :r 9 :vars (x) true)")
    with pytest.raises(ValueError):
        list(enumerate_query(eng, q))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 8))
def test_random_two_variable_queries(seed, count):
    rng = random.Random(seed)
    slp = random_apex(seed, nonterminals=count)
    dec = decompress(slp)
    eng = Engine(slp)
    f = random_formula(rng, list(slp.signature), ["x", "y"], 1)
    from slpfo.query import GNFQuery, LocalFormula
    q = GNFQuery(LocalFormula(f, 1, ("x", "y")), ("x", "y"))
    run = QueryRun()
    got = _resolved(eng, dec, enumerate_query(eng, q, run))
    assert len(got) == len(set(got))
    assert set(got) == naive_query(dec.structure, q)
    for sess in run.sessions:
        assert sess.stats.skipped_max <= sess.threshold
