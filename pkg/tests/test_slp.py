import pytest
from hypothesis import given, settings, strategies as st

from conftest import fixture_path
from slpfo.canon import find_isomorphism
from slpfo.generators import random_apex
from slpfo.slp import (ApexRequired, DecompressionTooLarge, build_dag, decompress, embed,
                       embed_contact, format_slp, load_slp, parse_slp, reduce_arity_slp,
                       require_apex, slp_size, val_degree, val_node_count, validate)
from slpfo.structures import ParseError, max_degree, reduce_arity

SINGLE = "signature r1/2\ninitial S\nnonterminal S rank 0\nnode S a\n"

TERNARY_SLP = """
signature t/3 e/2
initial S
nonterminal S rank 0
node S a
node S b
node S c
tuple S t a b c
ref S B 1=a 2=b
ref S B 1=b 2=c
nonterminal B rank 2
contact B 1 s
node B w
contact B 2 z
tuple B t s w z
tuple B e w s
"""


def test_example6_is_valid_apex(example6):
    rep = validate(example6)
    assert rep.ok and rep.apex
    assert "apex: yes" in rep.render()


def test_nonapex_fixture():
    slp = load_slp(fixture_path("nonapex.slp"))
    rep = validate(slp)
    assert not rep.apex and rep.apex_by_production["A"] is False
    with pytest.raises(ApexRequired):
        require_apex(slp)


def test_cyclic_fixture():
    rep = validate(load_slp(fixture_path("cyclic.slp")))
    assert not rep.ok and rep.acyclicity


def test_self_reference_is_a_cycle():
    rep = validate(parse_slp(SINGLE + "ref S S\n"))
    assert rep.acyclicity == ["cycle S -> S"]


def test_rank_and_injectivity_violations(example6):
    text = format_slp(example6).replace("ref S B 1=u 2=v", "ref S B 1=u 2=u")
    assert validate(parse_slp(text)).injectivity
    text = format_slp(example6).replace("ref S B 1=u 2=v", "ref S B 1=u")
    assert validate(parse_slp(text)).rank


def test_unreachable_nonterminal():
    rep = validate(parse_slp(SINGLE + "nonterminal X rank 0\nnode X q\n"))
    assert rep.unreachable and not rep.ok


@pytest.mark.parametrize("bad", [
    "initial S\n",
    "signature r1/2\nnonterminal S rank 0\n",
    "signature r1/2\ninitial S\nnonterminal S rank 0\nnode S a\ntuple S r1 a\n",
    "signature r1/2\ninitial S\nnode S a\n",
    "signature r1/2\ninitial S\nnonterminal S rank 0\nnode S a\nnode S a\n",
])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_slp(bad)


def test_format_roundtrip(example6):
    again = parse_slp(format_slp(example6))
    assert format_slp(again) == format_slp(example6)
    assert decompress(again).structure == decompress(example6).structure


def test_slp_size_examples(example6):
    assert slp_size(parse_slp(SINGLE)) == 1
    assert slp_size(example6) == 28
    text = format_slp(example6) + "\nref A B 1=b2 2=b1\n"
    assert slp_size(parse_slp(text)) == 28 + 3


def test_dag_gamma(example6):
    dag = build_dag(example6)
    assert dag.gamma("S") == ["A", "A", "B"]
    assert dag.gamma("A") == ["B"] and dag.gamma("B") == []
    assert build_dag(parse_slp(SINGLE)).children == ((),)


def test_duplicate_reference_kept_twice(example6):
    text = format_slp(example6) + "\nref A B 1=b1 2=b2\n"
    assert build_dag(parse_slp(text)).gamma("A") == ["B", "B"]


def test_decompress_sizes(example6):
    b = decompress(example6, "B").structure
    a = decompress(example6, "A").structure
    s = decompress(example6).structure
    assert (b.n, b.num_tuples()) == (3, 2)
    assert (a.n, a.num_tuples()) == (4, 4)
    assert (s.n, s.num_tuples(), s.size()) == (9, 11, 31)
    assert [val_node_count(example6, x) for x in "SAB"] == [9, 4, 3]


def test_decompress_cap(example6):
    with pytest.raises(DecompressionTooLarge):
        decompress(example6, cap=8)


def test_val_degree_example6(example6):
    assert val_degree(example6) == 4 == max_degree(decompress(example6).structure)
    assert val_degree(parse_slp(SINGLE)) == 0


def test_embed_examples(example6):
    w = 1  # local id of w in B
    assert embed(example6, "S", (2, 1), ((), w)) == ((2, 1), w)
    # first contact of B lands on the first attachment of A's reference (b1)
    assert embed(example6, "S", (2, 1), ((), 0)) == ((2,), 1)
    assert embed_contact(example6, "S", (2, 1), 1) == ((2,), 1)
    assert embed(example6, "A", (), ((1,), w)) == ((1,), w)
    with pytest.raises(ValueError):
        embed(example6, "S", (2, 1), ((), 7))


def test_embed_agrees_with_decompression(example6):
    dec = decompress(example6)
    for path in [(1,), (2,), (3,), (1, 1), (2, 1)]:
        sub = decompress(example6, example6.end("S", path))
        for q, v in sub.reps:
            assert embed(example6, "S", path, (q, v)) in dec.index


def test_reduce_arity_identity_on_binary(example6):
    assert reduce_arity_slp(example6) is example6


def test_reduce_arity_one_ternary_tuple():
    slp = parse_slp(TERNARY_SLP)
    red = reduce_arity_slp(slp)
    s = red["S"].structure
    assert s.n == 4 and len(s.relations["E1"]) == len(s.relations["E3"]) == 1
    assert validate(red).ok


def test_reduce_arity_commutes_with_decompression():
    slp = parse_slp(TERNARY_SLP)
    left = decompress(reduce_arity_slp(slp)).structure
    right = reduce_arity(decompress(slp).structure)
    assert find_isomorphism(left, (), right, ()) is not None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 12))
def test_val_degree_matches_decompression(seed, count):
    slp = random_apex(seed, nonterminals=count)
    assert validate(slp).ok and slp.apex
    dec = decompress(slp)
    assert val_degree(slp) == max_degree(dec.structure)
    assert val_node_count(slp) == dec.structure.n
    for rep in dec.reps:
        assert embed(slp, slp.initial, (), rep) == rep
