"""Hypothesis strategies shared by the unit tests."""

from hypothesis import strategies as st

from slpfo.structures import Signature, Structure

BINARY = Signature([("p", 1), ("e", 2), ("f", 2)])
TERNARY = Signature([("p", 1), ("e", 2), ("t", 3)])


@st.composite
def structures(draw, sig=BINARY, max_nodes=9, max_tuples=14):
    n = draw(st.integers(1, max_nodes))
    node = st.integers(0, n - 1)
    rels = {}
    for name, a in sig:
        rels[name] = draw(st.lists(st.tuples(*[node] * a), max_size=max_tuples))
    return Structure(sig, n, rels)


@st.composite
def permutations(draw, n):
    return draw(st.permutations(list(range(n))))


@st.composite
def dags(draw, max_nodes=12, max_edges=30):
    """Ordered dags on ``N0..`` with edges pointing to larger ids, rooted at ``N0``."""
    from slpfo.slp import OrderedDag
    n = draw(st.integers(1, max_nodes))
    children = [[] for _ in range(n)]
    if n > 1:
        edges = draw(st.lists(st.integers(0, n - 2).flatmap(
            lambda a: st.tuples(st.just(a), st.integers(a + 1, n - 1))), max_size=max_edges))
        for a, b in edges:
            children[a].append(b)
    return OrderedDag(tuple(f"N{i}" for i in range(n)), tuple(tuple(c) for c in children), 0)
