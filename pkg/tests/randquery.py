"""Random formulas and GNF-shaped queries for the oracle cross-checks."""

import random

from slpfo.logic import And, Atom, Eq, Exists, Forall, Not, Or, Truth
from slpfo.query import BasicLocalSentence, GNFQuery, LocalFormula, QAnd, QNot, QOr


def random_formula(rng, sig, free, qr, fresh=("y", "z", "w")):
    """Formula with free variables among ``free`` and quantifier rank <= ``qr``."""
    rels = list(sig)
    choice = rng.random()
    if qr > 0 and choice < 0.35:
        v = fresh[0]
        body = random_formula(rng, sig, list(free) + [v], qr - 1, fresh[1:] + (fresh[0] + "'",))
        return (Exists if rng.random() < 0.6 else Forall)(v, body)
    if choice < 0.5:
        return Not(random_formula(rng, sig, free, qr, fresh))
    if choice < 0.65:
        return (And if rng.random() < 0.5 else Or)((random_formula(rng, sig, free, qr, fresh),
                                                    random_formula(rng, sig, free, qr, fresh)))
    if not free:
        return Truth(rng.random() < 0.5)
    if choice < 0.72:
        return Eq(rng.choice(free), rng.choice(free))
    name, a = rng.choice(rels)
    return Atom(name, tuple(rng.choice(free) for _ in range(a)))


def random_query(rng, sig, k=None, r=None, qr=2, sentences=True):
    k = rng.randint(1, 2) if k is None else k
    xs = ("x1", "x2", "x3")[:k]
    leaves = []
    for _ in range(rng.randint(1, 2)):
        rr = rng.randint(1, 2) if r is None else r
        sub = list(xs) if rng.random() < 0.7 else [rng.choice(xs)]
        leaves.append(LocalFormula(random_formula(rng, sig, sub, qr), rr, tuple(sub)))
    if sentences and rng.random() < 0.4:
        rr = rng.randint(1, 2) if r is None else r
        leaves.append(BasicLocalSentence(rng.randint(1, 3), rr,
                                         random_formula(rng, sig, ["z"], min(qr, 1), ("u", "t")), "z"))
    node = leaves[0]
    for leaf in leaves[1:]:
        if rng.random() < 0.3:
            leaf = QNot(leaf)
        node = (QAnd if rng.random() < 0.5 else QOr)((node, leaf))
    # variables in order of first occurrence, as the parser would list them
    seen = []
    stack = [node]
    while stack:
        n = stack.pop(0)
        if isinstance(n, LocalFormula):
            seen += [x for x in n.vars if x not in seen]
        elif isinstance(n, QNot):
            stack.insert(0, n.item)
        elif isinstance(n, (QAnd, QOr)):
            stack[0:0] = list(n.items)
    return GNFQuery(node, tuple(seen))
