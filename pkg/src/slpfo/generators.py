"""Deterministic SLP families used by tests, benchmarks and the CLI."""

from __future__ import annotations

import random
from typing import Dict, List, Optional

from .slp import SLP, Production, Reference, val_degree, val_node_count
from .structures import Signature, Structure

TREE_SIG = Signature([("e", 2)])


def _prod(sig, name, labels, contacts, tuples, refs):
    ids = {lab: i for i, lab in enumerate(labels)}
    rels: Dict[str, list] = {n: [] for n, _ in sig}
    for rel, *args in tuples:
        rels[rel].append(tuple(ids[a] for a in args))
    s = Structure(sig, len(labels), rels, labels)
    return Production(name, len(contacts), s, tuple(ids[c] for c in contacts),
                      [Reference(t, tuple(ids[x] for x in att)) for t, att in refs])


def ptree(n: int) -> SLP:
    """Perfect binary tree of height ``n`` (edges point to the children)."""
    if n < 1:
        raise ValueError("ptree needs n >= 1")
    prods = [_prod(TREE_SIG, "S", ["root"], [], [], [(f"T{n - 1}", ["root"])] * 2)]
    for h in range(n - 1, -1, -1):
        refs = [(f"T{h - 1}", ["x"])] * 2 if h > 0 else []
        prods.append(_prod(TREE_SIG, f"T{h}", ["c", "x"], ["c"], [("e", "c", "x")], refs))
    return SLP(TREE_SIG, prods, "S")


def chain(n: int) -> SLP:
    """Directed path with ``n`` edges, one nonterminal per edge."""
    if n < 1:
        raise ValueError("chain needs n >= 1")
    prods = [_prod(TREE_SIG, "S", ["x0"], [], [], [("C1", ["x0"])])]
    for i in range(1, n + 1):
        refs = [(f"C{i + 1}", ["x"])] if i < n else []
        prods.append(_prod(TREE_SIG, f"C{i}", ["c", "x"], ["c"], [("e", "c", "x")], refs))
    return SLP(TREE_SIG, prods, "S")


GRID_SIG = Signature([("h", 2), ("v", 2)])


def grid_strip(n: int) -> SLP:
    """Ladder of ``n + 1`` rungs: horizontal ``h`` edges, vertical ``v`` rungs."""
    if n < 1:
        raise ValueError("grid-strip needs n >= 1")
    prods = [_prod(GRID_SIG, "S", ["x", "y"], [], [("v", "x", "y")], [("G1", ["x", "y"])])]
    for i in range(1, n + 1):
        refs = [(f"G{i + 1}", ["x", "y"])] if i < n else []
        prods.append(_prod(GRID_SIG, f"G{i}", ["a", "b", "x", "y"], ["a", "b"],
                           [("h", "a", "x"), ("h", "b", "y"), ("v", "x", "y")], refs))
    return SLP(GRID_SIG, prods, "S")


RANDOM_SIG = Signature([("p", 1), ("r1", 2), ("r2", 2)])


def random_apex(seed: int, nonterminals: int = 8, max_degree: int = 4,
                max_nodes: int = 5000, attempts: int = 200) -> SLP:
    """A random apex SLP; the seed determines the result."""
    rng = random.Random(seed)
    for _ in range(attempts):
        slp = _random_once(rng, rng.randint(1, nonterminals))
        if val_node_count(slp) <= max_nodes and val_degree(slp) <= max_degree:
            return slp
    raise RuntimeError("could not generate an SLP within the limits")


def _random_once(rng: random.Random, count: int) -> SLP:
    sig = RANDOM_SIG
    names = ["S"] + [f"N{i}" for i in range(1, count)]
    ranks = [0] + [rng.randint(1, 2) for _ in range(1, count)]
    # every nonterminal gets a parent so that all of them are reachable
    targets: List[List[int]] = [[] for _ in range(count)]
    for i in range(1, count):
        targets[rng.randrange(i)].append(i)
    for _ in range(rng.randint(0, count)):
        i = rng.randrange(count)
        if i + 1 < count:
            targets[i].append(rng.randint(i + 1, count - 1))
    prods: List[Production] = []
    for i, name in enumerate(names):
        rank = ranks[i]
        rng.shuffle(targets[i])
        internal = max([rng.randint(1, 3)] + [ranks[t] for t in targets[i]])
        labels = [f"c{j}" for j in range(1, rank + 1)] + [f"v{j}" for j in range(internal)]
        contacts = labels[:rank]
        inner = labels[rank:]
        tuples = []
        for _ in range(rng.randint(0, len(labels) + 1)):
            a, b = rng.choice(labels), rng.choice(labels)
            if a in contacts and b in contacts:
                continue
            tuples.append((rng.choice(("r1", "r2")), a, b))
        for v in inner:
            if rng.random() < 0.3:
                tuples.append(("p", v))
        refs = [(names[t], rng.sample(inner, ranks[t])) for t in targets[i]]
        prods.append(_prod(sig, name, labels, contacts, sorted(set(tuples)), refs))
    return SLP(sig, prods, "S")


FAMILIES = {"ptree": ptree, "chain": chain, "grid-strip": grid_strip}


def generate(family: str, n: Optional[int] = None, seed: int = 0, **kw) -> SLP:
    if family == "random-apex":
        return random_apex(seed, **kw)
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if n is None:
        raise ValueError(f"{family} needs a size parameter")
    return FAMILIES[family](n)
