"""Queries built from local formulas and scattered-node sentences.

A query is a Boolean combination of

* ``(local :r R :vars (x1 .. xk) psi)``: ``psi`` with every quantifier
  restricted to distance ``R`` from the listed variables, and
* ``(scattered :q Q :r R theta)``: there are ``Q`` nodes, pairwise more than
  ``2R`` apart, each satisfying ``theta`` restricted to radius ``R`` around it.

Local formulas only depend on the neighborhood type of the tuple, so the
engine evaluates them once per candidate type.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .canon import NeighborhoodType, canonical_type, find_isomorphism
from .logic import (Formula, QuerySyntaxError, SAtom, SList, formula_from_sexpr, free_vars, holds,
                    quantifier_rank, read_sexprs, substitute)
from .structures import (PointedNeighborhood, Signature, bfs_distances, components,
                         gaifman_adjacency, induced, neighborhood)


def rho(r: int, k: int) -> int:
    """Radius of the single-node types that carry ``(k, r)``-types."""
    if r < 1 or k < 1:
        raise ValueError("rho needs r >= 1 and k >= 1")
    return 2 * r * k - r + k - 1


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class LocalFormula:
    formula: Formula
    r: int
    vars: Tuple[str, ...]

    @property
    def k(self) -> int:
        return len(self.vars)


@dataclass(frozen=True)
class BasicLocalSentence:
    q: int
    r: int
    formula: Formula
    var: str


@dataclass(frozen=True)
class QNot:
    item: "QNode"


@dataclass(frozen=True)
class QAnd:
    items: Tuple["QNode", ...]


@dataclass(frozen=True)
class QOr:
    items: Tuple["QNode", ...]


@dataclass(frozen=True)
class QConst:
    value: bool


QNode = Union[LocalFormula, BasicLocalSentence, QNot, QAnd, QOr, QConst]


@dataclass(frozen=True)
class FOQuery:
    """Arbitrary first-order formula; only the oracle evaluates these."""
    formula: Formula
    vars: Tuple[str, ...]


@dataclass(frozen=True)
class GNFQuery:
    root: QNode
    vars: Tuple[str, ...]

    @property
    def k(self) -> int:
        return len(self.vars)

    def leaves(self) -> List[Union[LocalFormula, BasicLocalSentence]]:
        return list(_leaves(self.root))

    def local_leaves(self) -> List[LocalFormula]:
        return [x for x in self.leaves() if isinstance(x, LocalFormula)]

    def sentences(self) -> List[BasicLocalSentence]:
        out = []
        for x in self.leaves():
            if isinstance(x, BasicLocalSentence) and x not in out:
                out.append(x)
        return out

    @property
    def radius(self) -> int:
        return max([1] + [x.r for x in self.local_leaves()])

    def quantifier_rank(self) -> int:
        return max([0] + [quantifier_rank(x.formula) for x in self.leaves()])


def _leaves(node):
    if isinstance(node, (LocalFormula, BasicLocalSentence)):
        yield node
    elif isinstance(node, QNot):
        yield from _leaves(node.item)
    elif isinstance(node, (QAnd, QOr)):
        for x in node.items:
            yield from _leaves(x)


# ---------------------------------------------------------------- parsing

def _options(items, allowed, pos):
    opts = {}
    i = 0
    while i < len(items) and isinstance(items[i], SAtom) and items[i].text.startswith(":"):
        key = items[i].text[1:]
        if key not in allowed:
            raise QuerySyntaxError(f"unknown option :{key}", items[i].pos)
        if i + 1 >= len(items):
            raise QuerySyntaxError(f"option :{key} needs a value", items[i].pos)
        opts[key] = items[i + 1]
        i += 2
    return opts, items[i:]


def _nat(x, what):
    if not isinstance(x, SAtom) or not x.text.isdigit():
        raise QuerySyntaxError(f"{what} must be a natural number", x.pos)
    return int(x.text)


def _varlist(x):
    if not isinstance(x, SList) or not all(isinstance(v, SAtom) for v in x.items):
        raise QuerySyntaxError(":vars expects a list of variables", x.pos)
    names = tuple(v.text for v in x.items)
    if len(set(names)) != len(names):
        raise QuerySyntaxError("repeated variable in :vars", x.pos)
    return names


def _query_node(e, sig, oracle):
    if isinstance(e, SAtom):
        if e.text in ("true", "false"):
            return QConst(e.text == "true")
        raise QuerySyntaxError(f"unexpected atom {e.text!r}", e.pos)
    if not e.items or not isinstance(e.items[0], SAtom):
        raise QuerySyntaxError("expected a query form", e.pos)
    op = e.items[0].text
    rest = e.items[1:]
    if op == "local":
        opts, body = _options(rest, {"r", "vars"}, e.pos)
        if "r" not in opts or "vars" not in opts or len(body) != 1:
            raise QuerySyntaxError("local needs :r, :vars and one formula", e.pos)
        f = formula_from_sexpr(body[0], sig)
        xs = _varlist(opts["vars"])
        extra = [x for x in free_vars(f) if x not in xs]
        if extra:
            raise QuerySyntaxError(f"scope error: free variables {extra} not listed in :vars", e.pos)
        return LocalFormula(f, _nat(opts["r"], ":r"), xs)
    if op == "scattered":
        opts, body = _options(rest, {"q", "r"}, e.pos)
        if "q" not in opts or "r" not in opts or len(body) != 1:
            raise QuerySyntaxError("scattered needs :q, :r and one formula", e.pos)
        f = formula_from_sexpr(body[0], sig)
        fv = free_vars(f)
        if len(fv) > 1:
            raise QuerySyntaxError("scope error: scattered formula needs at most one free variable", e.pos)
        q = _nat(opts["q"], ":q")
        r = _nat(opts["r"], ":r")
        if q < 1:
            raise QuerySyntaxError(":q must be at least 1", e.pos)
        return BasicLocalSentence(q, r, f, fv[0] if fv else "z")
    if op == "not":
        if len(rest) != 1:
            raise QuerySyntaxError("not takes one argument", e.pos)
        return QNot(_query_node(rest[0], sig, oracle))
    if op in ("and", "or"):
        items = tuple(_query_node(x, sig, oracle) for x in rest)
        if not items:
            return QConst(op == "and")
        return QAnd(items) if op == "and" else QOr(items)
    if op == "fo":
        raise QuerySyntaxError("(fo ...) is only allowed as the whole query", e.pos)
    raise QuerySyntaxError(f"unknown query form {op!r}", e.pos)


def parse_query(text: str, signature: Optional[Signature] = None, oracle: bool = False):
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise QuerySyntaxError("expected exactly one query")
    e = exprs[0]
    if isinstance(e, SList) and e.items and isinstance(e.items[0], SAtom) and e.items[0].text == "fo":
        if not oracle:
            raise QuerySyntaxError("(fo ...) queries are only evaluated by the oracle", e.pos)
        opts, body = _options(e.items[1:], {"vars"}, e.pos)
        if len(body) != 1:
            raise QuerySyntaxError("fo takes one formula", e.pos)
        f = formula_from_sexpr(body[0], signature)
        fv = free_vars(f)
        xs = _varlist(opts["vars"]) if "vars" in opts else fv
        extra = [x for x in fv if x not in xs]
        if extra:
            raise QuerySyntaxError(f"scope error: free variables {extra} not listed in :vars", e.pos)
        return FOQuery(f, xs)
    root = _query_node(e, signature, oracle)
    seen: List[str] = []
    for leaf in _leaves(root):
        if isinstance(leaf, LocalFormula):
            for x in leaf.vars:
                if x not in seen:
                    seen.append(x)
    return GNFQuery(root, tuple(seen))


def quantifier_rank_of(f: Formula) -> int:
    return quantifier_rank(f)


# ---------------------------------------------------------------- evaluation on types

def _no_guards(a, b):
    raise AssertionError("unguarded formula expected")


def eval_local_on_type(leaf: LocalFormula, t: NeighborhoodType,
                       positions: Optional[Dict[str, int]] = None, memo: Optional[dict] = None) -> bool:
    """Truth of the relativized leaf at the centers of ``t``.

    ``positions`` maps leaf variables to center positions of ``t`` (0-based);
    by default the i-th variable is the i-th center.  Restricting every
    quantifier to the ``r``-ball of the centers is the same as evaluating the
    plain formula on the substructure induced by that ball, which is what
    happens here.  Distances inside the type are the true ones because a
    shortest path of length at most ``r`` from a center never leaves the ball.
    """
    if positions is None:
        if t.k != leaf.k:
            raise ValueError(f"type has {t.k} centers, formula has {leaf.k} variables")
        positions = {x: i for i, x in enumerate(leaf.vars)}
    if t.r < leaf.r:
        raise ValueError(f"type radius {t.r} is below the formula radius {leaf.r}")
    cents = []
    for x in leaf.vars:
        c = t.centers[positions[x]]
        if c is None:
            raise ValueError(f"variable {x} has no center in the type")
        cents.append(c)
    s = t.structure()
    ball = bfs_distances(gaifman_adjacency(s), cents, leaf.r)
    sub, keep = induced(s, ball)
    local = {v: i for i, v in enumerate(keep)}
    env = {x: local[c] for x, c in zip(leaf.vars, cents)}
    if memo is None:
        return holds(sub, leaf.formula, env, _no_guards)
    # many candidate types share the ball around a leaf's centers
    key = (leaf, sub.n, tuple(sub.relations[name] for name, _ in sub.signature), tuple(env.values()))
    got = memo.get(key)
    if got is None:
        got = memo[key] = holds(sub, leaf.formula, env, _no_guards)
    return got


def evaluate_on_type(root: QNode, t: NeighborhoodType, positions: Dict[str, int],
                     sentences: Dict[BasicLocalSentence, bool], memo: Optional[dict] = None) -> bool:
    def go(n):
        if isinstance(n, LocalFormula):
            return eval_local_on_type(n, t, positions, memo)
        if isinstance(n, BasicLocalSentence):
            return sentences[n]
        if isinstance(n, QNot):
            return not go(n.item)
        if isinstance(n, QAnd):
            return all(go(x) for x in n.items)
        if isinstance(n, QOr):
            return any(go(x) for x in n.items)
        if isinstance(n, QConst):
            return n.value
        raise TypeError(n)

    return go(root)


def evaluate_without_locals(root: QNode, sentences: Dict[BasicLocalSentence, bool]) -> bool:
    def go(n):
        if isinstance(n, BasicLocalSentence):
            return sentences[n]
        if isinstance(n, QNot):
            return not go(n.item)
        if isinstance(n, QAnd):
            return all(go(x) for x in n.items)
        if isinstance(n, QOr):
            return any(go(x) for x in n.items)
        if isinstance(n, QConst):
            return n.value
        raise ValueError("query has local formulas")

    return go(root)


# ---------------------------------------------------------------- dedup plans

def set_partitions(items: Sequence[int]) -> List[List[List[int]]]:
    """All partitions of ``items``; blocks and members in ascending order."""
    items = list(items)
    if not items:
        return [[]]
    head, rest = items[0], items[1:]
    out = []
    for part in set_partitions(rest):
        out.append([[head]] + part)
        for i in range(len(part)):
            out.append(part[:i] + [[head] + part[i]] + part[i + 1:])
    for p in out:
        p.sort(key=lambda b: b[0])
    out.sort()
    return out


@dataclass(frozen=True)
class Plan:
    classes: Tuple[Tuple[int, ...], ...]   # equivalence classes of positions, ordered by minimum
    query: GNFQuery                         # over the class representatives, distinct values
    inflate: Tuple[int, ...]                # position i of the answer comes from class inflate[i]

    def expand(self, t: tuple) -> tuple:
        return tuple(t[c] for c in self.inflate)


def _remap(node, mapping):
    if isinstance(node, LocalFormula):
        xs = []
        for x in node.vars:
            y = mapping.get(x, x)
            if y not in xs:
                xs.append(y)
        return LocalFormula(substitute(node.formula, mapping), node.r, tuple(xs))
    if isinstance(node, QNot):
        return QNot(_remap(node.item, mapping))
    if isinstance(node, QAnd):
        return QAnd(tuple(_remap(x, mapping) for x in node.items))
    if isinstance(node, QOr):
        return QOr(tuple(_remap(x, mapping) for x in node.items))
    return node


def dedup_plan(query: GNFQuery) -> List[Plan]:
    k = query.k
    plans = []
    for part in set_partitions(range(k)):
        cls_of = {}
        for ci, block in enumerate(part):
            for p in block:
                cls_of[p] = ci
        mapping = {query.vars[p]: query.vars[part[cls_of[p]][0]] for p in range(k)}
        reps = tuple(query.vars[b[0]] for b in part)
        plans.append(Plan(tuple(tuple(b) for b in part), GNFQuery(_remap(query.root, mapping), reps),
                          tuple(cls_of[p] for p in range(k))))
    return plans


# ---------------------------------------------------------------- factorizations

@dataclass(frozen=True)
class ConsistentFactorization:
    """Components of a ``(k, r)``-type carried by single-node ``rho``-types.

    ``blocks[i]`` are the (0-based) positions of component ``i``, ordered by
    their least position; ``parts[i] = (B_i, sigma_i)`` with ``sigma_i``
    aligned to ``blocks[i]`` and ``sigma_i[0] = 0`` (the center of ``B_i``).
    """
    k: int
    r: int
    rho: int
    blocks: Tuple[Tuple[int, ...], ...]
    parts: Tuple[Tuple[NeighborhoodType, Tuple[int, ...]], ...]

    @property
    def m(self) -> int:
        return len(self.blocks)


def _component_options(slp, rho_: int, r: int, s: int):
    """Map component type -> list of (B', sigma) realizing it (block size ``s``)."""
    from .expansion import type_index
    key = ("components", rho_, r, s)
    cached = slp._cache.get(key)
    if cached is not None:
        return cached
    ti = type_index(slp, rho_)
    out: Dict[NeighborhoodType, List[Tuple[NeighborhoodType, Tuple[int, ...]]]] = {}
    for bt in ti.types:
        st = bt.structure()
        adj = gaifman_adjacency(st)
        reach = sorted(v for v in bfs_distances(adj, [0], (2 * r + 1) * (s - 1)) if v != 0)
        for rest in itertools.permutations(reach, s - 1):
            sigma = (0,) + rest
            nb = neighborhood(st, sigma, r)
            if s > 1 and len(components(nb.structure)[0]) != 1:
                continue
            ct, _ = canonical_type(nb, check=False)
            out.setdefault(ct, []).append((bt, sigma))
    out = {c: out[c] for c in sorted(out)}
    slp._cache[key] = out
    return out


def _assemble(sig: Signature, k: int, r: int, blocks, comps: Sequence[NeighborhoodType]) -> NeighborhoodType:
    centers = [None] * k
    rels = [[] for _ in sig]
    off = 0
    for block, c in zip(blocks, comps):
        for i, p in enumerate(block):
            centers[p] = c.centers[i] + off
        for j, ts in enumerate(c.rels):
            rels[j].extend(tuple(x + off for x in t) for t in ts)
        off += c.n
    return NeighborhoodType(sig, k, r, off, tuple(centers), tuple(tuple(sorted(ts)) for ts in rels))


def candidate_types(slp, k: int, r: int) -> List[Tuple[NeighborhoodType, List[ConsistentFactorization]]]:
    """All ``(k, r)``-types with distinct centers that realized ``rho``-types can carry."""
    key = ("candidates", k, r)
    cached = slp._cache.get(key)
    if cached is not None:
        return cached
    p = rho(r, k)
    sig = slp.signature
    out = []
    for part in set_partitions(range(k)):
        blocks = tuple(tuple(b) for b in part)
        options = [list(_component_options(slp, p, r, len(b)).items()) for b in blocks]
        for combo in itertools.product(*options):
            bt = _assemble(sig, k, r, blocks, [c for c, _ in combo])
            facts = [ConsistentFactorization(k, r, p, blocks, tuple(choice))
                     for choice in itertools.product(*[lst for _, lst in combo])]
            out.append((bt, facts))
    slp._cache[key] = out
    return out


def factorizations(slp, t: NeighborhoodType) -> List[ConsistentFactorization]:
    if len({c for c in t.centers}) != len(t.centers) or None in t.centers:
        raise ValueError("centers must be pairwise distinct (use dedup_plan first)")
    for bt, facts in candidate_types(slp, t.k, t.r):
        if bt == t:
            return facts
    return []


def check_factorization(fact: ConsistentFactorization, t: NeighborhoodType) -> bool:
    """Re-check the defining conditions of a factorization of ``t``."""
    k = t.k
    seen = sorted(p for b in fact.blocks for p in b)
    if seen != list(range(k)):
        return False
    adj = gaifman_adjacency(t.structure())
    comp_of = {}
    for i, c in enumerate(t.centers):
        comp_of[i] = frozenset(bfs_distances(adj, [c]))
    for block, (bt, sigma) in zip(fact.blocks, fact.parts):
        if list(block) != sorted(block) or sigma[0] != 0 or len(sigma) != len(block):
            return False
        nodes = comp_of[block[0]]
        if any(comp_of[p] != nodes for p in block):
            return False
        if any(t.centers[p] in nodes for p in range(k) if p not in block):
            return False
        sub, keep = induced(t.structure(), nodes)
        local = {v: i for i, v in enumerate(keep)}
        a_cent = [local[t.centers[p]] for p in block]
        nb = neighborhood(bt.structure(), sigma, t.r)
        if find_isomorphism(sub, a_cent, nb.structure, list(nb.centers)) is None:
            return False
    return True
