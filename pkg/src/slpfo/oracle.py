"""Brute-force reference semantics.

Everything here works on explicit structures and is deliberately naive: it
shares no evaluation code with the engine, so agreement between the two is
meaningful.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .canon import NeighborhoodType, canonical_type
from .logic import And, Atom, DistGuard, Eq, Exists, Forall, Formula, Not, Or, Truth, free_vars
from .query import (BasicLocalSentence, FOQuery, GNFQuery, LocalFormula, QAnd, QConst, QNot, QOr)
from .slp import OrderedDag
from .structures import Structure, neighborhood

INF = float("inf")


class OracleBudgetError(ValueError):
    pass


@dataclass
class OracleBudget:
    max_universe: int = 5000
    max_depth: int = 64
    max_paths: int = 10 ** 6
    max_assignments: int = 10 ** 8


DEFAULT_BUDGET = OracleBudget()


def distance_matrix(s: Structure, budget: OracleBudget = DEFAULT_BUDGET) -> List[List[float]]:
    """All-pairs Gaifman distances, one BFS per node."""
    if s.n > budget.max_universe:
        raise OracleBudgetError(f"universe of {s.n} nodes exceeds {budget.max_universe}")
    nbrs: List[Set[int]] = [set() for _ in range(s.n)]
    for ts in s.relations.values():
        for t in ts:
            for a in t:
                for b in t:
                    if a != b:
                        nbrs[a].add(b)
    out = []
    for src in range(s.n):
        row = [INF] * s.n
        row[src] = 0
        todo = deque([src])
        while todo:
            x = todo.popleft()
            for y in nbrs[x]:
                if row[y] == INF:
                    row[y] = row[x] + 1
                    todo.append(y)
        out.append(row)
    return out


class _Evaluator:
    def __init__(self, s: Structure, dist, budget: OracleBudget):
        self.s = s
        self.dist = dist
        self.budget = budget
        self.balls: Dict[Tuple[int, int], List[int]] = {}

    def truth(self, f: Formula, env: Dict[str, int], depth: int = 0) -> bool:
        if depth > self.budget.max_depth:
            raise OracleBudgetError("formula nesting exceeds the budget")
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, Eq):
            return env[f.left] == env[f.right]
        if isinstance(f, Atom):
            return tuple(env[x] for x in f.args) in self.s.relations[f.rel]
        if isinstance(f, DistGuard):
            return min(self.dist[env[c]][env[f.var]] for c in f.centers) <= f.r
        if isinstance(f, Not):
            return not self.truth(f.body, env, depth + 1)
        if isinstance(f, And):
            for g in f.items:
                if not self.truth(g, env, depth + 1):
                    return False
            return True
        if isinstance(f, Or):
            for g in f.items:
                if self.truth(g, env, depth + 1):
                    return True
            return False
        if isinstance(f, (Exists, Forall)):
            results = []
            for v in self._domain(f, env):
                inner = dict(env)
                inner[f.var] = v
                results.append(self.truth(f.body, inner, depth + 1))
                if isinstance(f, Exists) and results[-1]:
                    return True
                if isinstance(f, Forall) and not results[-1]:
                    return False
            return isinstance(f, Forall)
        raise TypeError(f)

    def ball(self, v: int, r: int) -> List[int]:
        key = (v, r)
        got = self.balls.get(key)
        if got is None:
            got = self.balls[key] = [w for w, d in enumerate(self.dist[v]) if d <= r]
        return got

    def _domain(self, f, env):
        """Values the quantified variable must range over.

        Under a distance guard on the quantified variable only the ball
        around the guard's centers matters; other values make the guard
        false (for ``exists``) or true (for ``forall``).
        """
        body = f.body
        g = None
        if isinstance(f, Exists) and isinstance(body, And) and body.items:
            g = body.items[0]
        elif isinstance(f, Forall) and isinstance(body, Or) and body.items and isinstance(body.items[0], Not):
            g = body.items[0].body
        if isinstance(g, DistGuard) and g.var == f.var and f.var not in g.centers:
            out = set()
            for c in g.centers:
                out.update(self.ball(env[c], g.r))
            return sorted(out)
        return range(self.s.n)


def _rename_free(f: Formula, old: str, new: str) -> Formula:
    if isinstance(f, Eq):
        return Eq(new if f.left == old else f.left, new if f.right == old else f.right)
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(new if x == old else x for x in f.args))
    if isinstance(f, Not):
        return Not(_rename_free(f.body, old, new))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_rename_free(g, old, new) for g in f.items))
    if isinstance(f, (Exists, Forall)):
        if f.var == old:
            return f
        return type(f)(f.var, _rename_free(f.body, old, new))
    return f


_fresh = itertools.count()


def _guard(f: Formula, centers: Tuple[str, ...], r: int) -> Formula:
    """Restrict quantifiers to the ``r``-ball around ``centers``."""
    if isinstance(f, (Exists, Forall)) and f.var in centers:
        # a quantifier reusing a center's name must not capture the guard
        new = f"{f.var}#{next(_fresh)}"
        f = type(f)(new, _rename_free(f.body, f.var, new))
    if isinstance(f, Not):
        return Not(_guard(f.body, centers, r))
    if isinstance(f, And):
        return And(tuple(_guard(g, centers, r) for g in f.items))
    if isinstance(f, Or):
        return Or(tuple(_guard(g, centers, r) for g in f.items))
    if isinstance(f, Exists):
        return Exists(f.var, And((DistGuard(centers, f.var, r), _guard(f.body, centers, r))))
    if isinstance(f, Forall):
        return Forall(f.var, Or((Not(DistGuard(centers, f.var, r)), _guard(f.body, centers, r))))
    return f


def _check_assignments(n: int, k: int, budget: OracleBudget):
    if n > budget.max_universe:
        raise OracleBudgetError(f"universe of {n} nodes exceeds {budget.max_universe}")
    if n ** k > budget.max_assignments:
        raise OracleBudgetError(f"{n}^{k} assignments exceed the budget")


def naive_eval(s: Structure, f: Formula, vars: Optional[Sequence[str]] = None,
               budget: OracleBudget = DEFAULT_BUDGET, dist=None) -> Set[tuple]:
    """All assignments of ``vars`` (default: free variables) satisfying ``f``."""
    xs = tuple(free_vars(f) if vars is None else vars)
    _check_assignments(s.n, len(xs), budget)
    if dist is None:
        dist = distance_matrix(s, budget)
    ev = _Evaluator(s, dist, budget)
    out = set()
    for t in itertools.product(range(s.n), repeat=len(xs)):
        if ev.truth(f, dict(zip(xs, t))):
            out.add(t)
    return out


def sentence_holds(s: Structure, sent: BasicLocalSentence, dist,
                   budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    """``q`` witnesses of the local condition, pairwise more than ``2r`` apart."""
    ev = _Evaluator(s, dist, budget)
    cond = _guard(sent.formula, (sent.var,), sent.r)
    good = [v for v in range(s.n) if ev.truth(cond, {sent.var: v})]

    def pick(start, chosen):
        if len(chosen) == sent.q:
            return True
        for i in range(start, len(good)):
            v = good[i]
            if all(dist[v][w] > 2 * sent.r for w in chosen):
                if pick(i + 1, chosen + [v]):
                    return True
        return False

    return pick(0, [])


def naive_query(s: Structure, query: Union[GNFQuery, FOQuery],
                budget: OracleBudget = DEFAULT_BUDGET) -> Set[tuple]:
    dist = distance_matrix(s, budget)
    if isinstance(query, FOQuery):
        return naive_eval(s, query.formula, query.vars, budget, dist)
    xs = query.vars
    _check_assignments(s.n, len(xs), budget)
    ev = _Evaluator(s, dist, budget)
    sent = {x: sentence_holds(s, x, dist, budget) for x in query.sentences()}
    guarded = {}

    def go(node, env):
        if isinstance(node, LocalFormula):
            g = guarded.get(node)
            if g is None:
                g = guarded[node] = _guard(node.formula, node.vars, node.r)
            return ev.truth(g, env)
        if isinstance(node, BasicLocalSentence):
            return sent[node]
        if isinstance(node, QNot):
            return not go(node.item, env)
        if isinstance(node, QAnd):
            return all(go(x, env) for x in node.items)
        if isinstance(node, QOr):
            return any(go(x, env) for x in node.items)
        if isinstance(node, QConst):
            return node.value
        raise TypeError(node)

    out = set()
    for t in itertools.product(range(s.n), repeat=len(xs)):
        if go(query.root, dict(zip(xs, t))):
            out.add(t)
    return out


def naive_type_tuples(s: Structure, btype: NeighborhoodType, k: int, r: int,
                      budget: OracleBudget = DEFAULT_BUDGET) -> Set[tuple]:
    _check_assignments(s.n, k, budget)
    out = set()
    for t in itertools.product(range(s.n), repeat=k):
        ct, _ = canonical_type(neighborhood(s, t, r), check=False)
        if ct == btype:
            out.add(t)
    return out


def naive_types(s: Structure, k: int, r: int, budget: OracleBudget = DEFAULT_BUDGET) -> Dict[NeighborhoodType, Set[tuple]]:
    """Partition of all ``k``-tuples by neighborhood type."""
    _check_assignments(s.n, k, budget)
    out: Dict[NeighborhoodType, Set[tuple]] = {}
    for t in itertools.product(range(s.n), repeat=k):
        ct, _ = canonical_type(neighborhood(s, t, r), check=False)
        out.setdefault(ct, set()).add(t)
    return out


def naive_initial_paths(dag: OrderedDag, budget: OracleBudget = DEFAULT_BUDGET) -> List[Tuple[int, ...]]:
    """Every initial path, sorted with prefixes first."""
    out: List[Tuple[int, ...]] = []

    def walk(a, p):
        out.append(p)
        if len(out) > budget.max_paths:
            raise OracleBudgetError("path count exceeds the budget")
        for j, c in enumerate(dag.children[a], 1):
            walk(c, p + (j,))

    walk(dag.initial, ())
    return sorted(out)
