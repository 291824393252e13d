"""Lexicographic enumeration of dag paths with exact ranks.

The extended dag gives every node ``a`` an extra leaf child ``a'`` at
position 0 (node id ``N + a``); initial paths of the original dag are in
bijection with initial-to-leaf paths of the extended one.  Edge weights are
chosen so that the weight of a path equals its lexicographic rank.

For a set of useful nodes, ``ContractedDag`` keeps what can reach a useful
leaf, removes nodes of outdegree one by merging their chains into single
edges, and indexes the first-child and last-child forests for level
ancestor queries.  ``MinMaxPath`` is a cursor over its initial-to-leaf
paths: runs of first-child (min) and last-child (max) edges are stored as
single triples so that the successor and the removal of the last edge only
touch a bounded suffix.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .levelanc import make_level_ancestor
from .slp import OrderedDag

MIN, MAX, IDX, PART, STUB = 0, 1, 2, 3, 4
KIND_NAMES = {MIN: "min", MAX: "max", IDX: "idx", PART: "part", STUB: "stub"}


class EmptyPathError(ValueError):
    pass


class RestoreError(RuntimeError):
    pass


class WeightedDag:
    """Extended dag with path counts, edge weights and initial-path counts."""

    def __init__(self, dag: OrderedDag, counter=None):
        self.dag = dag
        n = len(dag.names)
        self.n = n
        self.initial = dag.initial
        order = dag.topological()
        number = [0] * n
        weights: List[List[int]] = [None] * n
        for a in reversed(order):
            acc = 1  # the leaf child a'
            ws = [0]
            for c in dag.children[a]:
                ws.append(acc)
                acc += number[c]
            number[a] = acc
            weights[a] = ws
        self.number_paths = number
        self.edge_weights = weights
        reach = [False] * n
        reach[dag.initial] = True
        count = [0] * n
        count[dag.initial] = 1
        for a in order:
            if not reach[a]:
                continue
            for c in dag.children[a]:
                reach[c] = True
                count[c] += count[a]
        self.reachable = reach
        self.paths_to = count
        if counter is not None:
            counter.steps += n + sum(len(cs) for cs in dag.children)

    # extended-dag helpers ------------------------------------------
    def children_ext(self, a: int) -> List[int]:
        return [self.n + a] + list(self.dag.children[a])

    def is_leaf(self, x: int) -> bool:
        return x >= self.n

    def name(self, x: int) -> str:
        return self.dag.names[x] + "'" if x >= self.n else self.dag.names[x]

    def edge_weight(self, a: int, i: int) -> int:
        return self.edge_weights[a][i]

    def count_paths_to(self, a: int) -> int:
        return self.paths_to[a]

    def lex_of_local(self, a: int, q: Sequence[int], limit: Optional[int] = None) -> int:
        """Rank offset of the path ``q`` (reference indices) starting at ``a``."""
        if limit is not None and len(q) > limit:
            raise ValueError(f"local path longer than {limit}")
        total = 0
        for j in q:
            total += self.edge_weights[a][j]
            a = self.dag.children[a][j - 1]
        return total

    def lex(self, path: Sequence[int]) -> int:
        return self.lex_of_local(self.initial, path)

    def end(self, path: Sequence[int], start: Optional[int] = None) -> int:
        a = self.initial if start is None else start
        for j in path:
            a = self.dag.children[a][j - 1]
        return a

    def resolve_lex(self, rank: int) -> Tuple[int, ...]:
        if not 0 <= rank < self.number_paths[self.initial]:
            raise ValueError(f"rank {rank} out of range")
        a = self.initial
        path = []
        while rank:
            ws = self.edge_weights[a]
            lo, hi = 1, len(ws) - 1
            while lo < hi:  # largest j with ws[j] <= rank
                mid = (lo + hi + 1) // 2
                if ws[mid] <= rank:
                    lo = mid
                else:
                    hi = mid - 1
            rank -= ws[lo]
            path.append(lo)
            a = self.dag.children[a][lo - 1]
        return tuple(path)

    def format_path(self, path: Sequence[int], start: Optional[int] = None) -> str:
        a = self.initial if start is None else start
        out = [self.dag.names[a]]
        for j in path:
            a = self.dag.children[a][j - 1]
            out.append(f"{j}{self.dag.names[a]}")
        return "".join(out)


class CEdge:
    """An edge of a contracted dag.

    ``first`` is the node right after ``src`` on the underlying path,
    ``orig`` the child index of that first step in the extended dag, and
    ``long`` tells whether the underlying path has two or more edges.
    """

    __slots__ = ("src", "idx", "dst", "w", "first", "orig", "long")

    def __init__(self, src, idx, dst, w, first, orig, long):
        self.src = src
        self.idx = idx
        self.dst = dst
        self.w = w
        self.first = first
        self.orig = orig
        self.long = long

    def __repr__(self):
        return f"CEdge({self.src},{self.idx}->{self.dst}, w={self.w}, first={self.first}, long={self.long})"


class ContractedDag:
    def __init__(self, wd: WeightedDag, useful: Iterable[int], counter=None, la_method=None):
        self.wd = wd
        n = wd.n
        self.n = n
        useful = set(useful)
        self.useful = useful
        total = 2 * n
        keep = [False] * total
        for a in useful:
            keep[n + a] = True
        order = wd.dag.topological()
        for a in reversed(order):
            if any(keep[c] for c in wd.children_ext(a)):
                keep[a] = True
        self.keep = keep
        s = wd.initial
        self.empty = not keep[s]
        # pruned children: (orig index, child, weight)
        pruned: Dict[int, List[Tuple[int, int, int]]] = {}
        for a in order:
            if keep[a]:
                pruned[a] = [(i, c, wd.edge_weights[a][i])
                             for i, c in enumerate(wd.children_ext(a)) if keep[c]]
        self.pruned = pruned
        single = {a for a, cs in pruned.items() if len(cs) == 1}
        self.single = single
        # omega(x): end of the non-branching chain from x; g(x): its weight
        omega = list(range(total))
        g = [0] * total
        for a in reversed(order):
            if a in single:
                _, c, w = pruned[a][0]
                omega[a] = omega[c]
                g[a] = w + g[c]
        self.omega = omega
        self.g = g
        # forest of non-branching chains: parent = the only child
        nb_parent = [-1] * total
        for a in single:
            nb_parent[a] = pruned[a][0][1]
        self.nb = make_level_ancestor(nb_parent, counter, la_method)
        self.edges: Dict[int, List[CEdge]] = {}
        for a, cs in pruned.items():
            if a in single:
                continue
            es = []
            for j, (i, c, w) in enumerate(cs, 1):
                es.append(CEdge(a, j, omega[c], w + g[c], c, i, c in single))
            self.edges[a] = es
        self.stub: Optional[CEdge] = None
        if self.empty:
            self.start = -1
        elif s in single:
            i, c, w = pruned[s][0]
            self.stub = CEdge(s, 1, omega[c], w + g[c], c, i, c in single)
            self.start = omega[s]
        else:
            self.start = s
        # min / max forests with chain weights towards the forest roots
        min_parent = [-1] * total
        max_parent = [-1] * total
        for a, es in self.edges.items():
            min_parent[a] = es[0].dst
            max_parent[a] = es[-1].dst
        self.min_la = make_level_ancestor(min_parent, counter, la_method)
        self.max_la = make_level_ancestor(max_parent, counter, la_method)
        wmin = [0] * total
        wmax = [0] * total
        for a in reversed(order):
            es = self.edges.get(a)
            if es:
                wmin[a] = es[0].w + wmin[es[0].dst]
                wmax[a] = es[-1].w + wmax[es[-1].dst]
        self.wmin = wmin
        self.wmax = wmax
        if counter is not None:
            counter.steps += total + sum(len(cs) for cs in pruned.values())

    # queries ------------------------------------------------------
    def is_leaf(self, x: int) -> bool:
        return x >= self.n

    def min_end(self, x: int) -> int:
        return self.min_la.ancestor(x, self.min_la.depth[x])

    def max_end(self, x: int) -> int:
        return self.max_la.ancestor(x, self.max_la.depth[x])

    def wp_min(self, v: int, u: int) -> int:
        """Node right before ``u`` on the min-path from ``v``."""
        return self.min_la.next_link(u, v)

    def wp_max(self, v: int, u: int) -> int:
        return self.max_la.next_link(u, v)

    def nb_prev(self, x: int, first: int) -> int:
        """Node right before ``x`` on the non-branching chain starting at ``first``."""
        return self.nb.next_link(x, first)

    def cursor(self, counter=None) -> "MinMaxPath":
        return MinMaxPath(self, counter)


def prune_contract(wd: WeightedDag, useful: Iterable[int], counter=None, la_method=None) -> ContractedDag:
    return ContractedDag(wd, useful, counter, la_method)


class MinMaxPath:
    """Cursor over the initial-to-leaf paths of a ``ContractedDag``.

    ``triples`` holds tuples ``(kind, u, j, v, w, edge)``; ``weight`` is the
    sum of the ``w`` entries and equals the rank of the represented path.
    """

    __slots__ = ("ctx", "triples", "weight", "records", "counter", "done")

    def __init__(self, ctx: ContractedDag, counter=None):
        self.ctx = ctx
        self.counter = counter
        self.records: List[tuple] = []
        self.triples: List[tuple] = []
        self.weight = 0
        self.done = ctx.empty
        if ctx.empty:
            return
        if ctx.stub is not None:
            e = ctx.stub
            self._push((STUB, e.src, 1, e.dst, e.w, e))
        self._push_min(ctx.start)

    # basic edits ---------------------------------------------------
    def _push(self, t):
        self.triples.append(t)
        self.weight += t[4]

    def _pop(self):
        t = self.triples.pop()
        self.weight -= t[4]
        return t

    def _push_min(self, x):
        ctx = self.ctx
        if not ctx.is_leaf(x):
            self._push((MIN, x, 1, ctx.min_end(x), ctx.wmin[x], None))

    def _tick(self, n=1):
        if self.counter is not None:
            self.counter.steps += n

    def snapshot(self):
        return (tuple(self.triples), self.weight, len(self.records))

    def copy(self) -> "MinMaxPath":
        other = MinMaxPath.__new__(MinMaxPath)
        other.ctx = self.ctx
        other.counter = self.counter
        other.records = list(self.records)
        other.triples = list(self.triples)
        other.weight = self.weight
        other.done = self.done
        return other

    @property
    def end_leaf(self) -> int:
        """Leaf reached by the (full) represented path."""
        if self.triples:
            return self.triples[-1][3]
        return self.ctx.start

    def end_node(self) -> int:
        """Last extended-dag node of the represented (possibly shortened) path."""
        if self.triples:
            return self.triples[-1][3]
        return self.ctx.wd.initial

    # successor -----------------------------------------------------
    def next_path(self) -> bool:
        """Advance to the next path; return ``False`` at the end."""
        if self.done:
            return False
        if self.records:
            raise RestoreError("cursor advanced while shortened")
        ctx = self.ctx
        T = self.triples
        base = 1 if ctx.stub is not None else 0
        self._tick()
        if len(T) == base:
            self.done = True
            return False
        if T[-1][0] == MAX:
            if len(T) == base + 1:
                self.done = True
                return False
            self._pop()
        t = self._pop()
        if t[0] == MIN:
            v1, v2 = t[1], t[3]
            v3 = ctx.wp_min(v1, v2)
            if v1 != v3:
                self._push((MIN, v1, 1, v3, ctx.wmin[v1] - ctx.wmin[v3], None))
            es = ctx.edges[v3]
            nxt = es[1]
            if len(es) > 2:
                self._push((IDX, v3, 2, nxt.dst, nxt.w, None))
            else:
                self._push_max_edge(v3, nxt, base, v1 == v3)
            self._push_min(nxt.dst)
        elif t[0] == IDX:
            v1, j = t[1], t[2]
            es = ctx.edges[v1]
            nxt = es[j]
            if j + 1 < len(es):
                self._push((IDX, v1, j + 1, nxt.dst, nxt.w, None))
            else:
                self._push_max_edge(v1, nxt, base, True)
            self._push_min(nxt.dst)
        else:  # pragma: no cover - guarded by the representation invariant
            raise RuntimeError("malformed path representation")
        return True

    def _push_max_edge(self, u, e, base, may_merge):
        T = self.triples
        if may_merge and len(T) > base and T[-1][0] == MAX and T[-1][3] == u:
            m = self._pop()
            self._push((MAX, m[1], -1, e.dst, m[4] + e.w, None))
        else:
            self._push((MAX, u, -1, e.dst, e.w, None))

    # shorten / restore ---------------------------------------------
    def shorten(self):
        """Drop the last extended-dag edge; return it as ``(src, index, dst)``."""
        ctx = self.ctx
        T = self.triples
        if not T:
            raise EmptyPathError("cannot shorten the empty path")
        self._tick()
        t = self._pop()
        pushed = 0
        kind = t[0]
        edge = None
        if kind == MIN or kind == MAX:
            u, v = t[1], t[3]
            if kind == MIN:
                x = ctx.wp_min(u, v)
                if x != u:
                    self._push((MIN, u, 1, x, ctx.wmin[u] - ctx.wmin[x], None))
                    pushed += 1
                edge = ctx.edges[x][0]
            else:
                x = ctx.wp_max(u, v)
                if x != u:
                    self._push((MAX, u, -1, x, ctx.wmax[u] - ctx.wmax[x], None))
                    pushed += 1
                edge = ctx.edges[x][-1]
        elif kind == IDX:
            edge = ctx.edges[t[1]][t[2] - 1]
        elif kind == STUB:
            edge = t[5]
        if edge is not None:
            if not edge.long:
                removed = (edge.src, edge.orig, edge.dst)
            else:
                y = ctx.nb_prev(edge.dst, edge.first)
                self._push((PART, edge.src, edge.idx, y, edge.w - ctx.g[y], edge))
                pushed += 1
                removed = (y, ctx.pruned[y][0][0], edge.dst)
        else:  # PART
            edge = t[5]
            x = t[3]
            if x == edge.first:
                removed = (edge.src, edge.orig, x)
            else:
                y = ctx.nb_prev(x, edge.first)
                self._push((PART, edge.src, edge.idx, y, edge.w - ctx.g[y], edge))
                pushed += 1
                removed = (y, ctx.pruned[y][0][0], x)
        self.records.append((t, pushed, removed))
        return removed

    def restore(self):
        if not self.records:
            raise RestoreError("nothing to restore")
        self._tick()
        t, pushed, _ = self.records.pop()
        for _ in range(pushed):
            self._pop()
        self._push(t)

    def removed_edges(self) -> List[Tuple[int, int, int]]:
        return [r[2] for r in self.records]

    # inspection ------------------------------------------------------
    def explicit(self) -> List[Tuple[int, int, int]]:
        """Underlying extended-dag edges ``(src, index, dst)`` (linear time)."""
        ctx = self.ctx
        out: List[Tuple[int, int, int]] = []

        def chain(e: CEdge, stop: Optional[int] = None):
            out.append((e.src, e.orig, e.first))
            x = e.first
            while x in ctx.single and x != stop:
                i, c, _ = ctx.pruned[x][0]
                out.append((x, i, c))
                x = c

        for kind, u, j, v, w, e in self.triples:
            if kind in (MIN, MAX):
                x = u
                while x != v:
                    ce = ctx.edges[x][0 if kind == MIN else -1]
                    chain(ce)
                    x = ce.dst
            elif kind == IDX:
                chain(ctx.edges[u][j - 1])
            elif kind == STUB:
                chain(e)
            else:
                chain(e, stop=v)
        return out

    def path(self) -> Tuple[int, ...]:
        """The represented initial path of the original dag (reference indices)."""
        return tuple(i for _, i, dst in self.explicit() if i > 0)

    def check(self) -> None:
        """Assert the representation invariants."""
        kinds = [t[0] for t in self.triples]
        for a, b in zip(kinds, kinds[1:]):
            assert not (a == b == MIN) and not (a == b == MAX), kinds
        assert sum(t[4] for t in self.triples) == self.weight


def first_path(ctx: ContractedDag, counter=None) -> MinMaxPath:
    return MinMaxPath(ctx, counter)
