"""Level-ancestor queries on forests.

``LevelAncestor`` answers ``ancestor(v, k)`` in constant time using the
long-path decomposition extended to ladders plus jump pointers stored at the
leaves.  ``BinaryLifting`` is the logarithmic fallback.
"""

from __future__ import annotations

import os
from typing import List, Optional, Sequence


class NotAnAncestor(ValueError):
    pass


class _Base:
    parent: List[int]
    depth: List[int]

    def ancestor(self, v: int, k: int) -> int:
        raise NotImplementedError

    def next_link(self, u: int, v: int) -> int:
        """Child of ``u`` on the tree path from ``u`` down to ``v``."""
        du, dv = self.depth[u], self.depth[v]
        if dv <= du or self.ancestor(v, dv - du) != u:
            raise NotAnAncestor(f"{u} is not a proper ancestor of {v}")
        return self.ancestor(v, dv - du - 1)

    def is_ancestor(self, u: int, v: int) -> bool:
        du, dv = self.depth[u], self.depth[v]
        return dv >= du and self.ancestor(v, dv - du) == u


def _depths(parent: Sequence[int]):
    n = len(parent)
    children: List[List[int]] = [[] for _ in range(n)]
    roots = []
    for v, p in enumerate(parent):
        if p < 0:
            roots.append(v)
        else:
            children[p].append(v)
    depth = [0] * n
    order = []
    stack = list(roots)
    while stack:
        v = stack.pop()
        order.append(v)
        for c in children[v]:
            depth[c] = depth[v] + 1
            stack.append(c)
    if len(order) != n:
        raise ValueError("parent array contains a cycle")
    return children, depth, order


class LevelAncestor(_Base):
    """Ladder decomposition plus jump pointers.

    Preprocessing is linear apart from the jump tables, which hold
    ``floor(log2(depth)) + 1`` entries per leaf.
    """

    def __init__(self, parent: Sequence[int], counter=None):
        n = len(parent)
        self.parent = list(parent)
        children, depth, order = _depths(parent)
        self.depth = depth
        height = [0] * n
        long_child = [-1] * n
        for v in reversed(order):
            best = -1
            for c in children[v]:
                if best < 0 or height[c] > height[best]:
                    best = c
            if best >= 0:
                height[v] = height[best] + 1
                long_child[v] = best
        # long paths, each turned into a ladder listed bottom-up
        self.ladder_of = [0] * n
        self.ladder_pos = [0] * n
        ladders: List[List[int]] = []
        leaf_below = [0] * n
        steps = 0
        for top in order:
            if parent[top] >= 0 and long_child[parent[top]] == top:
                continue
            path = [top]
            while long_child[path[-1]] >= 0:
                path.append(long_child[path[-1]])
            path.reverse()
            h = len(path)
            ladder = list(path)
            x = parent[top]
            while x >= 0 and len(ladder) < 2 * h:
                ladder.append(x)
                x = parent[x]
            idx = len(ladders)
            for i, v in enumerate(path):
                self.ladder_of[v] = idx
                self.ladder_pos[v] = i
                leaf_below[v] = path[0]
            ladders.append(ladder)
            steps += len(ladder)
        self.ladders = ladders
        self.leaf_below = leaf_below
        # jump pointers at leaves: jump[v][i] = 2^i-th ancestor
        self.jump = {}
        for v in range(n):
            if children[v]:
                continue
            table = [parent[v]] if parent[v] >= 0 else []
            i = 0
            while table and table[-1] >= 0 and (2 << i) <= depth[v]:
                table.append(self._climb_ladder(table[-1], 1 << i))
                i += 1
            self.jump[v] = table
            steps += len(table) + 1
        if counter is not None:
            counter.steps += steps + n

    def _climb_ladder(self, v: int, k: int) -> int:
        lad = self.ladders[self.ladder_of[v]]
        pos = self.ladder_pos[v] + k
        if pos < len(lad):
            return lad[pos]
        # only reachable while building the tables
        while k:
            v = self.parent[v]
            k -= 1
        return v

    def ancestor(self, v: int, k: int) -> int:
        if k < 0 or k > self.depth[v]:
            raise NotAnAncestor(f"node {v} has no ancestor {k} levels up")
        if k == 0:
            return v
        leaf = self.leaf_below[v]
        k += self.depth[leaf] - self.depth[v]
        i = k.bit_length() - 1
        y = self.jump[leaf][i]
        rest = k - (1 << i)
        if rest == 0:
            return y
        lad = self.ladders[self.ladder_of[y]]
        return lad[self.ladder_pos[y] + rest]


class BinaryLifting(_Base):
    def __init__(self, parent: Sequence[int], counter=None):
        n = len(parent)
        self.parent = list(parent)
        _, self.depth, _ = _depths(parent)
        levels = max(1, max(self.depth, default=0).bit_length())
        up = [list(parent)]
        for _ in range(1, levels):
            prev = up[-1]
            up.append([prev[prev[v]] if prev[v] >= 0 else -1 for v in range(n)])
        self.up = up
        if counter is not None:
            counter.steps += n * levels

    def ancestor(self, v: int, k: int) -> int:
        if k < 0 or k > self.depth[v]:
            raise NotAnAncestor(f"node {v} has no ancestor {k} levels up")
        i = 0
        while k:
            if k & 1:
                v = self.up[i][v]
            k >>= 1
            i += 1
        return v


def make_level_ancestor(parent: Sequence[int], counter=None, method: Optional[str] = None):
    method = method or os.environ.get("SLPFO_LEVEL_ANCESTOR", "ladder")
    if method == "binary":
        return BinaryLifting(parent, counter)
    return LevelAncestor(parent, counter)
