"""Canonical forms and isomorphisms of small pointed structures.

Individualization-refinement search with automorphism pruning.  The color
refinement routine comes from the compiled ``_canon_ext`` module when it was
built, and from ``_canon_py`` otherwise.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .structures import (PointedNeighborhood, Signature, Structure, bfs_distances,
                         gaifman_adjacency, induced)

try:
    from ._canon_ext import refine as _refine
    KERNEL = "compiled"
except ImportError:  # pragma: no cover - depends on the build
    from ._canon_py import refine as _refine
    KERNEL = "python"

DEFAULT_CAP = 4096


class ValidityError(ValueError):
    pass


class SizeCapError(ValueError):
    pass


class NeighborhoodType:
    """A canonical pointed structure on ``0..n-1`` with ``k`` center positions."""

    __slots__ = ("signature", "k", "r", "n", "centers", "rels", "_key", "_hash", "_structure")

    def __init__(self, signature: Signature, k: int, r: int, n: int,
                 centers: Tuple[Optional[int], ...], rels: Tuple[tuple, ...]):
        self.signature = signature
        self.k = k
        self.r = r
        self.n = n
        self.centers = tuple(centers)
        self.rels = tuple(rels)
        self._key = (signature.relations, k, r, n, self.centers, self.rels)
        self._hash = hash(self._key)
        self._structure = None

    def __eq__(self, other):
        return isinstance(other, NeighborhoodType) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return _sortable(self._key) < _sortable(other._key)

    def __repr__(self):
        return f"NeighborhoodType(k={self.k}, r={self.r}, n={self.n}, {encode_type(self)!r})"

    def structure(self) -> Structure:
        if self._structure is None:
            rels = {name: ts for (name, _), ts in zip(self.signature, self.rels)}
            self._structure = Structure(self.signature, self.n, rels)
        return self._structure

    def as_neighborhood(self) -> PointedNeighborhood:
        return PointedNeighborhood(self.structure(), self.centers, self.r)


def _sortable(key):
    sig, k, r, n, centers, rels = key
    return (sig, k, r, n, tuple(-1 if c is None else c for c in centers), rels)


def encode_type(t: NeighborhoodType) -> str:
    """Compact text encoding, e.g. ``k1;r1;n3;c0;r1:0>1,0>2``."""
    parts = [f"k{t.k}", f"r{t.r}", f"n{t.n}",
             "c" + ",".join("-" if c is None else str(c) for c in t.centers)]
    for (name, a), ts in zip(t.signature, t.rels):
        if ts:
            parts.append(name + ":" + ",".join(">".join(map(str, x)) for x in ts))
    return ";".join(parts)


def decode_type(text: str, signature: Signature) -> NeighborhoodType:
    parts = text.strip().split(";")
    try:
        k = int(parts[0][1:])
        r = int(parts[1][1:])
        n = int(parts[2][1:])
        cs = parts[3][1:]
        centers = tuple(None if c == "-" else int(c) for c in cs.split(",")) if cs else ()
        found: Dict[str, tuple] = {}
        for p in parts[4:]:
            name, _, body = p.partition(":")
            found[name] = tuple(sorted(tuple(int(x) for x in item.split(">")) for item in body.split(",")))
    except (IndexError, ValueError):
        raise ValueError(f"malformed type encoding {text!r}") from None
    for name in found:
        if name not in signature:
            raise ValueError(f"unknown relation {name!r} in type encoding")
    rels = tuple(found.get(name, ()) for name, _ in signature)
    return NeighborhoodType(signature, k, r, n, centers, rels)


# ---------------------------------------------------------------- search

class _Prepared:
    __slots__ = ("n", "offsets", "labs", "targets", "init", "arcs", "nbr_sets")

    def __init__(self, s: Structure, centers: Sequence[Optional[int]]):
        n = s.n
        rel_idx = {name: i for i, (name, _) in enumerate(s.signature)}
        cpos: List[list] = [[] for _ in range(n)]
        for i, c in enumerate(centers):
            if c is not None:
                cpos[c].append(i)
        unary: List[list] = [[] for _ in range(n)]
        loops: List[list] = [[] for _ in range(n)]
        out: List[list] = [[] for _ in range(n)]
        arcs = []
        for name, a in s.signature:
            ri = rel_idx[name]
            for t in s.relations[name]:
                if a == 1:
                    unary[t[0]].append(ri)
                elif t[0] == t[1]:
                    loops[t[0]].append(ri)
                else:
                    x, y = t
                    out[x].append((2 * ri, y))
                    out[y].append((2 * ri + 1, x))
                    arcs.append((ri, x, y))
        keys = []
        for v in range(n):
            cp = (0, tuple(cpos[v])) if cpos[v] else (1, ())
            keys.append((cp, tuple(sorted(unary[v])), tuple(sorted(loops[v]))))
        rank = {key: i for i, key in enumerate(sorted(set(keys)))}
        self.n = n
        self.init = [rank[key] for key in keys]
        offsets = [0]
        labs: List[int] = []
        targets: List[int] = []
        nbr_sets = []
        for v in range(n):
            out[v].sort()
            for lab, w in out[v]:
                labs.append(lab)
                targets.append(w)
            offsets.append(len(labs))
            nbr_sets.append(frozenset(out[v]))
        self.offsets = offsets
        self.labs = labs
        self.targets = targets
        self.arcs = arcs
        self.nbr_sets = nbr_sets

    def refine(self, colors):
        return _refine(colors, self.offsets, self.labs, self.targets)

    def code(self, perm):
        return tuple(sorted([(ri, perm[x], perm[y]) for ri, x, y in self.arcs]))


def _individualize(colors, v):
    return [2 * c + (0 if u == v else 1) for u, c in enumerate(colors)]


def _target_cell(colors):
    counts: Dict[int, int] = {}
    for c in colors:
        counts[c] = counts.get(c, 0) + 1
    best = None
    for c, m in counts.items():
        if m > 1 and (best is None or c < best):
            best = c
    return best


class _Search:
    def __init__(self, g: _Prepared):
        self.g = g
        self.first = None
        self.best = None
        self.gens: List[List[int]] = []

    def run(self):
        g = self.g
        root = g.refine(g.init)
        self._rec(root, [])
        return self.best

    def _leaf(self, perm):
        code = self.g.code(perm)
        if self.first is None:
            self.first = (code, perm)
            self.best = (code, perm)
            return
        for ref_code, ref_perm in (self.first, self.best):
            if code == ref_code:
                inv = [0] * len(perm)
                for v, p in enumerate(ref_perm):
                    inv[p] = v
                gen = [inv[perm[v]] for v in range(len(perm))]
                if gen not in self.gens:
                    self.gens.append(gen)
                return
        if code < self.best[0]:
            self.best = (code, perm)

    def _orbit_rep(self, prefix):
        n = self.g.n
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for gen in self.gens:
            if all(gen[p] == p for p in prefix):
                for v in range(n):
                    a, b = find(v), find(gen[v])
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return find

    def _rec(self, colors, prefix):
        cell = _target_cell(colors)
        if cell is None:
            self._leaf(colors)
            return
        cands = [v for v, c in enumerate(colors) if c == cell]
        explored: List[int] = []
        ngens = -1
        find = None
        for v in cands:
            if explored:
                if ngens != len(self.gens):
                    find = self._orbit_rep(prefix)
                    ngens = len(self.gens)
                fv = find(v)
                if any(find(e) == fv for e in explored):
                    continue
            self._rec(self.g.refine(_individualize(colors, v)), prefix + [v])
            explored.append(v)


def _lex_least(g: _Prepared, order: List[int]) -> List[int]:
    """Smallest ``a∘order`` over automorphisms ``a``, compared position-wise."""
    n = g.n
    root = g.refine(g.init)
    if len(set(root)) == n:
        return list(order)
    nbr_sets = g.nbr_sets
    pi = [-1] * n
    used = [False] * n
    where = [-1] * n  # input node -> assigned canonical position (left side)

    def consistent(x, v):
        # arcs from x to already-assigned nodes must map onto arcs from v
        for lab, y in nbr_sets[x]:
            j = where[y]
            if j >= 0 and (lab, pi[j]) not in nbr_sets[v]:
                return False
        cnt_x = sum(1 for _, y in nbr_sets[x] if where[y] >= 0)
        cnt_v = sum(1 for _, z in nbr_sets[v] if used[z])
        return cnt_x == cnt_v

    def rec(i, left, right):
        if i == n:
            return True
        x = order[i]
        cands = [v for v in range(n) if right[v] == left[x] and not used[v]]
        single = len(cands) == 1
        for v in cands:
            if not consistent(x, v):
                continue
            pi[i] = v
            used[v] = True
            where[x] = i
            if single:
                if rec(i + 1, left, right):
                    return True
            else:
                nl = g.refine(_individualize(left, x))
                nr = g.refine(_individualize(right, v))
                if sorted(nl) == sorted(nr) and nl[x] == nr[v]:
                    if rec(i + 1, nl, nr):
                        return True
            pi[i] = -1
            used[v] = False
            where[x] = -1
        return False

    if not rec(0, root, list(root)):  # pragma: no cover - order itself is an isomorphism
        raise RuntimeError("isomorphism search failed")
    return pi


def canonical_form(s: Structure, centers: Sequence[Optional[int]] = (),
                   cap: int = DEFAULT_CAP, lex_least: bool = True):
    """Return ``(rels, centers, order)`` of the canonical relabeling.

    ``order[i]`` is the input node placed at canonical position ``i``.
    """
    if s.n > cap:
        raise SizeCapError(f"structure has {s.n} nodes, cap is {cap}")
    g = _Prepared(s, centers)
    if s.n == 0:
        return tuple(() for _ in s.signature), tuple(centers), []
    _, perm = _Search(g).run()
    order = [0] * s.n
    for v, p in enumerate(perm):
        order[p] = v
    if lex_least:
        order = _lex_least(g, order)
        perm = [0] * s.n
        for p, v in enumerate(order):
            perm[v] = p
    rels = tuple(tuple(sorted(tuple(perm[x] for x in t) for t in s.relations[name]))
                 for name, _ in s.signature)
    cents = tuple(None if c is None else perm[c] for c in centers)
    return rels, cents, order


def canonical_type(nb: PointedNeighborhood, check: bool = True,
                   cap: int = DEFAULT_CAP) -> Tuple[NeighborhoodType, List[int]]:
    """Canonical type of a pointed neighborhood and the map type -> input.

    Components are canonicalized separately and concatenated in the order
    of their least center position, so the result is well defined even when
    the neighborhood falls apart.
    """
    s = nb.structure
    k = nb.k
    if s.n > cap:
        raise SizeCapError(f"neighborhood has {s.n} nodes, cap is {cap}")
    adj = gaifman_adjacency(s)
    cents = [c for c in nb.centers if c is not None]
    if not cents and s.n:
        raise ValidityError("neighborhood without centers")
    if check:
        reach = bfs_distances(adj, cents, nb.radius)
        if len(reach) != s.n:
            raise ValidityError("node beyond the radius of every center")
    # group nodes by component, components keyed by least center position
    comp = [-1] * s.n
    blocks: List[List[int]] = []
    for pos, c in enumerate(nb.centers):
        if c is None or comp[c] >= 0:
            continue
        members = sorted(bfs_distances(adj, [c]))
        for x in members:
            comp[x] = len(blocks)
        blocks.append(members)
    if any(c < 0 for c in comp):
        raise ValidityError("component without a center")
    if len(blocks) == 1 and len(blocks[0]) == s.n:
        rels, cc, order = canonical_form(s, nb.centers, cap)
        return NeighborhoodType(s.signature, k, nb.radius, s.n, cc, rels), order
    order: List[int] = []
    rel_lists = [[] for _ in s.signature]
    centers = [None] * k
    for members in blocks:
        sub, keep = induced(s, members)
        local = {v: i for i, v in enumerate(keep)}
        sub_c = [None if c is None or c not in local else local[c] for c in nb.centers]
        rels, cc, sub_order = canonical_form(sub, sub_c, cap)
        off = len(order)
        for i, c in enumerate(cc):
            if c is not None:
                centers[i] = c + off
        for j, ts in enumerate(rels):
            rel_lists[j].extend(tuple(x + off for x in t) for t in ts)
        order.extend(keep[i] for i in sub_order)
    rels = tuple(tuple(sorted(ts)) for ts in rel_lists)
    return NeighborhoodType(s.signature, k, nb.radius, s.n, tuple(centers), rels), order


def find_isomorphism(a: Structure, a_centers: Sequence[Optional[int]],
                     b: Structure, b_centers: Sequence[Optional[int]],
                     cap: int = DEFAULT_CAP) -> Optional[List[int]]:
    """A center- and relation-preserving bijection ``a -> b`` as a list, or ``None``."""
    if a.n > cap or b.n > cap:
        raise SizeCapError(f"structures exceed the cap of {cap} nodes")
    if (a.signature != b.signature or a.n != b.n or len(a_centers) != len(b_centers)
            or [c is None for c in a_centers] != [c is None for c in b_centers]):
        return None
    if any(len(a.relations[r]) != len(b.relations[r]) for r in a.relations):
        return None
    ra, ca, oa = canonical_form(a, a_centers, cap, lex_least=False)
    rb, cb, ob = canonical_form(b, b_centers, cap, lex_least=False)
    if ra != rb or ca != cb:
        return None
    iso = [0] * a.n
    for p in range(a.n):
        iso[oa[p]] = ob[p]
    return iso
