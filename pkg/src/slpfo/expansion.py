"""Local decompression around the nodes a production creates directly.

Nodes of ``val(A)`` are ``(path, v)`` pairs (see ``slp``).  The neighbors of
a node are found from four kinds of tuples, matching the four BFS moves:
tuples of the same production between internal nodes (stay), tuples of a
referenced production between two of its contacts (stay through a
reference), tuples of a referenced production reaching an internal node of
it (move down) and tuples of the current production touching one of its own
contacts (move up to the host).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .canon import NeighborhoodType, canonical_type
from .slp import SLP, ARep, Path, require_apex
from .structures import PointedNeighborhood, Structure, bfs_distances

STAY, STAY_REF, DOWN, UP = 0, 1, 2, 3


class Counter:
    """Shared operation counter used for cost instrumentation."""

    __slots__ = ("steps",)

    def __init__(self):
        self.steps = 0

    def add(self, n=1):
        self.steps += n


class _Prod:
    __slots__ = ("n", "cpos", "inc", "attach", "targets", "sigmas")


def slp_index(slp: SLP) -> List[_Prod]:
    cached = slp._cache.get("index")
    if cached is not None:
        return cached
    out = []
    for p in slp.productions:
        q = _Prod()
        q.n = p.structure.n
        q.cpos = {v: i for i, v in enumerate(p.contacts)}
        inc: List[list] = [[] for _ in range(q.n)]
        for rel, t in p.structure.tuples():
            for x in set(t):
                inc[x].append((rel, t))
        q.inc = inc
        attach: List[list] = [[] for _ in range(q.n)]
        for j, ref in enumerate(p.refs, 1):
            for i, v in enumerate(ref.sigma):
                attach[v].append((j, i))
        q.attach = attach
        q.targets = [slp.index[r.target] for r in p.refs]
        q.sigmas = [r.sigma for r in p.refs]
        out.append(q)
    slp._cache["index"] = out
    return out


class Explorer:
    """Neighborhood queries inside ``val(start)`` without decompression."""

    def __init__(self, slp: SLP, start: str):
        require_apex(slp)
        self.slp = slp
        self.start = slp.index[start]
        self.prods = slp_index(slp)
        self._end: Dict[Path, int] = {(): self.start}

    def end(self, path: Path) -> int:
        e = self._end.get(path)
        if e is None:
            e = self.prods[self.end(path[:-1])].targets[path[-1] - 1]
            self._end[path] = e
        return e

    def incident(self, node: ARep):
        """Tuples of ``val(start)`` containing ``node`` as ``(rel, nodes, move)``.

        ``move`` classifies the step towards the other entries of the tuple.
        """
        path, u = node
        b = self.end(path)
        pb = self.prods[b]
        host = None
        if path:
            host = self.prods[self.end(path[:-1])].sigmas[path[-1] - 1]
        out = []
        for rel, t in pb.inc[u]:
            nodes = []
            move = STAY
            for x in t:
                if x == u:
                    nodes.append(node)
                elif host is not None and x in pb.cpos:
                    nodes.append((path[:-1], host[pb.cpos[x]]))
                    move = UP
                else:
                    nodes.append((path, x))
            out.append((rel, tuple(nodes), move, 0))
        for j, i in pb.attach[u]:
            pc = self.prods[pb.targets[j - 1]]
            sigma = pb.sigmas[j - 1]
            c = self.slp.productions[pb.targets[j - 1]].contacts[i]
            for rel, t in pc.inc[c]:
                nodes = []
                move = STAY_REF
                for x in t:
                    if x in pc.cpos:
                        nodes.append((path, sigma[pc.cpos[x]]))
                    else:
                        nodes.append((path + (j,), x))
                        move = DOWN
                out.append((rel, tuple(nodes), move, j))
        return out

    def neighbors(self, node: ARep) -> List[ARep]:
        """Gaifman neighbors in (move, reference index, local id) order."""
        found = {}
        for rel, nodes, move, j in self.incident(node):
            if len(nodes) != 2:
                continue
            for y in nodes:
                if y != node:
                    key = (move, j, y[1], y[0])
                    if y not in found or key < found[y]:
                        found[y] = key
        return sorted(found, key=found.__getitem__)

    def bfs(self, seeds: Sequence[ARep], radius: int, counter: Optional[Counter] = None,
            stop: Optional[Set[ARep]] = None) -> Dict[ARep, int]:
        dist: Dict[ARep, int] = {}
        queue = deque()
        for s in seeds:
            if s not in dist:
                dist[s] = 0
                queue.append(s)
        while queue:
            x = queue.popleft()
            if counter is not None:
                counter.steps += 1
            d = dist[x]
            if d >= radius:
                continue
            for y in self.neighbors(x):
                if y not in dist:
                    dist[y] = d + 1
                    queue.append(y)
        return dist

    def induced(self, nodes: Sequence[ARep]) -> Structure:
        """Induced substructure of ``val(start)`` on ``nodes`` (in the given order)."""
        pos = {v: i for i, v in enumerate(nodes)}
        rels: Dict[str, set] = {n: set() for n, _ in self.slp.signature}
        for v in nodes:
            for rel, t, _, _ in self.incident(v):
                if all(x in pos for x in t):
                    rels[rel].add(tuple(pos[x] for x in t))
        return Structure(self.slp.signature, len(nodes), rels)


@dataclass
class Expansion:
    start: str
    zeta: int
    nodes: List[ARep]
    dist: List[int]
    boundary: List[bool]
    structure: Structure
    contacts: List[int]

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.nodes)}

    @property
    def internal(self) -> List[int]:
        return [i for i, d in enumerate(self.dist) if d == 0]

    def __len__(self):
        return len(self.nodes)


def compute_expansion(slp: SLP, start: str, zeta: int, counter: Optional[Counter] = None) -> Expansion:
    ex = Explorer(slp, start)
    prod = slp[start]
    seeds = [((), v) for v in prod.internal_nodes()]
    dist = ex.bfs(seeds, zeta, counter)
    nodes = list(dist)   # insertion order = BFS discovery order
    contact_nodes = {((), v) for v in prod.contacts}
    boundary = [v in contact_nodes or dist[v] == zeta for v in nodes]
    s = ex.induced(nodes)
    if counter is not None:
        counter.steps += len(nodes)
    pos = {v: i for i, v in enumerate(nodes)}
    contacts = [pos[c] for c in sorted(contact_nodes, key=lambda x: x[1]) if c in pos]
    return Expansion(start, zeta, nodes, [dist[v] for v in nodes], boundary, s, contacts)


@dataclass(frozen=True)
class ValidNodeEntry:
    node: ARep                       # c, an A-representation
    type: NeighborhoodType
    pi: Tuple[ARep, ...]             # pi[i] = node of val(A) at type position i; pi[0] = c


def _valid_entries(exp: Expansion, rho: int, counter: Optional[Counter] = None):
    from .structures import gaifman_adjacency, induced
    if exp.zeta != 2 * rho + 1:
        raise ValueError(f"expansion radius {exp.zeta} does not match 2*{rho}+1")
    adj = gaifman_adjacency(exp.structure)
    out = []
    for i, d in enumerate(exp.dist):
        if d > rho:
            continue
        ball = bfs_distances(adj, [i], rho)
        if counter is not None:
            counter.steps += len(ball)
        if any(exp.boundary[x] for x in ball):
            continue
        sub, keep = induced(exp.structure, ball)
        local = {v: j for j, v in enumerate(keep)}
        t, order = canonical_type(PointedNeighborhood(sub, (local[i],), rho), check=False)
        out.append(ValidNodeEntry(exp.nodes[i], t, tuple(exp.nodes[keep[j]] for j in order)))
    return out


def valid_nodes(exp: Expansion, btype: NeighborhoodType, rho: int) -> List[ValidNodeEntry]:
    return [e for e in _valid_entries(exp, rho) if e.type == btype]


class TypeIndex:
    """All valid nodes of all expansions for one radius, grouped by type.

    ``lists[t][a]`` is the list of valid ``t``-nodes in the expansion of the
    production with index ``a`` (only nonempty lists are stored).
    """

    def __init__(self, slp: SLP, rho: int, counter: Optional[Counter] = None):
        require_apex(slp)
        self.slp = slp
        self.rho = rho
        self.zeta = 2 * rho + 1
        self.expansion_sizes: Dict[str, int] = {}
        lists: Dict[NeighborhoodType, Dict[int, List[ValidNodeEntry]]] = {}
        for a, name in enumerate(slp.names):
            exp = compute_expansion(slp, name, self.zeta, counter)
            self.expansion_sizes[name] = len(exp)
            for e in _valid_entries(exp, rho, counter):
                lists.setdefault(e.type, {}).setdefault(a, []).append(e)
        self.lists = {t: lists[t] for t in sorted(lists)}

    @property
    def types(self) -> List[NeighborhoodType]:
        return list(self.lists)

    def useful(self, t: NeighborhoodType) -> Set[int]:
        return set(self.lists.get(t, {}))


def type_index(slp: SLP, rho: int, counter: Optional[Counter] = None) -> TypeIndex:
    key = ("types", rho)
    cached = slp._cache.get(key)
    if cached is None:
        cached = TypeIndex(slp, rho, counter)
        slp._cache[key] = cached
    return cached


def realized_types(slp: SLP, rho: int) -> List[NeighborhoodType]:
    return type_index(slp, rho).types


def useful_nonterminals(slp: SLP, btype: NeighborhoodType, rho: int) -> Set[str]:
    return {slp.names[a] for a in type_index(slp, rho).useful(btype)}


def local_sphere(slp: SLP, start: str, c: ARep, r: int) -> Tuple[PointedNeighborhood, List[ARep]]:
    """The ``r``-neighborhood of ``c`` in ``val(start)`` and its node list."""
    ex = Explorer(slp, start)
    _check_rep(slp, start, ex, c)
    dist = ex.bfs([c], r)
    nodes = list(dist)
    return PointedNeighborhood(ex.induced(nodes), (0,), r, None), nodes


def _check_rep(slp: SLP, start: str, ex: Explorer, c: ARep) -> None:
    path, v = c
    try:
        b = ex.end(tuple(path))
    except (IndexError, TypeError):
        raise ValueError(f"invalid representation {c!r}") from None
    prod = slp.productions[b]
    if not 0 <= v < prod.structure.n or (path and v in prod.contacts):
        raise ValueError(f"invalid representation {c!r}")
