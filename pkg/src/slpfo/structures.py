"""Finite relational structures of arity at most two.

Universes are dense ids ``0..n-1``.  Labels only matter for file I/O.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

UNREACHABLE = math.inf


class ArityError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class Signature:
    """Ordered list of relation names with arities."""

    __slots__ = ("relations", "_arity", "_index")

    def __init__(self, relations: Iterable[Tuple[str, int]]):
        rels = tuple((str(n), int(a)) for n, a in relations)
        arity: Dict[str, int] = {}
        for name, a in rels:
            if name in arity:
                raise ValueError(f"duplicate relation name {name!r}")
            if a < 1:
                raise ValueError(f"relation {name!r} needs arity >= 1")
            arity[name] = a
        self.relations = rels
        self._arity = arity
        self._index = {n: i for i, (n, _) in enumerate(rels)}

    def arity(self, name: str) -> int:
        return self._arity[name]

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name) -> bool:
        return name in self._arity

    def __iter__(self):
        return iter(self.relations)

    def __len__(self):
        return len(self.relations)

    def __eq__(self, other):
        return isinstance(other, Signature) and self.relations == other.relations

    def __hash__(self):
        return hash(self.relations)

    def __repr__(self):
        return "Signature(%s)" % " ".join(f"{n}/{a}" for n, a in self.relations)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.relations), default=0)

    def names(self) -> List[str]:
        return [n for n, _ in self.relations]


class Structure:
    """A structure with universe ``range(n)`` and one tuple set per relation."""

    __slots__ = ("signature", "n", "relations", "labels", "_adj")

    def __init__(self, signature: Signature, n: int,
                 relations: Optional[Mapping[str, Iterable[Sequence[int]]]] = None,
                 labels: Optional[Sequence[str]] = None):
        self.signature = signature
        self.n = int(n)
        rels: Dict[str, frozenset] = {}
        relations = relations or {}
        for name in relations:
            if name not in signature:
                raise ValueError(f"unknown relation {name!r}")
        for name, a in signature:
            ts = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in ts:
                if len(t) != a:
                    raise ArityError(f"tuple {t} has wrong arity for {name}/{a}")
                for x in t:
                    if not 0 <= x < self.n:
                        raise ValueError(f"tuple {t} of {name} leaves the universe")
            rels[name] = ts
        self.relations = rels
        self.labels = None if labels is None else tuple(str(x) for x in labels)
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("label count differs from universe size")
        self._adj = None

    @property
    def universe(self) -> range:
        return range(self.n)

    def num_tuples(self) -> int:
        return sum(len(ts) for ts in self.relations.values())

    def size(self) -> int:
        return self.n + sum(self.signature.arity(r) * len(ts) for r, ts in self.relations.items())

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def tuples(self):
        for name, _ in self.signature:
            for t in sorted(self.relations[name]):
                yield name, t

    def __eq__(self, other):
        return (isinstance(other, Structure) and self.signature == other.signature
                and self.n == other.n and self.relations == other.relations)

    def __hash__(self):
        return hash((self.signature, self.n, tuple(sorted((k, tuple(sorted(v))) for k, v in self.relations.items()))))

    def __repr__(self):
        return f"Structure(n={self.n}, tuples={self.num_tuples()})"


def gaifman_adjacency(s: Structure) -> List[Tuple[int, ...]]:
    """Sorted neighbor lists of the Gaifman graph (self-loops dropped)."""
    if s._adj is not None:
        return s._adj
    if s.signature.max_arity > 2:
        raise ArityError("Gaifman graph needs relations of arity <= 2")
    nb: List[set] = [set() for _ in range(s.n)]
    for name, a in s.signature:
        if a != 2:
            continue
        for x, y in s.relations[name]:
            if x != y:
                nb[x].add(y)
                nb[y].add(x)
    adj = [tuple(sorted(x)) for x in nb]
    s._adj = adj
    return adj


def max_degree(s: Structure) -> int:
    return max((len(x) for x in gaifman_adjacency(s)), default=0)


def bfs_distances(adj: Sequence[Sequence[int]], sources: Iterable[int],
                  limit: Optional[int] = None) -> Dict[int, int]:
    """Multi-source BFS; returns distances of reached nodes (``<= limit``)."""
    dist: Dict[int, int] = {}
    queue = deque()
    for x in sources:
        if x not in dist:
            dist[x] = 0
            queue.append(x)
    while queue:
        x = queue.popleft()
        d = dist[x]
        if limit is not None and d >= limit:
            continue
        for y in adj[x]:
            if y not in dist:
                dist[y] = d + 1
                queue.append(y)
    return dist


def distance(s: Structure, a: int, b: int):
    """Gaifman distance, or ``UNREACHABLE``."""
    return bfs_distances(gaifman_adjacency(s), [a]).get(b, UNREACHABLE)


def _ran(t) -> List[int]:
    if isinstance(t, Mapping):
        return [t[i] for i in sorted(t)]
    return [x for x in t if x is not None]


def sphere(s: Structure, t, r: int) -> frozenset:
    """Nodes within distance ``r`` of some entry of ``t``.

    ``t`` is a partial tuple: a mapping from 1-based positions to nodes, or a
    sequence with ``None`` at undefined positions.
    """
    return frozenset(bfs_distances(gaifman_adjacency(s), _ran(t), r))


def induced(s: Structure, nodes: Iterable[int]) -> Tuple[Structure, List[int]]:
    """Induced substructure on ``nodes`` (kept in ascending order)."""
    keep = sorted(set(nodes))
    pos = {v: i for i, v in enumerate(keep)}
    rels = {}
    for name, _ in s.signature:
        rels[name] = [tuple(pos[x] for x in t) for t in s.relations[name]
                      if all(x in pos for x in t)]
    labels = None if s.labels is None else [s.labels[v] for v in keep]
    return Structure(s.signature, len(keep), rels, labels), keep


@dataclass(frozen=True)
class PointedNeighborhood:
    """A structure with center constants.

    ``centers[i]`` is the node of position ``i+1`` or ``None`` when that
    position is undefined.  ``origin`` maps local ids back to the ambient
    structure when the neighborhood was cut out of one.
    """

    structure: Structure
    centers: Tuple[Optional[int], ...]
    radius: int
    origin: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return len(self.centers)


def _as_positions(t, k: Optional[int] = None) -> Tuple[Optional[int], ...]:
    if isinstance(t, Mapping):
        size = k if k is not None else max(t, default=0)
        return tuple(t.get(i + 1) for i in range(size))
    return tuple(t)


def neighborhood(s: Structure, t, r: int, k: Optional[int] = None) -> PointedNeighborhood:
    sub, keep = induced(s, sphere(s, t, r))
    pos = {v: i for i, v in enumerate(keep)}
    cents = tuple(None if x is None else pos[x] for x in _as_positions(t, k))
    return PointedNeighborhood(sub, cents, r, tuple(keep))


def components(s: Structure) -> Tuple[List[Structure], List[int]]:
    """Gaifman components ordered by least node id, plus node -> component index."""
    adj = gaifman_adjacency(s)
    comp = [-1] * s.n
    parts: List[List[int]] = []
    for v in range(s.n):
        if comp[v] >= 0:
            continue
        members = sorted(bfs_distances(adj, [v]))
        for x in members:
            comp[x] = len(parts)
        parts.append(members)
    return [induced(s, p)[0] for p in parts], comp


def relabel(s: Structure, perm: Sequence[int]) -> Structure:
    """Structure with node ``v`` renamed to ``perm[v]``."""
    rels = {name: [tuple(perm[x] for x in t) for t in ts] for name, ts in s.relations.items()}
    labels = None
    if s.labels is not None:
        labels = [None] * s.n
        for v in range(s.n):
            labels[perm[v]] = s.labels[v]
    return Structure(s.signature, s.n, rels, labels)


# ---------------------------------------------------------------- arity

def reduce_arity(s: Structure) -> Structure:
    """Encode relations of arity > 2 by fresh tuple elements.

    Identity when the signature is already at most binary.  Otherwise a unary
    ``U`` marks the original universe, every tuple ``R(a1..an)`` with ``n > 2``
    becomes a new element ``b`` with ``R(b)`` and ``E_j(b, a_j)``.
    """
    sig = s.signature
    if sig.max_arity <= 2:
        return s
    new_sig = reduced_signature(sig)
    n = s.n
    rels: Dict[str, List[tuple]] = {name: [] for name, _ in new_sig}
    rels[UNIVERSE_REL] = [(v,) for v in range(s.n)]
    labels = list(s.labels) if s.labels is not None else [str(v) for v in range(s.n)]
    for name, a in sig:
        ts = sorted(s.relations[name])
        if a <= 2:
            rels[name].extend(ts)
            continue
        for t in ts:
            b = n
            n += 1
            labels.append(f"{name}({','.join(labels[x] for x in t)})")
            rels[name].append((b,))
            for j, x in enumerate(t, 1):
                rels[f"E{j}"].append((b, x))
    return Structure(new_sig, n, rels, labels)


UNIVERSE_REL = "U"


def reduced_signature(sig: Signature) -> Signature:
    if sig.max_arity <= 2:
        return sig
    taken = set(sig.names())
    for extra in [UNIVERSE_REL] + [f"E{j}" for j in range(1, sig.max_arity + 1)]:
        if extra in taken:
            raise ValueError(f"relation name {extra!r} is reserved for arity reduction")
    rels = [(UNIVERSE_REL, 1)]
    rels += [(name, a if a <= 2 else 1) for name, a in sig]
    rels += [(f"E{j}", 2) for j in range(1, sig.max_arity + 1)]
    return Signature(rels)


# ---------------------------------------------------------------- text I/O

def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def parse_signature(words: Sequence[str], line: Optional[int] = None) -> Signature:
    rels = []
    for w in words:
        name, sep, a = w.rpartition("/")
        if not sep or not name or not a.isdigit():
            raise ParseError(f"bad relation declaration {w!r}", line)
        rels.append((name, int(a)))
    try:
        return Signature(rels)
    except ValueError as e:
        raise ParseError(str(e), line) from None


def format_signature(sig: Signature) -> str:
    return "signature " + " ".join(f"{n}/{a}" for n, a in sig)


def parse_structure(text: str) -> Structure:
    sig = None
    labels: List[str] = []
    ids: Dict[str, int] = {}
    rels: Dict[str, List[tuple]] = {}
    for no, words in _lines(text):
        kw = words[0]
        if kw == "signature":
            if sig is not None:
                raise ParseError("second signature line", no)
            sig = parse_signature(words[1:], no)
            rels = {n: [] for n, _ in sig}
        elif sig is None:
            raise ParseError("signature must come first", no)
        elif kw == "node":
            if len(words) != 2:
                raise ParseError("expected: node <label>", no)
            if words[1] in ids:
                raise ParseError(f"duplicate node {words[1]!r}", no)
            ids[words[1]] = len(labels)
            labels.append(words[1])
        elif kw == "tuple":
            if len(words) < 2 or words[1] not in sig:
                raise ParseError("unknown relation in tuple line", no)
            args = words[2:]
            if len(args) != sig.arity(words[1]):
                raise ParseError(f"arity mismatch for {words[1]}", no)
            try:
                rels[words[1]].append(tuple(ids[x] for x in args))
            except KeyError as e:
                raise ParseError(f"undeclared node {e.args[0]!r}", no) from None
        else:
            raise ParseError(f"unknown keyword {kw!r}", no)
    if sig is None:
        raise ParseError("missing signature line")
    return Structure(sig, len(labels), rels, labels)


def format_structure(s: Structure) -> str:
    out = [format_signature(s.signature)]
    out += [f"node {s.label(v)}" for v in range(s.n)]
    for name, t in s.tuples():
        out.append("tuple " + name + " " + " ".join(s.label(x) for x in t))
    return "\n".join(out) + "\n"
