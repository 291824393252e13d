"""Relational straight-line programs.

A production ``A`` is a pointed structure (local nodes ``0..m-1``, contact
list ``tau``) plus an ordered list of references ``(B, sigma)``.  A node of
``val(A)`` is addressed by ``(path, v)``: ``path`` is the tuple of 1-based
reference indices walked from ``A`` and ``v`` a local node of the production
reached, internal unless ``path`` is empty.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .structures import (ParseError, Signature, Structure, _lines, format_signature,
                         gaifman_adjacency, parse_signature, reduce_arity, reduced_signature)

Path = Tuple[int, ...]
ARep = Tuple[Path, int]

DEFAULT_DECOMPRESS_CAP = 10 ** 6


class ApexRequired(ValueError):
    """Raised by operations whose correctness depends on the apex condition."""


class DecompressionTooLarge(RuntimeError):
    def __init__(self, nodes: int, cap: int):
        self.nodes = nodes
        self.cap = cap
        super().__init__(f"too large to decompress: val has {nodes} nodes, cap is {cap}")


def decompress_cap() -> int:
    raw = os.environ.get("SLPFO_DECOMPRESS_CAP")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_DECOMPRESS_CAP


@dataclass(frozen=True)
class Reference:
    target: str
    sigma: Tuple[int, ...]   # sigma[i-1] = host local node merged with contact i


@dataclass
class Production:
    name: str
    rank: int
    structure: Structure                 # local nodes with labels
    contacts: Tuple[int, ...]            # contacts[i-1] = local node of contact i
    refs: List[Reference] = field(default_factory=list)

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.structure.labels

    def is_contact(self, v: int) -> bool:
        return v in self.contacts

    def internal_nodes(self) -> List[int]:
        cs = set(self.contacts)
        return [v for v in range(self.structure.n) if v not in cs]


class SLP:
    def __init__(self, signature: Signature, productions: Sequence[Production], initial: str):
        self.signature = signature
        self.productions: List[Production] = list(productions)
        self.names = [p.name for p in self.productions]
        self.index = {p.name: i for i, p in enumerate(self.productions)}
        self.initial = initial
        self._cache: Dict[str, object] = {}

    def __getitem__(self, name: str) -> Production:
        return self.productions[self.index[name]]

    def __repr__(self):
        return f"SLP(initial={self.initial}, nonterminals={len(self.productions)})"

    # paths -----------------------------------------------------------
    def end(self, start: str, path: Path) -> str:
        """Nonterminal reached by walking ``path`` from ``start``."""
        cur = start
        for j in path:
            refs = self[cur].refs
            if not 1 <= j <= len(refs):
                raise ValueError(f"no reference {j} in production {cur}")
            cur = refs[j - 1].target
        return cur

    def format_path(self, start: str, path: Path) -> str:
        out = [start]
        cur = start
        for j in path:
            cur = self[cur].refs[j - 1].target
            out.append(f"{j}{cur}")
        return "".join(out)

    def node_label(self, start: str, node: ARep) -> str:
        path, v = node
        return self[self.end(start, path)].labels[v]

    @property
    def apex(self) -> bool:
        return all(apex_status(self).values())


# ---------------------------------------------------------------- parsing

def parse_slp(text: str) -> SLP:
    sig = None
    initial = None
    order: List[str] = []
    decl: Dict[str, dict] = {}

    def get(name, no):
        if name not in decl:
            raise ParseError(f"nonterminal {name!r} used before its declaration", no)
        return decl[name]

    for no, words in _lines(text):
        kw = words[0]
        if kw == "signature":
            if sig is not None:
                raise ParseError("second signature line", no)
            sig = parse_signature(words[1:], no)
            continue
        if sig is None:
            raise ParseError("signature must come first", no)
        if kw == "initial":
            if len(words) != 2:
                raise ParseError("expected: initial <nonterminal>", no)
            initial = words[1]
        elif kw == "nonterminal":
            if len(words) != 4 or words[2] != "rank" or not words[3].isdigit():
                raise ParseError("expected: nonterminal <name> rank <k>", no)
            if words[1] in decl:
                raise ParseError(f"duplicate nonterminal {words[1]!r}", no)
            decl[words[1]] = {"rank": int(words[3]), "labels": [], "ids": {}, "contacts": {},
                              "tuples": {n: [] for n, _ in sig}, "refs": []}
            order.append(words[1])
        elif kw in ("node", "contact"):
            if kw == "node" and len(words) != 3:
                raise ParseError("expected: node <nonterminal> <label>", no)
            if kw == "contact" and (len(words) != 4 or not words[2].isdigit()):
                raise ParseError("expected: contact <nonterminal> <i> <label>", no)
            d = get(words[1], no)
            label = words[-1]
            if label in d["ids"]:
                raise ParseError(f"duplicate node {label!r} in {words[1]}", no)
            d["ids"][label] = len(d["labels"])
            d["labels"].append(label)
            if kw == "contact":
                i = int(words[2])
                if i in d["contacts"]:
                    raise ParseError(f"contact {i} of {words[1]} declared twice", no)
                d["contacts"][i] = d["ids"][label]
        elif kw == "tuple":
            if len(words) < 3:
                raise ParseError("expected: tuple <nonterminal> <rel> <labels...>", no)
            d = get(words[1], no)
            rel = words[2]
            if rel not in sig:
                raise ParseError(f"unknown relation {rel!r}", no)
            if len(words) - 3 != sig.arity(rel):
                raise ParseError(f"arity mismatch for {rel}", no)
            try:
                d["tuples"][rel].append(tuple(d["ids"][x] for x in words[3:]))
            except KeyError as e:
                raise ParseError(f"undeclared node {e.args[0]!r} in {words[1]}", no) from None
        elif kw == "ref":
            if len(words) < 3:
                raise ParseError("expected: ref <host> <target> <i>=<label> ...", no)
            d = get(words[1], no)
            assign: Dict[int, int] = {}
            for item in words[3:]:
                i, eq, label = item.partition("=")
                if not eq or not i.isdigit():
                    raise ParseError(f"bad attachment {item!r}", no)
                if int(i) in assign:
                    raise ParseError(f"attachment {i} given twice", no)
                if label not in d["ids"]:
                    raise ParseError(f"undeclared node {label!r} in {words[1]}", no)
                assign[int(i)] = d["ids"][label]
            d["refs"].append((words[2], assign, no))
        else:
            raise ParseError(f"unknown keyword {kw!r}", no)
    if sig is None:
        raise ParseError("missing signature line")
    if initial is None:
        raise ParseError("missing initial line")
    prods = []
    for name in order:
        d = decl[name]
        rank = d["rank"]
        contacts = tuple(d["contacts"].get(i, -1) for i in range(1, max([rank] + list(d["contacts"])) + 1))
        refs = []
        for target, assign, _ in d["refs"]:
            size = max(assign, default=0)
            sigma = tuple(assign.get(i, -1) for i in range(1, size + 1))
            refs.append(Reference(target, sigma))
        s = Structure(sig, len(d["labels"]), d["tuples"], d["labels"])
        prods.append(Production(name, rank, s, contacts, refs))
    return SLP(sig, prods, initial)


def format_slp(slp: SLP) -> str:
    out = [format_signature(slp.signature), f"initial {slp.initial}"]
    for p in slp.productions:
        out.append(f"nonterminal {p.name} rank {p.rank}")
        cpos = {v: i for i, v in enumerate(p.contacts, 1)}
        for v, lab in enumerate(p.labels):
            if v in cpos:
                out.append(f"contact {p.name} {cpos[v]} {lab}")
            else:
                out.append(f"node {p.name} {lab}")
        for rel, t in p.structure.tuples():
            out.append(f"tuple {p.name} {rel} " + " ".join(p.labels[x] for x in t))
        for ref in p.refs:
            out.append(f"ref {p.name} {ref.target} " +
                       " ".join(f"{i}={p.labels[v]}" for i, v in enumerate(ref.sigma, 1)))
    return "\n".join(out) + "\n"


def load_slp(path: str) -> SLP:
    with open(path, encoding="utf-8") as fh:
        return parse_slp(fh.read())


# ---------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    acyclicity: List[str] = field(default_factory=list)
    injectivity: List[str] = field(default_factory=list)
    rank: List[str] = field(default_factory=list)
    unreachable: List[str] = field(default_factory=list)
    other: List[str] = field(default_factory=list)
    apex_by_production: Dict[str, bool] = field(default_factory=dict)

    @property
    def apex(self) -> bool:
        return all(self.apex_by_production.values())

    @property
    def violations(self) -> List[str]:
        return self.acyclicity + self.injectivity + self.rank + self.unreachable + self.other

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        lines = []
        for title, items in (("acyclicity", self.acyclicity), ("injectivity", self.injectivity),
                             ("rank", self.rank), ("unreachable", self.unreachable),
                             ("other", self.other)):
            for it in items:
                lines.append(f"violation [{title}]: {it}")
        bad = [n for n, ok in self.apex_by_production.items() if not ok]
        lines.append("apex: " + ("yes" if self.apex else "no"))
        for n in bad:
            lines.append(f"  production {n} attaches a reference to a contact node")
        lines.append("valid: " + ("yes" if self.ok else "no"))
        return "\n".join(lines)


def apex_status(slp: SLP) -> Dict[str, bool]:
    cached = slp._cache.get("apex")
    if cached is None:
        cached = {}
        for p in slp.productions:
            cs = set(p.contacts)
            cached[p.name] = not any(v in cs for ref in p.refs for v in ref.sigma)
        slp._cache["apex"] = cached
    return cached


def validate(slp: SLP) -> ValidationReport:
    rep = ValidationReport()
    if slp.initial not in slp.index:
        rep.other.append(f"initial nonterminal {slp.initial!r} is not declared")
    elif slp[slp.initial].rank != 0:
        rep.rank.append(f"initial nonterminal {slp.initial} has rank {slp[slp.initial].rank}, expected 0")
    if slp.signature.max_arity > 2:
        rep.other.append("signature has relations of arity > 2 (run arity reduction first)")
    for p in slp.productions:
        if len(p.contacts) != p.rank or -1 in p.contacts:
            missing = [i for i in range(1, p.rank + 1) if i > len(p.contacts) or p.contacts[i - 1] == -1]
            extra = list(range(p.rank + 1, len(p.contacts) + 1))
            if missing:
                rep.rank.append(f"{p.name}: contacts {missing} missing")
            if extra:
                rep.rank.append(f"{p.name}: contacts {extra} exceed rank {p.rank}")
        for j, ref in enumerate(p.refs, 1):
            if ref.target not in slp.index:
                rep.other.append(f"{p.name} ref {j}: unknown nonterminal {ref.target!r}")
                continue
            want = slp[ref.target].rank
            if len(ref.sigma) != want or -1 in ref.sigma:
                rep.rank.append(f"{p.name} ref {j}: {ref.target} has rank {want}, "
                                f"attachment does not cover exactly 1..{want}")
            used = [v for v in ref.sigma if v != -1]
            if len(set(used)) != len(used):
                rep.injectivity.append(f"{p.name} ref {j}: sigma is not injective")
    # contacts are injective by construction (one label per line); acyclicity
    color: Dict[str, int] = {}
    cycles = []

    def visit(a, trail):
        color[a] = 1
        for ref in slp[a].refs:
            b = ref.target
            if b not in slp.index:
                continue
            if color.get(b) == 1:
                cyc = trail[trail.index(b):] + [b] if b in trail else [a, b]
                cycles.append(" -> ".join(cyc))
            elif b not in color:
                visit(b, trail + [b])
        color[a] = 2

    for name in slp.names:
        if name not in color:
            visit(name, [name])
    rep.acyclicity.extend(f"cycle {c}" for c in cycles)
    if slp.initial in slp.index:
        seen = {slp.initial}
        todo = [slp.initial]
        while todo:
            a = todo.pop()
            for ref in slp[a].refs:
                if ref.target in slp.index and ref.target not in seen:
                    seen.add(ref.target)
                    todo.append(ref.target)
        rep.unreachable.extend(f"{n} is not reachable from {slp.initial}" for n in slp.names if n not in seen)
    rep.apex_by_production = dict(apex_status(slp))
    return rep


def require_apex(slp: SLP) -> None:
    if not slp.apex:
        raise ApexRequired("apex required: some reference attaches to a contact node")


# ---------------------------------------------------------------- measures

def slp_size(slp: SLP) -> int:
    total = 0
    for p in slp.productions:
        total += p.structure.size()
        for ref in p.refs:
            total += 1 + slp[ref.target].rank
    return total


@dataclass(frozen=True)
class OrderedDag:
    """One node per nonterminal; ``children[a]`` lists referenced nonterminals in order."""
    names: Tuple[str, ...]
    children: Tuple[Tuple[int, ...], ...]
    initial: int

    def topological(self) -> List[int]:
        """Nodes ordered parents-first (reachable or not)."""
        indeg = [0] * len(self.names)
        for cs in self.children:
            for c in cs:
                indeg[c] += 1
        todo = [a for a in range(len(self.names)) if indeg[a] == 0]
        out = []
        while todo:
            a = todo.pop()
            out.append(a)
            for c in self.children[a]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    todo.append(c)
        if len(out) != len(self.names):
            raise ValueError("dag has a cycle")
        return out

    def gamma(self, name: str) -> List[str]:
        return [self.names[c] for c in self.children[self.names.index(name)]]


def build_dag(slp: SLP) -> OrderedDag:
    cached = slp._cache.get("dag")
    if cached is None:
        children = tuple(tuple(slp.index[r.target] for r in p.refs) for p in slp.productions)
        cached = OrderedDag(tuple(slp.names), children, slp.index[slp.initial])
        slp._cache["dag"] = cached
    return cached


def val_node_count(slp: SLP, name: Optional[str] = None) -> int:
    """Exact number of nodes of ``val(name)`` without building it."""
    memo: Dict[str, int] = {}
    for a in reversed(build_dag(slp).topological()):
        p = slp.productions[a]
        memo[p.name] = p.structure.n + sum(memo[r.target] - slp[r.target].rank for r in p.refs)
    return memo[name or slp.initial]


# ---------------------------------------------------------------- decompression

@dataclass
class Decompressed:
    """``val(A)`` with node ``i`` identified by the A-representation ``reps[i]``."""
    start: str
    structure: Structure
    reps: List[ARep]
    contacts: Tuple[int, ...]

    def __post_init__(self):
        self.index = {rep: i for i, rep in enumerate(self.reps)}


def decompress(slp: SLP, name: Optional[str] = None, cap: Optional[int] = None) -> Decompressed:
    name = name or slp.initial
    cap = decompress_cap() if cap is None else cap
    count = val_node_count(slp, name)
    if count > cap:
        raise DecompressionTooLarge(count, cap)
    reps: List[ARep] = []
    rels: Dict[str, List[tuple]] = {n: [] for n, _ in slp.signature}
    labels: List[str] = []
    top_contacts: Tuple[int, ...] = ()
    stack = [(name, (), None)]
    while stack:
        a, path, outer = stack.pop()
        p = slp[a]
        ids = [0] * p.structure.n
        cpos = {v: i for i, v in enumerate(p.contacts)}
        for v in range(p.structure.n):
            if outer is not None and v in cpos:
                ids[v] = outer[cpos[v]]
            else:
                ids[v] = len(reps)
                reps.append((path, v))
                labels.append(p.labels[v] if not path else f"{slp.format_path(name, path)}:{p.labels[v]}")
        if outer is None:
            top_contacts = tuple(ids[v] for v in p.contacts)
        for rel, ts in p.structure.relations.items():
            rels[rel].extend(tuple(ids[x] for x in t) for t in ts)
        for j in range(len(p.refs), 0, -1):
            ref = p.refs[j - 1]
            stack.append((ref.target, path + (j,), [ids[v] for v in ref.sigma]))
    # stack order above yields pre-order with references in file order
    s = Structure(slp.signature, len(reps), rels, labels)
    return Decompressed(name, s, reps, top_contacts)


def val_degree(slp: SLP) -> int:
    """Maximum degree of ``val(D)`` read off the productions (apex only)."""
    require_apex(slp)
    adj = {p.name: gaifman_adjacency(p.structure) for p in slp.productions}
    best = 0
    for p in slp.productions:
        deg = [len(x) for x in adj[p.name]]
        for ref in p.refs:
            child = slp[ref.target]
            cadj = adj[ref.target]
            for i, v in enumerate(ref.sigma):
                deg[v] += len(cadj[child.contacts[i]])
        best = max([best] + deg)
    return best


def embed(slp: SLP, start: str, p: Path, node: ARep) -> ARep:
    """Map a node of ``val(end(p))`` into ``val(start)`` along ``p``."""
    q, v = node
    b = slp.end(start, tuple(p) + tuple(q))
    prod = slp[b]
    if not 0 <= v < prod.structure.n:
        raise ValueError(f"local node {v} out of range for {b}")
    if not p:
        return node
    if not q and v in prod.contacts:
        j = prod.contacts.index(v)
        host = slp[slp.end(start, p[:-1])]
        return p[:-1], host.refs[p[-1] - 1].sigma[j]
    return p + q, v


def embed_contact(slp: SLP, start: str, p: Path, j: int) -> ARep:
    """Image of contact ``j`` (1-based) of ``end(p)`` in ``val(start)``."""
    b = slp[slp.end(start, p)]
    if not 1 <= j <= b.rank:
        raise ValueError(f"contact {j} out of range 1..{b.rank}")
    return embed(slp, start, p, ((), b.contacts[j - 1]))


# ---------------------------------------------------------------- arity reduction

def reduce_arity_slp(slp: SLP) -> SLP:
    if slp.signature.max_arity <= 2:
        return slp
    sig = reduced_signature(slp.signature)
    prods = []
    for p in slp.productions:
        s = reduce_arity(p.structure)
        prods.append(Production(p.name, p.rank, s, p.contacts, list(p.refs)))
    out = SLP(sig, prods, slp.initial)
    return out
