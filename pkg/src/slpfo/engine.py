"""Constant-delay enumeration over an apex SLP.

For every realized single-node type the engine streams its occurrences in
``val(D)`` as ``(path cursor, valid expansion entry)`` pairs, ordered by the
rank of the path and then by the entry order.  Answers of a local query are
assembled from one stream per component of the answer's neighborhood type;
tuples whose components come too close are rejected by a distance check
that only looks at a bounded suffix of the two paths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .canon import NeighborhoodType
from .dagpaths import ContractedDag, MinMaxPath, RestoreError, WeightedDag
from .expansion import Counter, Explorer, ValidNodeEntry, type_index
from .logic import check_formula
from .query import (BasicLocalSentence, ConsistentFactorization, GNFQuery, LocalFormula, candidate_types,
                    dedup_plan, eval_local_on_type, evaluate_on_type, evaluate_without_locals, rho)
from .slp import SLP, build_dag, embed, require_apex, val_degree
from .structures import ArityError


class EndOfEnumeration:
    """Sentinel returned once a session is exhausted."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EOE"


EOE = EndOfEnumeration()


@dataclass(frozen=True)
class LexRep:
    """A node of ``val(D)`` as (rank of its path, local node of the path's end)."""
    lex: int
    node: int
    name: str = field(compare=False, default="")
    label: str = field(compare=False, default="")

    def __str__(self):
        return f"{self.lex}:{self.label or self.node}"


class StreamItem:
    __slots__ = ("cursor", "a", "entry", "lex")

    def __init__(self, cursor: MinMaxPath, a: int, entry: ValidNodeEntry, lex: int):
        self.cursor = cursor
        self.a = a
        self.entry = entry
        self.lex = lex

    def __repr__(self):
        return f"StreamItem(lex={self.lex}, a={self.a}, c={self.entry.node})"


class NodeStream:
    """All nodes of one single-node type, in path order then entry order."""

    def __init__(self, engine: "Engine", btype: NeighborhoodType, rho_: int):
        self.engine = engine
        self.lists = engine.types(rho_).lists.get(btype, {})
        self.ctx = engine.contracted(rho_, btype)
        self.cursor = self.ctx.cursor(engine.counter)
        self.n = engine.wd.n
        self._a = -1
        self._i = -1
        self._started = False

    def next(self) -> Optional[StreamItem]:
        self.engine.counter.steps += 1
        cur = self.cursor
        if not self._started:
            self._started = True
            if cur.done:
                return None
            self._a = cur.end_leaf - self.n
            self._i = 0
        else:
            self._i += 1
            if self._i >= len(self.lists[self._a]):
                if not cur.next_path():
                    return None
                self._a = cur.end_leaf - self.n
                self._i = 0
        return StreamItem(cur, self._a, self.lists[self._a][self._i], cur.weight)

    def __iter__(self) -> Iterator[StreamItem]:
        while True:
            x = self.next()
            if x is None:
                return
            yield x


def materialize(stream: NodeStream) -> List[StreamItem]:
    """Drain a stream, giving every path its own cursor copy."""
    return materialize_limited(stream, None)


class Engine:
    """Preprocessed data shared by all sessions on one SLP."""

    def __init__(self, slp: SLP, counter: Optional[Counter] = None, la_method: Optional[str] = None):
        require_apex(slp)
        if slp.signature.max_arity > 2:
            raise ArityError("the engine needs relations of arity <= 2 (reduce the SLP first)")
        self.slp = slp
        self.counter = counter or Counter()
        self.la_method = la_method
        self.wd = WeightedDag(build_dag(slp), self.counter)
        self.degree = val_degree(slp)
        self.d_eff = max(self.degree, 2)
        self._ctx: Dict[tuple, ContractedDag] = {}
        self._explorers: Dict[int, Explorer] = {}
        self._short: Dict[tuple, List[StreamItem]] = {}

    # preprocessing ---------------------------------------------------
    def types(self, rho_: int):
        return type_index(self.slp, rho_, self.counter)

    def contracted(self, rho_: int, btype: NeighborhoodType) -> ContractedDag:
        key = (rho_, btype)
        ctx = self._ctx.get(key)
        if ctx is None:
            useful = self.types(rho_).useful(btype)
            ctx = ContractedDag(self.wd, useful, self.counter, self.la_method)
            self._ctx[key] = ctx
        return ctx

    def count_type_nodes(self, btype: NeighborhoodType, rho_: int) -> int:
        lists = self.types(rho_).lists.get(btype, {})
        return sum(self.wd.paths_to[a] * len(es) for a, es in lists.items())

    def node_stream(self, btype: NeighborhoodType, rho_: int) -> NodeStream:
        return NodeStream(self, btype, rho_)

    def short_list(self, btype: NeighborhoodType, rho_: int) -> List[StreamItem]:
        key = (rho_, btype)
        got = self._short.get(key)
        if got is None:
            got = materialize(self.node_stream(btype, rho_))
            self._short[key] = got
        return got

    def explorer(self, a: int) -> Explorer:
        ex = self._explorers.get(a)
        if ex is None:
            ex = Explorer(self.slp, self.slp.names[a])
            self._explorers[a] = ex
        return ex

    # distances -------------------------------------------------------
    def distance_leq(self, x: StreamItem, xs: Sequence, y: StreamItem, ys: Sequence,
                     bound: int, budget: int) -> bool:
        """Whether some node of ``xs`` is within ``bound`` of some node of ``ys``.

        ``xs``/``ys`` are nodes in the representation of the items' own
        nonterminals.  A path that is not a prefix of the other one, or whose
        extension is longer than ``budget`` edges, means the nodes are far.
        """
        counter = self.counter
        counter.steps += 1
        if x.lex == y.lex:
            lo, lo_nodes, hi_nodes, q = x, xs, ys, ()
        else:
            if x.lex < y.lex:
                lo, lo_nodes, hi, hi_nodes = x, xs, y, ys
            else:
                lo, lo_nodes, hi, hi_nodes = y, ys, x, xs
            cur = hi.cursor
            if cur.records:
                raise RestoreError("cursor is already shortened")
            cur.shorten()           # the leaf edge, weight unchanged
            steps = 0
            while cur.weight > lo.lex and steps < budget:
                cur.shorten()
                steps += 1
            found = cur.weight == lo.lex
            q = tuple(orig for _, orig, _ in reversed(cur.removed_edges()[1:]))
            for _ in range(steps + 1):
                cur.restore()
            counter.steps += 2 * steps
            if not found:
                return False
        ex = self.explorer(lo.a)
        reach = ex.bfs(lo_nodes, bound, counter)
        start = self.slp.names[lo.a]
        for node in hi_nodes:
            if embed(self.slp, start, q, node) in reach:
                return True
        return False

    # output ----------------------------------------------------------
    def lexrep(self, item: StreamItem, node) -> LexRep:
        q, v = node
        a = item.a
        b = self.wd.end(q, a)
        prod = self.slp.productions[b]
        return LexRep(item.lex + self.wd.lex_of_local(a, q), v, prod.name, prod.labels[v])

    def resolve(self, rep: LexRep):
        """D-representation ``(path, v)`` of a lex representation."""
        return self.wd.resolve_lex(rep.lex), rep.node


def extension_budget(rho_: int, r: int, bound: int, offset: int) -> int:
    """Longest path extension that can still put two entries within ``bound``.

    ``offset`` is the largest distance of an entry from its valid node.
    """
    return max(3 * rho_ - r, bound + 2 * offset)


@dataclass
class SessionStats:
    outputs: int = 0
    delays: List[int] = field(default_factory=list)
    skipped_max: int = 0
    start_steps: int = 0

    @property
    def max_delay(self) -> int:
        return max(self.delays, default=0)


class EnumSession:
    """Enumerates the admissible tuples of one consistent factorization."""

    def __init__(self, engine: Engine, fact: ConsistentFactorization):
        self.engine = engine
        self.fact = fact
        self.r = fact.r
        self.rho = fact.rho
        self.bound = 2 * fact.r + 1
        self.budget = extension_budget(fact.rho, fact.r, self.bound, fact.rho - fact.r)
        k = fact.k
        self.threshold = k * engine.d_eff ** (2 * fact.rho + 2 * fact.r + 2)
        self.betas = [engine.count_type_nodes(b, fact.rho) for b, _ in fact.parts]
        for b, _ in fact.parts:
            engine.contracted(fact.rho, b)
        # a single level is traversed once, so it is streamed whatever its size
        self.short = [beta <= self.threshold and fact.m > 1 for beta in self.betas]
        # short levels first, stable otherwise
        self.order = sorted(range(fact.m), key=lambda i: (not self.short[i], i))
        self.lists = {}
        for i in self.order:
            if self.short[i]:
                self.lists[i] = engine.short_list(fact.parts[i][0], fact.rho)
        self.stats = SessionStats()

    def _entries(self, level: int, item: StreamItem):
        sigma = self.fact.parts[level][1]
        pi = item.entry.pi
        return [pi[s] for s in sigma]

    def _source(self, level: int):
        if self.short[level]:
            return iter(self.lists[level])
        return iter(self.engine.node_stream(self.fact.parts[level][0], self.rho))

    def tuples(self) -> Iterator[Tuple[LexRep, ...]]:
        """Depth-first left-to-right walk over admissible stacks."""
        eng = self.engine
        counter = eng.counter
        m = self.fact.m
        if any(b == 0 for b in self.betas):
            return
        order = self.order
        stack: List[Tuple[StreamItem, list]] = []
        sources = [self._source(order[0])]
        last = counter.steps
        skipped = 0
        while sources:
            counter.steps += 1
            level = order[len(stack)]
            x = next(sources[-1], None)
            if x is None:
                sources.pop()
                if stack:
                    stack.pop()
                continue
            xs = self._entries(level, x)
            ok = True
            for y, ys in stack:
                if eng.distance_leq(y, ys, x, xs, self.bound, self.budget):
                    ok = False
                    break
            if not ok:
                skipped += 1
                continue
            if len(stack) + 1 == m:
                out = self._assemble(stack + [(x, xs)])
                now = counter.steps
                self.stats.delays.append(now - last)
                self.stats.skipped_max = max(self.stats.skipped_max, skipped)
                self.stats.outputs += 1
                skipped = 0
                last = now
                yield out
            else:
                stack.append((x, xs))
                sources.append(self._source(order[len(stack)]))

    def _assemble(self, stack) -> Tuple[LexRep, ...]:
        out: List[Optional[LexRep]] = [None] * self.fact.k
        for (item, nodes), level in zip(stack, self.order):
            block = self.fact.blocks[level]
            for p, node in zip(block, nodes):
                if out[p] is not None:
                    raise RuntimeError("factorization blocks overlap")
                out[p] = self.engine.lexrep(item, node)
        if any(x is None for x in out):
            raise RuntimeError("factorization blocks do not cover all positions")
        return tuple(out)


def assemble_output(engine: Engine, fact: ConsistentFactorization,
                    items: Sequence[StreamItem]) -> Tuple[LexRep, ...]:
    """Output tuple for one item per factorization component (in block order)."""
    out: List[Optional[LexRep]] = [None] * fact.k
    for item, block, (_, sigma) in zip(items, fact.blocks, fact.parts):
        for p, s in zip(block, sigma):
            out[p] = engine.lexrep(item, item.entry.pi[s])
    return tuple(out)


# ---------------------------------------------------------------- sentences

def eval_sentence(engine: Engine, s: BasicLocalSentence, exact: bool = True) -> bool:
    """Are there ``q`` nodes pairwise more than ``2r`` apart satisfying the local condition?"""
    r = s.r
    leaf = LocalFormula(s.formula, r, (s.var,))
    ti = engine.types(r)
    good = [t for t in ti.types if eval_local_on_type(leaf, t)]
    threshold = s.q * engine.d_eff ** (2 * r + 1)
    found: List[StreamItem] = []
    for t in good:
        found.extend(materialize_limited(engine.node_stream(t, r), threshold - len(found)))
        if len(found) >= threshold:
            return True
    bound = 2 * r
    budget = extension_budget(r, r, bound, 0)

    def far(x, y):
        return not engine.distance_leq(x, [x.entry.node], y, [y.entry.node], bound, budget)

    chosen: List[StreamItem] = []
    for x in found:
        if all(far(x, y) for y in chosen):
            chosen.append(x)
            if len(chosen) >= s.q:
                return True
    if not exact:
        return False
    # greedy can miss a packing when few candidates exist; search exhaustively
    n = len(found)
    conflict = [[not far(found[i], found[j]) if i != j else True for j in range(n)] for i in range(n)]

    def search(start, picked):
        if len(picked) >= s.q:
            return True
        for i in range(start, n):
            if n - i < s.q - len(picked):
                return False
            if all(not conflict[i][j] for j in picked):
                picked.append(i)
                if search(i + 1, picked):
                    return True
                picked.pop()
        return False

    return search(0, [])


def materialize_limited(stream: NodeStream, limit: Optional[int]) -> List[StreamItem]:
    out: List[StreamItem] = []
    last, last_lex = None, None
    while limit is None or len(out) < limit:
        x = stream.next()
        if x is None:
            break
        if last_lex != x.lex:
            last, last_lex = x.cursor.copy(), x.lex
        out.append(StreamItem(last, x.a, x.entry, x.lex))
    return out


# ---------------------------------------------------------------- queries

@dataclass
class QueryRun:
    """Per-run report filled while enumerating."""
    sentences: Dict[BasicLocalSentence, bool] = field(default_factory=dict)
    sessions: List[EnumSession] = field(default_factory=list)
    preprocessing_steps: int = 0
    delays: List[int] = field(default_factory=list)


def enumerate_query(engine: Engine, query: GNFQuery, run: Optional[QueryRun] = None,
                    max_k: int = 6, max_r: int = 8) -> Iterator[Tuple[LexRep, ...]]:
    if query.k > max_k:
        raise ValueError(f"query has {query.k} free variables, the cap is {max_k}")
    if query.radius > max_r:
        raise ValueError(f"query radius {query.radius} exceeds the cap {max_r}")
    for leaf in query.leaves():
        check_formula(leaf.formula, engine.slp.signature)
    run = run if run is not None else QueryRun()
    counter = engine.counter
    for s in query.sentences():
        run.sentences[s] = eval_sentence(engine, s)
    if query.k == 0:
        run.preprocessing_steps = counter.steps
        if evaluate_without_locals(query.root, run.sentences):
            yield ()
        return
    R = query.radius
    # preprocessing: types, candidates and their verdicts for every plan
    work = []
    memo: dict = {}
    for plan in dedup_plan(query):
        pq = plan.query
        engine.types(rho(R, pq.k))     # counted here, cached for the candidates
        positions = {x: i for i, x in enumerate(pq.vars)}
        for btype, facts in candidate_types(engine.slp, pq.k, R):
            if evaluate_on_type(pq.root, btype, positions, run.sentences, memo):
                work.append((plan, facts))
    sessions = []
    for plan, facts in work:
        for fact in facts:
            sessions.append((plan, EnumSession(engine, fact)))
    run.preprocessing_steps = counter.steps
    last = counter.steps
    for plan, sess in sessions:
        run.sessions.append(sess)
        for t in sess.tuples():
            now = counter.steps
            run.delays.append(now - last)
            last = now
            yield plan.expand(t)


def enumerate_type(engine: Engine, btype: NeighborhoodType) -> Iterator[Tuple[LexRep, ...]]:
    """All tuples with pairwise distinct entries whose neighborhood type is ``btype``."""
    for t, facts in candidate_types(engine.slp, btype.k, btype.r):
        if t == btype:
            for fact in facts:
                yield from EnumSession(engine, fact).tuples()
            return
