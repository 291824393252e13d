"""First-order formulas: AST, s-expression reader, relativization, evaluation."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .structures import UNIVERSE_REL, Signature, Structure


class QuerySyntaxError(ValueError):
    def __init__(self, msg: str, pos: Optional[Tuple[int, int]] = None):
        self.pos = pos
        where = f" at line {pos[0]}, column {pos[1]}" if pos else ""
        super().__init__(msg + where)


# ---------------------------------------------------------------- AST

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: Tuple[str, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    items: Tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    items: Tuple[Formula, ...]


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class DistGuard(Formula):
    """``var`` lies within distance ``r`` of one of ``centers``; decided by BFS."""
    centers: Tuple[str, ...]
    var: str
    r: int


def free_vars(f: Formula) -> Tuple[str, ...]:
    """Free variables in order of first occurrence."""
    seen: List[str] = []

    def walk(g, bound):
        if isinstance(g, Truth):
            return
        if isinstance(g, Eq):
            names = (g.left, g.right)
        elif isinstance(g, Atom):
            names = g.args
        elif isinstance(g, DistGuard):
            names = g.centers + (g.var,)
        elif isinstance(g, Not):
            walk(g.body, bound)
            return
        elif isinstance(g, (And, Or)):
            for h in g.items:
                walk(h, bound)
            return
        elif isinstance(g, (Exists, Forall)):
            walk(g.body, bound | {g.var})
            return
        else:
            raise TypeError(g)
        for x in names:
            if x not in bound and x not in seen:
                seen.append(x)

    walk(f, frozenset())
    return tuple(seen)


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, (Truth, Eq, Atom, DistGuard)):
        return 0
    if isinstance(f, Not):
        return quantifier_rank(f.body)
    if isinstance(f, (And, Or)):
        return max((quantifier_rank(g) for g in f.items), default=0)
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_rank(f.body)
    raise TypeError(f)


def relations_used(f: Formula) -> set:
    if isinstance(f, Atom):
        return {f.rel}
    if isinstance(f, Not):
        return relations_used(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for g in f.items:
            out |= relations_used(g)
        return out
    if isinstance(f, (Exists, Forall)):
        return relations_used(f.body)
    return set()


def substitute(f: Formula, mapping: Dict[str, str]) -> Formula:
    """Rename free variables (no capture: bound names shadow the mapping)."""
    if not mapping:
        return f
    if isinstance(f, Truth):
        return f
    if isinstance(f, Eq):
        return Eq(mapping.get(f.left, f.left), mapping.get(f.right, f.right))
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(mapping.get(x, x) for x in f.args))
    if isinstance(f, DistGuard):
        return DistGuard(tuple(mapping.get(x, x) for x in f.centers), mapping.get(f.var, f.var), f.r)
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(substitute(g, mapping) for g in f.items))
    if isinstance(f, Or):
        return Or(tuple(substitute(g, mapping) for g in f.items))
    if isinstance(f, (Exists, Forall)):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        var = f.var
        if var in inner.values():
            taken = set(inner.values()) | set(inner) | set(free_vars(f.body)) | _bound_names(f.body)
            while var in taken:
                var += "'"
            inner[f.var] = var
        return type(f)(var, substitute(f.body, inner))
    raise TypeError(f)


def relativize(f: Formula, xs: Sequence[str], r: int) -> Formula:
    """Guard every quantifier by ``DistGuard(xs, y, r)``."""
    xs = tuple(xs)
    if isinstance(f, (Truth, Eq, Atom, DistGuard)):
        return f
    if isinstance(f, Not):
        return Not(relativize(f.body, xs, r))
    if isinstance(f, And):
        return And(tuple(relativize(g, xs, r) for g in f.items))
    if isinstance(f, Or):
        return Or(tuple(relativize(g, xs, r) for g in f.items))
    if isinstance(f, (Exists, Forall)):
        var, body = f.var, f.body
        if var in xs:
            # the guard must keep talking about the outer centers
            taken = set(xs) | set(free_vars(body)) | _bound_names(body)
            while var in taken:
                var += "'"
            body = substitute(body, {f.var: var})
        body = relativize(body, xs, r)
        if isinstance(f, Exists):
            return Exists(var, And((DistGuard(xs, var, r), body)))
        return Forall(var, Or((Not(DistGuard(xs, var, r)), body)))
    raise TypeError(f)


def reduce_arity_formula(f: Formula, signature: Signature) -> Formula:
    """Counterpart of ``reduce_arity`` for formulas.

    Quantifiers are restricted to the original universe, atoms of arity > 2
    become ``∃t (R(t) ∧ E_1(t, y_1) ∧ ...)``, and the free variables are
    required to lie in the original universe.
    """
    if signature.max_arity <= 2:
        return f
    counter = itertools.count()
    names = set(free_vars(f)) | _bound_names(f)

    def fresh():
        while True:
            v = f"_t{next(counter)}"
            if v not in names:
                names.add(v)
                return v

    def go(g):
        if isinstance(g, (Truth, Eq, DistGuard)):
            return g
        if isinstance(g, Atom):
            if len(g.args) <= 2:
                return g
            t = fresh()
            parts = [Atom(g.rel, (t,))] + [Atom(f"E{j}", (t, y)) for j, y in enumerate(g.args, 1)]
            return Exists(t, And(tuple(parts)))
        if isinstance(g, Not):
            return Not(go(g.body))
        if isinstance(g, And):
            return And(tuple(go(h) for h in g.items))
        if isinstance(g, Or):
            return Or(tuple(go(h) for h in g.items))
        if isinstance(g, Exists):
            return Exists(g.var, And((Atom(UNIVERSE_REL, (g.var,)), go(g.body))))
        if isinstance(g, Forall):
            return Forall(g.var, Or((Not(Atom(UNIVERSE_REL, (g.var,))), go(g.body))))
        raise TypeError(g)

    body = go(f)
    fv = free_vars(f)
    if not fv:
        return body
    return And(tuple(Atom(UNIVERSE_REL, (x,)) for x in fv) + (body,))


def _bound_names(f: Formula) -> set:
    if isinstance(f, (Exists, Forall)):
        return {f.var} | _bound_names(f.body)
    if isinstance(f, Not):
        return _bound_names(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for g in f.items:
            out |= _bound_names(g)
        return out
    return set()


def check_formula(f: Formula, signature: Signature) -> None:
    """Raise ``QuerySyntaxError`` on unknown relations or arity mismatches."""
    if isinstance(f, Atom):
        if f.rel not in signature:
            raise QuerySyntaxError(f"unknown relation {f.rel!r}")
        if signature.arity(f.rel) != len(f.args):
            raise QuerySyntaxError(
                f"arity error: {f.rel} takes {signature.arity(f.rel)} arguments, got {len(f.args)}")
    elif isinstance(f, Not):
        check_formula(f.body, signature)
    elif isinstance(f, (And, Or)):
        for g in f.items:
            check_formula(g, signature)
    elif isinstance(f, (Exists, Forall)):
        check_formula(f.body, signature)


# ---------------------------------------------------------------- evaluation

def holds(s: Structure, f: Formula, env: Dict[str, int],
          dist: Callable[[int, int], float]) -> bool:
    """Truth of ``f`` in ``s`` under ``env``; ``dist`` decides guards."""
    if isinstance(f, Atom):
        return tuple(env[x] for x in f.args) in s.relations[f.rel]
    if isinstance(f, Eq):
        return env[f.left] == env[f.right]
    if isinstance(f, DistGuard):
        y = env[f.var]
        return any(dist(env[x], y) <= f.r for x in f.centers)
    if isinstance(f, Not):
        return not holds(s, f.body, env, dist)
    if isinstance(f, And):
        return all(holds(s, g, env, dist) for g in f.items)
    if isinstance(f, Or):
        return any(holds(s, g, env, dist) for g in f.items)
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, (Exists, Forall)):
        want = isinstance(f, Exists)
        saved = env.get(f.var, _MISSING)
        try:
            for v in range(s.n):
                env[f.var] = v
                if holds(s, f.body, env, dist) == want:
                    return want
            return not want
        finally:
            if saved is _MISSING:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
    raise TypeError(f)


_MISSING = object()


# ---------------------------------------------------------------- s-expressions

_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")


@dataclass(frozen=True)
class SAtom:
    text: str
    pos: Tuple[int, int]


@dataclass(frozen=True)
class SList:
    items: Tuple[Union["SList", SAtom], ...]
    pos: Tuple[int, int]


def read_sexprs(text: str) -> List[Union[SList, SAtom]]:
    stack: List[Tuple[list, Tuple[int, int]]] = [([], (1, 1))]
    line_starts = [0] + [m.end() for m in re.finditer(r"\n", text)]

    def position(offset):
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - line_starts[lo] + 1

    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            break
        i = m.end()
        if m.group(1):
            continue
        if m.group(2):
            stack.append(([], position(m.start(2))))
        elif m.group(3):
            if len(stack) == 1:
                raise QuerySyntaxError("unbalanced ')'", position(m.start(3)))
            items, pos = stack.pop()
            stack[-1][0].append(SList(tuple(items), pos))
        elif m.group(4):
            stack[-1][0].append(SAtom(m.group(4), position(m.start(4))))
    if len(stack) != 1:
        raise QuerySyntaxError("unclosed '('", stack[-1][1])
    return stack[0][0]


_KEYWORDS = {"exists", "forall", "and", "or", "not", "implies", "=", "!="}


def _var(x, what="variable") -> str:
    if not isinstance(x, SAtom) or x.text.startswith(":") or x.text in _KEYWORDS:
        raise QuerySyntaxError(f"expected a {what}", x.pos)
    return x.text


def formula_from_sexpr(e, signature: Optional[Signature] = None) -> Formula:
    if isinstance(e, SAtom):
        if e.text == "true":
            return Truth(True)
        if e.text == "false":
            return Truth(False)
        raise QuerySyntaxError(f"unexpected atom {e.text!r}", e.pos)
    if not e.items:
        raise QuerySyntaxError("empty list", e.pos)
    head = e.items[0]
    if not isinstance(head, SAtom):
        raise QuerySyntaxError("expected an operator", e.pos)
    op, args = head.text, e.items[1:]
    if op in ("exists", "forall"):
        if len(args) != 2:
            raise QuerySyntaxError(f"{op} takes a variable (or list) and a body", e.pos)
        names = [_var(x) for x in args[0].items] if isinstance(args[0], SList) else [_var(args[0])]
        if not names:
            raise QuerySyntaxError("empty quantifier list", e.pos)
        body = formula_from_sexpr(args[1], signature)
        cls = Exists if op == "exists" else Forall
        for x in reversed(names):
            body = cls(x, body)
        return body
    if op == "not":
        if len(args) != 1:
            raise QuerySyntaxError("not takes one argument", e.pos)
        return Not(formula_from_sexpr(args[0], signature))
    if op in ("and", "or"):
        items = tuple(formula_from_sexpr(a, signature) for a in args)
        if not items:
            return Truth(op == "and")
        if len(items) == 1:
            return items[0]
        return And(items) if op == "and" else Or(items)
    if op == "implies":
        if len(args) != 2:
            raise QuerySyntaxError("implies takes two arguments", e.pos)
        return Or((Not(formula_from_sexpr(args[0], signature)), formula_from_sexpr(args[1], signature)))
    if op in ("=", "!="):
        if len(args) != 2:
            raise QuerySyntaxError(f"{op} takes two variables", e.pos)
        f = Eq(_var(args[0]), _var(args[1]))
        return f if op == "=" else Not(f)
    names = tuple(_var(a) for a in args)
    if signature is not None:
        if op not in signature:
            raise QuerySyntaxError(f"unknown relation {op!r}", head.pos)
        if signature.arity(op) != len(names):
            raise QuerySyntaxError(
                f"arity error: {op} takes {signature.arity(op)} arguments, got {len(names)}", e.pos)
    return Atom(op, names)


def parse_formula(text: str, signature: Optional[Signature] = None) -> Formula:
    exprs = read_sexprs(text)
    if len(exprs) != 1:
        raise QuerySyntaxError("expected exactly one formula")
    return formula_from_sexpr(exprs[0], signature)


def format_formula(f: Formula) -> str:
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Atom):
        return "(" + " ".join((f.rel,) + f.args) + ")"
    if isinstance(f, DistGuard):
        return f"(dist<= ({' '.join(f.centers)}) {f.var} {f.r})"
    if isinstance(f, Not):
        return f"(not {format_formula(f.body)})"
    if isinstance(f, And):
        return "(and " + " ".join(format_formula(g) for g in f.items) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(format_formula(g) for g in f.items) + ")"
    if isinstance(f, Exists):
        return f"(exists {f.var} {format_formula(f.body)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {format_formula(f.body)})"
    raise TypeError(f)
