"""Command-line interface.

Exit codes: 0 success, 1 validation or verification failure, 2 usage
errors (bad arguments, unparsable input), 3 resource caps exceeded.
"""

from __future__ import annotations

import argparse
import collections
import json
import sys
from typing import List, Optional, Sequence, Tuple

from .bench import bench_csv, kernel_benchmark
from .canon import KERNEL, SizeCapError, decode_type, encode_type
from .dagpaths import ContractedDag, WeightedDag
from .engine import Engine, LexRep, QueryRun, enumerate_query
from .expansion import Counter
from .generators import generate
from .logic import QuerySyntaxError
from .oracle import OracleBudgetError, naive_query
from .query import FOQuery, GNFQuery, candidate_types, parse_query, rho
from .slp import (SLP, ApexRequired, DecompressionTooLarge, build_dag, decompress, format_slp,
                  parse_slp, reduce_arity_slp, slp_size, val_degree, val_node_count, validate)
from .structures import ArityError, ParseError, format_structure, parse_structure

OK, FAILED, USAGE, CAP = 0, 1, 2, 3

SIZE_NOTE = ("note: size = sum over productions of |universe| + sum of arities over tuples, "
             "plus 1 + rank(target) per reference; for the three-production example fixture this "
             "gives 28, where a hand count of 26 is sometimes quoted")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- output encoding

def format_cell(rep: LexRep, path: Optional[str] = None) -> str:
    return f"{rep.lex}:{rep.label or rep.node}" + (f"@{path}" if path else "")


def format_tuple(t: Sequence[LexRep], fmt: str, paths: Optional[Sequence[str]] = None) -> str:
    paths = paths or [None] * len(t)
    if fmt == "jsonl":
        cells = []
        for rep, p in zip(t, paths):
            cell = {"lex": rep.lex, "node": rep.label or str(rep.node)}
            if p:
                cell["path"] = p
            cells.append(cell)
        return json.dumps({"tuple": cells})
    return "\t".join(format_cell(rep, p) for rep, p in zip(t, paths))


def format_end(fmt: str) -> str:
    return json.dumps({"end": True}) if fmt == "jsonl" else "EOE"


def parse_output_line(line: str, fmt: str = "tsv") -> Optional[List[Tuple[int, str]]]:
    """Inverse of ``format_tuple``: list of (lex, node label); ``None`` at the end marker."""
    line = line.rstrip("\n")
    if fmt == "jsonl":
        obj = json.loads(line)
        if obj.get("end"):
            return None
        return [(c["lex"], c["node"]) for c in obj["tuple"]]
    if line == "EOE":
        return None
    if line == "":
        return []
    out = []
    for cell in line.split("\t"):
        cell = cell.split("@", 1)[0]
        lex, _, label = cell.partition(":")
        out.append((int(lex), label))
    return out


# ---------------------------------------------------------------- helpers

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load_slp(path: str) -> SLP:
    return parse_slp(_read(path))


def _query_text(args) -> str:
    if getattr(args, "query_file", None):
        return _read(args.query_file)
    if getattr(args, "query", None):
        return args.query
    raise UsageError("a query is required (--query or --query-file)")


def _engine_slp(slp: SLP, err) -> SLP:
    if slp.signature.max_arity > 2:
        print("warning: relations of arity > 2 were replaced by the reduced signature "
              "(U, E1, ...); queries are read over that signature", file=err)
        return reduce_arity_slp(slp)
    return slp


# ---------------------------------------------------------------- commands

def cmd_validate(args, out, err) -> int:
    report = validate(_load_slp(args.slp))
    print(report.render(), file=out)
    # the enumeration engine needs apex input, so non-apex counts as a failure
    return OK if report.ok and report.apex else FAILED


def cmd_decompress(args, out, err) -> int:
    slp = _load_slp(args.slp)
    dec = decompress(slp, cap=args.cap)
    s = dec.structure
    print(format_structure(s), end="", file=out)
    print(f"nodes {s.n} tuples {s.num_tuples()} size {s.size()}", file=err)
    return OK


def cmd_stats(args, out, err) -> int:
    slp = _load_slp(args.slp)
    report = validate(slp)
    print(f"nonterminals {len(slp.productions)}", file=out)
    print(f"slp_size {slp_size(slp)}", file=out)
    print(SIZE_NOTE, file=out)
    print(f"apex {'yes' if report.apex else 'no'}", file=out)
    if report.ok:
        print(f"val_nodes {val_node_count(slp)}", file=out)
        if report.apex:
            print(f"val_degree {val_degree(slp)}", file=out)
        wd = WeightedDag(build_dag(slp))
        print(f"initial_paths {wd.number_paths[wd.initial]}", file=out)
    print(f"kernel {KERNEL}", file=out)
    return OK if report.ok else FAILED


def cmd_paths(args, out, err) -> int:
    slp = _load_slp(args.slp)
    report = validate(slp)
    if not report.ok:
        print(report.render(), file=err)
        return FAILED
    wd = WeightedDag(build_dag(slp))
    if args.resolve is not None:
        try:
            path = wd.resolve_lex(args.resolve)
        except ValueError as e:
            raise UsageError(str(e)) from None
        print(f"{args.resolve}\t{wd.format_path(path)}", file=out)
        return OK
    ctx = ContractedDag(wd, range(wd.n))
    cur = ctx.cursor()
    count = 0
    while not cur.done:
        print(f"{cur.weight}\t{wd.format_path(cur.path())}", file=out)
        count += 1
        if args.limit is not None and count >= args.limit:
            break
        if not cur.next_path():
            break
    return OK


def cmd_count(args, out, err) -> int:
    slp = _engine_slp(_load_slp(args.slp), err)
    eng = Engine(slp)
    if args.list_types is not None:
        ti = eng.types(args.list_types)
        for i, t in enumerate(ti.types):
            print(f"{i}\t{eng.count_type_nodes(t, args.list_types)}\t{encode_type(t)}", file=out)
        return OK
    if args.type is not None:
        if args.type.isdigit():
            if args.rho is None:
                raise UsageError("--type INDEX needs --rho")
            types = eng.types(args.rho).types
            i = int(args.type)
            if i >= len(types):
                raise UsageError(f"type index {i} out of range (0..{len(types) - 1})")
            t = types[i]
        else:
            try:
                t = decode_type(args.type, slp.signature)
            except ValueError as e:
                raise UsageError(f"bad type encoding: {e}") from None
            if t.k != 1:
                raise UsageError("counting needs a single-center type")
        print(eng.count_type_nodes(t, t.r), file=out)
        return OK
    q = parse_query(_query_text(args), slp.signature)
    if not isinstance(q, GNFQuery) or q.k != 1:
        raise UsageError("count --query needs a query with exactly one free variable")
    run = QueryRun()
    from .engine import eval_sentence
    from .query import evaluate_on_type
    for s in q.sentences():
        run.sentences[s] = eval_sentence(eng, s)
    total = 0
    R = q.radius
    eng.types(rho(R, 1))
    for t, facts in candidate_types(slp, 1, R):
        if evaluate_on_type(q.root, t, {q.vars[0]: 0}, run.sentences):
            total += sum(eng.count_type_nodes(f.parts[0][0], f.rho) for f in facts)
    print(total, file=out)
    return OK


def cmd_enumerate(args, out, err) -> int:
    slp = _engine_slp(_load_slp(args.slp), err)
    q = parse_query(_query_text(args), slp.signature)
    if isinstance(q, FOQuery):
        raise UsageError("(fo ...) queries are only accepted by oracle-eval")
    counter = Counter()
    eng = Engine(slp, counter)
    run = QueryRun()
    seen = []
    count = 0
    for t in enumerate_query(eng, q, run):
        paths = None
        if args.resolve:
            paths = [eng.wd.format_path(eng.resolve(x)[0]) for x in t]
        print(format_tuple(t, args.format, paths), file=out)
        if args.verify:
            seen.append(t)
        count += 1
        if args.limit is not None and count >= args.limit:
            break
    print(format_end(args.format), file=out)
    if args.stats:
        print(f"preprocessing_steps {run.preprocessing_steps}", file=err)
        for s, v in run.sentences.items():
            print(f"sentence q={s.q} r={s.r}: {'true' if v else 'false'}", file=err)
        for i, sess in enumerate(run.sessions):
            kinds = ",".join("short" if x else "long" for x in sess.short)
            print(f"session {i}: m={sess.fact.m} beta={sess.betas} levels={kinds} "
                  f"outputs={sess.stats.outputs} max_skipped={sess.stats.skipped_max}", file=err)
        hist = collections.Counter(run.delays[1:])
        print("delay_histogram " + " ".join(f"{d}:{c}" for d, c in sorted(hist.items())), file=err)
    if args.verify:
        dec = decompress(slp)
        got = [tuple(dec.index[eng.resolve(x)] for x in t) for t in seen]
        want = naive_query(dec.structure, q)
        limited = args.limit is not None and count >= args.limit
        ok = len(got) == len(set(got)) and (set(got) <= want if limited else set(got) == want)
        print(f"verify: {'ok' if ok else 'MISMATCH'} ({len(got)} tuples, oracle {len(want)})", file=err)
        return OK if ok else FAILED
    return OK


def cmd_oracle_eval(args, out, err) -> int:
    text = _read(args.input)
    if any(line.split()[:1] == ["initial"] for line in text.splitlines()):
        slp = parse_slp(text)
        s = decompress(slp).structure
    else:
        s = parse_structure(text)
    q = parse_query(_query_text(args), s.signature, oracle=True)
    if isinstance(q, FOQuery):
        print("warning: (fo ...) is evaluated by brute force only", file=err)
    for t in sorted(naive_query(s, q)):
        print("\t".join(s.label(v) for v in t), file=out)
    print("EOE", file=out)
    return OK


def cmd_gen(args, out, err) -> int:
    try:
        kw = {}
        if args.family == "random-apex":
            kw = {"nonterminals": args.nonterminals, "max_degree": args.max_degree}
        slp = generate(args.family, args.n, seed=args.seed, **kw)
    except (ValueError, RuntimeError) as e:
        raise UsageError(str(e)) from None
    text = format_slp(slp)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="", file=out)
    return OK


def cmd_bench(args, out, err) -> int:
    if args.kernel:
        print(kernel_benchmark(), end="", file=out)
        return OK
    try:
        sizes = [int(x) for x in args.sizes.split(",") if x]
    except ValueError:
        raise UsageError("--sizes expects comma-separated integers") from None
    q = parse_query(_query_text(args), None)
    print(bench_csv(args.family, sizes, q, args.limit, args.seed), end="", file=out)
    return OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="slpfo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("validate", help="check an SLP file and report apex status")
    c.add_argument("slp")
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("decompress", help="print the decompressed structure")
    c.add_argument("slp")
    c.add_argument("--cap", type=int, default=None, help="node cap (default from SLPFO_DECOMPRESS_CAP)")
    c.set_defaults(func=cmd_decompress)

    c = sub.add_parser("stats", help="sizes, degree and path counts")
    c.add_argument("slp")
    c.set_defaults(func=cmd_stats)

    c = sub.add_parser("paths", help="list initial paths with their ranks")
    c.add_argument("slp")
    c.add_argument("--limit", type=int)
    c.add_argument("--resolve", type=int, metavar="RANK", help="print the path of one rank")
    c.set_defaults(func=cmd_paths)

    def add_query(c):
        c.add_argument("--query")
        c.add_argument("--query-file")

    c = sub.add_parser("count", help="number of nodes of a type, or answers of a one-variable query")
    c.add_argument("slp")
    c.add_argument("--type", help="type encoding or index into the realized types")
    c.add_argument("--rho", type=int, help="radius for --type INDEX")
    c.add_argument("--list-types", type=int, metavar="RHO", help="list realized single-node types")
    add_query(c)
    c.set_defaults(func=cmd_count)

    c = sub.add_parser("enumerate", help="enumerate query answers")
    c.add_argument("slp")
    add_query(c)
    c.add_argument("--limit", type=int)
    c.add_argument("--resolve", action="store_true", help="append explicit paths")
    c.add_argument("--verify", action="store_true", help="compare with the oracle")
    c.add_argument("--stats", action="store_true", help="print counters to stderr")
    c.add_argument("--format", choices=["tsv", "jsonl"], default="tsv")
    c.set_defaults(func=cmd_enumerate)

    c = sub.add_parser("oracle-eval", help="brute-force evaluation on the explicit structure")
    c.add_argument("input", help="structure or SLP file")
    add_query(c)
    c.set_defaults(func=cmd_oracle_eval)

    c = sub.add_parser("gen", help="generate an SLP family member")
    c.add_argument("family", choices=["ptree", "chain", "grid-strip", "random-apex"])
    c.add_argument("n", type=int, nargs="?")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--nonterminals", type=int, default=8)
    c.add_argument("--max-degree", type=int, default=4)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_gen)

    c = sub.add_parser("bench", help="step-count benchmark over a family, or the kernel comparison")
    c.add_argument("--family", default="ptree", choices=["ptree", "chain", "grid-strip"])
    c.add_argument("--sizes", default="6,10,14")
    c.add_argument("--limit", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--kernel", action="store_true")
    add_query(c)
    c.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out, err)
    except UsageError as e:
        print(f"error: {e}", file=err)
        return USAGE
    except (ParseError, QuerySyntaxError, ArityError) as e:
        print(f"error: {e}", file=err)
        return USAGE
    except ApexRequired as e:
        print(f"error: {e}", file=err)
        return FAILED
    except (DecompressionTooLarge, SizeCapError, OracleBudgetError) as e:
        print(f"error: {e}", file=err)
        return CAP


if __name__ == "__main__":
    sys.exit(main())
