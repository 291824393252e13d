"""Step-count benchmarks and the refinement-kernel comparison."""

from __future__ import annotations

import csv
import io
import random
import statistics
import time
from typing import Iterable, List, Optional

from . import _canon_py
from .engine import Engine, QueryRun, enumerate_query
from .expansion import Counter
from .generators import generate
from .query import GNFQuery
from .slp import slp_size

BENCH_FIELDS = ["family", "n", "slp_size", "preprocessing_steps", "outputs",
                "max_delay", "median_delay", "wall_seconds"]


def bench_row(family: str, n: int, query: GNFQuery, limit: Optional[int] = None, seed: int = 0) -> dict:
    slp = generate(family, n, seed=seed)
    counter = Counter()
    t0 = time.perf_counter()
    eng = Engine(slp, counter)
    run = QueryRun()
    outputs = 0
    for _ in enumerate_query(eng, query, run):
        outputs += 1
        if limit is not None and outputs >= limit:
            break
    wall = time.perf_counter() - t0
    delays = run.delays[1:]   # the first gap belongs to the preprocessing hand-off
    return {
        "family": family, "n": n, "slp_size": slp_size(slp),
        "preprocessing_steps": run.preprocessing_steps, "outputs": outputs,
        "max_delay": max(delays, default=0),
        "median_delay": statistics.median(delays) if delays else 0,
        "wall_seconds": round(wall, 4),
    }


def bench_csv(family: str, sizes: Iterable[int], query: GNFQuery, limit: Optional[int] = None,
              seed: int = 0) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    for n in sizes:
        w.writerow(bench_row(family, n, query, limit, seed))
    return buf.getvalue()


def _random_graph(rng: random.Random, n: int):
    adj: List[list] = [[] for _ in range(n)]
    for _ in range(2 * n):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            adj[a].append((0, b))
            adj[b].append((1, a))
    offsets, labs, targets = [0], [], []
    for v in range(n):
        for lab, w in sorted(adj[v]):
            labs.append(lab)
            targets.append(w)
        offsets.append(len(labs))
    return [0] * n, offsets, labs, targets


def kernel_benchmark(sizes: Iterable[int] = (50, 200, 800), repeat: int = 20, seed: int = 0) -> str:
    """CSV comparing the compiled and the pure-Python refinement."""
    try:
        from . import _canon_ext
        kernels = [("python", _canon_py.refine), ("compiled", _canon_ext.refine)]
    except ImportError:
        kernels = [("python", _canon_py.refine)]
    rng = random.Random(seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["nodes", "kernel", "seconds_per_call"])
    for n in sizes:
        args = _random_graph(rng, n)
        expected = kernels[0][1](*args)
        for name, fn in kernels:
            if fn(*args) != expected:
                raise AssertionError(f"kernel {name} disagrees")
            t0 = time.perf_counter()
            for _ in range(repeat):
                fn(*args)
            w.writerow([n, name, f"{(time.perf_counter() - t0) / repeat:.6f}"])
    return buf.getvalue()
