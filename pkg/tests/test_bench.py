import pytest

from slpfo.bench import BENCH_FIELDS, bench_csv, bench_row, kernel_benchmark
from slpfo.logic import QuerySyntaxError
from slpfo.query import parse_query

LEAVES = parse_query("(local :r 1 :vars (x) (not (exists y (e x y))))")


def test_bench_row_fields():
    row = bench_row("ptree", 5, LEAVES)
    assert list(row) == BENCH_FIELDS
    assert row["outputs"] == 32 and row["max_delay"] >= row["median_delay"] > 0


def test_limit_stops_early():
    assert bench_row("ptree", 12, LEAVES, limit=3)["outputs"] == 3


def test_delay_flat_on_chains():
    rows = [bench_row("chain", n, LEAVES) for n in (8, 64)]
    assert [r["outputs"] for r in rows] == [1, 1]
    assert rows[1]["preprocessing_steps"] <= 10 * rows[0]["preprocessing_steps"]


def test_csv_header():
    corners = parse_query("(local :r 1 :vars (x) (not (exists y (h x y))))")
    text = bench_csv("grid-strip", [2], corners)
    assert text.splitlines()[0] == ",".join(BENCH_FIELDS)
    assert text.splitlines()[1].split(",")[4] == "2"


def test_query_over_foreign_relation_is_rejected():
    with pytest.raises(QuerySyntaxError):
        bench_row("grid-strip", 2, LEAVES)


def test_kernel_benchmark_agrees():
    rows = kernel_benchmark(sizes=(20,), repeat=2).splitlines()
    assert rows[0] == "nodes,kernel,seconds_per_call"
    assert {r.split(",")[1] for r in rows[1:]} <= {"python", "compiled"}
