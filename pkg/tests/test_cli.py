import io
import json

import pytest
from conftest import fixture_path

from slpfo import cli
from slpfo.engine import LexRep

EX6 = fixture_path("example6.slp")
OUT_DEGREE = "(local :r 1 :vars (x) (exists y (r1 x y)))"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_validate_exit_codes():
    code, out, _ = run("validate", EX6)
    assert code == 0 and "apex: yes" in out
    assert run("validate", fixture_path("nonapex.slp"))[0] == 1
    code, out, _ = run("validate", fixture_path("cyclic.slp"))
    assert code == 1 and "acyclicity" in out


def test_usage_errors():
    assert run()[0] == 2
    assert run("enumerate", EX6, "--query", "(local :r 1 :vars (x) (r1 x))")[0] == 2
    assert run("enumerate", EX6)[0] == 2
    assert run("validate", "/nonexistent/file.slp")[0] == 2


def test_decompress_and_stats():
    code, out, err = run("decompress", EX6)
    assert code == 0 and "nodes 9 tuples 11 size 31" in err and out.count("tuple r1") == 11
    code, out, _ = run("stats", EX6)
    assert code == 0 and "slp_size 28" in out


def test_decompress_cap(tmp_path):
    path = tmp_path / "big.slp"
    assert run("gen", "ptree", "40", "-o", str(path))[0] == 0
    code, _, err = run("decompress", str(path))
    assert code == 3 and "error" in err


def test_paths_listing():
    code, out, _ = run("paths", EX6)
    assert code == 0
    assert out.splitlines() == ["0\tS", "1\tS1A", "2\tS1A1B", "3\tS2A", "4\tS2A1B", "5\tS3B"]
    assert run("paths", EX6, "--resolve", "4")[1] == "4\tS2A1B\n"
    assert run("paths", EX6, "--resolve", "6")[0] == 2


def test_enumerate_tsv_roundtrip():
    code, out, err = run("enumerate", EX6, "--query", OUT_DEGREE, "--verify")
    lines = out.splitlines()
    assert code == 0 and lines[-1] == "EOE" and len(lines) == 8
    assert "verify: ok" in err
    cells = [cli.parse_output_line(x) for x in lines]
    assert cells[-1] is None and all(len(c) == 1 for c in cells[:-1])


def test_enumerate_jsonl_and_resolve():
    code, out, _ = run("enumerate", EX6, "--query", OUT_DEGREE, "--format", "jsonl", "--resolve")
    lines = out.splitlines()
    assert code == 0 and json.loads(lines[-1]) == {"end": True}
    first = json.loads(lines[0])["tuple"][0]
    assert set(first) == {"lex", "node", "path"}
    assert cli.parse_output_line(lines[0], "jsonl") == [(first["lex"], first["node"])]


def test_enumerate_limit_and_stats():
    code, out, err = run("enumerate", EX6, "--query", OUT_DEGREE, "--limit", "2", "--stats", "--verify")
    assert code == 0 and len(out.splitlines()) == 3
    assert "preprocessing_steps" in err and "verify: ok" in err


def test_empty_result_prints_only_the_end_marker():
    code, out, _ = run("enumerate", EX6, "--query", "(local :r 1 :vars (x) (not (= x x)))")
    assert code == 0 and out == "EOE\n"


def test_format_tuple_roundtrip():
    t = (LexRep(4, 1, "B", "w"), LexRep(0, 0, "S", "u"))
    for fmt in ("tsv", "jsonl"):
        assert cli.parse_output_line(cli.format_tuple(t, fmt), fmt) == [(4, "w"), (0, "u")]
    assert cli.parse_output_line(cli.format_end("tsv")) is None


def test_count_commands():
    assert run("count", EX6, "--query", OUT_DEGREE)[1].strip() == "7"
    code, out, _ = run("count", EX6, "--list-types", "1")
    rows = [line.split("\t") for line in out.splitlines()]
    assert code == 0 and sum(int(r[1]) for r in rows) == 9
    assert run("count", EX6, "--type", rows[0][2])[1].strip() == rows[0][1]
    assert run("count", EX6, "--type", "0", "--rho", "1")[1].strip() == rows[0][1]
    assert run("count", EX6, "--type", "0")[0] == 2


def test_oracle_eval():
    code, out, _ = run("oracle-eval", EX6, "--query", "(fo (forall y (not (r1 y x))))")
    assert code == 0 and out == "u\nEOE\n"


def test_gen_outputs_parseable_slp(tmp_path):
    code, out, _ = run("gen", "chain", "1")
    assert code == 0 and out.startswith("signature")
    path = tmp_path / "c.slp"
    path.write_text(out)
    assert "nodes 2 tuples 1" in run("decompress", str(path))[2]
    assert run("gen", "ptree")[0] == 2


def test_bench_csv():
    code, out, _ = run("bench", "--sizes", "3,4", "--query", "(local :r 1 :vars (x) (not (exists y (e x y))))")
    rows = out.splitlines()
    assert code == 0 and rows[0].startswith("family,n,slp_size")
    assert [r.split(",")[4] for r in rows[1:]] == ["8", "16"]
    code, out, _ = run("bench", "--sizes", "3", "--query", "(local :r 1 :vars (x) (not (= x x)))")
    assert out.splitlines()[1].split(",")[4] == "0"
    assert run("bench", "--sizes", "a,b", "--query", "true")[0] == 2
    assert run("bench", "--family", "grid-strip", "--sizes", "2", "--query", "(local :r 1 :vars (x) (e x x))")[0] == 2


@pytest.mark.parametrize("fmt", ["tsv", "jsonl"])
def test_sentence_query_outputs_empty_tuple(fmt):
    code, out, _ = run("enumerate", EX6, "--query", "(scattered :q 2 :r 1 (exists y (r1 z y)))",
                       "--format", fmt)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2
    assert cli.parse_output_line(lines[0], fmt) == []
