import json

import pytest

from vquery.cli import (EXIT_MEMORY, EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED,
                        MEMORY_CAP_ENV, main)

DATA = """\
<http://example.org/Alice> <http://example.org/knows> <http://example.org/Bob> .
<http://example.org/Alice> <http://example.org/knows> <http://example.org/Charlie> .
<http://example.org/Bob> <http://example.org/worksAt> <http://example.org/ACME> .
"""


@pytest.fixture
def data_file(tmp_path):
    f = tmp_path / "g.nt"
    f.write_text(DATA)
    return str(f)


def test_load_reports_count(data_file, capsys):
    assert main(["load", data_file]) == EXIT_OK
    out = capsys.readouterr().out
    assert "loaded 3 triples" in out


def test_load_syntax_error_exit_code(tmp_path, capsys):
    f = tmp_path / "bad.nt"
    f.write_text("<http://x/a> <http://x/b>\n")
    assert main(["load", str(f)]) == EXIT_PARSE
    assert "line 1" in capsys.readouterr().err


def test_query_tsv_output(data_file, capsys):
    code = main(["query", "SELECT ?a ?b WHERE { ?a :knows ?b }",
                 "--data", data_file])
    assert code == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "?a\t?b"
    assert len(lines) == 3
    assert all("<http://example.org/" in l for l in lines[1:])


def test_query_json_output(data_file, capsys):
    code = main(["query", "SELECT COUNT(*) AS ?n WHERE { ?a :knows ?b }",
                 "--data", data_file, "--output", "json"])
    assert code == EXIT_OK
    objs = json.loads(capsys.readouterr().out)
    assert objs == [{"n": 2}]


def test_query_engines_agree(data_file, capsys):
    outs = []
    for engine in ("auto", "batch", "row"):
        main(["query", "SELECT ?a ?b WHERE { ?a :knows ?b }",
              "--data", data_file, "--engine", engine])
        outs.append(sorted(capsys.readouterr().out.splitlines()))
    assert outs[0] == outs[1] == outs[2]


def test_query_from_file(data_file, tmp_path, capsys):
    qf = tmp_path / "q.rq"
    qf.write_text("SELECT ?a WHERE { ?a :worksAt ?c }")
    assert main(["query", str(qf), "--data", data_file]) == EXIT_OK
    out = capsys.readouterr().out
    assert "Bob" in out


def test_query_over_empty_store(capsys):
    assert main(["query", "SELECT * { ?s ?p ?o }"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1  # header only


def test_parse_error_exit_code(data_file, capsys):
    assert main(["query", "SELEC ?a WHERE { ?a :knows ?b }",
                 "--data", data_file]) == EXIT_PARSE


def test_unsupported_exit_code(data_file):
    q = "SELECT ?a WHERE { ?a :knows ?b OPTIONAL { ?b :x ?c } }"
    assert main(["query", q, "--data", data_file]) == EXIT_UNSUPPORTED


def test_memory_cap_env_var(tmp_path, monkeypatch, capsys):
    lines = []
    for i in range(500):
        lines.append(f"<http://x/s{i}> <http://x/p> <http://x/o{i % 7}> .")
        lines.append(f"<http://x/o{i % 7}> <http://x/q> <http://x/z{i}> .")
    f = tmp_path / "big.nt"
    f.write_text("\n".join(lines))
    monkeypatch.setenv(MEMORY_CAP_ENV, "64")
    q = ("SELECT ?a COUNT(*) WHERE { ?a <http://x/p> ?b . "
         "?b <http://x/q> ?c } GROUP BY ?a")
    code = main(["query", q, "--data", str(f), "--engine", "batch"])
    assert code == EXIT_MEMORY


def test_profile_flag_prints_tree(data_file, capsys):
    main(["query", "SELECT ?a ?b WHERE { ?a :knows ?b }",
          "--data", data_file, "--profile"])
    err = capsys.readouterr().err
    assert "Scan" in err and "results:" in err


def test_bench_smoke(capsys):
    code = main(["bench", "group_distinct", "--seed", "3", "--scale", "5",
                 "--warmups", "0", "--runs", "1"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "speedup" in out and "rows read" in out


def test_bench_deterministic_datasets():
    from vquery.bench import gen_two_hop
    s1, q1 = gen_two_hop(9, nodes=20)
    s2, q2 = gen_two_hop(9, nodes=20)
    assert q1 == q2
    assert s1.decode_all() == s2.decode_all()
