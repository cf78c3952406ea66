from vquery import SessionConfig, plan_query
from vquery.profiler import abbreviate, render, snapshot, topology, wrap

from conftest import ListBatches, ListRows, build_store, make_batch


def test_wrap_counts_batches_and_rows():
    src = ListBatches([make_batch((0,), [[1] * 100]),
                       make_batch((0,), [[2] * 100]),
                       make_batch((0,), [[3] * 50])])
    w = wrap(src)
    while w.next() is not None:
        pass
    assert w.stats.rows_out == 250
    assert w.stats.next_calls == 4  # includes the exhaustion call


def test_wrap_counts_skip_and_reset():
    src = ListRows([[1], [5], [9]], (0,), sort_var=0)
    w = wrap(src)
    w.skip(4)
    w.skip(6)
    w.next()
    w.reset()
    assert w.stats.skip_calls == 2
    assert w.stats.reset_calls == 1


def test_wrapping_is_transparent():
    store = build_store([(f"s{i}", "p", f"o{i % 4}") for i in range(12)])
    q = "SELECT ?o COUNT(*) WHERE { ?s :p ?o } GROUP BY ?o"
    plain = plan_query(store, q, SessionConfig()).collect()
    profiled = plan_query(store, q, SessionConfig(), profile=True).collect()
    assert sorted(map(repr, plain)) == sorted(map(repr, profiled))


def test_snapshot_shares_and_times():
    src = ListRows([[i] for i in range(5)], (0,))
    w = wrap(src)
    while w.next() is not None:
        pass
    node = snapshot(w)
    assert node.stats.rows_out == 5
    assert node.wall_time >= node.self_time >= 0
    assert 0 <= node.share <= 100


def test_exclusive_time_subtracts_children():
    store = build_store([(f"s{i}", "p", f"o{i}") for i in range(30)])
    plan = plan_query(store, "SELECT COUNT(*) WHERE { ?s :p ?o }",
                      SessionConfig(), profile=True)
    plan.collect()
    root = plan.profile_snapshot()

    def total_self(n):
        return n.self_time + sum(total_self(c) for c in n.children)

    assert total_self(root) <= root.wall_time + 1e-6


def test_abbreviate():
    assert abbreviate(42) == "42"
    assert abbreviate(999) == "999"
    assert abbreviate(119_000) == "119K"
    assert abbreviate(563_000) == "563K"
    assert abbreviate(5_700) == "5.7K"
    assert abbreviate(2_000_000) == "2.0M"
    assert abbreviate(285_500_000) == "285.5M"


def test_render_single_scan_single_line():
    store = build_store([("a", "p", "b")])
    plan = plan_query(store, "SELECT ?s WHERE { ?s :p ?o }",
                      SessionConfig(engine="batch"), profile=True)
    plan.collect()
    text = render(plan.profile_snapshot())
    lines = text.splitlines()
    assert lines[0].startswith("Project")
    assert "`- Scan" in text


def test_render_is_deterministic():
    store = build_store([("a", "p", "b"), ("b", "p", "c")])
    plan = plan_query(store, "SELECT COUNT(*) WHERE { ?s :p ?o . ?o :p ?x }",
                      SessionConfig(engine="batch"), profile=True)
    plan.collect()
    node = plan.profile_snapshot()
    assert render(node) == render(node)


def test_render_marks_batched_nodes():
    store = build_store([("a", "p", "b")])
    plan = plan_query(store, "SELECT ?s WHERE { ?s :p ?o }",
                      SessionConfig(engine="batch"), profile=True)
    plan.collect()
    assert "batched" in render(plan.profile_snapshot())
    plan_row = plan_query(store, "SELECT ?s WHERE { ?s :p ?o }",
                          SessionConfig(engine="row"), profile=True)
    plan_row.collect()
    scan_line = [l for l in render(plan_row.profile_snapshot()).splitlines()
                 if "Scan" in l][0]
    assert "batched" not in scan_line


def test_topology_strips_arguments():
    store = build_store([("a", "p", "b")])
    plan = plan_query(store, "SELECT ?s WHERE { ?s :p ?o }",
                      SessionConfig(engine="batch"), profile=True)
    plan.collect()
    shape = topology(plan.profile_snapshot())
    assert shape == ("Project", [("Scan", [])])
