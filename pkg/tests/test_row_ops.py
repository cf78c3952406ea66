import random
from collections import Counter

import pytest

from vquery.errors import ContractViolation
from vquery.expr import Comparison, ConstOperand, VarOperand
from vquery.row_ops import (HashDistinct, HashGroupBy, RowCartesian,
                            RowFilter, RowLimit, RowProject, RowScan,
                            RowSort, RowUnion, TupleDistinct,
                            bgp_nested_loop)
from vquery.batch_ops import AggSpec

from conftest import ListRows, build_store, ex


def drain(op):
    out = []
    while True:
        r = op.next()
        if r is None:
            return out
        out.append(tuple(r))


def test_row_scan_binds_and_sorts():
    store = build_store([(f"s{i}", "p", f"o{i}") for i in range(5)])
    pid = store.dictionary.lookup(ex("p"))
    scan = RowScan(store, (None, pid, None), {0: [0], 1: [2]}, width=2,
                   sort_var=1)
    rows = drain(scan)
    assert len(rows) == 5
    objs = [r[1] for r in rows]
    assert objs == sorted(objs)
    scan.reset()
    assert len(drain(scan)) == 5


def test_row_scan_repeated_variable():
    store = build_store([("x", "p", "x"), ("x", "p", "y")])
    pid = store.dictionary.lookup(ex("p"))
    scan = RowScan(store, (None, pid, None), {0: [0, 2]}, width=1)
    assert len(drain(scan)) == 1


def test_row_filter():
    pred = Comparison("!=", VarOperand(0), VarOperand(1))
    src = ListRows([[1, 1], [1, 2], [3, 3]], (0, 1))
    f = RowFilter(src, pred, numeric={})
    assert drain(f) == [(1, 2)]


def test_filter_skip_requires_sorted():
    src = ListRows([[1]], (0,))
    f = RowFilter(src, Comparison("=", VarOperand(0), ConstOperand(1)), {})
    with pytest.raises(ContractViolation):
        f.skip(3)


def test_hash_group_matches_manual():
    rows = [[1, 10], [1, 11], [2, 12]]
    # ids 10..12 carry numeric values 5, 7, 9
    numeric = {10: 5, 11: 7, 12: 9}
    aggs = (AggSpec("count", None, False, 2), AggSpec("sum", 1, False, 3),
            AggSpec("avg", 1, False, 4), AggSpec("min", 1, False, 5),
            AggSpec("max", 1, False, 6), AggSpec("count", 1, True, 7))
    g = HashGroupBy(ListRows(rows, (0, 1)), 0, aggs, numeric, width=8)
    out = drain(g)
    assert out[0][:8] == (1, 0, 2, 12.0, 6.0, 5.0, 7.0, 2)
    assert out[1][:8] == (2, 0, 1, 9.0, 9.0, 9.0, 9.0, 1)
    assert [r[0] for r in out] == [1, 2]  # ascending key order


def test_hash_group_global_empty():
    g = HashGroupBy(ListRows([], (0,)), None,
                    (AggSpec("count", None, False, 1),
                     AggSpec("min", 0, False, 2)), {}, width=3)
    assert drain(g) == [(0, 0, None)]


def test_hash_distinct_preserves_first_occurrence_order():
    src = ListRows([[3, 1], [1, 2], [3, 3], [1, 4]], (0, 1))
    d = HashDistinct(src, key=0, width=2)
    assert [r[0] for r in drain(d)] == [3, 1]


def test_tuple_distinct():
    src = ListRows([[1, 2], [1, 2], [1, 3]], (0, 1))
    d = TupleDistinct(src, (0, 1), width=2)
    assert sorted(drain(d)) == [(1, 2), (1, 3)]


def test_row_sort_and_skip():
    src = ListRows([[9], [2], [7]], (0,))
    s = RowSort(src, key=0)
    s.skip(7)
    assert drain(s) == [(7,), (9,)]


def test_row_union_sorted_merge():
    a = ListRows([[1, 0], [6, 0]], (0,), sort_var=0)
    b = ListRows([[2, 0], [6, 0]], (0,), sort_var=0)
    u = RowUnion([a, b], key=0)
    assert [r[0] for r in drain(u)] == [1, 2, 6, 6]


def test_row_union_concat():
    a = ListRows([[5]], (0,))
    b = ListRows([[1]], (0,))
    assert [r[0] for r in drain(RowUnion([a, b]))] == [5, 1]


def test_cartesian():
    a = ListRows([[1, 0], [2, 0]], (0,))
    b = ListRows([[0, 7], [0, 8]], (1,))
    got = Counter(drain(RowCartesian(a, b)))
    assert got == Counter([(1, 7), (1, 8), (2, 7), (2, 8)])


def test_project_and_limit():
    src = ListRows([[1, 2], [3, 4], [5, 6]], (0, 1))
    p = RowProject(src, (1,), width=2)
    lim = RowLimit(p, 2)
    assert drain(lim) == [(0, 2), (0, 4)]


# -- brute-force oracle self-checks ------------------------------------------

def test_nested_loop_single_pattern():
    triples = [(1, 2, 3), (4, 2, 5), (4, 9, 5)]
    pats = [(("var", 0), ("const", 2), ("var", 1))]
    assert sorted(bgp_nested_loop(triples, pats, 2)) == [(1, 3), (4, 5)]


def test_nested_loop_join_semantics():
    triples = [(1, 2, 3), (3, 2, 5), (1, 2, 6)]
    pats = [(("var", 0), ("const", 2), ("var", 1)),
            (("var", 1), ("const", 2), ("var", 2))]
    assert bgp_nested_loop(triples, pats, 3) == [(1, 3, 5)]


def test_nested_loop_repeated_var():
    triples = [(1, 2, 1), (1, 2, 3)]
    pats = [(("var", 0), ("const", 2), ("var", 0))]
    assert bgp_nested_loop(triples, pats, 1) == [(1,)]


def test_nested_loop_is_multiset():
    rng = random.Random(0)
    triples = [(rng.randint(1, 4), 1, rng.randint(1, 4)) for _ in range(10)]
    triples = list(set(triples))
    pats = [(("var", 0), ("const", 1), ("var", 1)),
            (("var", 2), ("const", 1), ("var", 3))]
    out = bgp_nested_loop(triples, pats, 4)
    assert len(out) == len(triples) ** 2  # full cross product on ids
