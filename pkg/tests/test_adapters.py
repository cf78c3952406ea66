import pytest

from vquery.errors import ContractViolation
from vquery.opapi import BatchToRow, RowToBatch

from conftest import ListBatches, ListRows, make_batch


def drain_rows(op):
    out = []
    while True:
        r = op.next()
        if r is None:
            return out
        out.append(list(r))


def drain_batches(op):
    out = []
    while True:
        b = op.next()
        if b is None:
            return out
        out.extend((int(b.cols[v][i]) for v in b.vars) for i in b.sel)
    return out


def test_batch_to_row_pivots_with_null_fill():
    src = ListBatches([make_batch((0, 2), [[1, 2], [7, 8]])])
    op = BatchToRow(src, width=4)
    assert drain_rows(op) == [[1, 0, 7, 0], [2, 0, 8, 0]]
    assert op.next() is None  # stable after exhaustion


def test_batch_to_row_honors_selection_vector():
    src = ListBatches([make_batch((0,), [[1, 2, 3, 4]], sel=[1, 3])])
    assert drain_rows(BatchToRow(src, width=1)) == [[2], [4]]


def test_batch_to_row_skip_discards_buffered_and_forwards():
    batches = [make_batch((0,), [[1, 3, 5]], sort_var=0),
               make_batch((0,), [[7, 9]], sort_var=0)]
    src = ListBatches(batches, sort_var=0)
    op = BatchToRow(src, width=1)
    assert op.next() == [1]
    op.skip(9)  # drops 3, 5 from the buffer and seeks the child
    assert src.skip_calls == 1
    assert drain_rows(op) == [[9]]


def test_batch_to_row_skip_requires_sorted():
    src = ListBatches([make_batch((0,), [[1]])])
    op = BatchToRow(src, width=1)
    with pytest.raises(ContractViolation):
        op.skip(5)


def test_row_to_batch_packs_to_cap():
    rows = [[i] for i in range(7)]
    src = ListRows(rows, output_vars=(0,), sort_var=0)
    op = RowToBatch(src, cap=3)
    sizes = []
    while True:
        b = op.next()
        if b is None:
            break
        b.check_invariants()
        sizes.append(len(b))
    assert sizes == [3, 3, 1]


def test_row_to_batch_forwards_skip():
    src = ListRows([[1], [4], [9]], output_vars=(0,), sort_var=0)
    op = RowToBatch(src, cap=8)
    op.skip(4)
    b = op.next()
    assert list(b.cols[0]) == [4, 9]


def test_adapter_pair_is_identity():
    rows = [[i, i * 2] for i in range(20)]
    src = ListRows(rows, output_vars=(0, 1), sort_var=0)
    round_trip = BatchToRow(RowToBatch(src, cap=6), width=2)
    assert drain_rows(round_trip) == rows


def test_reset_restores_stream():
    src = ListBatches([make_batch((0,), [[1, 2]])])
    op = BatchToRow(src, width=1)
    assert len(drain_rows(op)) == 2
    op.reset()
    assert len(drain_rows(op)) == 2
