"""Columnar batches with selection vectors, plus a reuse pool.

A batch carries one int64 column per variable and a strictly increasing
selection vector of active row positions. Filtering only edits the
selection vector; the data columns are never touched, so batches can be
handed along pipelines without copying.
"""
from __future__ import annotations

from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .terms import NULL_ID


class ColumnBatch:
    """Fixed variable set + equal-length columns + selection vector."""

    __slots__ = ("vars", "cols", "sel", "sort_var", "owned")

    def __init__(self, vars, cols, sel=None, sort_var=None, owned=True):
        self.vars = tuple(vars)
        self.cols = cols  # var id -> 1-D array
        n = len(cols[self.vars[0]]) if self.vars else 0
        self.sel = np.arange(n, dtype=np.int64) if sel is None else sel
        self.sort_var = sort_var
        self.owned = owned  # False for batches whose columns view index storage

    def __len__(self):
        return len(self.sel)

    @property
    def capacity(self) -> int:
        return len(self.cols[self.vars[0]]) if self.vars else 0

    def active_count(self) -> int:
        return len(self.sel)

    def col(self, var) -> np.ndarray:
        return self.cols[var]

    def active(self, var) -> np.ndarray:
        """Values of ``var`` at the active rows, in selection order."""
        return self.cols[var][self.sel]

    def keys(self) -> np.ndarray:
        return self.cols[self.sort_var][self.sel]

    def retain(self, keep: Union[Callable[[int], bool], np.ndarray]) -> None:
        """Shrink the selection vector; never reads or writes the columns.

        ``keep`` is either a predicate over row positions or a boolean
        mask aligned with the current selection vector.
        """
        if callable(keep):
            mask = np.fromiter((keep(int(i)) for i in self.sel),
                               dtype=bool, count=len(self.sel))
        else:
            mask = keep
        self.sel = self.sel[mask]

    def check_invariants(self) -> None:
        """Assert the structural batch invariants (test hook)."""
        n = self.capacity
        for v in self.vars:
            assert len(self.cols[v]) == n, "columns must share one length"
        if len(self.sel):
            assert self.sel[0] >= 0 and self.sel[-1] < n
            assert np.all(np.diff(self.sel) > 0), "selection vector not strictly increasing"
        if self.sort_var is not None and len(self.sel) > 1:
            assert np.all(np.diff(self.keys()) >= 0), "sort_var column not sorted"


def pivot_to_rows(b: ColumnBatch) -> Iterable[tuple]:
    """Active rows as tuples in selection order, read lazily per row."""
    cols = [b.cols[v] for v in b.vars]
    for i in b.sel:
        yield tuple(int(c[i]) for c in cols)


def pivot_from_rows(rows: Sequence[Sequence[Optional[int]]], vars, cap: int,
                    sort_var=None, pool: Optional["BatchPool"] = None):
    """Pack row tuples into batches of at most ``cap`` rows.

    Rows bind the variables positionally; None becomes the NULL marker.
    Row order is preserved across the emitted batches.
    """
    vars = tuple(vars)
    out = []
    for start in range(0, len(rows), cap):
        chunk = rows[start:start + cap]
        if pool is not None:
            b = pool.acquire(vars, len(chunk))
            cols = b.cols
        else:
            cols = {v: np.empty(len(chunk), dtype=np.int64) for v in vars}
        for j, v in enumerate(vars):
            col = cols[v]
            for i, row in enumerate(chunk):
                val = row[j]
                col[i] = NULL_ID if val is None else val
        out.append(ColumnBatch(vars, cols, sort_var=sort_var))
    return out


class BatchPool:
    """Free list of column buffers keyed by capacity.

    Only column arrays are recycled; ColumnBatch shells are cheap. Batches
    whose columns are views into index storage (``owned=False``) are never
    pooled.
    """

    def __init__(self):
        self._free: dict[int, list[np.ndarray]] = {}
        self.hits = 0
        self.misses = 0
        self.allocations = 0

    def _take(self, cap: int) -> np.ndarray:
        stack = self._free.get(cap)
        if stack:
            self.hits += 1
            return stack.pop()
        self.misses += 1
        self.allocations += 1
        return np.empty(cap, dtype=np.int64)

    def acquire(self, vars, cap: int) -> ColumnBatch:
        vars = tuple(vars)
        cols = {v: self._take(cap) for v in vars}
        return ColumnBatch(vars, cols)

    def release(self, b: ColumnBatch) -> None:
        if not b.owned:
            return
        for v in b.vars:
            col = b.cols[v]
            if isinstance(col, np.ndarray) and col.base is None and col.dtype == np.int64:
                self._free.setdefault(len(col), []).append(col)
        b.cols = {}
        b.sel = b.sel[:0]
