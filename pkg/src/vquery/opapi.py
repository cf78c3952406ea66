"""Operator contracts shared by both executors, plus batch<->row adapters.

Both operator flavors are pull-based: next() produces the next unit (a
row or a ColumnBatch), skip(key) forward-repositions sorted streams, and
reset() restores the initial state. Rows are flat lists indexed by VarId
with 0 (the NULL marker) for unbound variables; batches carry only their
operator's variables as columns.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .batch import ColumnBatch
from .errors import ContractViolation
from .terms import NULL_ID


@dataclass
class CallStats:
    """Monotone per-operator counters (consumed by the profiler)."""

    next_calls: int = 0
    skip_calls: int = 0
    reset_calls: int = 0
    rows_out: int = 0

    def as_dict(self):
        return {"next": self.next_calls, "skip": self.skip_calls,
                "reset": self.reset_calls, "results": self.rows_out}


class Operator:
    """Base for both flavors; subclasses set output_vars and sort_var."""

    output_vars: tuple = ()
    sort_var: Optional[int] = None
    is_batch: bool = False
    label: str = "Operator"

    def next(self):  # pragma: no cover - interface
        raise NotImplementedError

    def skip(self, key: int) -> None:
        raise ContractViolation(f"{self.label} does not produce sorted output")

    def reset(self) -> None:  # pragma: no cover - interface
        raise NotImplementedError

    def children(self):
        return ()


class RowOperator(Operator):
    is_batch = False


class BatchOperator(Operator):
    is_batch = True


class BatchToRow(RowOperator):
    """Pivot a batch-producing child into single rows, copy-free.

    On skip(key), buffered rows below the key are discarded and the skip
    is forwarded to the child.
    """

    label = "BatchToRow"

    def __init__(self, child: BatchOperator, width: int):
        self._child = child
        self._width = width
        self.output_vars = child.output_vars
        self.sort_var = child.sort_var
        self._batch = None
        self._idx = 0
        self._done = False

    def children(self):
        return (self._child,)

    def next(self):
        while True:
            b = self._batch
            if b is not None and self._idx < len(b.sel):
                i = b.sel[self._idx]
                self._idx += 1
                row = [NULL_ID] * self._width
                for v in b.vars:
                    row[v] = int(b.cols[v][i])
                return row
            if self._done:
                return None
            self._batch = self._child.next()
            self._idx = 0
            if self._batch is None:
                self._done = True
                return None

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        b = self._batch
        if b is not None and self._idx < len(b.sel):
            keys = b.cols[self.sort_var][b.sel[self._idx:]]
            self._idx += int(np.searchsorted(keys, key, side="left"))
        if not self._done:
            self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()
        self._batch = None
        self._idx = 0
        self._done = False


class RowToBatch(BatchOperator):
    """Pack a row-producing child into batches of at most ``cap`` rows."""

    label = "RowToBatch"

    def __init__(self, child: RowOperator, cap: int):
        self._child = child
        self._cap = cap
        self.output_vars = child.output_vars
        self.sort_var = child.sort_var
        self._done = False

    def children(self):
        return (self._child,)

    def next(self):
        if self._done:
            return None
        nxt = self._child.next
        cap = self._cap
        rows = []
        while len(rows) < cap:
            row = nxt()
            if row is None:
                self._done = True
                break  # flush the partial final batch
            rows.append(row)
        if not rows:
            return None
        vars = self.output_vars
        cols = {}
        mat = np.asarray([[row[v] for v in vars] for row in rows], dtype=np.int64)
        for j, v in enumerate(vars):
            cols[v] = mat[:, j]
        return ColumnBatch(vars, cols, sort_var=self.sort_var)

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        if not self._done:
            self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()
        self._done = False
