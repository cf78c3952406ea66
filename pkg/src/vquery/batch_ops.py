"""Vectorized operators: adaptive scan, three-phase merge join, selection
vector filter, streaming aggregation, skip-based distinct, sorted union,
and a batch-producing sort.

All operators pull ColumnBatches from their children and keep the shared
contracts: sorted outputs are non-decreasing on sort_var, skip() only
moves forward, and next() after exhaustion stays exhausted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .batch import BatchPool, ColumnBatch
from .errors import QueryMemoryExceeded, UnsortedInput
from .opapi import BatchOperator

DEFAULT_MAX_BATCH = 512
DEFAULT_MIN_BATCH = 16
DEFAULT_JOIN_BUFFER_CAP = 64 * 1024 * 1024


class AdaptiveSizer:
    """Chooses the row count of the next scan batch from the consumer's
    call pattern: doubling while the parent only calls next(), dropping
    back to the minimum as soon as a skip() is observed.
    """

    def __init__(self, min_size=DEFAULT_MIN_BATCH, max_size=DEFAULT_MAX_BATCH,
                 adaptive=True):
        if not 1 <= min_size <= max_size:
            raise ValueError("need 1 <= min_size <= max_size")
        self.min_size = min_size
        self.max_size = max_size
        self.adaptive = adaptive
        self.current_size = min_size if adaptive else max_size
        self._skip_seen = False
        self._started = False

    def on_skip(self):
        self._skip_seen = True

    def next_size(self) -> int:
        if not self.adaptive:
            return self.max_size
        if self._skip_seen:
            self.current_size = self.min_size
        elif self._started:
            self.current_size = min(self.current_size * 2, self.max_size)
        self._started = True
        self._skip_seen = False
        return self.current_size

    def reset(self):
        self.current_size = self.min_size if self.adaptive else self.max_size
        self._skip_seen = False
        self._started = False


class BatchScan(BatchOperator):
    """Index scan producing sorted batches whose size the sizer governs.

    ``var_positions`` maps each output variable to the triple positions it
    occupies (more than one for patterns repeating a variable, which are
    enforced with an equality mask on the selection vector).
    """

    label = "Scan"

    def __init__(self, store, pattern, var_positions, sort_var=None,
                 sizer: Optional[AdaptiveSizer] = None):
        self._store = store
        self._pattern = tuple(pattern)
        self._var_positions = dict(var_positions)
        self.output_vars = tuple(self._var_positions)
        self.sort_var = sort_var
        self._sort_pos = (self._var_positions[sort_var][0]
                          if sort_var is not None else None)
        self.sizer = sizer if sizer is not None else AdaptiveSizer()
        self._cursor = store.open_scan(self._pattern, self._sort_pos)
        self.rows_read = 0

    def next(self):
        while True:
            n = self.sizer.next_size()
            spo = self._cursor.next_block(n)
            count = len(spo[0])
            if count == 0:
                return None
            self.rows_read += count
            cols = {}
            mask = None
            for var, positions in self._var_positions.items():
                cols[var] = spo[positions[0]]
                for extra in positions[1:]:
                    m = spo[positions[0]] == spo[extra]
                    mask = m if mask is None else mask & m
            sel = None if mask is None else np.flatnonzero(mask)
            if sel is not None and len(sel) == 0:
                continue  # every row violated a repeated-variable constraint
            return ColumnBatch(self.output_vars, cols, sel=sel,
                               sort_var=self.sort_var, owned=False)

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        self.sizer.on_skip()
        self._cursor.seek(key)

    def reset(self) -> None:
        self._cursor = self._store.open_scan(self._pattern, self._sort_pos)
        self.sizer.reset()


@dataclass
class _Side:
    """Compacted active rows of one child's current batch."""

    cols: dict
    keys: np.ndarray
    pos: int
    n: int


class BatchMergeJoin(BatchOperator):
    """Three-phase (probe/build/skip) merge join over sorted batches.

    The primary join key must be each child's sort variable. Further
    shared variables are checked in a vectorized pass after the build and
    removed through the selection vector. Right-side ranges that cross
    batch boundaries are buffered up to ``buffer_cap`` bytes.
    """

    label = "MergeJoin"

    def __init__(self, left: BatchOperator, right: BatchOperator, key: int,
                 cap: int = DEFAULT_MAX_BATCH,
                 buffer_cap: int = DEFAULT_JOIN_BUFFER_CAP):
        assert left.sort_var == key and right.sort_var == key
        self._left = left
        self._right = right
        self.key = key
        self._cap = cap
        self._buffer_cap = buffer_cap
        self.output_vars = tuple(left.output_vars) + tuple(
            v for v in right.output_vars if v not in left.output_vars)
        self.sort_var = key
        self.secondary = tuple(v for v in left.output_vars
                               if v in right.output_vars and v != key)
        self._right_vars = tuple(v for v in right.output_vars if v != key)
        self._reset_state()

    def children(self):
        return (self._left, self._right)

    def _reset_state(self):
        self._l: Optional[_Side] = None
        self._r: Optional[_Side] = None
        self._left_done = False
        self._right_done = False
        self._carry = None  # (ordinal, right range cols, range length)
        self._pending: list[ColumnBatch] = []
        self._finished = False
        self._flushed = False
        self._new_acc()

    def _new_acc(self):
        self._acc = {v: np.empty(self._cap, dtype=np.int64)
                     for v in self.output_vars}
        self._acc_keep = np.ones(self._cap, dtype=bool)
        self._acc_len = 0

    # -- input handling ----------------------------------------------------

    def _fetch(self, child) -> Optional[_Side]:
        """Next non-empty batch, compacted to active rows, NULL keys dropped."""
        while True:
            b = child.next()
            if b is None:
                return None
            if len(b.sel) == 0:
                continue
            keys = b.active(self.key)
            pos = int(np.searchsorted(keys, 1, side="left"))  # skip NULL keys
            if pos >= len(keys):
                continue
            cols = {v: b.active(v) for v in b.vars}
            return _Side(cols, keys, pos, len(keys))

    def _ensure_left(self) -> bool:
        if self._l is not None:
            return True
        if self._left_done:
            return False
        self._l = self._fetch(self._left)
        if self._l is None:
            self._left_done = True
            return False
        return True

    def _ensure_right(self) -> bool:
        if self._r is not None:
            return True
        if self._right_done:
            return False
        self._r = self._fetch(self._right)
        if self._r is None:
            self._right_done = True
            return False
        return True

    def _stage_right_range(self, ordinal, start) -> tuple[dict, int]:
        """Buffer the full right-side range for ``ordinal`` across batches.

        Consumes the current right batch from ``start`` and any following
        batches whose prefix still carries the ordinal; the first rows
        beyond it become the new current right batch.
        """
        r = self._r
        parts = {v: [r.cols[v][start:r.n]] for v in self._right_vars}
        total = r.n - start
        self._r = None
        while True:
            nb = self._fetch(self._right)
            if nb is None:
                self._right_done = True
                break
            keys = nb.keys
            end = nb.pos + int(np.searchsorted(keys[nb.pos:], ordinal, side="right"))
            if end > nb.pos:
                for v in self._right_vars:
                    parts[v].append(nb.cols[v][nb.pos:end])
                total += end - nb.pos
            if end < nb.n:
                nb.pos = end
                self._r = nb
                break
            if total * max(1, len(self._right_vars)) * 8 > self._buffer_cap:
                raise QueryMemoryExceeded(
                    f"merge-join right buffer over {self._buffer_cap} bytes")
        cols = {v: (chunks[0] if len(chunks) == 1 else np.concatenate(chunks))
                for v, chunks in parts.items()}
        return cols, total

    # -- build phase ---------------------------------------------------------

    def _flush_acc(self):
        n = self._acc_len
        if n == 0:
            return
        cols = {v: self._acc[v][:n] for v in self.output_vars}
        sel = np.flatnonzero(self._acc_keep[:n])
        if len(sel):
            self._pending.append(ColumnBatch(self.output_vars, cols, sel=sel,
                                             sort_var=self.key))
        self._new_acc()

    def _append_rows(self, cols, keep, total):
        off = 0
        while off < total:
            take = min(self._cap - self._acc_len, total - off)
            a, b = self._acc_len, self._acc_len + take
            for v in self.output_vars:
                self._acc[v][a:b] = cols[v][off:off + take]
            if keep is not None:
                self._acc_keep[a:b] = keep[off:off + take]
            self._acc_len = b
            off += take
            if self._acc_len == self._cap:
                self._flush_acc()

    def _build_group(self, li, li2, right_cols, rn):
        """Materialize one group, one column at a time.

        Left values are each repeated ``rn`` times consecutively; the
        whole right range is repeated once per left row. Secondary join
        keys are compared in one extra vectorized pass and mismatches
        dropped via the keep mask (the output selection vector).
        """
        left = self._l
        m = li2 - li
        if m <= 0 or rn <= 0:
            return
        keep = None
        for v in self.secondary:
            lexp = np.repeat(left.cols[v][li:li2], rn)
            rtil = np.tile(right_cols[v], m)
            km = (lexp == rtil) & (lexp != 0)
            keep = km if keep is None else keep & km
        out = {}
        for v in self._left.output_vars:
            out[v] = np.repeat(left.cols[v][li:li2], rn)
        for v in self.output_vars:
            if v not in out:
                out[v] = np.tile(right_cols[v], m)
        self._append_rows(out, keep, m * rn)

    # -- main loop -----------------------------------------------------------

    def _step(self):
        # resume a right-side range carried across a left batch boundary
        if self._carry is not None:
            if not self._ensure_left():
                self._finished = True
                return
            ordinal, rcols, rn = self._carry
            left = self._l
            keys = left.keys
            if keys[left.pos] == ordinal:
                i2 = left.pos + int(np.searchsorted(keys[left.pos:], ordinal,
                                                    side="right"))
                self._build_group(left.pos, i2, rcols, rn)
                left.pos = i2
                if i2 == left.n:
                    self._l = None  # ordinal may continue in the next batch
                    return
            self._carry = None
            return

        if not self._ensure_left():
            self._finished = True
            return
        if not self._ensure_right():
            self._finished = True
            return

        left, right = self._l, self._r
        lk, rk = left.keys, right.keys
        i, j = left.pos, right.pos
        last_left_matched = False
        last_right_matched = False
        while i < left.n and j < right.n:
            a, b = lk[i], rk[j]
            if a < b:
                i += int(np.searchsorted(lk[i:], b, side="left"))
                continue
            if b < a:
                j += int(np.searchsorted(rk[j:], a, side="left"))
                continue
            ordinal = a
            i2 = i + int(np.searchsorted(lk[i:], ordinal, side="right"))
            j2 = j + int(np.searchsorted(rk[j:], ordinal, side="right"))
            if j2 == right.n and not self._right_done:
                # range may continue into further right batches: stage it
                rcols, rn = self._stage_right_range(ordinal, j)
                self._build_group(i, i2, rcols, rn)
                left.pos = i2
                if i2 == left.n:
                    self._carry = (ordinal, rcols, rn)
                    self._l = None
                return
            rcols = {v: right.cols[v][j:j2] for v in self._right_vars}
            self._build_group(i, i2, rcols, j2 - j)
            if i2 == left.n:
                self._carry = (ordinal, rcols, j2 - j)
                last_left_matched = True
            if j2 == right.n:
                last_right_matched = True
            i, j = i2, j2
        left.pos, right.pos = i, j

        # skip phase: reposition the child that fell behind
        left_consumed = i >= left.n
        right_consumed = j >= right.n
        if left_consumed and right_consumed:
            self._l = None
            self._r = None
        elif left_consumed:
            if not last_left_matched:
                self._left.skip(int(rk[j]))
            self._l = None
        else:
            if not last_right_matched:
                self._right.skip(int(lk[i]))
            self._r = None

    def next(self):
        while not self._pending:
            if self._finished:
                if not self._flushed:
                    self._flushed = True
                    self._flush_acc()
                    continue
                return None
            self._step()
        return self._pending.pop(0)

    def skip(self, key: int) -> None:
        kept = []
        for b in self._pending:
            keys = b.keys()
            cut = int(np.searchsorted(keys, key, side="left"))
            if cut < len(keys):
                b.sel = b.sel[cut:]
                kept.append(b)
        self._pending = kept
        if self._acc_len:
            acc_keys = self._acc[self.key][:self._acc_len]
            cut = int(np.searchsorted(acc_keys, key, side="left"))
            self._acc_keep[:cut] = False
        if self._carry is not None and self._carry[0] < key:
            self._carry = None
        for side_attr, child, done in (("_l", self._left, self._left_done),
                                       ("_r", self._right, self._right_done)):
            side = getattr(self, side_attr)
            if side is not None:
                side.pos += int(np.searchsorted(side.keys[side.pos:], key,
                                                side="left"))
                if side.pos >= side.n:
                    setattr(self, side_attr, None)
                    side = None
            if side is None and not done:
                child.skip(key)

    def reset(self) -> None:
        self._left.reset()
        self._right.reset()
        self._reset_state()


class BatchFilter(BatchOperator):
    """Evaluates a condition over the relevant columns and drops failing
    rows from the selection vector; fully-emptied batches are released to
    the pool and the next child batch fetched.
    """

    label = "Filter"

    def __init__(self, child: BatchOperator, condition, numeric_map,
                 pool: Optional[BatchPool] = None):
        self._child = child
        self._condition = condition
        self._numeric_map = numeric_map
        self._pool = pool
        self.output_vars = child.output_vars
        self.sort_var = child.sort_var

    def children(self):
        return (self._child,)

    def next(self):
        while True:
            b = self._child.next()
            if b is None:
                return None
            if len(b.sel):
                b.retain(self._condition.mask(b, self._numeric_map))
            if len(b.sel):
                return b
            if self._pool is not None:
                self._pool.release(b)

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()


@dataclass(frozen=True)
class AggSpec:
    """One aggregate: kind in {count, min, max, sum, avg}; var None means
    COUNT(*); out_var is the result's variable id."""

    kind: str
    var: Optional[int]
    distinct: bool
    out_var: int


class _Accumulator:
    __slots__ = ("spec", "count", "total", "lo", "hi", "chunks")

    def __init__(self, spec: AggSpec):
        self.spec = spec
        self.count = 0
        self.total = 0.0
        self.lo = None
        self.hi = None
        self.chunks = []  # raw id arrays for COUNT DISTINCT

    def update(self, values, row_count, numeric_map):
        spec = self.spec
        if spec.kind == "count":
            if spec.var is None:
                self.count += row_count
            elif spec.distinct:
                self.chunks.append(values[values != 0])
            else:
                self.count += int(np.count_nonzero(values))
            return
        nums = numeric_map[values]
        finite = nums[~np.isnan(nums)]
        if finite.size == 0:
            return
        if spec.kind in ("sum", "avg"):
            self.total += float(finite.sum())
            self.count += int(finite.size)
        if spec.kind == "min":
            m = float(finite.min())
            self.lo = m if self.lo is None else min(self.lo, m)
        elif spec.kind == "max":
            m = float(finite.max())
            self.hi = m if self.hi is None else max(self.hi, m)

    def result(self):
        kind = self.spec.kind
        if kind == "count":
            if self.spec.distinct:
                if not self.chunks:
                    return 0
                return int(np.unique(np.concatenate(self.chunks)).size)
            return self.count
        if kind == "sum":
            return self.total if self.count else None
        if kind == "avg":
            return self.total / self.count if self.count else None
        return self.lo if kind == "min" else self.hi


class StreamGroupBy(BatchOperator):
    """Streaming aggregation over input sorted by a single group variable
    (or global aggregates with no grouping). Partial per-batch aggregates
    are merged across batches; output keys ascend.
    """

    label = "Group"

    def __init__(self, child: BatchOperator, group_var: Optional[int],
                 aggs, numeric_map, cap: int = DEFAULT_MAX_BATCH):
        if group_var is not None and child.sort_var != group_var:
            raise UnsortedInput("streaming group-by needs input sorted by "
                                "the group variable")
        self._child = child
        self.group_var = group_var
        self.aggs = tuple(aggs)
        self._numeric_map = numeric_map
        self._cap = cap
        head = () if group_var is None else (group_var,)
        self.output_vars = head + tuple(a.out_var for a in self.aggs)
        self.sort_var = group_var
        self._reset_state()

    def children(self):
        return (self._child,)

    def _reset_state(self):
        self._cur_key = None
        self._accs = None
        self._done = False
        self._emitted_global = False

    def _new_accs(self):
        return [_Accumulator(a) for a in self.aggs]

    def _update(self, accs, b, seg):
        for acc in accs:
            values = None
            if acc.spec.var is not None:
                values = b.active(acc.spec.var)[seg]
            self._accs_update_one(acc, values, seg, b)

    def _accs_update_one(self, acc, values, seg, b):
        row_count = (seg.stop - seg.start) if isinstance(seg, slice) else len(b.sel)
        acc.update(values, row_count, self._numeric_map)

    def _flush_row(self, out_keys, out_vals):
        out_keys.append(self._cur_key)
        for i, acc in enumerate(self._accs):
            out_vals[i].append(acc.result())
        self._accs = self._new_accs()

    def _make_batch(self, keys, vals):
        cols = {}
        if self.group_var is not None:
            cols[self.group_var] = np.asarray(keys, dtype=np.int64)
        for agg, col in zip(self.aggs, vals):
            if agg.kind == "count":
                cols[agg.out_var] = np.asarray(col, dtype=np.int64)
            else:
                cols[agg.out_var] = np.asarray(
                    [np.nan if v is None else v for v in col], dtype=np.float64)
        return ColumnBatch(self.output_vars, cols, sort_var=self.sort_var)

    def next(self):
        if self._done:
            return None
        out_keys = []
        out_vals = [[] for _ in self.aggs]
        while len(out_keys) < self._cap:
            b = self._child.next()
            if b is None:
                self._done = True
                if self.group_var is None:
                    accs = self._accs if self._accs is not None else self._new_accs()
                    row = [acc.result() for acc in accs]
                    self._accs = None
                    return self._make_batch([], [[v] for v in row])
                if self._cur_key is not None:
                    self._flush_row(out_keys, out_vals)
                    self._cur_key = None
                break
            if len(b.sel) == 0:
                continue
            if self.group_var is None:
                if self._accs is None:
                    self._accs = self._new_accs()
                self._update(self._accs, b, slice(0, len(b.sel)))
                continue
            keys = b.active(self.group_var)
            if np.any(np.diff(keys) < 0) or (self._cur_key is not None
                                             and keys[0] < self._cur_key):
                raise UnsortedInput("group keys decreased")
            uniq, starts = np.unique(keys, return_index=True)
            bounds = list(starts) + [len(keys)]
            for g, key in enumerate(uniq):
                key = int(key)
                if self._cur_key is None:
                    self._cur_key = key
                    self._accs = self._new_accs()
                elif key != self._cur_key:
                    self._flush_row(out_keys, out_vals)
                    self._cur_key = key
                self._update(self._accs, b, slice(bounds[g], bounds[g + 1]))
        if not out_keys and self._done:
            return None
        return self._make_batch(out_keys, out_vals)

    def reset(self) -> None:
        self._child.reset()
        self._reset_state()


class StreamDistinct(BatchOperator):
    """DISTINCT over the child's sort variable, scrolling the child with
    skip(key + 1) after each emitted key so duplicate runs are never read.
    """

    label = "Distinct"

    def __init__(self, child: BatchOperator, key: int,
                 cap: int = DEFAULT_MAX_BATCH):
        if child.sort_var != key:
            raise UnsortedInput("skip-based distinct needs input sorted by "
                                "the distinct variable")
        self._child = child
        self.key = key
        self._cap = cap
        self.output_vars = (key,)
        self.sort_var = key
        self._last = None
        self._done = False

    def children(self):
        return (self._child,)

    def next(self):
        if self._done:
            return None
        out = []
        total = 0
        while total < self._cap:
            b = self._child.next()
            if b is None:
                self._done = True
                break
            keys = b.active(self.key)
            if len(keys) == 0:
                continue
            if np.any(np.diff(keys) < 0):
                raise UnsortedInput("distinct keys decreased")
            uniq = np.unique(keys)
            uniq = uniq[uniq != 0]
            if self._last is not None:
                uniq = uniq[uniq > self._last]
            if len(uniq) == 0:
                self._child.skip(int(keys[-1]) + 1 if keys[-1] else 1)
                continue
            out.append(uniq)
            total += len(uniq)
            self._last = int(uniq[-1])
            self._child.skip(self._last + 1)
        if not out:
            return None
        col = np.concatenate(out)
        return ColumnBatch(self.output_vars, {self.key: col}, sort_var=self.key)

    def skip(self, key: int) -> None:
        if self._last is None or self._last < key - 1:
            self._last = key - 1
        if not self._done:
            self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()
        self._last = None
        self._done = False


class SortedUnion(BatchOperator):
    """Union of branches; with a sort variable it performs a streaming
    k-way merge, otherwise plain concatenation. Variables missing from a
    branch are padded with the NULL marker.
    """

    label = "Union"

    def __init__(self, branches, key: Optional[int] = None):
        assert branches
        self._branches = list(branches)
        self.key = key
        self.sort_var = key
        seen = []
        for br in self._branches:
            for v in br.output_vars:
                if v not in seen:
                    seen.append(v)
        self.output_vars = tuple(seen)
        if key is not None:
            for br in self._branches:
                assert br.sort_var == key
        self._reset_state()

    def children(self):
        return tuple(self._branches)

    def _reset_state(self):
        self._cur = [None] * len(self._branches)
        self._done = [False] * len(self._branches)
        self._concat_idx = 0

    def _fetch(self, i) -> bool:
        while True:
            b = self._branches[i].next()
            if b is None:
                self._done[i] = True
                return False
            if len(b.sel):
                self._cur[i] = [b, 0]  # batch + offset into sel
                return True

    def _pad(self, b, sel_slice):
        cols = {}
        n = len(sel_slice)
        for v in self.output_vars:
            if v in b.vars:
                cols[v] = b.cols[v][sel_slice]
            else:
                cols[v] = np.zeros(n, dtype=np.int64)
        return ColumnBatch(self.output_vars, cols, sort_var=self.sort_var)

    def next(self):
        if self.key is None:
            while self._concat_idx < len(self._branches):
                i = self._concat_idx
                b = self._branches[i].next()
                if b is None:
                    self._concat_idx += 1
                    continue
                if len(b.sel):
                    return self._pad(b, b.sel)
            return None
        # sorted merge: emit the longest run from the lowest-keyed branch
        # that stays below every other branch's current key
        for i in range(len(self._branches)):
            if self._cur[i] is None and not self._done[i]:
                self._fetch(i)
        best = None
        best_key = None
        for i, cur in enumerate(self._cur):
            if cur is None:
                continue
            b, off = cur
            k = b.cols[self.key][b.sel[off]]
            if best is None or k < best_key:
                best, best_key = i, k
        if best is None:
            return None
        b, off = self._cur[best]
        keys = b.cols[self.key][b.sel[off:]]
        limit = None
        for i, cur in enumerate(self._cur):
            if i == best or cur is None:
                continue
            ob, ooff = cur
            ok = ob.cols[self.key][ob.sel[ooff]]
            limit = ok if limit is None else min(limit, ok)
        if limit is None:
            take = len(keys)
        else:
            take = max(1, int(np.searchsorted(keys, limit, side="right")))
        sel_slice = b.sel[off:off + take]
        if off + take >= len(b.sel):
            self._cur[best] = None
        else:
            self._cur[best][1] = off + take
        return self._pad(b, sel_slice)

    def skip(self, key: int) -> None:
        if self.key is None:
            super().skip(key)
        for i, cur in enumerate(self._cur):
            if cur is not None:
                b, off = cur
                keys = b.cols[self.key][b.sel[off:]]
                off += int(np.searchsorted(keys, key, side="left"))
                if off >= len(b.sel):
                    self._cur[i] = None
                else:
                    self._cur[i][1] = off
            if self._cur[i] is None and not self._done[i]:
                self._branches[i].skip(key)

    def reset(self) -> None:
        for br in self._branches:
            br.reset()
        self._reset_state()


class BatchSort(BatchOperator):
    """Pipeline breaker: drains the child on first use, sorts the
    materialized rows by the key variable, then streams sorted batches.
    """

    label = "Sort"

    def __init__(self, child: BatchOperator, key: int,
                 cap: int = DEFAULT_MAX_BATCH, mem_cap: Optional[int] = None):
        self._child = child
        self.key = key
        self._cap = cap
        self._mem_cap = mem_cap
        self.output_vars = child.output_vars
        self.sort_var = key
        self._sorted = None
        self._pos = 0

    def children(self):
        return (self._child,)

    def _materialize(self):
        chunks = {v: [] for v in self.output_vars}
        total = 0
        while True:
            b = self._child.next()
            if b is None:
                break
            if len(b.sel) == 0:
                continue
            total += len(b.sel)
            if self._mem_cap and total * len(self.output_vars) * 8 > self._mem_cap:
                raise QueryMemoryExceeded(
                    f"sort materialization over {self._mem_cap} bytes")
            for v in self.output_vars:
                chunks[v].append(b.active(v))
        cols = {v: (np.concatenate(c) if c else np.empty(0, dtype=np.int64))
                for v, c in chunks.items()}
        order = np.argsort(cols[self.key], kind="stable")
        self._sorted = {v: c[order] for v, c in cols.items()}
        self._pos = 0

    def next(self):
        if self._sorted is None:
            self._materialize()
        n = len(self._sorted[self.key])
        i = self._pos
        if i >= n:
            return None
        j = min(i + self._cap, n)
        self._pos = j
        cols = {v: c[i:j] for v, c in self._sorted.items()}
        return ColumnBatch(self.output_vars, cols, sort_var=self.key, owned=False)

    def skip(self, key: int) -> None:
        if self._sorted is None:
            self._materialize()
        keys = self._sorted[self.key]
        self._pos += int(np.searchsorted(keys[self._pos:], key, side="left"))

    def reset(self) -> None:
        self._child.reset()
        self._sorted = None
        self._pos = 0


class BatchProject(BatchOperator):
    """Restrict batches to the projected variables (no copying)."""

    label = "Project"

    def __init__(self, child: BatchOperator, vars):
        self._child = child
        self.output_vars = tuple(vars)
        self.sort_var = child.sort_var if child.sort_var in self.output_vars else None

    def children(self):
        return (self._child,)

    def next(self):
        b = self._child.next()
        if b is None:
            return None
        cols = {v: b.cols[v] for v in self.output_vars}
        return ColumnBatch(self.output_vars, cols, sel=b.sel,
                           sort_var=self.sort_var, owned=False)

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()


class BatchLimit(BatchOperator):
    """Truncate the stream after ``limit`` active rows."""

    label = "Limit"

    def __init__(self, child: BatchOperator, limit: int):
        self._child = child
        self.limit = limit
        self.output_vars = child.output_vars
        self.sort_var = child.sort_var
        self._seen = 0

    def children(self):
        return (self._child,)

    def next(self):
        if self._seen >= self.limit:
            return None
        b = self._child.next()
        if b is None:
            return None
        room = self.limit - self._seen
        if len(b.sel) > room:
            b.sel = b.sel[:room]
        self._seen += len(b.sel)
        return b

    def reset(self) -> None:
        self._child.reset()
        self._seen = 0
