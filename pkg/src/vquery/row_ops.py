"""Row-at-a-time operators: the reference executor.

Rows are flat Python lists indexed by variable id, with 0 (the NULL
marker) in every position the operator does not bind. All operators here
share the pull contract with the vectorized ones, so the two executors
are interchangeable node by node through the adapters.

`bgp_nested_loop` at the bottom is an intentionally naive evaluator used
as an independent correctness oracle in the tests.
"""
from __future__ import annotations

from bisect import bisect_left
from typing import Optional

from .opapi import RowOperator
from .terms import NULL_ID


class RowScan(RowOperator):
    """Index scan producing one row per matching triple."""

    label = "Scan"

    def __init__(self, store, pattern, var_positions, width,
                 sort_var=None):
        self._store = store
        self._pattern = tuple(pattern)
        self._var_positions = dict(var_positions)
        self._width = width
        self.output_vars = tuple(self._var_positions)
        self.sort_var = sort_var
        self._sort_pos = (self._var_positions[sort_var][0]
                          if sort_var is not None else None)
        self._cursor = store.open_scan(self._pattern, self._sort_pos)
        # (var, positions) pairs, flattened for the hot loop
        self._binders = [(v, ps) for v, ps in self._var_positions.items()]

    @property
    def rows_read(self):
        return self._cursor.rows_read

    def next(self):
        next_row = self._cursor.next_row
        width = self._width
        binders = self._binders
        while True:
            spo = next_row()
            if spo is None:
                return None
            row = [NULL_ID] * width
            ok = True
            for v, positions in binders:
                val = spo[positions[0]]
                for extra in positions[1:]:
                    if spo[extra] != val:
                        ok = False
                        break
                row[v] = val
            if ok:
                return row

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        self._cursor.seek(key)

    def reset(self) -> None:
        self._cursor = self._store.open_scan(self._pattern, self._sort_pos)


class RowMergeJoin(RowOperator):
    """Two-pointer merge join over children sorted on the join key.

    Skips the lagging child to the other side's current key instead of
    stepping through non-matching rows one at a time.
    """

    label = "MergeJoin"

    def __init__(self, left: RowOperator, right: RowOperator, key: int):
        assert left.sort_var == key and right.sort_var == key
        self._left = left
        self._right = right
        self.key = key
        self.output_vars = tuple(left.output_vars) + tuple(
            v for v in right.output_vars if v not in left.output_vars)
        self.sort_var = key
        self._rvars = tuple(v for v in right.output_vars
                            if v not in left.output_vars)
        self._secondary = tuple(v for v in left.output_vars
                                if v in right.output_vars and v != key)
        self._reset_state()

    def children(self):
        return (self._left, self._right)

    def _reset_state(self):
        self._lrow = None
        self._group = []  # right rows sharing _gkey
        self._gkey = None
        self._gidx = 0
        self._rahead = None  # right lookahead past the current group
        self._right_done = False
        self._started = False

    def _load_group(self, target: int) -> bool:
        """Position the right group at the first key >= target."""
        if self._right_done:
            return False
        row = self._rahead
        self._rahead = None
        if row is None or row[self.key] < target:
            if row is None and self._gkey is not None and target <= self._gkey:
                # group already covers the target
                return True
            self._right.skip(target)
            row = self._right.next()
        if row is None:
            self._right_done = True
            return False
        key = row[self.key]
        group = [row]
        rnext = self._right.next
        while True:
            row = rnext()
            if row is None:
                self._right_done = True
                break
            if row[self.key] != key:
                self._rahead = row
                break
            group.append(row)
        self._group = group
        self._gkey = key
        self._gidx = 0
        return True

    def next(self):
        key = self.key
        rvars = self._rvars
        secondary = self._secondary
        while True:
            lrow = self._lrow
            if lrow is not None and self._gkey == lrow[key]:
                group = self._group
                while self._gidx < len(group):
                    rrow = group[self._gidx]
                    self._gidx += 1
                    for v in secondary:
                        lv = lrow[v]
                        if lv == 0 or lv != rrow[v]:
                            break
                    else:
                        out = lrow.copy()
                        for v in rvars:
                            out[v] = rrow[v]
                        return out
                self._gidx = 0
                self._lrow = None
            lrow = self._left.next()
            if lrow is None:
                return None
            lkey = lrow[key]
            if lkey == NULL_ID:
                continue
            if self._gkey is None or self._gkey < lkey:
                if not self._load_group(lkey):
                    return None
            if self._gkey > lkey:
                # fast-forward the left side to the right side's key
                self._left.skip(self._gkey)
                continue
            self._lrow = lrow

    def skip(self, key: int) -> None:
        if self._lrow is not None and self._lrow[self.key] < key:
            self._lrow = None
        if self._gkey is not None and self._gkey < key:
            self._group = []
            self._gkey = None
            self._gidx = 0
        self._left.skip(key)
        if self._gkey is None and not self._right_done:
            if self._rahead is not None and self._rahead[self.key] >= key:
                return
            self._rahead = None
            self._right.skip(key)

    def reset(self) -> None:
        self._left.reset()
        self._right.reset()
        self._reset_state()


class RowHashJoin(RowOperator):
    """Hash join: right side built into a table, left side probed.

    Output follows left row order, so the left sort property survives.
    """

    label = "HashJoin"

    def __init__(self, left: RowOperator, right: RowOperator, key: int):
        self._left = left
        self._right = right
        self.key = key
        self.output_vars = tuple(left.output_vars) + tuple(
            v for v in right.output_vars if v not in left.output_vars)
        self.sort_var = left.sort_var if left.sort_var == key else None
        self._rvars = tuple(v for v in right.output_vars
                            if v not in left.output_vars)
        self._secondary = tuple(v for v in left.output_vars
                                if v in right.output_vars and v != key)
        self._table = None
        self._lrow = None
        self._match = ()
        self._midx = 0

    def children(self):
        return (self._left, self._right)

    def _build(self):
        table: dict[int, list] = {}
        key = self.key
        while True:
            row = self._right.next()
            if row is None:
                break
            k = row[key]
            if k == NULL_ID:
                continue
            table.setdefault(k, []).append(row)
        self._table = table

    def next(self):
        if self._table is None:
            self._build()
        rvars = self._rvars
        secondary = self._secondary
        while True:
            lrow = self._lrow
            if lrow is not None:
                while self._midx < len(self._match):
                    rrow = self._match[self._midx]
                    self._midx += 1
                    for v in secondary:
                        lv = lrow[v]
                        if lv == 0 or lv != rrow[v]:
                            break
                    else:
                        out = lrow.copy()
                        for v in rvars:
                            out[v] = rrow[v]
                        return out
                self._lrow = None
            lrow = self._left.next()
            if lrow is None:
                return None
            match = self._table.get(lrow[self.key])
            if match:
                self._lrow = lrow
                self._match = match
                self._midx = 0

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        if self._lrow is not None and self._lrow[self.key] < key:
            self._lrow = None
        self._left.skip(key)

    def reset(self) -> None:
        self._left.reset()
        self._right.reset()
        self._table = None
        self._lrow = None
        self._match = ()
        self._midx = 0


class RowFilter(RowOperator):
    """Keep rows satisfying a compiled predicate."""

    label = "Filter"

    def __init__(self, child: RowOperator, condition, numeric):
        self._child = child
        self._condition = condition
        self._pred = condition.row_pred(numeric)
        self.output_vars = child.output_vars
        self.sort_var = child.sort_var

    def children(self):
        return (self._child,)

    def next(self):
        nxt = self._child.next
        pred = self._pred
        while True:
            row = nxt()
            if row is None or pred(row):
                return row

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()


class _RowAcc:
    """Scalar accumulator mirroring the vectorized aggregate formulas."""

    __slots__ = ("spec", "count", "total", "lo", "hi", "seen")

    def __init__(self, spec):
        self.spec = spec
        self.count = 0
        self.total = 0.0
        self.lo = None
        self.hi = None
        self.seen = set() if spec.distinct else None

    def update(self, tid: Optional[int], numeric):
        spec = self.spec
        if spec.kind == "count":
            if spec.var is None:
                self.count += 1
            elif tid:
                if spec.distinct:
                    self.seen.add(tid)
                else:
                    self.count += 1
            return
        v = numeric.get(tid) if tid else None
        if v is None:
            return
        if spec.kind in ("sum", "avg"):
            self.total += v
            self.count += 1
        elif spec.kind == "min":
            self.lo = v if self.lo is None else min(self.lo, v)
        else:
            self.hi = v if self.hi is None else max(self.hi, v)

    def result(self):
        kind = self.spec.kind
        if kind == "count":
            return len(self.seen) if self.spec.distinct else self.count
        if kind == "sum":
            return float(self.total) if self.count else None
        if kind == "avg":
            return self.total / self.count if self.count else None
        return self.lo if kind == "min" else self.hi


class HashGroupBy(RowOperator):
    """Hash aggregation; groups are emitted in ascending key order once
    the child is drained. Without a group variable it emits the single
    global-aggregate row (even over empty input).
    """

    label = "Group"

    def __init__(self, child: RowOperator, group_var: Optional[int],
                 aggs, numeric, width: int):
        self._child = child
        self.group_var = group_var
        self.aggs = tuple(aggs)
        self._numeric = numeric
        self._width = width
        head = () if group_var is None else (group_var,)
        self.output_vars = head + tuple(a.out_var for a in self.aggs)
        self.sort_var = group_var
        self._out = None
        self._pos = 0

    def children(self):
        return (self._child,)

    def _drain(self):
        numeric = self._numeric
        gvar = self.group_var
        nxt = self._child.next
        fast_count = (gvar is not None and len(self.aggs) == 1
                      and self.aggs[0].kind == "count"
                      and self.aggs[0].var is None)
        if fast_count:
            counts: dict[int, int] = {}
            while True:
                row = nxt()
                if row is None:
                    break
                k = row[gvar]
                counts[k] = counts.get(k, 0) + 1
            groups = {k: [c] for k, c in counts.items()}
        elif gvar is None:
            accs = [_RowAcc(a) for a in self.aggs]
            while True:
                row = nxt()
                if row is None:
                    break
                for acc in accs:
                    acc.update(row[acc.spec.var] if acc.spec.var is not None
                               else None, numeric)
            groups = {None: [acc.result() for acc in accs]}
        else:
            table: dict[int, list] = {}
            specs = self.aggs
            while True:
                row = nxt()
                if row is None:
                    break
                k = row[gvar]
                accs = table.get(k)
                if accs is None:
                    accs = [_RowAcc(a) for a in specs]
                    table[k] = accs
                for acc in accs:
                    acc.update(row[acc.spec.var] if acc.spec.var is not None
                               else None, numeric)
            groups = {k: [acc.result() for acc in accs]
                      for k, accs in table.items()}
        out = []
        keys = [None] if gvar is None else sorted(groups)
        for k in keys:
            row = [NULL_ID] * self._width
            if gvar is not None:
                row[gvar] = k
            for agg, val in zip(self.aggs, groups[k]):
                row[agg.out_var] = val
            out.append(row)
        self._out = out
        self._pos = 0

    def next(self):
        if self._out is None:
            self._drain()
        if self._pos >= len(self._out):
            return None
        row = self._out[self._pos]
        self._pos += 1
        return row

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        if self._out is None:
            self._drain()
        gvar = self.group_var
        while self._pos < len(self._out) and self._out[self._pos][gvar] < key:
            self._pos += 1

    def reset(self) -> None:
        self._child.reset()
        self._out = None
        self._pos = 0


class HashDistinct(RowOperator):
    """DISTINCT on one variable via a hash set; input order preserved."""

    label = "Distinct"

    def __init__(self, child: RowOperator, key: int, width: int):
        self._child = child
        self.key = key
        self._width = width
        self.output_vars = (key,)
        self.sort_var = child.sort_var if child.sort_var == key else None
        self._seen = set()

    def children(self):
        return (self._child,)

    def next(self):
        nxt = self._child.next
        key = self.key
        seen = self._seen
        while True:
            row = nxt()
            if row is None:
                return None
            k = row[key]
            if k == NULL_ID or k in seen:
                continue
            seen.add(k)
            out = [NULL_ID] * self._width
            out[key] = k
            return out

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()
        self._seen = set()


class RowSort(RowOperator):
    """Pipeline breaker: drain, sort by the key variable, replay."""

    label = "Sort"

    def __init__(self, child: RowOperator, key: int):
        self._child = child
        self.key = key
        self.output_vars = child.output_vars
        self.sort_var = key
        self._rows = None
        self._keys = None
        self._pos = 0

    def children(self):
        return (self._child,)

    def _materialize(self):
        rows = []
        nxt = self._child.next
        while True:
            row = nxt()
            if row is None:
                break
            rows.append(row)
        key = self.key
        rows.sort(key=lambda r: r[key])
        self._rows = rows
        self._keys = [r[key] for r in rows]
        self._pos = 0

    def next(self):
        if self._rows is None:
            self._materialize()
        if self._pos >= len(self._rows):
            return None
        row = self._rows[self._pos]
        self._pos += 1
        return row

    def skip(self, key: int) -> None:
        if self._rows is None:
            self._materialize()
        self._pos = max(self._pos, bisect_left(self._keys, key))

    def reset(self) -> None:
        self._child.reset()
        self._rows = None
        self._keys = None
        self._pos = 0


class RowUnion(RowOperator):
    """Union of branches: sorted k-way merge when a key is given,
    branch-by-branch concatenation otherwise.
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
        self._heads = None
        self._concat_idx = 0

    def children(self):
        return tuple(self._branches)

    def next(self):
        if self.key is None:
            while self._concat_idx < len(self._branches):
                row = self._branches[self._concat_idx].next()
                if row is not None:
                    return row
                self._concat_idx += 1
            return None
        if self._heads is None:
            self._heads = [br.next() for br in self._branches]
        best = None
        for i, row in enumerate(self._heads):
            if row is None:
                continue
            if best is None or row[self.key] < self._heads[best][self.key]:
                best = i
        if best is None:
            return None
        row = self._heads[best]
        self._heads[best] = self._branches[best].next()
        return row

    def skip(self, key: int) -> None:
        if self.key is None:
            super().skip(key)
        if self._heads is None:
            self._heads = [br.next() for br in self._branches]
        for i, row in enumerate(self._heads):
            if row is not None and row[self.key] < key:
                self._branches[i].skip(key)
                self._heads[i] = self._branches[i].next()

    def reset(self) -> None:
        for br in self._branches:
            br.reset()
        self._heads = None
        self._concat_idx = 0


class RowCartesian(RowOperator):
    """Cross product for BGPs with disconnected components; the right
    side is materialized once. Last resort only."""

    label = "Cartesian"

    def __init__(self, left: RowOperator, right: RowOperator):
        self._left = left
        self._right = right
        self.output_vars = tuple(left.output_vars) + tuple(
            v for v in right.output_vars if v not in left.output_vars)
        self.sort_var = None
        self._rvars = tuple(v for v in right.output_vars
                            if v not in left.output_vars)
        self._rows = None
        self._lrow = None
        self._idx = 0

    def children(self):
        return (self._left, self._right)

    def next(self):
        if self._rows is None:
            self._rows = []
            while True:
                row = self._right.next()
                if row is None:
                    break
                self._rows.append(row)
        while True:
            if self._lrow is not None and self._idx < len(self._rows):
                rrow = self._rows[self._idx]
                self._idx += 1
                out = self._lrow.copy()
                for v in self._rvars:
                    out[v] = rrow[v]
                return out
            self._lrow = self._left.next()
            self._idx = 0
            if self._lrow is None:
                return None
            if not self._rows:
                return None

    def reset(self) -> None:
        self._left.reset()
        self._right.reset()
        self._rows = None
        self._lrow = None
        self._idx = 0


class TupleDistinct(RowOperator):
    """DISTINCT over a tuple of variables via a hash set of tuples."""

    label = "Distinct"

    def __init__(self, child: RowOperator, vars, width: int):
        self._child = child
        self.output_vars = tuple(vars)
        self.sort_var = None
        self._width = width
        self._seen = set()

    def children(self):
        return (self._child,)

    def next(self):
        nxt = self._child.next
        vars = self.output_vars
        seen = self._seen
        while True:
            row = nxt()
            if row is None:
                return None
            key = tuple(row[v] for v in vars)
            if key in seen:
                continue
            seen.add(key)
            out = [NULL_ID] * self._width
            for v in vars:
                out[v] = row[v]
            return out

    def reset(self) -> None:
        self._child.reset()
        self._seen = set()


class RowProject(RowOperator):
    """Blank out every variable not in the projection."""

    label = "Project"

    def __init__(self, child: RowOperator, vars, width: int):
        self._child = child
        self.output_vars = tuple(vars)
        self.sort_var = (child.sort_var if child.sort_var in self.output_vars
                         else None)
        self._width = width

    def children(self):
        return (self._child,)

    def next(self):
        row = self._child.next()
        if row is None:
            return None
        out = [NULL_ID] * self._width
        for v in self.output_vars:
            out[v] = row[v]
        return out

    def skip(self, key: int) -> None:
        if self.sort_var is None:
            super().skip(key)
        self._child.skip(key)

    def reset(self) -> None:
        self._child.reset()


class RowLimit(RowOperator):
    """Stop after ``limit`` rows."""

    label = "Limit"

    def __init__(self, child: RowOperator, limit: int):
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
        row = self._child.next()
        if row is not None:
            self._seen += 1
        return row

    def reset(self) -> None:
        self._child.reset()
        self._seen = 0


def bgp_nested_loop(triples, patterns, n_vars: int):
    """Brute-force basic-graph-pattern evaluation by nested loops.

    ``triples`` is an iterable of (s, p, o) id tuples; ``patterns`` is a
    list of (s, p, o) entries where each slot is either ("var", var_id)
    or ("const", term_id). Returns every solution as a full-width tuple.
    Deliberately index-free and quadratic: a correctness oracle only.
    """
    triples = list(triples)
    results = []

    def extend(i, binding):
        if i == len(patterns):
            results.append(tuple(binding))
            return
        pat = patterns[i]
        for t in triples:
            new = None
            ok = True
            for slot, value in zip(pat, t):
                kind, x = slot
                if kind == "const":
                    if x != value:
                        ok = False
                        break
                else:
                    bound = binding[x] if new is None else new[x]
                    if bound == NULL_ID:
                        if new is None:
                            new = list(binding)
                        new[x] = value
                    elif bound != value:
                        ok = False
                        break
            if ok:
                extend(i + 1, new if new is not None else binding)

    extend(0, [NULL_ID] * n_vars)
    return results
