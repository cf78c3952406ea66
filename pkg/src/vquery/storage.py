"""In-memory sorted triple indexes with range scans and seek-based skipping.

Triples are stored (deduplicated) under four orderings -- SPO, PSO, POS,
OSP -- each as three parallel int64 arrays sorted lexicographically in
permutation order. Cursors narrow a range by a bound prefix and expose
block reads plus forward-only seeks on the next (sort) position, which is
what the merge-join skip machinery runs on.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import FrozenStore, NoSuitableIndex
from .terms import Dictionary, NULL_ID

S, P, O = 0, 1, 2

# Order name -> permutation of (subject, predicate, object) positions.
ORDERS = (
    ("SPO", (S, P, O)),
    ("PSO", (P, S, O)),
    ("POS", (P, O, S)),
    ("OSP", (O, S, P)),
)


class RangeCursor:
    """Forward-only cursor over one sorted index range.

    ``sort_pos`` is the triple position (s/p/o) whose values are
    non-decreasing across emitted rows; ``seek`` repositions to the first
    remaining row whose value at that position is >= the key.
    """

    def __init__(self, store, order_name, cols, lo, hi, depth, rows_out):
        self._store = store
        self.order = order_name
        self._cols = cols  # arrays in permutation order
        self._lo = lo
        self._hi = hi
        self._pos = lo
        self._depth = depth  # number of bound prefix columns
        self._rows_out = rows_out  # permutation: output position -> column index
        self.rows_read = 0

    @property
    def exhausted(self) -> bool:
        return self._pos >= self._hi

    def remaining(self) -> int:
        return self._hi - self._pos

    def seek(self, key: int) -> None:
        """Advance to the first row with sort value >= key. Never moves back."""
        if self._pos >= self._hi:
            return
        col = self._cols[self._depth]
        self._pos += int(np.searchsorted(col[self._pos:self._hi], key, side="left"))

    def next_block(self, n: int):
        """Up to ``n`` rows as (s, p, o) array views; empty arrays at end."""
        j = min(self._pos + n, self._hi)
        i = self._pos
        self._pos = j
        read = j - i
        self.rows_read += read
        self._store.rows_read += read
        out = [None, None, None]
        for pos in (S, P, O):
            out[pos] = self._cols[self._rows_out[pos]][i:j]
        return out[0], out[1], out[2]

    def next_row(self):
        """One row as a (s, p, o) tuple of ints, or None at exhaustion."""
        i = self._pos
        if i >= self._hi:
            return None
        self._pos = i + 1
        self.rows_read += 1
        self._store.rows_read += 1
        c = self._cols
        r = self._rows_out
        return int(c[r[S]][i]), int(c[r[P]][i]), int(c[r[O]][i])

    def clone(self) -> "RangeCursor":
        """Fresh cursor over the same range (for operator reset)."""
        return RangeCursor(self._store, self.order, self._cols, self._lo,
                           self._hi, self._depth, self._rows_out)


class TripleStore:
    """Set of encoded triples under four sorted permutation indexes."""

    def __init__(self, dictionary: Optional[Dictionary] = None):
        self.dictionary = dictionary if dictionary is not None else Dictionary()
        self._staging: set[tuple[int, int, int]] = set()
        self._indexes: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._frozen = False
        self.rows_read = 0  # storage rows handed out across all cursors

    def __len__(self):
        if self._frozen:
            return len(self._indexes["SPO"][0])
        return len(self._staging)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def insert(self, s: int, p: int, o: int) -> None:
        if self._frozen:
            raise FrozenStore("store is frozen")
        if NULL_ID in (s, p, o):
            raise ValueError("triple components must be non-NULL ids")
        self._staging.add((s, p, o))

    def freeze(self) -> None:
        """Build the sorted indexes and make the store read-only."""
        if self._frozen:
            return
        triples = np.array(sorted(self._staging), dtype=np.int64)
        if triples.size == 0:
            triples = triples.reshape(0, 3)
        for name, perm in ORDERS:
            cols = tuple(np.ascontiguousarray(triples[:, pos]) for pos in perm)
            if name != "SPO":
                # lexsort keys are given least-significant first
                idx = np.lexsort((cols[2], cols[1], cols[0]))
                cols = tuple(c[idx] for c in cols)
            self._indexes[name] = cols
        self._staging = set()
        self._frozen = True
        self.dictionary.freeze()

    def reset_io_stats(self) -> None:
        self.rows_read = 0

    # -- range machinery ---------------------------------------------------

    def _pick_order(self, bound_positions, sort_pos):
        bound = frozenset(bound_positions)
        for name, perm in ORDERS:
            if frozenset(perm[: len(bound)]) != bound:
                continue
            if sort_pos is None or (len(bound) < 3 and perm[len(bound)] == sort_pos):
                return name, perm
        raise NoSuitableIndex(
            f"no index with prefix {sorted(bound)} sorted by position {sort_pos}"
        )

    def _narrow(self, cols, perm, pattern):
        lo, hi = 0, len(cols[0])
        depth = 0
        for i, pos in enumerate(perm):
            v = pattern[pos]
            if v is None:
                break
            lo += int(np.searchsorted(cols[i][lo:hi], v, side="left"))
            hi = lo + int(np.searchsorted(cols[i][lo:hi], v, side="right"))
            depth = i + 1
        return lo, hi, depth

    def open_scan(self, pattern: Sequence[Optional[int]],
                  sort_pos: Optional[int] = None) -> RangeCursor:
        """Cursor over triples matching ``pattern`` (ids or None per position).

        If ``sort_pos`` is given, emitted rows are non-decreasing at that
        position; raises NoSuitableIndex when no stored ordering can
        provide that.
        """
        if not self._frozen:
            raise FrozenStore("store must be frozen before scanning")
        bound = [pos for pos in (S, P, O) if pattern[pos] is not None]
        if sort_pos is not None and pattern[sort_pos] is not None:
            sort_pos = None  # a bound position is trivially sorted
        name, perm = self._pick_order(bound, sort_pos)
        cols = self._indexes[name]
        lo, hi, depth = self._narrow(cols, perm, pattern)
        rows_out = [perm.index(pos) for pos in (S, P, O)]
        return RangeCursor(self, name, cols, lo, hi, depth, rows_out)

    def count(self, pattern: Sequence[Optional[int]]) -> int:
        """Exact number of matching triples, by binary search (no scan)."""
        if not self._frozen:
            raise FrozenStore("store must be frozen before counting")
        bound = [pos for pos in (S, P, O) if pattern[pos] is not None]
        name, perm = self._pick_order(bound, None)
        cols = self._indexes[name]
        lo, hi, _ = self._narrow(cols, perm, pattern)
        return hi - lo

    def distinct_in_range(self, pattern: Sequence[Optional[int]], pos: int) -> int:
        """Number of distinct values at ``pos`` among matching triples.

        Planner-only statistic; O(range) but free of Python-level loops.
        """
        try:
            cur = self.open_scan(pattern, sort_pos=pos)
        except NoSuitableIndex:
            cur = self.open_scan(pattern, sort_pos=None)
        lo, hi = cur._pos, cur._hi
        if hi <= lo:
            return 0
        col = cur._cols[cur._depth] if cur.order else None
        # read the target position directly from the chosen index
        col = cur._cols[cur._rows_out[pos]][lo:hi]
        return int(np.unique(col).size)

    def decode_all(self):
        """All triples as decoded Term tuples (test/dump helper)."""
        cur = self.open_scan((None, None, None), sort_pos=None)
        s, p, o = cur.next_block(len(self))
        d = self.dictionary
        return [(d.decode(int(a)), d.decode(int(b)), d.decode(int(c)))
                for a, b, c in zip(s, p, o)]
