"""Logical planning and translation to executable operator trees.

The pipeline is parse -> encode -> order joins (greedy, exact counts) ->
push filters -> layer group/distinct/project/limit -> choose per-node
executor -> translate. Join ordering produces two candidate trees (merge
joins with Sorts where needed, and a sort-free hash-join variant) and
keeps the one the cost model ranks cheaper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import expr, parser
from .batch_ops import (AdaptiveSizer, BatchFilter, BatchLimit,
                        BatchMergeJoin, BatchProject, BatchScan, BatchSort,
                        AggSpec, SortedUnion, StreamDistinct, StreamGroupBy)
from .errors import NoSuitableIndex, ParseError
from .ntriples import format_term
from .opapi import BatchToRow, RowToBatch
from .parser import FilterBound, FilterComparison, Query
from .row_ops import (HashDistinct, HashGroupBy, RowCartesian, RowFilter,
                      RowHashJoin, RowLimit, RowMergeJoin, RowProject,
                      RowScan, RowSort, RowUnion, TupleDistinct)
from .terms import integer_value

DEFAULT_MEMORY_CAP = 64 << 20


@dataclass
class SessionConfig:
    """Per-session execution knobs (see the CLI for the user-facing names)."""

    engine: str = "auto"  # auto | batch | row
    batch_max: int = 512
    batch_min: int = 16
    adaptive: bool = True
    memory_cap: int = DEFAULT_MEMORY_CAP
    delta: float = 0.5  # merge-join discount when batch execution is on
    use_delta: bool = True
    adapter_stress: bool = False  # test hook: adapters at every boundary

    def __post_init__(self):
        if self.engine not in ("auto", "batch", "row"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.batch_max < self.batch_min:
            raise ValueError("batch_max must be >= batch_min")


# ---------------------------------------------------------------------------
# logical plan


@dataclass
class LNode:
    children: list = field(default_factory=list)
    est: float = 0.0
    out_vars: tuple = ()
    sort_var: Optional[int] = None
    dv: dict = field(default_factory=dict)  # var -> distinct-value estimate
    engine: str = "row"  # filled by choose_executors

    label = "Node"
    weight = 0.0
    batch_capable = False


@dataclass
class LScan(LNode):
    pattern: tuple = (None, None, None)
    var_positions: dict = field(default_factory=dict)

    label = "Scan"
    weight = 1.0
    batch_capable = True


@dataclass
class LJoin(LNode):
    kind: str = "merge"  # merge | hash
    key: int = -1

    weight = 1.0

    @property
    def label(self):
        return "MergeJoin" if self.kind == "merge" else "HashJoin"

    @property
    def batch_capable(self):
        return self.kind == "merge"


@dataclass
class LCartesian(LNode):
    label = "Cartesian"
    weight = 2.0
    batch_capable = False


@dataclass
class LSort(LNode):
    key: int = -1

    label = "Sort"
    weight = 1.0
    batch_capable = True


@dataclass
class LFilter(LNode):
    condition: object = None

    label = "Filter"
    weight = 0.3
    batch_capable = True


@dataclass
class LGroup(LNode):
    group_var: Optional[int] = None
    aggs: tuple = ()
    impl: str = "stream"  # stream | hash

    label = "Group"
    weight = 0.8

    @property
    def batch_capable(self):
        return self.impl == "stream"


@dataclass
class LDistinct(LNode):
    vars: tuple = ()
    impl: str = "stream"  # stream | hash | tuple

    label = "Distinct"
    weight = 0.5

    @property
    def batch_capable(self):
        return self.impl == "stream"


@dataclass
class LUnion(LNode):
    key: Optional[int] = None

    label = "Union"
    weight = 0.5
    batch_capable = True


@dataclass
class LProject(LNode):
    vars: tuple = ()

    label = "Project"
    weight = 0.0
    batch_capable = True


@dataclass
class LLimit(LNode):
    n: int = 0

    label = "Limit"
    weight = 0.0
    batch_capable = True


# ---------------------------------------------------------------------------
# pattern encoding


@dataclass
class EncodedPattern:
    slots: tuple  # term id / -1 (absent constant) / None (variable) per position
    var_positions: dict  # var id -> list of positions
    est: int = 0


def _encode_patterns(patterns, var_ids, dictionary):
    out = []
    for s, p, o in patterns:
        slots = []
        var_positions: dict[int, list] = {}
        for pos, slot in enumerate((s, p, o)):
            if isinstance(slot, str):
                slots.append(None)
                var_positions.setdefault(var_ids[slot], []).append(pos)
            else:
                tid = dictionary.lookup(slot)
                slots.append(tid if tid is not None else -1)
        out.append(EncodedPattern(tuple(slots), var_positions))
    return out


def _scan_node(store, pat: EncodedPattern, sort_var=None) -> LScan:
    node = LScan(pattern=pat.slots, var_positions=pat.var_positions,
                 out_vars=tuple(pat.var_positions), sort_var=sort_var)
    node.est = store.count(pat.slots)
    for var, positions in pat.var_positions.items():
        node.dv[var] = max(store.distinct_in_range(pat.slots, positions[0]), 1)
    return node


def _sortable(store, slots, var_positions, var: int) -> bool:
    """Can some index emit this pattern sorted by ``var`` directly?"""
    if var not in var_positions:
        return False
    pos = var_positions[var][0]
    bound = [i for i in range(3) if slots[i] is not None]
    try:
        store._pick_order(bound, pos)
        return True
    except NoSuitableIndex:
        return False


def _ensure_sorted(store, node: LNode, key: int) -> LNode:
    """Make ``node`` produce output sorted by ``key``, preferring an
    index order on scans and falling back to an explicit Sort."""
    if node.sort_var == key:
        return node
    if (isinstance(node, LScan) and node.sort_var is None
            and _sortable(store, node.pattern, node.var_positions, key)):
        node.sort_var = key
        return node
    return LSort(children=[node], key=key, out_vars=node.out_vars,
                 sort_var=key, est=node.est, dv=dict(node.dv))


# ---------------------------------------------------------------------------
# join ordering


def _join_est(left: LNode, right: LNode, key: int) -> tuple[float, dict]:
    ldv = left.dv.get(key)
    rdv = right.dv.get(key)
    if ldv and rdv:
        est = left.est * right.est / max(ldv, rdv)
        key_dv = min(ldv, rdv)
    else:
        est = max(left.est, right.est)
        key_dv = ldv or rdv or 1
    dv = dict(left.dv)
    for var, d in right.dv.items():
        dv[var] = min(dv.get(var, d), d)
    dv[key] = key_dv
    return est, dv


def order_joins(store, patterns, use_hash=False) -> LNode:
    """Left-deep greedy join tree: seed with the smallest exact count,
    then repeatedly attach the smallest connected pattern. With
    ``use_hash`` every join is a hash join and no Sort nodes appear;
    otherwise merge joins with Sorts inserted where an input is unsorted.
    """
    for pat in patterns:
        pat.est = store.count(pat.slots)
    remaining = sorted(range(len(patterns)), key=lambda i: patterns[i].est)
    seed = remaining.pop(0)
    tree: LNode = _scan_node(store, patterns[seed])
    joined = set(tree.out_vars)
    while remaining:
        pick = None
        for idx in remaining:
            if joined & set(patterns[idx].var_positions):
                pick = idx
                break
        if pick is None:  # disconnected component: cartesian product
            pick = remaining.pop(0)
            scan = _scan_node(store, patterns[pick])
            node = LCartesian(children=[tree, scan],
                              out_vars=tree.out_vars + tuple(
                                  v for v in scan.out_vars
                                  if v not in tree.out_vars))
            node.est = tree.est * scan.est
            node.dv = {**scan.dv, **tree.dv}
            tree = node
            joined |= set(scan.out_vars)
            continue
        remaining.remove(pick)
        pat = patterns[pick]
        shared = [v for v in pat.var_positions if v in joined]
        key = None
        for v in shared:
            if _sortable(store, pat.slots, pat.var_positions, v):
                key = v
                break
        if use_hash or key is None:
            key = shared[0] if key is None else key
            scan = _scan_node(store, pat)
            node = LJoin(kind="hash", key=key, children=[scan, tree])
            node.sort_var = scan.sort_var
        else:
            scan = _scan_node(store, pat, sort_var=key)
            right = _ensure_sorted(store, tree, key)
            node = LJoin(kind="merge", key=key, children=[scan, right])
            node.sort_var = key
        node.out_vars = scan.out_vars + tuple(
            v for v in tree.out_vars if v not in scan.out_vars)
        node.est, node.dv = _join_est(scan, tree, key)
        tree = node
        joined |= set(pat.var_positions)
    return tree


def cost(node: LNode, delta: float = 1.0) -> float:
    """Σ over nodes of (rows_in + rows_out) × node weight; merge joins
    get the ``delta`` discount (batch-eligibility discount)."""
    rows_in = sum(c.est for c in node.children)
    w = node.weight
    if isinstance(node, LJoin) and node.kind == "merge":
        w *= delta
    total = (rows_in + node.est) * w
    return total + sum(cost(c, delta) for c in node.children)


# ---------------------------------------------------------------------------
# filters


_ALWAYS_TRUE = object()
_ALWAYS_FALSE = object()


def _compile_filter(f, var_ids, bound_vars, dictionary):
    """Compile a parsed filter to an expr condition, or fold it."""
    if isinstance(f, FilterBound):
        if f.var not in var_ids or var_ids[f.var] not in bound_vars:
            return _ALWAYS_TRUE if f.negated else _ALWAYS_FALSE
        return expr.BoundTest(var_ids[f.var], f.negated)

    def operand(side):
        if isinstance(side, str):
            if side not in var_ids or var_ids[side] not in bound_vars:
                return None  # unbound variable: comparison is never true
            return expr.VarOperand(var_ids[side])
        tid = dictionary.lookup(side)
        return expr.ConstOperand(-1 if tid is None else tid,
                                 integer_value(side))

    left = operand(f.left)
    right = operand(f.right)
    if left is None or right is None:
        return _ALWAYS_FALSE
    if isinstance(left, expr.ConstOperand) and isinstance(right, expr.ConstOperand):
        lt, rt = f.left, f.right  # both Terms: fold at plan time
        if f.op == expr.EQ:
            return _ALWAYS_TRUE if lt == rt else _ALWAYS_FALSE
        if f.op == expr.NE:
            return _ALWAYS_TRUE if lt != rt else _ALWAYS_FALSE
        a, b = integer_value(lt), integer_value(rt)
        if a is None or b is None:
            return _ALWAYS_FALSE
        import operator as _op
        ok = {"<": _op.lt, "<=": _op.le, ">": _op.gt, ">=": _op.ge}[f.op](a, b)
        return _ALWAYS_TRUE if ok else _ALWAYS_FALSE
    if f.op in expr.ORDER_OPS:
        for side in (left, right):
            if isinstance(side, expr.ConstOperand) and side.value is None:
                return _ALWAYS_FALSE  # non-numeric constant in an order test
    return expr.Comparison(f.op, left, right)


def _push_filters(node: LNode, conditions: list) -> LNode:
    """Attach each condition at the lowest node binding all its variables."""
    node.children = [_push_filters(c, conditions) for c in node.children]
    out = set(node.out_vars)
    for cond in list(conditions):
        if set(cond.variables()) <= out:
            conditions.remove(cond)
            node = LFilter(children=[node], condition=cond,
                           out_vars=node.out_vars, sort_var=node.sort_var,
                           est=max(node.est * 0.5, 1.0), dv=dict(node.dv))
    return node


# ---------------------------------------------------------------------------
# executor choice


def choose_executors(node: LNode, engine: str) -> LNode:
    """Tag every node batch/row. ``auto`` follows three factors: a batch
    implementation exists, all children are batch, and — for merge joins
    only — expected output amplification can override row children."""
    for c in node.children:
        choose_executors(c, engine)
    if engine == "row" or not node.batch_capable:
        node.engine = "row"
        return node
    if engine == "batch":
        node.engine = "batch"
        return node
    kids_batch = all(c.engine == "batch" for c in node.children)
    if kids_batch:
        node.engine = "batch"
    elif (isinstance(node, LJoin) and node.kind == "merge"
          and node.est > max((c.est for c in node.children), default=0)):
        node.engine = "batch"  # amplifying join: worth adapting inputs
    else:
        node.engine = "row"
    return node


def count_adapter_boundaries(node: LNode) -> int:
    n = sum(count_adapter_boundaries(c) for c in node.children)
    return n + sum(1 for c in node.children if c.engine != node.engine)


# ---------------------------------------------------------------------------
# translation


class _Translator:
    def __init__(self, store, config: SessionConfig, width: int,
                 var_names, profile: bool):
        self.store = store
        self.config = config
        self.width = width
        self.var_names = var_names  # var id -> name
        self.profile = profile
        self._numeric_map = None
        self._numeric_table = store.dictionary.numeric_table()

    @property
    def numeric_map(self):
        if self._numeric_map is None:
            self._numeric_map = self.store.dictionary.numeric_map()
        return self._numeric_map

    def _wrap(self, op, children):
        if self.profile:
            from . import profiler
            return profiler.wrap(op, children)
        return op

    def _adapt(self, op, want_batch: bool):
        made = []
        if self.config.adapter_stress and not isinstance(
                op, (BatchToRow, RowToBatch)):
            # force a round trip through both representations
            if op.is_batch:
                op = self._mk(BatchToRow, op, self.width)
                made.append(op)
            else:
                op = self._mk(RowToBatch, op, self.config.batch_max)
                made.append(op)
        if want_batch and not op.is_batch:
            op = self._mk(RowToBatch, op, self.config.batch_max)
        elif not want_batch and op.is_batch:
            op = self._mk(BatchToRow, op, self.width)
        return op

    def _mk(self, cls, child, *args):
        op = cls(child, *args)
        return self._wrap(op, (child,))

    def _term_repr(self, const):
        if const.id == -1:
            return "<absent>"
        return format_term(self.store.dictionary.decode(const.id))

    def _pattern_text(self, node: LScan) -> str:
        parts = []
        for pos in range(3):
            tid = node.pattern[pos]
            if tid is None:
                var = next(v for v, ps in node.var_positions.items()
                           if pos in ps)
                parts.append("?" + self.var_names[var])
            elif tid == -1:
                parts.append("<absent>")
            else:
                parts.append(format_term(self.store.dictionary.decode(tid)))
        return " ".join(parts)

    def translate(self, node: LNode):
        want_batch = node.engine == "batch"
        kids = [self.translate(c) for c in node.children]
        cfg = self.config

        if isinstance(node, LScan):
            if want_batch:
                sizer = AdaptiveSizer(cfg.batch_min, cfg.batch_max,
                                      cfg.adaptive)
                op = BatchScan(self.store, node.pattern, node.var_positions,
                               node.sort_var, sizer)
            else:
                op = RowScan(self.store, node.pattern, node.var_positions,
                             self.width, node.sort_var)
            op.describe_args = (lambda n=node: self._pattern_text(n))
            return self._wrap(op, ())

        kids = [self._adapt(k, want_batch) for k in kids]

        if isinstance(node, LJoin) and node.kind == "merge":
            if want_batch:
                op = BatchMergeJoin(kids[0], kids[1], node.key,
                                    cap=cfg.batch_max,
                                    buffer_cap=cfg.memory_cap)
            else:
                op = RowMergeJoin(kids[0], kids[1], node.key)
        elif isinstance(node, LJoin):
            op = RowHashJoin(kids[0], kids[1], node.key)
        elif isinstance(node, LCartesian):
            op = RowCartesian(kids[0], kids[1])
        elif isinstance(node, LSort):
            if want_batch:
                op = BatchSort(kids[0], node.key, cap=cfg.batch_max,
                               mem_cap=cfg.memory_cap)
            else:
                op = RowSort(kids[0], node.key)
        elif isinstance(node, LFilter):
            if want_batch:
                op = BatchFilter(kids[0], node.condition, self.numeric_map)
            else:
                op = RowFilter(kids[0], node.condition, self._numeric_table)
        elif isinstance(node, LGroup):
            if node.impl == "stream" and want_batch:
                op = StreamGroupBy(kids[0], node.group_var, node.aggs,
                                   self.numeric_map, cap=cfg.batch_max)
            else:
                op = HashGroupBy(kids[0], node.group_var, node.aggs,
                                 self._numeric_table, self.width)
        elif isinstance(node, LDistinct):
            if node.impl == "stream" and want_batch:
                op = StreamDistinct(kids[0], node.vars[0], cap=cfg.batch_max)
            elif len(node.vars) == 1:
                op = HashDistinct(kids[0], node.vars[0], self.width)
            else:
                op = TupleDistinct(kids[0], node.vars, self.width)
        elif isinstance(node, LUnion):
            if want_batch:
                op = SortedUnion(kids, key=node.key)
            else:
                op = RowUnion(kids, key=node.key)
        elif isinstance(node, LProject):
            if want_batch:
                op = BatchProject(kids[0], node.vars)
            else:
                op = RowProject(kids[0], node.vars, self.width)
        elif isinstance(node, LLimit):
            if want_batch:
                op = BatchLimit(kids[0], node.n)
            else:
                op = RowLimit(kids[0], node.n)
        else:  # pragma: no cover
            raise AssertionError(f"untranslatable node {node!r}")

        self._describe(node, op)
        return self._wrap(op, tuple(kids))

    def _describe(self, node, op):
        names = self.var_names
        if isinstance(node, (LJoin, LSort)):
            op.describe_args = lambda: "?" + names[node.key]
        elif isinstance(node, LFilter):
            op.describe_args = lambda: node.condition.describe(
                names, self._term_repr)
        elif isinstance(node, LGroup):
            parts = []
            for a in node.aggs:
                inner = "*" if a.var is None else "?" + names[a.var]
                if a.distinct:
                    inner = "DISTINCT " + inner
                parts.append(f"{a.kind}({inner})")
            if node.group_var is not None:
                parts.insert(0, "?" + names[node.group_var])
            op.describe_args = lambda: ", ".join(parts)
        elif isinstance(node, (LDistinct, LProject)):
            vars = node.vars
            op.describe_args = lambda: ", ".join("?" + names[v] for v in vars)
        elif isinstance(node, LLimit):
            op.describe_args = lambda: str(node.n)


# ---------------------------------------------------------------------------
# end-to-end planning


@dataclass
class ExecutablePlan:
    root: object  # operator tree root
    logical: LNode
    out_names: list  # projection column names
    out_vars: list  # projection var ids
    value_vars: set  # var ids whose outputs are aggregate values, not terms
    int_vars: set  # aggregate vars producing integers (counts)
    width: int
    dictionary: object
    profiled: bool = False

    def reset(self):
        self.root.reset()

    def rows(self):
        """Result rows as tuples of Term / int / float / None."""
        decode = self.dictionary.decode
        out_vars = self.out_vars
        value_vars = self.value_vars
        int_vars = self.int_vars
        if self.root.is_batch:
            while True:
                b = self.root.next()
                if b is None:
                    return
                cols = []
                for v in out_vars:
                    col = b.active(v) if v in b.vars else None
                    cols.append((v, col))
                for i in range(len(b.sel)):
                    row = []
                    for v, col in cols:
                        if col is None:
                            row.append(None)
                        elif v in value_vars:
                            raw = col[i]
                            if v in int_vars:
                                row.append(int(raw))
                            else:
                                row.append(None if math.isnan(raw)
                                           else float(raw))
                        else:
                            tid = int(col[i])
                            row.append(decode(tid) if tid else None)
                    yield tuple(row)
        else:
            while True:
                r = self.root.next()
                if r is None:
                    return
                row = []
                for v in out_vars:
                    raw = r[v]
                    if v in value_vars:
                        row.append(raw)
                    else:
                        row.append(decode(raw) if raw else None)
                yield tuple(row)

    def collect(self):
        return list(self.rows())

    def profile_snapshot(self):
        if not self.profiled:
            raise ValueError("plan was not built with profiling enabled")
        from . import profiler
        return profiler.snapshot(self.root)


def _agg_specs(query: Query, var_ids, next_id):
    specs = []
    names = []
    used = {}
    for agg in query.aggregates:
        var = var_ids[agg.var] if agg.var is not None else None
        if agg.var is not None and agg.var not in var_ids:
            raise ParseError(f"aggregate over unknown variable ?{agg.var}",
                             0, 0)
        out = next_id
        next_id += 1
        if agg.alias:
            name = agg.alias
        else:
            base = agg.kind
            used[base] = used.get(base, 0) + 1
            name = base if used[base] == 1 else f"{base}{used[base]}"
        specs.append(AggSpec(agg.kind, var, agg.distinct, out))
        names.append(name)
    return specs, names, next_id


def plan_query(store, query, config: Optional[SessionConfig] = None,
               profile: bool = False) -> ExecutablePlan:
    """Build an executable plan for a Query (or query text)."""
    if config is None:
        config = SessionConfig()
    if isinstance(query, str):
        query = parser.parse_query(query)

    names = query.variables()
    for v in query.select_vars:
        if v not in names:
            names.append(v)
    if query.group_by and query.group_by not in names:
        raise ParseError(f"GROUP BY variable ?{query.group_by} not in the "
                         "graph pattern", 0, 0)
    var_ids = {n: i for i, n in enumerate(names)}
    aggs, agg_names, width = _agg_specs(query, var_ids, len(names))
    var_names = list(names) + agg_names
    dictionary = store.dictionary

    # one BGP tree per union branch (a lone BGP is a single branch)
    branch_patterns = ([query.patterns + b for b in query.unions]
                       if query.unions else [query.patterns])
    branches = []
    for pats in branch_patterns:
        encoded = _encode_patterns(pats, var_ids, dictionary)
        if not encoded:
            encoded = [EncodedPattern((-1, -1, -1), {})]
        merge_tree = order_joins(store, encoded, use_hash=False)
        hash_tree = order_joins(store, encoded, use_hash=True)
        delta = config.delta if (config.use_delta
                                 and config.engine != "row") else 1.0
        tree = (merge_tree if cost(merge_tree, delta) <= cost(hash_tree, delta)
                else hash_tree)
        bound = set(tree.out_vars)
        conditions = []
        false_branch = False
        for f in query.filters:
            cond = _compile_filter(f, var_ids, bound, dictionary)
            if cond is _ALWAYS_TRUE:
                continue
            if cond is _ALWAYS_FALSE:
                false_branch = True
                break
            conditions.append(cond)
        if false_branch:
            tree = LLimit(children=[tree], n=0, out_vars=tree.out_vars,
                          sort_var=tree.sort_var)
        else:
            tree = _push_filters(tree, conditions)
            if conditions:  # a filter referenced variables never all bound
                tree = LLimit(children=[tree], n=0, out_vars=tree.out_vars,
                              sort_var=tree.sort_var)
        branches.append(tree)

    if len(branches) == 1:
        tree = branches[0]
    else:
        out = []
        for b in branches:
            for v in b.out_vars:
                if v not in out:
                    out.append(v)
        tree = LUnion(children=branches, out_vars=tuple(out),
                      est=sum(b.est for b in branches))

    value_vars = set()
    int_vars = set()
    if aggs:
        gvar = var_ids[query.group_by] if query.group_by else None
        impl = "stream"
        if gvar is not None and tree.sort_var != gvar:
            if config.engine == "batch":
                tree = _ensure_sorted(store, tree, gvar)
                if tree.sort_var != gvar:
                    impl = "hash"
            else:
                # row or auto: hash grouping avoids the pipeline breaker
                impl = "hash"
        head = () if gvar is None else (gvar,)
        group = LGroup(children=[tree], group_var=gvar, aggs=tuple(aggs),
                       impl=impl,
                       out_vars=head + tuple(a.out_var for a in aggs),
                       sort_var=gvar if impl == "stream" else None,
                       est=tree.dv.get(gvar, 1) if gvar is not None else 1)
        tree = group
        for a in aggs:
            value_vars.add(a.out_var)
            if a.kind == "count":
                int_vars.add(a.out_var)
        out_vars = list(group.out_vars)
        out_names = ([var_names[gvar]] if gvar is not None else []) + agg_names
    else:
        if query.select_all:
            proj = [var_ids[n] for n in names]
        else:
            proj = [var_ids[n] for n in query.select_vars]
        if query.distinct:
            in_tree = [v for v in proj if v in tree.out_vars]
            if len(proj) == 1 and proj[0] in tree.out_vars:
                key = proj[0]
                if tree.sort_var == key and config.engine != "row":
                    impl = "stream"
                elif config.engine == "batch":
                    tree = _ensure_sorted(store, tree, key)
                    impl = "stream" if tree.sort_var == key else "hash"
                else:
                    impl = "hash"
                tree = LDistinct(children=[tree], vars=(key,), impl=impl,
                                 out_vars=(key,),
                                 sort_var=key if impl == "stream" else None,
                                 est=tree.dv.get(key, tree.est))
            else:
                tree = LDistinct(children=[tree], vars=tuple(in_tree),
                                 impl="tuple", out_vars=tuple(in_tree),
                                 est=tree.est)
        avail = tuple(v for v in proj if v in tree.out_vars)
        tree = LProject(children=[tree], vars=avail, out_vars=avail,
                        sort_var=tree.sort_var if tree.sort_var in avail
                        else None, est=tree.est)
        out_vars = proj
        out_names = list(names) if query.select_all else list(query.select_vars)

    if query.limit is not None:
        tree = LLimit(children=[tree], n=query.limit, out_vars=tree.out_vars,
                      sort_var=tree.sort_var, est=min(query.limit, tree.est))

    choose_executors(tree, config.engine)
    translator = _Translator(store, config, width, var_names, profile)
    root = translator.translate(tree)
    return ExecutablePlan(root=root, logical=tree, out_names=out_names,
                          out_vars=out_vars, value_vars=value_vars,
                          int_vars=int_vars, width=width,
                          dictionary=dictionary, profiled=profile)


